//! Random instances and data shared by the integration tests.
#![allow(dead_code)]

use iemlab::function::{Piece, Poly, Segment};
use iemlab::{FunctionKind, Iem, PermutationPair, PiecewiseFunction, Scalar};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Uniform integer with `bits` random bits (top bit set).
pub fn big_random(r: &mut impl Rng, bits: usize) -> BigInt {
    let words = bits.div_ceil(32);
    let mut digits: Vec<u32> = (0..words).map(|_| r.random()).collect();
    *digits.last_mut().unwrap() |= 1 << 31;
    BigInt::from(BigUint::new(digits))
}

/// Top row in alphabetical order, bottom row a random admissible shuffle.
pub fn random_pair(r: &mut impl Rng, d: usize) -> PermutationPair {
    let names = iemlab::perm::default_names(d);
    let pi0: Vec<usize> = (1..=d).collect();
    loop {
        let mut pi1 = pi0.clone();
        pi1.shuffle(r);
        if let Ok(p) = PermutationPair::new(names.clone(), &pi0, &pi1) {
            return p;
        }
    }
}

/// Lengths with 512-bit numerators over a common 520-bit denominator, so
/// that connections are pushed far beyond the depths the tests use.
pub fn random_rational_iem(r: &mut impl Rng, d: usize) -> Iem<BigRational> {
    let pair = random_pair(r, d);
    let den = big_random(r, 520);
    let lengths = (0..d)
        .map(|_| BigRational::new(big_random(r, 512), den.clone()))
        .collect();
    Iem::new(pair, lengths, ()).expect("positive lengths")
}

fn small_rational(r: &mut impl Rng) -> BigRational {
    q(r.random_range(-9..=9), r.random_range(1..=5))
}

/// Random piecewise polynomial of degree at most 2 with up to two interior
/// breakpoints per interval, placed at rational fractions of its length.
pub fn random_function<S: Scalar>(
    r: &mut impl Rng,
    level: usize,
    lengths: &[S],
) -> PiecewiseFunction<S> {
    let ctx = lengths[0].context();
    let pieces = lengths
        .iter()
        .map(|len| {
            let cuts = r.random_range(0..=2);
            let mut fracs: Vec<i64> = (0..cuts).map(|_| r.random_range(1..12)).collect();
            fracs.sort_unstable();
            fracs.dedup();
            let mut starts = vec![S::zero_in(&ctx)];
            starts.extend(fracs.iter().map(|&f| len.mul(&S::from_rational(&ctx, &q(f, 12)))));
            let segments = starts
                .into_iter()
                .map(|start| Segment {
                    start,
                    poly: Poly::new(
                        (0..=r.random_range(0..=2))
                            .map(|_| S::from_rational(&ctx, &small_rational(r)))
                            .collect(),
                    ),
                })
                .collect();
            Piece { segments }
        })
        .collect();
    PiecewiseFunction::new(level, FunctionKind::Bv, pieces, lengths.to_vec())
}

/// `f` minus its mean over the whole domain.
pub fn centered<S: Scalar>(f: &PiecewiseFunction<S>) -> PiecewiseFunction<S> {
    let ctx = f.ctx();
    let total = iemlab::arith::sum(&ctx, &f.lengths);
    let mean = f.integral().unwrap().div(&total).unwrap();
    let c = PiecewiseFunction::from_constants(f.level, &vec![mean; f.d()], &f.lengths);
    let mut out = f.sub(&c).unwrap();
    out.kind = FunctionKind::BvStar;
    out
}

/// `k (t - ℓ/2)` on an interval of length `ℓ`, with slope `k` per letter.
pub fn sawtooth<S: Scalar>(slopes: &[i64], lengths: &[S]) -> PiecewiseFunction<S> {
    let ctx = lengths[0].context();
    let half = S::from_rational(&ctx, &q(1, 2));
    let pieces = slopes
        .iter()
        .zip(lengths)
        .map(|(&k, len)| {
            let k = S::from_i64(&ctx, k);
            Piece::poly(Poly::new(vec![k.mul(&len.mul(&half)).neg(), k]))
        })
        .collect();
    PiecewiseFunction::new(0, FunctionKind::BvStar, pieces, lengths.to_vec())
}
