//! Reference instances used by tests, benchmarks and the CLI.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::FieldElem;
use crate::error::Result;
use crate::iem::Iem;
use crate::perm::PermutationPair;
use crate::selfsim::{self_similar_from_loop, RauzyLoop};

/// Precision used when benchmark lengths are rendered.
pub const DEFAULT_BITS: u32 = 256;

/// Two letters, loop of types `0, 1`: the golden-mean rotation with
/// `λ_B / λ_A = φ` and every cocycle matrix a product of Fibonacci blocks.
pub fn golden_loop() -> RauzyLoop {
    RauzyLoop::new(PermutationPair::symmetric(2), vec![0, 1]).expect("valid loop")
}

/// Three letters `A B C / C B A`; loop matrix eigenvalues `2 ± √3` and `1`.
pub fn d3_loop() -> RauzyLoop {
    RauzyLoop::new(PermutationPair::symmetric(3), vec![0, 0, 1, 0, 1]).expect("valid loop")
}

/// Four letters `A B C D / D C B A`; loop matrix with four distinct real
/// eigenvalues of distinct moduli, so the mean-zero constants split into a
/// stable plane and a one-dimensional slowly expanding quotient.
pub fn d4_loop() -> RauzyLoop {
    RauzyLoop::new(PermutationPair::symmetric(4), vec![0, 0, 1, 0, 1, 1, 0, 1])
        .expect("valid loop")
}

pub fn golden() -> Result<Iem<FieldElem>> {
    self_similar_from_loop(&golden_loop(), DEFAULT_BITS)
}

pub fn d3() -> Result<Iem<FieldElem>> {
    self_similar_from_loop(&d3_loop(), DEFAULT_BITS)
}

pub fn d4() -> Result<Iem<FieldElem>> {
    self_similar_from_loop(&d4_loop(), DEFAULT_BITS)
}

/// All benchmark loops with their labels.
pub fn all_loops() -> Vec<(&'static str, RauzyLoop)> {
    vec![("golden", golden_loop()), ("d3", d3_loop()), ("d4", d4_loop())]
}

/// The swap pair with lengths `(3/5, 2/5)`.
pub fn swap_example() -> Iem<BigRational> {
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    Iem::new(PermutationPair::symmetric(2), vec![q(3, 5), q(2, 5)], ()).expect("valid map")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::is_primitive;
    use crate::selfsim::follows_loop;

    #[test]
    fn benchmark_loops_are_primitive_and_periodic() {
        for (label, lp) in all_loops() {
            assert!(is_primitive(&lp.matrix()), "{label}");
            let t = self_similar_from_loop(&lp, 128).unwrap();
            assert!(follows_loop(&t, &lp, 3).unwrap(), "{label}");
        }
    }
}
