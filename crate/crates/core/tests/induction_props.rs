mod common;

use common::*;
use iemlab::birkhoff::{birkhoff_sums, orbit_decomposition, special_sum};
use iemlab::{
    Acceleration, Ball, Error, InductionConfig, InductionTrace, PiecewiseFunction, Scalar,
};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

const ACCS: [Acceleration; 3] = [Acceleration::Rv, Acceleration::Zorich, Acceleration::Accelerated];

fn trace(seed: u64, d: usize, acc: Acceleration, blocks: usize) -> InductionTrace<BigRational> {
    let mut r = rng(seed);
    loop {
        match InductionTrace::run(random_rational_iem(&mut r, d), InductionConfig::new(acc), blocks) {
            Ok(tr) => return tr,
            Err(Error::KeaneViolation(_)) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

/// Local coordinates `k/7` of every interval at the function's level.
fn samples(f: &PiecewiseFunction<BigRational>) -> Vec<(usize, BigRational)> {
    f.lengths
        .iter()
        .enumerate()
        .flat_map(|(a, len)| (0..7).map(move |k| (a, len * q(k, 7))))
        .collect()
}

fn agree(f: &PiecewiseFunction<BigRational>, g: &PiecewiseFunction<BigRational>) -> bool {
    samples(f)
        .iter()
        .all(|(a, t)| f.eval_local(*a, t).unwrap() == g.eval_local(*a, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn lengths_and_matrices_form_a_cocycle(seed in any::<u64>(), d in 2usize..=4, acc in 0usize..3) {
        let tr = trace(seed, d, ACCS[acc], 12);
        for n in 1..=12 {
            let z = tr.z(n);
            prop_assert!(z.is_nonnegative());
            prop_assert!(z.det().abs().is_one());
            prop_assert!(tr.level(n).lengths().iter().all(|l| l.is_positive()));
        }
        for m in 0..=12 {
            for n in m..=12 {
                prop_assert!(tr.length_residual(m, n).unwrap().iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn inverse_undoes_the_map(seed in any::<u64>(), d in 2usize..=4, num in 0i64..1000) {
        let t = random_rational_iem(&mut rng(seed), d);
        let x = t.total() * q(num, 1000);
        let y = t.evaluate(&x).unwrap();
        prop_assert!(y >= q(0, 1) && y < t.total());
        prop_assert_eq!(t.evaluate_inverse(&y).unwrap(), x);
    }

    #[test]
    fn special_sums_are_linear_and_preserve_integrals(
        seed in any::<u64>(),
        d in 2usize..=4,
        a in -5i64..=5,
        b in 1i64..=4,
    ) {
        let tr = trace(seed, d, Acceleration::Accelerated, 6);
        let mut r = rng(seed ^ 0x5eed);
        let lengths = tr.level(1).lengths().to_vec();
        let f = random_function(&mut r, 1, &lengths);
        let g = random_function(&mut r, 1, &lengths);
        let (ka, kb) = (q(a, 1), q(1, b));
        let combo = f.scale(&ka).add(&g.scale(&kb)).unwrap();
        let lhs = special_sum(&tr, 1, 5, &combo).unwrap();
        let rhs = special_sum(&tr, 1, 5, &f)
            .unwrap()
            .scale(&ka)
            .add(&special_sum(&tr, 1, 5, &g).unwrap().scale(&kb))
            .unwrap();
        prop_assert!(agree(&lhs, &rhs));
        prop_assert_eq!(lhs.integral().unwrap(), combo.integral().unwrap());
    }

    #[test]
    fn special_sums_compose(seed in any::<u64>(), d in 2usize..=4, acc in 0usize..3) {
        let tr = trace(seed, d, ACCS[acc], 8);
        let f = random_function(&mut rng(seed), 0, tr.level(0).lengths());
        let direct = special_sum(&tr, 0, 8, &f).unwrap();
        let staged = special_sum(&tr, 3, 8, &special_sum(&tr, 0, 3, &f).unwrap()).unwrap();
        prop_assert!(agree(&direct, &staged));
    }

    #[test]
    fn ball_sums_enclose_exact_sums(seed in any::<u64>(), d in 2usize..=4) {
        let tr = trace(seed, d, Acceleration::Accelerated, 10);
        let tb = tr.to_ball(128);
        let f = random_function(&mut rng(seed), 0, tr.level(0).lengths());
        let exact = special_sum(&tr, 0, 10, &f).unwrap();
        let approx = special_sum(&tb, 0, 10, &f.map_scalars(|x| Ball::from_rational(x, 128))).unwrap();
        for (a, t) in samples(&exact) {
            let e = exact.eval_local(a, &t).unwrap();
            let v = approx.eval_local(a, &Ball::from_rational(&t, 128)).unwrap();
            let gap = iemlab::arith::rational_to_f64(&(v.midpoint() - &e).abs());
            prop_assert!(gap <= v.radius().to_f64() * (1.0 + 1e-9), "gap {gap:e} radius {:e}", v.radius().to_f64());
        }
    }

    #[test]
    fn orbit_decomposition_reconstructs_sums(seed in any::<u64>(), d in 2usize..=4, n in 1usize..300) {
        let mut tr = trace(seed, d, Acceleration::Accelerated, 20);
        let f = random_function(&mut rng(seed), 0, tr.level(0).lengths());
        let sums = birkhoff_sums(tr.level(0), &f, &q(0, 1), n).unwrap();
        let dec = loop {
            match orbit_decomposition(&tr, n) {
                Err(Error::HorizonExceeded(_)) => tr.extend_to(tr.len() + 10).unwrap(),
                other => break other.unwrap(),
            }
        };
        prop_assert_eq!(dec.terms.iter().map(|t| t.length.clone()).sum::<num_bigint::BigInt>(), n.into());
        prop_assert_eq!(dec.reconstruct(&tr, &f).unwrap(), sums[n].clone());
        prop_assert!(dec.count_violations(&tr).is_empty());
        let levels: Vec<usize> = dec.terms.iter().map(|t| t.level).collect();
        prop_assert!(levels.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn accelerated_blocks_refine_to_elementary_steps() {
    let t = random_rational_iem(&mut rng(7), 4);
    let acc = InductionTrace::run(t.clone(), InductionConfig::new(Acceleration::Accelerated), 10).unwrap();
    let steps = acc.block(10).end;
    let rv = InductionTrace::run(t, InductionConfig::new(Acceleration::Rv), steps).unwrap();
    assert_eq!(acc.q0(10), rv.q0(steps));
    assert_eq!(acc.level(10).lengths(), rv.level(steps).lengths());
}

#[test]
fn ball_trace_matches_rational_trace() {
    let t = random_rational_iem(&mut rng(11), 3);
    let exact = InductionTrace::run(t.clone(), InductionConfig::default(), 15).unwrap();
    let tb = t.map_lengths(256, |x| x.to_ball(256));
    let approx = InductionTrace::run(tb, InductionConfig::default(), 15).unwrap();
    for n in 0..=15 {
        assert_eq!(exact.q0(n), approx.q0(n));
    }
}
