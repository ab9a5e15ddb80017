mod common;

use common::*;
use iemlab::cohomology::{
    build_primitive, coboundary, coboundary_roundtrip, compose_with_map, corrected_primitive_at,
    functoriality_residuals, lambda_raw, p0_primitive, psi_on_orbit,
};
use iemlab::roth::FrameCache;
use iemlab::{
    arith, benchmarks, Ball, Error, Iem, InductionConfig, InductionTrace, MatrixCocycle,
    PiecewiseFunction, Scalar,
};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn rational_trace(seed: u64, d: usize, blocks: usize) -> InductionTrace<BigRational> {
    let mut r = rng(seed);
    loop {
        match InductionTrace::run(random_rational_iem(&mut r, d), InductionConfig::default(), blocks) {
            Ok(tr) => return tr,
            Err(Error::KeaneViolation(_)) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

fn d4_trace(blocks: usize) -> InductionTrace<Ball> {
    InductionTrace::run(benchmarks::d4().unwrap(), InductionConfig::default(), blocks)
        .unwrap()
        .to_ball(256)
}

fn sup(v: &[Ball]) -> f64 {
    v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn correction_terms_are_linear_mean_zero_constants(
        seed in any::<u64>(),
        d in 2usize..=4,
        n in 1usize..=5,
        k in -4i64..=4,
    ) {
        let tr = rational_trace(seed, d, 5);
        let mut r = rng(seed ^ 1);
        let lengths = tr.level(n - 1).lengths().to_vec();
        let f = random_function(&mut r, n - 1, &lengths);
        let g = random_function(&mut r, n - 1, &lengths);
        let lf = lambda_raw(&tr, n, &f).unwrap();
        let lg = lambda_raw(&tr, n, &g).unwrap();
        let total = arith::dot(&(), &lf, tr.level(n).lengths());
        prop_assert!(total.is_zero());
        let combo = f.add(&g.scale(&q(k, 1))).unwrap();
        let lc = lambda_raw(&tr, n, &combo).unwrap();
        for i in 0..d {
            prop_assert_eq!(&lc[i], &(&lf[i] + &lg[i] * q(k, 1)));
        }
    }

    #[test]
    fn primitive_differentiates_back(seed in any::<u64>(), d in 2usize..=4) {
        let t = random_rational_iem(&mut rng(seed), d);
        let f = random_function(&mut rng(seed ^ 2), 0, t.lengths());
        let p = p0_primitive(&f).unwrap();
        prop_assert!(p.means().unwrap().iter().all(Zero::is_zero));
        for (piece, orig) in p.pieces.iter().zip(&f.pieces) {
            for (s, o) in piece.segments.iter().zip(&orig.segments) {
                let dp = s.poly.derivative();
                for (i, c) in o.poly.coeffs.iter().enumerate() {
                    prop_assert_eq!(&dp.coeffs[i], c);
                }
            }
        }
    }

    #[test]
    fn coboundaries_integrate_to_zero_and_round_trip_exactly(seed in any::<u64>(), d in 2usize..=4) {
        let t = random_rational_iem(&mut rng(seed), d);
        let psi0 = random_function(&mut rng(seed ^ 3), 0, t.lengths());
        let composed = compose_with_map(&psi0, &t).unwrap();
        for k in 0..40 {
            let x = t.total() * q(k, 40);
            prop_assert_eq!(
                composed.eval_at(&t, &x).unwrap(),
                psi0.eval_at(&t, &t.evaluate(&x).unwrap()).unwrap()
            );
        }
        let phi = coboundary(&psi0, &t).unwrap();
        prop_assert!(phi.integral().unwrap().is_zero());
        let rep = coboundary_roundtrip(&t, &phi, &psi0, 300).unwrap();
        prop_assert_eq!(rep.max_deviation, 0.0);
        prop_assert_eq!(rep.identity_residual, 0.0);
    }
}

#[test]
fn transfer_function_table_satisfies_the_equation() {
    let t = benchmarks::golden().unwrap().map_lengths(256, |x| x.to_ball(256));
    let phi = sawtooth(&[1, -2], t.lengths());
    let table = psi_on_orbit(&t, &phi, &Ball::zero(256), 2000).unwrap();
    assert!(table.identity_residual < 1e-60);
    let mean: f64 = table.entries.iter().map(|e| e.psi.to_f64()).sum::<f64>() / 2000.0;
    assert!(mean.abs() < 1e-12);
}

#[test]
fn keane_failures_block_the_orbit_table() {
    let t = Iem::new(iemlab::PermutationPair::symmetric(3), vec![q(1, 4), q(1, 2), q(1, 4)], ())
        .unwrap();
    let phi = PiecewiseFunction::from_constants(0, &[q(1, 1), q(0, 1), q(-1, 1)], t.lengths());
    let err = psi_on_orbit(&t, &phi, &q(0, 1), 100).unwrap_err();
    assert_eq!(err.class(), "KeaneViolation");
}

#[test]
fn golden_primitive_is_linear_in_the_datum() {
    let tr = InductionTrace::run(benchmarks::golden().unwrap(), InductionConfig::default(), 60)
        .unwrap()
        .to_ball(256);
    let c = MatrixCocycle::from_trace(&tr);
    let mut cache = FrameCache::new(&c, 16, 0.1, 1);
    let f = sawtooth(&[1, -2], tr.level(0).lengths());
    let g = sawtooth(&[3, 1], tr.level(0).lengths());
    let three = Ball::from_rational(&q(3, 1), 256);
    let pf = build_primitive(&tr, &mut cache, &f, 40).unwrap();
    let pg = build_primitive(&tr, &mut cache, &g, 40).unwrap();
    let combo = f.add(&g.scale(&three)).unwrap();
    let pc = build_primitive(&tr, &mut cache, &combo, 40).unwrap();
    let expect = pf.phi.add(&pg.phi.scale(&three)).unwrap();
    for a in 0..2 {
        for k in 0..9 {
            let t = tr.level(0).lengths()[a].mul(&Ball::from_rational(&q(k, 9), 256));
            let gap = pc.phi.eval_local(a, &t).unwrap().sub(&expect.eval_local(a, &t).unwrap());
            assert!(gap.to_f64().abs() < 1e-40);
        }
    }
    assert_eq!(pc.delta.quotient_dim, 0);
}

/// On d4 the quotient is one-dimensional: refining the truncation must
/// shrink the tail estimate, move the correction by no more than the
/// estimate predicts, and keep the functoriality defect small.
#[test]
fn d4_correction_converges_under_refinement() {
    let tr = d4_trace(114);
    let c = MatrixCocycle::from_trace(&tr);
    let mut cache = FrameCache::new(&c, 64, 0.1, 1);
    let spec = iemlab::io::parse_function(
        r#"{"kind": "bv_star", "center": true, "pieces": {
            "A": {"kind": "poly", "coeffs": ["-1", "1", "3/2"]},
            "B": {"kind": "poly", "coeffs": ["1/2", "2", "-7/10"]},
            "C": {"kind": "sawtooth", "slope": "3"},
            "D": {"kind": "steps", "breaks": ["0", "1/100"], "values": ["1", "-1/2"]}}}"#,
    )
    .unwrap();
    let phi = spec.build(tr.level(0)).unwrap();
    let runs: Vec<_> = [20, 30, 40, 50]
        .iter()
        .map(|&n| corrected_primitive_at(&tr, &mut cache, 0, &phi, n).unwrap())
        .collect();
    let finest = &runs[3].delta.representative;
    for w in runs.windows(2) {
        assert!(w[1].tail_bound() < w[0].tail_bound());
    }
    for r in &runs[..3] {
        let moved: Vec<Ball> = r.delta.representative.iter().zip(finest).map(|(a, b)| a.sub(b)).collect();
        assert!(sup(&moved) <= 2.0 * r.tail_bound(), "N = {}", r.truncation());
    }
    let res = functoriality_residuals(&tr, &mut cache, &phi, &[(0, 1), (0, 2), (1, 3)], 50).unwrap();
    for r in &res {
        assert!(r.residual < 1e-12 && r.raw > 1e-4, "({}, {}): {:e} of {:e}", r.m, r.n, r.residual, r.raw);
    }
}
