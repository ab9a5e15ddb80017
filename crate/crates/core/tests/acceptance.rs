//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines come out in order and with timings.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use iemlab::birkhoff::{
    birkhoff_sums, decay_profile, gamma_matrix, orbit_decomposition, special_sum,
    special_sum_towers,
};
use iemlab::cohomology::{
    blocks_needed, boundedness_certificate, build_primitive, check_majorant, coboundary,
    coboundary_roundtrip, p0_primitive, SolveConfig,
};
use iemlab::function::{Piece, Poly, Segment};
use iemlab::roth::{condition_a_profile, condition_b_theta, FrameCache};
use iemlab::{
    benchmarks, Acceleration, Ball, Error, FieldElem, FunctionKind, Iem, InductionConfig,
    InductionTrace, MatrixCocycle, NameConvention, PiecewiseFunction, Scalar,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use common::*;

const BITS: u32 = 256;

#[derive(Debug)]
struct Fail(String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(format!("{} ({})", e, e.class()))
    }
}

type Outcome = Result<String, Fail>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(Fail(format!($($msg)+)));
        }
    };
}

/// Random rational map whose accelerated induction runs `blocks` blocks
/// without meeting a connection; instances that do are redrawn.
fn rational_trace(
    r: &mut impl Rng,
    d: usize,
    acc: Acceleration,
    blocks: usize,
) -> (InductionTrace<BigRational>, usize) {
    let mut redrawn = 0;
    loop {
        let t = random_rational_iem(r, d);
        match InductionTrace::run(t, InductionConfig::new(acc), blocks) {
            Ok(tr) => return (tr, redrawn),
            Err(Error::KeaneViolation(_)) => redrawn += 1,
            Err(e) => panic!("unexpected induction failure: {e}"),
        }
    }
}

fn ball_trace(t: Iem<FieldElem>, blocks: usize) -> Result<InductionTrace<Ball>, Fail> {
    Ok(InductionTrace::run(t, InductionConfig::default(), blocks)?.to_ball(BITS))
}

fn c1_cocycle_identities() -> Outcome {
    let mut r = rng(101);
    let mut redrawn = 0;
    let mut triples = 0usize;
    for i in 0..50 {
        let d = 2 + i % 3;
        let (tr, k) = rational_trace(&mut r, d, Acceleration::Accelerated, 30);
        redrawn += k;
        for m in 0..=30 {
            for n in m..=30 {
                let res = tr.length_residual(m, n)?;
                ensure!(res.iter().all(Zero::is_zero), "instance {i}: λ({m}) != Q({m},{n}) λ({n})");
                let det = tr.cocycle(m, n)?.det();
                ensure!(det.abs().is_one(), "instance {i}: det Q({m},{n}) = {det}");
            }
        }
        for m in 0..=30 {
            for n in m..=30 {
                let qmn = tr.cocycle(m, n)?;
                for k in n..=30 {
                    ensure!(
                        tr.cocycle(m, k)? == qmn.mul(&tr.cocycle(n, k)?),
                        "instance {i}: Q({m},{k}) != Q({m},{n}) Q({n},{k})"
                    );
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("50 instances, {triples} triples checked, {redrawn} redrawn"))
}

/// Visits of the first-return orbit of `x ∈ I(n)` to each `I_α(m)`,
/// counted by iterating `T(m)` directly.
fn visits(
    tr: &InductionTrace<BigRational>,
    m: usize,
    n: usize,
    x: &BigRational,
) -> Result<(Vec<BigInt>, BigRational), Fail> {
    let tm = tr.level(m);
    let top = tr.level(n).total();
    let mut counts = vec![BigInt::zero(); tr.d()];
    let mut y = x.clone();
    loop {
        counts[tm.locate(&y)?] += 1;
        y = tm.evaluate(&y)?;
        if y < top {
            return Ok((counts, y));
        }
    }
}

fn c2_matrix_orbit_oracle() -> Outcome {
    let mut r = rng(202);
    let mut pairs = 0;
    for i in 0..24 {
        let d = 2 + i % 3;
        let acc = if i % 2 == 0 { Acceleration::Rv } else { Acceleration::Accelerated };
        let (tr, _) = rational_trace(&mut r, d, acc, 14);
        for m in 0..=6 {
            for n in m + 1..=(m + 8).min(14) {
                let g = gamma_matrix(&tr, m, n)?;
                let qmn = tr.cocycle(m, n)?;
                let lm = tr.level(m).lengths().to_vec();
                for a in 0..d {
                    let ind = PiecewiseFunction::indicator(m, a, &lm);
                    let mut sums = vec![special_sum(&tr, m, n, &ind)?];
                    if acc == Acceleration::Rv {
                        sums.push(special_sum_towers(&tr, m, n, &ind)?);
                    }
                    for s in &sums {
                        for b in 0..d {
                            let want = BigRational::from(g.get(b, a).clone());
                            ensure!(
                                s.eval_local(b, &q(0, 1))? == want,
                                "instance {i}: S({m},{n}) 1_{a} on letter {b} differs from tQ"
                            );
                        }
                    }
                }
                if acc != Acceleration::Rv {
                    pairs += 1;
                    continue;
                }
                let tn = tr.level(n);
                for b in 0..d {
                    let x = tn.left(b) + tn.length(b) / BigInt::from(3);
                    let (counts, back) = visits(&tr, m, n, &x)?;
                    for a in 0..d {
                        ensure!(
                            &counts[a] == qmn.get(a, b),
                            "instance {i}: orbit of I_{b}({n}) visits I_{a}({m}) {} times, Q = {}",
                            counts[a],
                            qmn.get(a, b)
                        );
                    }
                    ensure!(back == tn.evaluate(&x)?, "instance {i}: first return differs from T({n})");
                }
                pairs += 1;
            }
        }
    }
    Ok(format!(
        "24 instances, {pairs} (m, n) pairs: special sums match tQ; tower sums and orbit counts match on elementary-step traces"
    ))
}

fn c3_integral_conservation() -> Outcome {
    let mut r = rng(303);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for i in 0..20 {
        let d = 2 + i % 3;
        let (tr, _) = rational_trace(&mut r, d, Acceleration::Accelerated, 24);
        let tb = tr.to_ball(BITS);
        for _ in 0..4 {
            let m = r.random_range(0..12);
            let n = m + r.random_range(1..=12);
            let phi = random_function(&mut r, m, tr.level(m).lengths());
            let exact = phi.integral()?;
            let s = special_sum(&tr, m, n, &phi)?;
            ensure!(s.integral()? == exact, "instance {i}: ∫S({m},{n})φ != ∫φ");
            let pb = phi.map_scalars(|x| x.to_ball(BITS));
            let sb = special_sum(&tb, m, n, &pb)?;
            let err = (sb.integral()?.midpoint() - &exact).abs();
            let rel = if exact.is_zero() {
                iemlab::arith::rational_to_f64(&err)
            } else {
                iemlab::arith::rational_to_f64(&(err / exact.abs()))
            };
            worst = worst.max(rel);
            ensure!(rel <= 1e-12, "instance {i}: relative error {rel:e} in real mode");
            checks += 1;
        }
    }
    Ok(format!("{checks} sums exact; worst relative error at {BITS} bits {worst:.1e}"))
}

fn c4_orbit_decomposition() -> Outcome {
    let mut r = rng(404);
    let mut worst_ratio = 0.0f64;
    for i in 0..20 {
        let d = 2 + i % 3;
        let (mut tr, _) = rational_trace(&mut r, d, Acceleration::Accelerated, 30);
        let t0 = tr.level(0).clone();
        let phi = random_function(&mut r, 0, t0.lengths());
        let sums = birkhoff_sums(&t0, &phi, &q(0, 1), 1000)?;
        let mut ns: BTreeSet<usize> = (1..=30).collect();
        ns.extend((0..40).map(|_| r.random_range(31..=1000)));
        ns.insert(1000);
        for &n in &ns {
            let dec = loop {
                match orbit_decomposition(&tr, n) {
                    Err(Error::HorizonExceeded(_)) => tr.extend_to(tr.len() + 10)?,
                    other => break other?,
                }
            };
            ensure!(
                dec.reconstruct(&tr, &phi)? == sums[n],
                "instance {i}: decomposition of N = {n} does not reconstruct the sum"
            );
            let v = dec.count_violations(&tr);
            ensure!(v.is_empty(), "instance {i}, N = {n}: level counts exceed ‖Z(n+1)‖: {v:?}");
            for (lvl, c) in dec.level_counts().into_iter().enumerate() {
                let z = iemlab::arith::bigint_log2(&tr.z(lvl + 1).norm()).exp2();
                worst_ratio = worst_ratio.max(c as f64 / z);
            }
        }
    }
    Ok(format!("20 instances, sums reconstructed exactly; largest count/‖Z‖ = {worst_ratio:.2}"))
}

fn c5_decay_inequalities() -> Outcome {
    let mut r = rng(505);
    let mut runs = 0;
    for i in 0..12 {
        let d = 2 + i % 3;
        let (tr, _) = rational_trace(&mut r, d, Acceleration::Accelerated, 20);
        let phi = centered(&random_function(&mut r, 0, tr.level(0).lengths()));
        let p = decay_profile(&tr, &phi, 20)?;
        ensure!(p.records.len() == 21, "instance {i}: short profile");
        runs += 1;
    }
    for (name, t, slopes) in [
        ("golden", benchmarks::golden()?, vec![1, -2]),
        ("d3", benchmarks::d3()?, vec![1, -2, 3]),
        ("d4", benchmarks::d4()?, vec![2, -1, 1, -3]),
    ] {
        let tr = ball_trace(t, 40)?;
        let phi = sawtooth(&slopes, tr.level(0).lengths());
        decay_profile(&tr, &phi, 40).map_err(|e| Fail(format!("{name}: {e}")))?;
        let stepped = centered(&random_function(&mut r, 0, tr.level(0).lengths()));
        decay_profile(&tr, &stepped, 40).map_err(|e| Fail(format!("{name}: {e}")))?;
        runs += 2;
    }
    Ok(format!("{runs} profiles, no bound violated"))
}

fn c6_golden() -> Outcome {
    let start = Instant::now();
    let tr = InductionTrace::run(benchmarks::golden()?, InductionConfig::default(), 31)?;
    let mut fib = BTreeSet::new();
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..200 {
        fib.insert(a.clone());
        let c = &a + &b;
        a = b;
        b = c;
    }
    for n in 0..=30 {
        let qn = tr.q0(n);
        for i in 0..2 {
            for j in 0..2 {
                ensure!(fib.contains(qn.get(i, j)), "Q(0,{n})[{i}][{j}] = {} is not Fibonacci", qn.get(i, j));
            }
        }
    }
    let c = MatrixCocycle::from_trace(&tr).to_ball(BITS);
    let ca = condition_a_profile(&c, 30)?;
    let last = ca.ratios.last().map(|x| x.1).unwrap_or(f64::INFINITY);
    ensure!(last < 0.05, "condition (a) ratio at n = 30 is {last:.4}");
    let first_below = ca.ratios.iter().find(|x| x.1 < 0.05).map(|x| x.0);
    let cb = condition_b_theta(&c, 30)?;
    let (theta, se) = (cb.theta.unwrap_or(f64::NAN), cb.theta_se.unwrap_or(f64::NAN));
    ensure!(theta - 2.0 * se > 0.0, "θ = {theta} ± {se} not positive with margin");
    let el = start.elapsed();
    ensure!(el < Duration::from_secs(10), "took {el:?}");
    Ok(format!(
        "Fibonacci entries; ratio {last:.4} at n = 30 (below 0.05 from n = {}); θ = {theta:.4} ± {se:.1e}",
        first_below.unwrap_or(0)
    ))
}

/// Planted transfer function cycling through three shapes: a quadratic, a
/// piece that jumps at a third of its interval, and a line.
fn planted(t: &Iem<FieldElem>) -> PiecewiseFunction<FieldElem> {
    let ctx = t.ctx().clone();
    let c = |n: i64, d: i64| FieldElem::from_rational(&ctx, &q(n, d));
    let pieces = (0..t.d())
        .map(|a| match a % 3 {
            0 => Piece::poly(Poly::new(vec![c(1, 3), c(-2, 1), c(5, 2)])),
            1 => Piece {
                segments: vec![
                    Segment { start: c(0, 1), poly: Poly::new(vec![c(1, 1), c(0, 1), c(-4, 1)]) },
                    Segment {
                        start: t.length(a).mul(&c(1, 3)),
                        poly: Poly::new(vec![c(-1, 2), c(3, 1)]),
                    },
                ],
            },
            _ => Piece::poly(Poly::new(vec![c(2, 1), c(-7, 3)])),
        })
        .collect();
    PiecewiseFunction::new(0, FunctionKind::Bv, pieces, t.lengths().to_vec())
}

fn c7_roundtrip() -> Outcome {
    let mut parts = Vec::new();
    for (name, t) in [("golden", benchmarks::golden()?), ("d3", benchmarks::d3()?)] {
        let psi0 = planted(&t);
        let phi = coboundary(&psi0, &t)?;
        let conv = |x: &FieldElem| x.to_ball(BITS);
        let tb = t.map_lengths(BITS, conv);
        let rep = coboundary_roundtrip(&tb, &phi.map_scalars(conv), &psi0.map_scalars(conv), 10_000)?;
        ensure!(
            rep.max_deviation <= 1e-8,
            "{name}: deviation {:e} over {} points",
            rep.max_deviation,
            rep.orbit_length
        );
        parts.push(format!("{name} {:.1e}", rep.max_deviation));
    }
    Ok(format!("max deviation over 10^4 points: {}", parts.join(", ")))
}

fn c8_certificate() -> Outcome {
    let cfg = SolveConfig { levels: 60, truncation: 60, ..SolveConfig::default() };
    let tr = ball_trace(benchmarks::golden()?, blocks_needed(&cfg))?;
    let phi = sawtooth(&[1, -2], tr.level(0).lengths());
    let c = MatrixCocycle::from_trace(&tr);
    let mut cache = FrameCache::new(&c, cfg.depth, cfg.delta, cfg.seed);
    let cand = build_primitive(&tr, &mut cache, &phi, cfg.truncation)?;
    let cert = boundedness_certificate(&tr, &cand.phi, 60)?;
    ensure!(cert.converged, "majorant series not accepted");
    let mut r = rng(808);
    let mut ns: BTreeSet<usize> = (0..99).map(|_| r.random_range(1..100_000)).collect();
    ns.insert(100_000);
    while ns.len() < 100 {
        ns.insert(r.random_range(1..100_000));
    }
    let ns: Vec<usize> = ns.into_iter().collect();
    let (vals, worst) = check_majorant(tr.level(0), &cand.phi, cert.majorant, &ns)?;
    ensure!(worst.is_none(), "|S_N Φ(0)| exceeds the majorant {}: {worst:?}", cert.majorant);
    let top = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(format!(
        "majorant {:.4} (term ratio {:.3}); largest of 100 sampled |S_N Φ(0)| = {top:.4}",
        cert.majorant, cert.decay_rate
    ))
}

fn c9_negative_control() -> Outcome {
    let cfg = SolveConfig::default();
    let tr = ball_trace(benchmarks::d4()?, blocks_needed(&cfg))?;
    let spec = iemlab::io::parse_function(
        r#"{"kind": "bv_star", "center": true, "pieces": {
            "A": {"kind": "poly", "coeffs": ["-1", "1", "3/2"]},
            "B": {"kind": "poly", "coeffs": ["1/2", "2", "-7/10"]},
            "C": {"kind": "sawtooth", "slope": "3"},
            "D": {"kind": "steps", "breaks": ["0", "1/100"], "values": ["1", "-1/2"]}}}"#,
    )?;
    let phi = spec.build(tr.level(0))?;
    let c = MatrixCocycle::from_trace(&tr);
    let mut cache = FrameCache::new(&c, cfg.depth, cfg.delta, cfg.seed);
    let cand = build_primitive(&tr, &mut cache, &phi, cfg.truncation)?;
    ensure!(cand.delta.quotient_dim > 0, "quotient is trivial on d4");
    let plain = p0_primitive(&phi)?;
    let fit = |f: &PiecewiseFunction<Ball>| -> Result<_, Fail> {
        decay_profile(&tr, f, cfg.levels)?
            .exponent
            .ok_or_else(|| Fail("no exponent fit".into()))
    };
    let corrected = fit(&cand.phi)?;
    let zeroed = fit(&plain)?;
    let se = corrected.slope_se.hypot(zeroed.slope_se);
    ensure!(
        zeroed.slope > corrected.slope + 2.0 * se,
        "zeroed exponent {:.4} does not exceed corrected {:.4} (± {se:.1e})",
        zeroed.slope,
        corrected.slope
    );
    Ok(format!(
        "quotient dim {}; exponent corrected {:.3} vs zeroed {:.3}",
        cand.delta.quotient_dim, corrected.slope, zeroed.slope
    ))
}

fn c10_coverage() -> Outcome {
    let mut parts = Vec::new();
    for (name, t) in [
        ("golden", benchmarks::golden()?),
        ("d3", benchmarks::d3()?),
        ("d4", benchmarks::d4()?),
    ] {
        let tr = InductionTrace::run(t, InductionConfig::default(), 1200)?;
        let gap = tr.name_coverage_gap(1000, NameConvention::Winner);
        ensure!(gap.is_none(), "{name}: window starting at block {gap:?} misses a name");
        let mut widest = 0;
        for m in 0..=tr.len() - 50 {
            let h = tr.positivity_horizon(m)?;
            widest = widest.max(h - m);
        }
        parts.push(format!("{name} horizon(0) = {}, widest {widest}", tr.positivity_horizon(0)?));
    }
    Ok(format!("all names in every 1000-block window; {}", parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cocycle identities", c1_cocycle_identities),
        ("matrix and orbit oracle", c2_matrix_orbit_oracle),
        ("integral conservation", c3_integral_conservation),
        ("orbit decomposition", c4_orbit_decomposition),
        ("decay profile inequalities", c5_decay_inequalities),
        ("golden-mean benchmark", c6_golden),
        ("coboundary round trip", c7_roundtrip),
        ("boundedness certificate", c8_certificate),
        ("negative control", c9_negative_control),
        ("name coverage and positivity", c10_coverage),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(Fail(format!("panicked: {msg}")))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(Fail(detail)) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
