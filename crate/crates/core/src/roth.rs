//! Diagnostics for the three Roth-type conditions on a computed expansion,
//! and finite-depth estimates of the stable space of the cocycle.
//!
//! Every verdict is a statement about the observed range only.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{bigint_log2, charpoly, dot, format_rational, rational_log2, Ball, Scalar};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, tail_fit, LinearFit};
use crate::induction::InductionTrace;
use crate::matrix::IntMatrix;

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_DEPTH: usize = 12;
/// Ratios of logarithms are called small below this value.
pub const RATIO_THRESHOLD: f64 = 0.5;
/// Standard errors a fitted quantity must clear its threshold by.
pub const SE_MARGIN: f64 = 2.0;
/// `θ` below this (with margin) counts as a violation of the contraction.
pub const THETA_FLOOR: f64 = 0.01;
/// Quotient maps with a larger condition number are treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// The sequence of block matrices `Z(n)` with interval lengths at the levels
/// where they are known.
#[derive(Debug, Clone)]
pub struct MatrixCocycle<S: Scalar> {
    zs: Vec<IntMatrix>,
    prefix: Vec<IntMatrix>,
    lengths: Vec<Vec<S>>,
    ctx: S::Ctx,
}

impl<S: Scalar> MatrixCocycle<S> {
    pub fn from_trace(trace: &InductionTrace<S>) -> Self {
        let len = trace.blocks().len();
        MatrixCocycle {
            zs: (1..=len).map(|n| trace.z(n).clone()).collect(),
            prefix: (0..=len).map(|n| trace.q0(n).clone()).collect(),
            lengths: (0..=len).map(|n| trace.level(n).lengths().to_vec()).collect(),
            ctx: trace.ctx().clone(),
        }
    }

    /// A cocycle that need not come from an interval exchange; only the
    /// lengths at level 0 are known.
    pub fn synthetic(zs: Vec<IntMatrix>, lengths0: Vec<S>, ctx: S::Ctx) -> Self {
        let d = lengths0.len();
        let mut prefix = vec![IntMatrix::identity(d)];
        for z in &zs {
            let next = prefix.last().unwrap().mul(z);
            prefix.push(next);
        }
        MatrixCocycle {
            zs,
            prefix,
            lengths: vec![lengths0],
            ctx,
        }
    }

    /// Same cocycle with lengths enclosed in balls of `bits` bits.
    pub fn to_ball(&self, bits: u32) -> MatrixCocycle<Ball> {
        MatrixCocycle {
            zs: self.zs.clone(),
            prefix: self.prefix.clone(),
            lengths: self
                .lengths
                .iter()
                .map(|l| l.iter().map(|x| x.to_ball(bits)).collect())
                .collect(),
            ctx: bits,
        }
    }

    pub fn len(&self) -> usize {
        self.zs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zs.is_empty()
    }

    pub fn d(&self) -> usize {
        self.lengths[0].len()
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    /// `Z(n)`, `n ≥ 1`.
    pub fn z(&self, n: usize) -> &IntMatrix {
        &self.zs[n - 1]
    }

    pub fn q0(&self, n: usize) -> &IntMatrix {
        &self.prefix[n]
    }

    pub fn q(&self, m: usize, n: usize) -> Result<IntMatrix> {
        self.check(n)?;
        let mut acc = IntMatrix::identity(self.d());
        for k in m + 1..=n {
            acc = acc.mul(self.z(k));
        }
        Ok(acc)
    }

    pub fn lengths(&self, m: usize) -> Result<&[S]> {
        self.lengths
            .get(m)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::RangeError(format!("lengths at level {m} are not known")))
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.len() {
            return Err(Error::RangeError(format!(
                "level {n} requested but only {} blocks are available",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Outcome of one condition over the observed range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConditionVerdict {
    Consistent,
    Violated { n: usize, detail: String },
    Inconclusive { reason: String },
}

impl ConditionVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, ConditionVerdict::Consistent)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, ConditionVerdict::Violated { .. })
    }
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailStats {
    pub mean: f64,
    pub se: f64,
    pub points: usize,
}

fn tail_stats(xs: &[f64]) -> Option<TailStats> {
    let tail = &xs[xs.len() / 2..];
    let k = tail.len();
    if k < 3 {
        return None;
    }
    let kf = k as f64;
    let mean = tail.iter().sum::<f64>() / kf;
    let var = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (kf - 1.0);
    Some(TailStats {
        mean,
        se: (var / kf).sqrt(),
        points: k,
    })
}

/// Shared rule for conditions stated as "this ratio of logarithms tends to
/// zero": consistent when the tail mean is below the threshold by the margin
/// and not significantly increasing, violated when it is above by the margin.
fn ratio_verdict(
    ns: &[usize],
    ratios: &[f64],
    what: &str,
) -> (ConditionVerdict, Option<TailStats>, Option<LinearFit>) {
    let Some(stats) = tail_stats(ratios) else {
        return (
            ConditionVerdict::Inconclusive {
                reason: format!("{} usable levels, need at least 6", ratios.len()),
            },
            None,
            None,
        );
    };
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let trend = tail_fit(&xs, ratios).ok();
    let rising = trend.is_some_and(|f| f.slope_above(0.0, SE_MARGIN));
    let verdict = if stats.mean + SE_MARGIN * stats.se < RATIO_THRESHOLD && !rising {
        ConditionVerdict::Consistent
    } else if stats.mean - SE_MARGIN * stats.se > RATIO_THRESHOLD {
        let start = ratios.len() / 2;
        let (i, r) = ratios[start..]
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
        ConditionVerdict::Violated {
            n: ns[start + i],
            detail: format!("{what} ratio {r:.4} exceeds {RATIO_THRESHOLD}"),
        }
    } else {
        ConditionVerdict::Inconclusive {
            reason: format!(
                "tail mean {:.4} ± {:.4} does not clear {RATIO_THRESHOLD}{}",
                stats.mean,
                stats.se,
                if rising { " or is increasing" } else { "" }
            ),
        }
    };
    (verdict, Some(stats), trend)
}

/// Per-level data of condition (a).
#[derive(Debug, Clone, Serialize)]
pub struct ConditionA {
    /// `(n, log ‖Z(n+1)‖ / log ‖Q(0,n)‖)` for levels with `‖Q(0,n)‖ > 1`.
    pub ratios: Vec<(usize, f64)>,
    pub tail: Option<TailStats>,
    pub trend: Option<LinearFit>,
    pub verdict: ConditionVerdict,
}

/// Growth of single blocks against the whole product.
pub fn condition_a_profile<S: Scalar>(c: &MatrixCocycle<S>, n_max: usize) -> Result<ConditionA> {
    c.check(n_max + 1)?;
    let ratios: Vec<(usize, f64)> = (1..=n_max)
        .filter_map(|n| {
            let lq = c.q0(n).log2_norm();
            (lq > 0.0).then(|| (n, c.z(n + 1).log2_norm() / lq))
        })
        .collect();
    let ns: Vec<usize> = ratios.iter().map(|r| r.0).collect();
    let rs: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    let (verdict, tail, trend) = ratio_verdict(&ns, &rs, "log ‖Z(n+1)‖ / log ‖Q(0,n)‖");
    Ok(ConditionA {
        ratios,
        tail,
        trend,
        verdict,
    })
}

/// `‖ᵗQ|Γ*‖`: the operator norm, for the sup norm on per-letter constants,
/// of `ᵗQ` restricted to the vectors `v` with `Σ λ_α v_α = 0`.
///
/// Each row of `ᵗQ` gives a linear program over the cube cut by the
/// hyperplane, solved exactly by the fractional greedy rule.
pub fn gamma_star_norm<S: Scalar>(q: &IntMatrix, lambda: &[S]) -> Result<S> {
    let d = q.dim();
    let ctx = lambda[0].context();
    let total = lambda.iter().fold(S::zero_in(&ctx), |a, l| a.add(l));
    let mut best = S::zero_in(&ctx);
    for beta in 0..d {
        let c: Vec<S> = (0..d).map(|a| S::from_bigint(&ctx, q.get(a, beta))).collect();
        let mut order: Vec<usize> = (0..d).collect();
        // decreasing c_α / λ_α
        order.sort_by(|&a, &b| {
            c[b].mul(&lambda[a])
                .cmp_checked(&c[a].mul(&lambda[b]))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        // start from v = -1 and raise coordinates until Σ λ v = 0
        let mut v: Vec<S> = vec![S::from_i64(&ctx, -1); d];
        let mut missing = total.clone();
        for &a in &order {
            let full = lambda[a].mul_int(&BigInt::from(2));
            let reached = missing
                .cmp_checked(&full)
                .map(|o| o != std::cmp::Ordering::Greater)
                .unwrap_or(true);
            if reached {
                v[a] = S::from_i64(&ctx, -1).add(&missing.div(&lambda[a])?);
                break;
            }
            v[a] = S::one_in(&ctx);
            missing = missing.sub(&full);
        }
        let value = dot(&ctx, &c, &v).abs_bound()?;
        best = best.max_bound(&value)?;
    }
    Ok(best)
}

/// One level of condition (b).
#[derive(Debug, Clone, Serialize)]
pub struct NormRecord {
    pub n: usize,
    pub q_norm: String,
    pub gamma_star_norm: String,
    pub log2_q_norm: f64,
    pub log2_gamma_star_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionB {
    pub records: Vec<NormRecord>,
    pub fit: Option<LinearFit>,
    /// `1 - slope`.
    pub theta: Option<f64>,
    pub theta_se: Option<f64>,
    pub verdict: ConditionVerdict,
}

/// Contraction of the mean-zero hyperplane: fits the slope `s` of
/// `log ‖S(0,n)|Γ*‖` against `log ‖Q(0,n)‖` and reports `θ = 1 - s`.
pub fn condition_b_theta<S: Scalar>(c: &MatrixCocycle<S>, n_max: usize) -> Result<ConditionB> {
    c.check(n_max)?;
    let lambda = c.lengths(0)?;
    let records: Vec<NormRecord> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let q = c.q0(n);
            let g = gamma_star_norm(q, lambda)?;
            let qn = q.norm();
            if g.cmp_checked(&S::from_bigint(c.ctx(), &qn))
                .is_ok_and(|o| o == std::cmp::Ordering::Greater)
            {
                return Err(Error::BoundViolated(format!(
                    "level {n}: ‖S(0,n)|Γ*‖ = {} exceeds ‖Q(0,n)‖ = {qn}",
                    g.to_interchange()
                )));
            }
            Ok(NormRecord {
                n,
                q_norm: qn.to_string(),
                gamma_star_norm: g.to_interchange(),
                log2_q_norm: q.log2_norm(),
                log2_gamma_star_norm: g.log2_abs(),
            })
        })
        .collect::<Result<_>>()?;
    let usable: Vec<&NormRecord> = records.iter().filter(|r| r.log2_q_norm > 0.0).collect();
    let xs: Vec<f64> = usable.iter().map(|r| r.log2_q_norm).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.log2_gamma_star_norm).collect();
    let (fit, verdict) = match tail_fit(&xs, &ys) {
        Err(e) => (
            None,
            ConditionVerdict::Inconclusive {
                reason: e.to_string(),
            },
        ),
        Ok(f) => {
            let theta = 1.0 - f.slope;
            let v = if theta - SE_MARGIN * f.slope_se > 0.0 {
                ConditionVerdict::Consistent
            } else if theta + SE_MARGIN * f.slope_se < THETA_FLOOR {
                let last = usable.last().unwrap();
                ConditionVerdict::Violated {
                    n: last.n,
                    detail: format!(
                        "‖S(0,n)|Γ*‖ ≥ ‖Q(0,n)‖^{:.4}, fitted θ = {theta:.4}",
                        last.log2_gamma_star_norm / last.log2_q_norm
                    ),
                }
            } else {
                ConditionVerdict::Inconclusive {
                    reason: format!("θ = {theta:.4} ± {:.4} has no margin", f.slope_se),
                }
            };
            (Some(f), v)
        }
    };
    Ok(ConditionB {
        theta: fit.map(|f| 1.0 - f.slope),
        theta_se: fit.map(|f| f.slope_se),
        records,
        fit,
        verdict,
    })
}

fn ser_rows<S: Serializer>(rows: &[Vec<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(format_rational).collect())
        .collect();
    v.serialize(s)
}

/// Finite-depth estimate of the stable space `Γs` at one level.
#[derive(Debug, Clone, Serialize)]
pub struct StableSpaceEstimate {
    pub level: usize,
    pub depth: usize,
    pub delta: f64,
    /// Mutually orthogonal rational vectors spanning the estimate.
    #[serde(serialize_with = "ser_rows")]
    pub basis: Vec<Vec<BigRational>>,
    /// Estimated `log2` singular values of `ᵗQ(m, m+N)`, smallest first.
    pub log2_singular_values: Vec<f64>,
    /// Largest discarded over smallest kept singular value of the inverse
    /// product `ᵗQ(m, m+N)⁻¹`; below 1 by construction.
    pub gap_ratio: f64,
    /// Per basis vector, slope over the replay range of
    /// `log ‖ᵗQ(m,n) v‖ - log ‖Q(m,n)‖` against `n`.
    pub replay_slopes: Vec<f64>,
    /// Largest `|⟨λ, v⟩| / (|λ| |v|)` over the basis; zero when the
    /// estimate lies in the mean-zero hyperplane.
    pub gamma_star_defect: f64,
}

impl StableSpaceEstimate {
    /// The zero subspace, for comparisons with the unreduced operator.
    pub fn trivial(level: usize) -> Self {
        StableSpaceEstimate {
            level,
            depth: 0,
            delta: 0.0,
            basis: Vec::new(),
            log2_singular_values: Vec::new(),
            gap_ratio: 0.0,
            replay_slopes: Vec::new(),
            gamma_star_defect: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// `log2` of the singular values of an integer matrix, smallest first,
/// from the exact characteristic polynomial of `M ᵗM`.
pub fn log2_singular_values(m: &IntMatrix) -> Vec<f64> {
    let g = m.mul(&m.transpose());
    let p = charpoly(&g.rows());
    let mut out = Vec::with_capacity(m.dim());
    for (f, mult) in p.squarefree_decomposition() {
        for r in f.positive_root_log2s(24) {
            out.extend(std::iter::repeat_n(r / 2.0, mult));
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn unimodular_inverse(q: &IntMatrix) -> Result<IntMatrix> {
    let inv = q
        .inverse_rational()
        .ok_or_else(|| Error::NoGap("cocycle product is singular".into()))?;
    let d = q.dim();
    let mut out = IntMatrix::zeros(d);
    for (i, row) in inv.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if !x.is_integer() {
                return Err(Error::NoGap("cocycle product is not unimodular".into()));
            }
            out.set(i, j, x.to_integer());
        }
    }
    Ok(out)
}

fn gram_det(cols: &[Vec<BigInt>]) -> BigInt {
    let k = cols.len();
    let mut g = IntMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            let s: BigInt = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            g.set(i, j, s);
        }
    }
    g.det()
}

fn mat_vec(m: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    (0..m.dim())
        .map(|i| v.iter().enumerate().map(|(j, x)| m.get(i, j) * x).sum())
        .collect()
}

fn gram_schmidt_rational(vs: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    let mut out: Vec<Vec<BigRational>> = Vec::new();
    for v in vs {
        let mut u: Vec<BigRational> = v.iter().cloned().map(BigRational::from_integer).collect();
        for b in &out {
            let num: BigRational = u.iter().zip(b).map(|(x, y)| x * y).sum();
            let den: BigRational = b.iter().map(|y| y * y).sum();
            let f = num / den;
            for (x, y) in u.iter_mut().zip(b) {
                *x -= &f * y;
            }
        }
        out.push(u);
    }
    out
}

fn integer_direction(v: &[BigRational]) -> Vec<BigInt> {
    let l = v
        .iter()
        .fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
    v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
}

fn sup_log2(v: &[BigInt]) -> f64 {
    v.iter()
        .map(|x| x.abs())
        .max()
        .map_or(f64::NEG_INFINITY, |m| bigint_log2(&m))
}

/// Estimate `Γs^(m)` from `ᵗQ(m, m+N)`: the directions whose singular values
/// are at most `‖Q(m, m+N)‖^{-δ}`.
///
/// The small singular directions of `ᵗQ` are the large ones of its inverse,
/// which is an integer matrix, so they are found exactly by applying the
/// inverse to a seeded random frame; singular values are read off Gram
/// determinants. Every basis vector is then replayed over `n ∈ (m, m+N]`
/// and must show decaying `‖ᵗQ(m,n) v‖ / ‖Q(m,n)‖`.
pub fn estimate_stable_space<S: Scalar>(
    c: &MatrixCocycle<S>,
    m: usize,
    depth: usize,
    delta: f64,
    seed: u64,
) -> Result<StableSpaceEstimate> {
    c.check(m + depth)?;
    if depth == 0 {
        return Err(Error::NoGap("depth must be positive".into()));
    }
    let d = c.d();
    let q = c.q(m, m + depth)?;
    let inv_t = unimodular_inverse(&q)?.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let frame: Vec<Vec<BigInt>> = (0..d)
        .map(|_| (0..d).map(|_| BigInt::from(rng.random_range(-(1i64 << 20)..=(1i64 << 20)))).collect())
        .collect();
    let images: Vec<Vec<BigInt>> = frame.iter().map(|w| mat_vec(&inv_t, w)).collect();
    if gram_det(&images).is_zero() {
        return Err(Error::NoGap("degenerate random frame".into()));
    }
    let log2_singular_values = log2_singular_values(&q);
    let cut = -delta * q.log2_norm();
    let k = log2_singular_values.iter().take_while(|&&s| s <= cut).count();
    if k == 0 {
        return Err(Error::NoGap(format!(
            "no singular value of ᵗQ({m},{}) below ‖Q‖^-{delta}",
            m + depth
        )));
    }
    if k >= d {
        return Err(Error::NoGap("every direction looks contracting".into()));
    }
    let gap_ratio = (log2_singular_values[k - 1] - log2_singular_values[k]).exp2();
    if gap_ratio >= 1.0 {
        return Err(Error::NoGap(format!("singular values not separated (ratio {gap_ratio:.3})")));
    }
    let basis = gram_schmidt_rational(&images[..k]);

    let mut replay_slopes = Vec::with_capacity(k);
    for v in &basis {
        let iv = integer_direction(v);
        let mut acc = IntMatrix::identity(d);
        let mut ns = Vec::new();
        let mut ys = Vec::new();
        for n in m + 1..=m + depth {
            acc = acc.mul(c.z(n));
            ns.push(n as f64);
            ys.push(sup_log2(&mat_vec(&acc.transpose(), &iv)) - acc.log2_norm());
        }
        let from = ns.len().saturating_sub((ns.len() / 2).max(3));
        let slope = linear_fit(&ns[from..], &ys[from..])
            .map_err(|e| Error::NoGap(format!("replay cannot be certified: {e}")))?
            .slope;
        if slope >= 0.0 {
            return Err(Error::NoGap(format!(
                "replayed direction does not decay (slope {slope:.4})"
            )));
        }
        replay_slopes.push(slope);
    }
    let gamma_star_defect = match c.lengths(m) {
        Ok(lambda) => basis
            .iter()
            .map(|v| {
                let lf: Vec<f64> = lambda.iter().map(|x| x.to_f64()).collect();
                let vf: Vec<f64> = v.iter().map(crate::arith::rational_to_f64).collect();
                let num: f64 = lf.iter().zip(&vf).map(|(a, b)| a * b).sum();
                let na = lf.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = vf.iter().map(|x| x * x).sum::<f64>().sqrt();
                (num / (na * nb)).abs()
            })
            .fold(0.0, f64::max),
        Err(_) => f64::NAN,
    };
    Ok(StableSpaceEstimate {
        level: m,
        depth,
        delta,
        basis,
        log2_singular_values,
        gap_ratio,
        replay_slopes,
        gamma_star_defect,
    })
}

/// Principal-angle distance `sin θ_max` between two rational subspaces of
/// equal dimension.
pub fn subspace_distance(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let ortho = |vs: &[Vec<BigRational>]| -> DMatrix<f64> {
        let d = vs[0].len();
        let m = DMatrix::from_fn(d, vs.len(), |i, j| crate::arith::rational_to_f64(&vs[j][i]));
        let scaled = DMatrix::from_fn(d, vs.len(), |i, j| m[(i, j)] / m.column(j).norm());
        scaled.qr().q()
    };
    let (qa, qb) = (ortho(a), ortho(b));
    let s = (qa.transpose() * qb).singular_values();
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    (1.0 - min * min).max(0.0).sqrt()
}

/// Orthogonal splitting `Γ*^(m) = Γs ⊕ C` at one level, in exact
/// arithmetic of the trace's mode.
#[derive(Debug, Clone)]
pub struct QuotientFrame<S: Scalar> {
    pub level: usize,
    pub lengths: Vec<S>,
    /// Orthogonal basis of the projection of the stable estimate into `Γ*`.
    pub stable: Vec<Vec<S>>,
    /// Orthogonal basis of the complement of `stable` inside `Γ*`.
    pub complement: Vec<Vec<S>>,
    pub estimate: StableSpaceEstimate,
}

fn residual<S: Scalar>(ctx: &S::Ctx, v: &[S], basis: &[(Vec<S>, S)]) -> Result<Vec<S>> {
    let mut u = v.to_vec();
    for (b, bb) in basis {
        let f = dot(ctx, &u, b).div(bb)?;
        for (x, y) in u.iter_mut().zip(b) {
            *x = x.sub(&f.mul(y));
        }
    }
    Ok(u)
}

impl<S: Scalar> QuotientFrame<S> {
    pub fn new(estimate: StableSpaceEstimate, lengths: &[S]) -> Result<Self> {
        let d = lengths.len();
        let ctx = lengths[0].context();
        let mut basis: Vec<(Vec<S>, S)> = Vec::new();
        let lam = lengths.to_vec();
        let ll = dot(&ctx, &lam, &lam);
        basis.push((lam, ll));
        let mut stable = Vec::new();
        for v in &estimate.basis {
            let vs: Vec<S> = v.iter().map(|x| S::from_rational(&ctx, x)).collect();
            let u = residual(&ctx, &vs, &basis)?;
            let uu = dot(&ctx, &u, &u);
            stable.push(u.clone());
            basis.push((u, uu));
        }
        let mut complement = Vec::new();
        let mut used = vec![false; d];
        while basis.len() < d {
            let mut best: Option<(usize, Vec<S>, f64)> = None;
            for (i, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
                let mut e = vec![S::zero_in(&ctx); d];
                e[i] = S::one_in(&ctx);
                let r = residual(&ctx, &e, &basis)?;
                let size = dot(&ctx, &r, &r).to_f64();
                if best.as_ref().is_none_or(|b| size > b.2) {
                    best = Some((i, r, size));
                }
            }
            let (i, r, _) = best.expect("a coordinate vector always remains");
            used[i] = true;
            let rr = dot(&ctx, &r, &r);
            complement.push(r.clone());
            basis.push((r, rr));
        }
        Ok(QuotientFrame {
            level: estimate.level,
            lengths: lengths.to_vec(),
            stable,
            complement,
            estimate,
        })
    }

    pub fn ctx(&self) -> S::Ctx {
        self.lengths[0].context()
    }

    /// Dimension of `Γ* / Γs`.
    pub fn dim(&self) -> usize {
        self.complement.len()
    }

    /// Coordinates of the class of `v` in the complement basis.
    pub fn reduce(&self, v: &[S]) -> Result<Vec<S>> {
        let ctx = self.ctx();
        self.complement
            .iter()
            .map(|c| dot(&ctx, v, c).div(&dot(&ctx, c, c)))
            .collect()
    }

    /// Representative in the complement of the given coordinates.
    pub fn lift(&self, coords: &[S]) -> Vec<S> {
        let ctx = self.ctx();
        let mut out = vec![S::zero_in(&ctx); self.lengths.len()];
        for (c, y) in self.complement.iter().zip(coords) {
            for (o, x) in out.iter_mut().zip(c) {
                *o = o.add(&x.mul(y));
            }
        }
        out
    }

    /// Euclidean length of the complement part of `v` relative to `|v|`.
    pub fn complement_fraction(&self, v: &[S]) -> Result<f64> {
        let ctx = self.ctx();
        let p = self.lift(&self.reduce(v)?);
        let pp = dot(&ctx, &p, &p).to_f64();
        let vv = dot(&ctx, v, v).to_f64();
        Ok(if vv == 0.0 { 0.0 } else { (pp / vv).sqrt() })
    }

    fn norms(&self) -> Vec<f64> {
        let ctx = self.ctx();
        self.complement.iter().map(|c| dot(&ctx, c, c).to_f64().sqrt()).collect()
    }
}

/// Matrix of `S(m,n)♭` from the complement basis at `from` to the one at
/// `to`; `q = Q(m, n)`.
pub fn quotient_matrix<S: Scalar>(
    from: &QuotientFrame<S>,
    to: &QuotientFrame<S>,
    q: &IntMatrix,
) -> Result<Vec<Vec<S>>> {
    let ctx = from.ctx();
    let cols: Vec<Vec<S>> = from
        .complement
        .iter()
        .map(|c| to.reduce(&q.apply_transpose(&ctx, c)))
        .collect::<Result<_>>()?;
    Ok((0..to.dim())
        .map(|i| cols.iter().map(|col| col[i].clone()).collect())
        .collect())
}

/// Solve `M y = x` by elimination with the largest available pivot.
pub fn solve_linear<S: Scalar>(m: &[Vec<S>], x: &[S]) -> Result<Vec<S>> {
    let n = x.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a: Vec<Vec<S>> = m
        .iter()
        .zip(x)
        .map(|(row, xi)| {
            let mut r = row.clone();
            r.push(xi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].to_f64().abs().total_cmp(&a[j][col].to_f64().abs()))
            .unwrap();
        if a[p][col].is_zero_checked().unwrap_or(false) {
            return Err(Error::SingularQuotient(format!("zero pivot in column {col}")));
        }
        a.swap(col, p);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col].div(&a[col][col])?;
            for k in col..=n {
                let t = f.mul(&a[col][k]);
                a[r][k] = a[r][k].sub(&t);
            }
        }
    }
    (0..n).map(|i| a[i][n].div(&a[i][i])).collect()
}

/// Euclidean operator norm of `(S(m,n)♭)⁻¹` between orthonormalized
/// complements, with the condition number of `S(m,n)♭`. `None` for a
/// zero-dimensional quotient.
pub fn quotient_inverse_norm<S: Scalar>(
    from: &QuotientFrame<S>,
    to: &QuotientFrame<S>,
    q: &IntMatrix,
) -> Result<Option<(f64, f64)>> {
    if from.dim() != to.dim() {
        return Err(Error::SingularQuotient(format!(
            "quotient dimensions differ between levels {} ({}) and {} ({})",
            from.level,
            from.dim(),
            to.level,
            to.dim()
        )));
    }
    if from.dim() == 0 {
        return Ok(None);
    }
    let m = quotient_matrix(from, to, q)?;
    let (nf, nt) = (from.norms(), to.norms());
    let k = from.dim();
    let mat = DMatrix::from_fn(k, k, |i, j| m[i][j].to_f64() * nt[i] / nf[j]);
    if mat.iter().any(|x| !x.is_finite()) {
        return Err(Error::RangeError("quotient matrix overflows f64".into()));
    }
    let sv = mat.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = smax / smin;
    if smin == 0.0 || !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::SingularQuotient(format!(
            "S({},{})♭ has condition number {cond:.3e}",
            from.level, to.level
        )));
    }
    Ok(Some((1.0 / smin, cond)))
}

/// Stable estimates and quotient frames computed on demand.
pub struct FrameCache<'a, S: Scalar> {
    cocycle: &'a MatrixCocycle<S>,
    pub depth: usize,
    pub delta: f64,
    pub seed: u64,
    frames: HashMap<usize, QuotientFrame<S>>,
}

impl<'a, S: Scalar> FrameCache<'a, S> {
    pub fn new(cocycle: &'a MatrixCocycle<S>, depth: usize, delta: f64, seed: u64) -> Self {
        FrameCache {
            cocycle,
            depth,
            delta,
            seed,
            frames: HashMap::new(),
        }
    }

    pub fn cocycle(&self) -> &MatrixCocycle<S> {
        self.cocycle
    }

    pub fn frame(&mut self, m: usize) -> Result<&QuotientFrame<S>> {
        if !self.frames.contains_key(&m) {
            let est = estimate_stable_space(self.cocycle, m, self.depth, self.delta, self.seed)?;
            let f = QuotientFrame::new(est, self.cocycle.lengths(m)?)?;
            self.frames.insert(m, f);
        }
        Ok(&self.frames[&m])
    }

    /// Largest level whose frame can be built.
    pub fn max_level(&self) -> Option<usize> {
        self.cocycle.len().checked_sub(self.depth)
    }
}

/// One `(m, n)` entry of condition (c).
#[derive(Debug, Clone, Serialize)]
pub struct QuotientRecord {
    pub m: usize,
    pub n: usize,
    pub dim: usize,
    /// `log2 ‖(S(m,n)♭)⁻¹‖`, absent for a zero-dimensional quotient.
    pub log2_inverse_norm: Option<f64>,
    pub condition: Option<f64>,
    /// `log ‖(S(m,n)♭)⁻¹‖ / log ‖Q(0,n)‖`, zero for a trivial quotient.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionC {
    pub depth: usize,
    pub delta: f64,
    pub records: Vec<QuotientRecord>,
    /// Dimensions of the stable estimates per level.
    pub stable_dims: Vec<(usize, usize)>,
    pub verdict: ConditionVerdict,
    pub note: String,
}

pub const UNIFORMITY_NOTE: &str =
    "the condition is stated for m < n with n large, without saying whether the threshold is uniform in m; profiles are reported for each requested m separately";

/// Tameness of the inverse quotient maps for each `m` in `m_list` and
/// `m < n ≤ n_max`.
pub fn condition_c_profile<S: Scalar>(
    cache: &mut FrameCache<'_, S>,
    m_list: &[usize],
    n_max: usize,
) -> Result<ConditionC> {
    let c = cache.cocycle;
    c.check(n_max + cache.depth)?;
    let mut records = Vec::new();
    let mut dims = Vec::new();
    let mut verdict = ConditionVerdict::Consistent;
    for &m in m_list {
        let mut q = IntMatrix::identity(c.d());
        let mut ns = Vec::new();
        let mut ratios = Vec::new();
        for n in m + 1..=n_max {
            q = q.mul(c.z(n));
            let (from, to) = {
                let _ = cache.frame(m)?;
                let _ = cache.frame(n)?;
                (&cache.frames[&m], &cache.frames[&n])
            };
            let res = match quotient_inverse_norm(from, to, &q) {
                Ok(r) => r,
                Err(Error::SingularQuotient(msg)) => {
                    verdict = ConditionVerdict::Violated { n, detail: msg };
                    continue;
                }
                Err(e) => return Err(e),
            };
            let lq = c.q0(n).log2_norm();
            let (log_inv, cond) = match res {
                Some((norm, cond)) => (Some(norm.log2()), Some(cond)),
                None => (None, None),
            };
            let ratio = match log_inv {
                Some(l) if lq > 0.0 => l / lq,
                _ => 0.0,
            };
            if lq > 0.0 {
                ns.push(n);
                ratios.push(ratio);
            }
            records.push(QuotientRecord {
                m,
                n,
                dim: from.dim(),
                log2_inverse_norm: log_inv,
                condition: cond,
                ratio,
            });
        }
        if verdict.is_violated() {
            continue;
        }
        let (v, _, _) = ratio_verdict(&ns, &ratios, "log ‖(S(m,n)♭)⁻¹‖ / log ‖Q(0,n)‖");
        match v {
            ConditionVerdict::Consistent => {}
            other => {
                if !verdict.is_violated() {
                    verdict = other;
                }
            }
        }
    }
    let mut levels: Vec<&usize> = cache.frames.keys().collect();
    levels.sort();
    for &l in levels {
        dims.push((l, cache.frames[&l].estimate.dim()));
    }
    Ok(ConditionC {
        depth: cache.depth,
        delta: cache.delta,
        records,
        stable_dims: dims,
        verdict,
        note: UNIFORMITY_NOTE.to_string(),
    })
}

/// Overall classification of the observed range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RothVerdict {
    Consistent,
    Violated { condition: char, n: usize, detail: String },
    Inconclusive { reasons: Vec<String> },
}

impl fmt::Display for RothVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RothVerdict::Consistent => f.write_str("consistent"),
            RothVerdict::Violated { condition, n, .. } => write!(f, "violated({condition}, n={n})"),
            RothVerdict::Inconclusive { .. } => f.write_str("inconclusive"),
        }
    }
}

/// One level of the aggregated report.
#[derive(Debug, Clone, Serialize)]
pub struct RothRecord {
    pub n: usize,
    pub z_next_norm: Option<String>,
    pub q_norm: String,
    pub gamma_star_norm: Option<String>,
    /// `log2 ‖(S(m,n)♭)⁻¹‖` for the first requested `m`.
    pub log2_quotient_inverse_norm: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RothReport {
    pub blocks: usize,
    pub records: Vec<RothRecord>,
    pub a: Option<ConditionA>,
    pub b: Option<ConditionB>,
    pub c: Option<ConditionC>,
    pub theta: Option<f64>,
    pub verdict: RothVerdict,
    pub notes: Vec<String>,
}

/// Aggregate the three profiles; a missing profile makes the verdict
/// inconclusive unless another one is violated.
pub fn roth_verdict<S: Scalar>(
    c: &MatrixCocycle<S>,
    a: Option<ConditionA>,
    b: Option<ConditionB>,
    cc: Option<ConditionC>,
    notes: Vec<String>,
) -> RothReport {
    let mut reasons = Vec::new();
    let mut violated = None;
    for (name, v) in [
        ('a', a.as_ref().map(|x| &x.verdict)),
        ('b', b.as_ref().map(|x| &x.verdict)),
        ('c', cc.as_ref().map(|x| &x.verdict)),
    ] {
        match v {
            None => reasons.push(format!("condition ({name}) not computed")),
            Some(ConditionVerdict::Consistent) => {}
            Some(ConditionVerdict::Violated { n, detail }) => {
                if violated.is_none() {
                    violated = Some(RothVerdict::Violated {
                        condition: name,
                        n: *n,
                        detail: detail.clone(),
                    });
                }
            }
            Some(ConditionVerdict::Inconclusive { reason }) => {
                reasons.push(format!("({name}) {reason}"))
            }
        }
    }
    let verdict = violated.unwrap_or(if reasons.is_empty() {
        RothVerdict::Consistent
    } else {
        RothVerdict::Inconclusive { reasons }
    });
    let first_m = cc.as_ref().and_then(|x| x.records.first().map(|r| r.m));
    let records = (0..=c.len())
        .map(|n| RothRecord {
            n,
            z_next_norm: (n < c.len()).then(|| c.z(n + 1).norm().to_string()),
            q_norm: c.q0(n).norm().to_string(),
            gamma_star_norm: b.as_ref().and_then(|b| {
                b.records.iter().find(|r| r.n == n).map(|r| r.gamma_star_norm.clone())
            }),
            log2_quotient_inverse_norm: cc.as_ref().and_then(|x| {
                x.records
                    .iter()
                    .find(|r| Some(r.m) == first_m && r.n == n)
                    .and_then(|r| r.log2_inverse_norm)
            }),
        })
        .collect();
    RothReport {
        blocks: c.len(),
        records,
        theta: b.as_ref().and_then(|b| b.theta),
        a,
        b,
        c: cc,
        verdict,
        notes,
    }
}

/// Parameters of a full report.
#[derive(Debug, Clone, Serialize)]
pub struct RothConfig {
    /// Last level of the (a) and (b) profiles.
    pub n_max: usize,
    pub depth: usize,
    pub delta: f64,
    pub m_list: Vec<usize>,
    pub seed: u64,
}

/// All three profiles on a common range, with the last `depth` blocks used
/// only as look-ahead for stable estimates.
pub fn roth_report<S: Scalar>(c: &MatrixCocycle<S>, cfg: &RothConfig) -> RothReport {
    let mut notes = vec![UNIFORMITY_NOTE.to_string()];
    let a = condition_a_profile(c, cfg.n_max).map_err(|e| notes.push(format!("(a): {e}"))).ok();
    let b = condition_b_theta(c, cfg.n_max).map_err(|e| notes.push(format!("(b): {e}"))).ok();
    let n_c = c.len().saturating_sub(cfg.depth).min(cfg.n_max);
    let mut cache = FrameCache::new(c, cfg.depth, cfg.delta, cfg.seed);
    let cc = condition_c_profile(&mut cache, &cfg.m_list, n_c)
        .map_err(|e| notes.push(format!("(c): {e}")))
        .ok();
    roth_verdict(c, a, b, cc, notes)
}

/// `log2` of a rational's absolute value, for reporting.
pub fn log2_rational(q: &BigRational) -> f64 {
    rational_log2(&q.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::FieldElem;
    use crate::benchmarks;
    use crate::induction::InductionConfig;

    fn golden_cocycle(blocks: usize) -> MatrixCocycle<FieldElem> {
        let t = benchmarks::golden().unwrap();
        let tr = InductionTrace::run(t, InductionConfig::default(), blocks).unwrap();
        MatrixCocycle::from_trace(&tr)
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn lp_norm_on_small_cases() {
        // Γ* for λ = (1, 1) is spanned by (1, -1); ᵗQ (1,-1) for Q = [[2,1],[1,1]]
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
        let n = gamma_star_norm(&m, &[q(1), q(1)]).unwrap();
        assert_eq!(n, q(1));
        // identity: the norm is 1 whenever d ≥ 2
        let id = IntMatrix::identity(3);
        assert_eq!(gamma_star_norm(&id, &[q(1), q(2), q(3)]).unwrap(), q(1));
    }

    #[test]
    fn golden_stable_line() {
        let c = golden_cocycle(30);
        let est = estimate_stable_space(&c, 0, 10, DEFAULT_DELTA, 7).unwrap();
        assert_eq!(est.dim(), 1);
        assert!(est.gap_ratio < 1e-2, "{est:?}");
        assert!(est.gamma_star_defect < 1e-3);
        let frame = QuotientFrame::new(est, c.lengths(0).unwrap()).unwrap();
        assert_eq!(frame.dim(), 0);
    }

    #[test]
    fn single_block_has_no_certified_gap() {
        let c = golden_cocycle(5);
        assert!(matches!(
            estimate_stable_space(&c, 0, 1, DEFAULT_DELTA, 1),
            Err(Error::NoGap(_))
        ));
    }

    #[test]
    fn solve_small_system() {
        let m = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let y = solve_linear(&m, &[q(3), q(4)]).unwrap();
        assert_eq!(y, vec![q(1), q(1)]);
    }
}
