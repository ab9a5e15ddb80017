//! Constructive solution of the cohomological equation `Ψ - Ψ∘T = Φ`.
//!
//! Given mean-zero data `φ`, the primitive with per-interval mean zero is
//! corrected by a per-letter constant (the series `ΔP`) so that its special
//! Birkhoff sums decay; a bounded transfer function is then read off the
//! Birkhoff sums along the orbit of a base point.

use std::cmp::Ordering;

use serde::Serialize;

use crate::arith::{dot, Scalar};
use crate::birkhoff::{birkhoff_sums, decay_profile, special_sum, DecayProfile};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::function::{FunctionKind, PiecewiseFunction};
use crate::iem::{Iem, KeaneVerdict};
use crate::induction::InductionTrace;
use crate::roth::{quotient_matrix, solve_linear, FrameCache, MatrixCocycle};

/// Primitive with zero mean on every interval: `D(P0 φ) = φ`.
pub fn p0_primitive<S: Scalar>(phi: &PiecewiseFunction<S>) -> Result<PiecewiseFunction<S>> {
    let ctx = phi.ctx();
    let mut pieces = Vec::with_capacity(phi.d());
    for (p, len) in phi.pieces.iter().zip(&phi.lengths) {
        let f = p.antiderivative(S::zero_in(&ctx), len)?;
        let mean = f.integral(len)?.div(len)?;
        pieces.push(f.map_polys(|q| {
            let mut c = q.coeffs.clone();
            c[0] = c[0].sub(&mean);
            crate::function::Poly::new(c)
        }));
    }
    Ok(PiecewiseFunction::new(
        phi.level,
        FunctionKind::Bv1,
        pieces,
        phi.lengths.clone(),
    ))
}

/// Sup norm of a vector, as an `f64`.
fn sup_f64<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

fn function_sup_f64<S: Scalar>(f: &PiecewiseFunction<S>) -> Result<f64> {
    Ok(f.sup_norm()?.0.to_f64().abs())
}

/// Per-letter constant vector of `Λ^(n) ψ` before reduction modulo the
/// stable space: `P0^(n) S(n-1,n) ψ - S(n-1,n) P0^(n-1) ψ`.
///
/// The difference is forced to be constant on every `I_α(n)` with zero
/// total integral; both facts are checked on every call.
pub fn lambda_raw<S: Scalar>(
    trace: &InductionTrace<S>,
    n: usize,
    psi: &PiecewiseFunction<S>,
) -> Result<Vec<S>> {
    if n == 0 || psi.level + 1 != n {
        return Err(Error::RangeError(format!(
            "correction at level {n} needs data at level {}",
            n.saturating_sub(1)
        )));
    }
    let a = p0_primitive(&special_sum(trace, n - 1, n, psi)?)?;
    let b = special_sum(trace, n - 1, n, &p0_primitive(psi)?)?;
    let diff = a.sub(&b)?;
    let consts = diff.means()?;
    let (vars, _) = diff.letter_variations()?;
    let scale = function_sup_f64(&a)?.max(function_sup_f64(&b)?).max(1.0);
    let tol = if S::is_exact() { 0.0 } else { 1e-30 * scale };
    for (alpha, v) in vars.iter().enumerate() {
        let bad = if S::is_exact() {
            !v.is_zero_checked()?
        } else {
            v.to_f64().abs() > tol
        };
        if bad {
            return Err(Error::NotInGammaStar(format!(
                "level {n}: correction varies by {} on interval {alpha}",
                v.to_interchange()
            )));
        }
    }
    let total = dot(trace.ctx(), &consts, trace.level(n).lengths());
    let bad = if S::is_exact() {
        !total.is_zero_checked()?
    } else {
        total.to_f64().abs() > tol
    };
    if bad {
        return Err(Error::NotInGammaStar(format!(
            "level {n}: correction has total integral {}",
            total.to_interchange()
        )));
    }
    Ok(consts)
}

/// `Λ^(n) ψ` as coordinates of its class in `Γ*^(n) / Γs^(n)`.
pub fn lambda_correction<S: Scalar>(
    trace: &InductionTrace<S>,
    cache: &mut FrameCache<'_, S>,
    n: usize,
    psi: &PiecewiseFunction<S>,
) -> Result<Vec<S>> {
    let raw = lambda_raw(trace, n, psi)?;
    cache.frame(n)?.reduce(&raw)
}

/// One term `(S(m,n)♭)⁻¹ Λ^(n) S(m,n-1) φ` of the correction series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesTerm {
    pub n: usize,
    /// Sup norm of the term's representative at level `m`.
    pub norm: f64,
    /// `‖Λ^(n) ψ‖∞` before reduction, with `ψ = S(m,n-1) φ`.
    pub lambda_norm: f64,
    /// `‖ψ‖∞`.
    pub input_norm: f64,
    /// `log(‖Λ^(n) ψ‖ / ‖ψ‖) / log ‖Q(0,n)‖`, the measured decay exponent.
    pub lambda_exponent: Option<f64>,
}

/// Partial sum of the correction series at level `m`.
#[derive(Debug, Clone)]
pub struct DeltaP<S: Scalar> {
    pub level: usize,
    pub truncation: usize,
    pub quotient_dim: usize,
    /// Coordinates in the complement basis at level `m`.
    pub coords: Vec<S>,
    /// Per-letter constants representing the class.
    pub representative: Vec<S>,
    pub terms: Vec<SeriesTerm>,
    /// Geometric estimate of the omitted tail (sup norm).
    pub tail_bound: f64,
    /// Fitted per-level decay factor of the terms.
    pub decay_rate: Option<f64>,
}

/// `ΔP^(m) φ` summed over `m < n ≤ m + N`, with a geometric tail estimate
/// fitted on the last quarter of the terms. Refuses with `SeriesDiverging`
/// when the terms do not decay there.
pub fn delta_p<S: Scalar>(
    trace: &InductionTrace<S>,
    cache: &mut FrameCache<'_, S>,
    m: usize,
    phi: &PiecewiseFunction<S>,
    truncation: usize,
) -> Result<DeltaP<S>> {
    delta_p_to(trace, cache, m, phi, m + truncation)
}

/// Same as [`delta_p`] with an absolute last level.
pub fn delta_p_to<S: Scalar>(
    trace: &InductionTrace<S>,
    cache: &mut FrameCache<'_, S>,
    m: usize,
    phi: &PiecewiseFunction<S>,
    last: usize,
) -> Result<DeltaP<S>> {
    if phi.level != m {
        return Err(Error::RangeError(format!(
            "datum lives at level {} but level {m} was requested",
            phi.level
        )));
    }
    let ctx = trace.ctx().clone();
    let d = trace.d();
    let from = cache.frame(m)?.clone();
    let dim = from.dim();
    let mut coords = vec![S::zero_in(&ctx); dim];
    let mut terms = Vec::new();
    let mut psi = phi.clone();
    let mut q = crate::matrix::IntMatrix::identity(d);
    let cocycle_len = cache.cocycle().len();
    if last > cocycle_len {
        return Err(Error::RangeError(format!(
            "series needs stable estimates up to level {last}, only {cocycle_len} are possible"
        )));
    }
    for n in m + 1..=last {
        q = q.mul(trace.z(n));
        let raw = lambda_raw(trace, n, &psi)?;
        let lambda_norm = sup_f64(&raw);
        let input_norm = function_sup_f64(&psi)?;
        let lq = trace.q0(n).log2_norm();
        let lambda_exponent = (lambda_norm > 0.0 && input_norm > 0.0 && lq > 0.0)
            .then(|| (lambda_norm / input_norm).log2() / lq);
        let norm = if dim == 0 {
            0.0
        } else {
            let reduced = cache.frame(n)?.reduce(&raw)?;
            let to = cache.frame(n)?;
            let mat = quotient_matrix(&from, to, &q)?;
            let y = solve_linear(&mat, &reduced)?;
            for (c, yi) in coords.iter_mut().zip(&y) {
                *c = c.add(yi);
            }
            sup_f64(&from.lift(&y))
        };
        terms.push(SeriesTerm {
            n,
            norm,
            lambda_norm,
            input_norm,
            lambda_exponent,
        });
        if n < last {
            psi = special_sum(trace, n - 1, n, &psi)?;
        }
    }
    let representative = from.lift(&coords);
    let (tail_bound, decay_rate) = if dim == 0 {
        (0.0, None)
    } else {
        geometric_tail(&terms)?
    };
    Ok(DeltaP {
        level: m,
        truncation: last - m,
        quotient_dim: dim,
        coords,
        representative,
        terms,
        tail_bound,
        decay_rate,
    })
}

fn geometric_tail(terms: &[SeriesTerm]) -> Result<(f64, Option<f64>)> {
    let pts: Vec<(f64, f64)> = terms
        .iter()
        .filter(|t| t.norm > 0.0)
        .map(|t| (t.n as f64, t.norm.log2()))
        .collect();
    if pts.is_empty() {
        return Ok((0.0, None));
    }
    let k = (pts.len() / 4).max(3).min(pts.len());
    let tail = &pts[pts.len() - k..];
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let fit = linear_fit(&xs, &ys).map_err(|e| {
        Error::SeriesDiverging(format!("cannot assess decay of the correction series: {e}"))
    })?;
    if fit.slope >= 0.0 {
        return Err(Error::SeriesDiverging(format!(
            "term norms do not decrease over the last {k} levels (log2 slope {:.4})",
            fit.slope
        )));
    }
    let r = fit.slope.exp2();
    let last = terms.last().map_or(0.0, |t| t.norm);
    Ok((last * r / (1.0 - r), Some(r)))
}

/// A primitive of the datum, corrected modulo the stable space.
#[derive(Debug, Clone)]
pub struct PrimitiveCandidate<S: Scalar> {
    /// `Φ = P0 φ + ΔP φ`, at level 0.
    pub phi: PiecewiseFunction<S>,
    pub delta: DeltaP<S>,
}

impl<S: Scalar> PrimitiveCandidate<S> {
    pub fn truncation(&self) -> usize {
        self.delta.truncation
    }

    pub fn tail_bound(&self) -> f64 {
        self.delta.tail_bound
    }
}

fn add_constants<S: Scalar>(f: &PiecewiseFunction<S>, c: &[S]) -> Result<PiecewiseFunction<S>> {
    let g = PiecewiseFunction::from_constants(f.level, c, &f.lengths);
    let mut out = f.add(&g)?;
    out.kind = f.kind;
    Ok(out)
}

/// `P^(m) φ = P0^(m) φ + ΔP^(m) φ` with the series summed up to level
/// `last`.
pub fn corrected_primitive_at<S: Scalar>(
    trace: &InductionTrace<S>,
    cache: &mut FrameCache<'_, S>,
    m: usize,
    phi: &PiecewiseFunction<S>,
    last: usize,
) -> Result<PrimitiveCandidate<S>> {
    let delta = delta_p_to(trace, cache, m, phi, last)?;
    let p0 = p0_primitive(phi)?;
    Ok(PrimitiveCandidate {
        phi: add_constants(&p0, &delta.representative)?,
        delta,
    })
}

/// `Φ = P^(0) φ` with the series truncated after `N` levels.
pub fn build_primitive<S: Scalar>(
    trace: &InductionTrace<S>,
    cache: &mut FrameCache<'_, S>,
    phi: &PiecewiseFunction<S>,
    truncation: usize,
) -> Result<PrimitiveCandidate<S>> {
    phi.require_mean_zero()?;
    corrected_primitive_at(trace, cache, 0, phi, truncation)
}

/// Distance to the stable space of `S(m,n) P^(m) ψ - P^(n) S(m,n) ψ`,
/// with `ψ = S(0,m) φ` and both series summed to the same level `last`.
#[derive(Debug, Clone, Serialize)]
pub struct FunctorialityResidual {
    pub m: usize,
    pub n: usize,
    /// Sup norm of the complement part of the difference.
    pub residual: f64,
    /// Sup norm of the full difference, stable part included.
    pub raw: f64,
}

pub fn functoriality_residuals<S: Scalar>(
    trace: &InductionTrace<S>,
    cache: &mut FrameCache<'_, S>,
    phi: &PiecewiseFunction<S>,
    pairs: &[(usize, usize)],
    last: usize,
) -> Result<Vec<FunctorialityResidual>> {
    let mut out = Vec::with_capacity(pairs.len());
    for &(m, n) in pairs {
        let psi_m = special_sum(trace, 0, m, phi)?;
        let psi_n = special_sum(trace, m, n, &psi_m)?;
        let pm = corrected_primitive_at(trace, cache, m, &psi_m, last)?;
        let pn = corrected_primitive_at(trace, cache, n, &psi_n, last)?;
        let lhs = special_sum(trace, m, n, &pm.phi)?;
        let diff = lhs.sub(&pn.phi)?;
        let consts = diff.means()?;
        let frame = cache.frame(n)?;
        let part = frame.lift(&frame.reduce(&consts)?);
        out.push(FunctorialityResidual {
            m,
            n,
            residual: sup_f64(&part),
            raw: sup_f64(&consts),
        });
    }
    Ok(out)
}

/// One orbit point of the transfer function.
#[derive(Debug, Clone)]
pub struct PsiEntry<S> {
    pub k: usize,
    pub point: S,
    pub psi: S,
}

/// `Ψ` on the orbit of a base point, normalized to mean zero.
#[derive(Debug, Clone)]
pub struct PsiOrbitTable<S: Scalar> {
    pub base: S,
    pub entries: Vec<PsiEntry<S>>,
    /// Constant `c` in `Ψ(T^k x) = c - S_k Φ(x)`.
    pub normalization: S,
    /// `max_k |S_k Φ(x)|` over the recorded range.
    pub sup_birkhoff: f64,
    /// Largest `|Ψ(T^k x) - Ψ(T^{k+1} x) - Φ(T^k x)|`; zero up to rounding.
    pub identity_residual: f64,
    pub keane: KeaneVerdict,
}

/// Transfer function from values of `Φ` along the orbit: `values[k] =
/// Φ(T^k x)`.
fn psi_from_values<S: Scalar>(
    t: &Iem<S>,
    base: &S,
    points: Vec<S>,
    values: &[S],
    keane: KeaneVerdict,
) -> Result<PsiOrbitTable<S>> {
    let ctx = t.ctx();
    let n = values.len();
    let mut sums = Vec::with_capacity(n + 1);
    let mut acc = S::zero_in(ctx);
    sums.push(acc.clone());
    for v in values {
        acc = acc.add(v);
        sums.push(acc.clone());
    }
    let mut total = S::zero_in(ctx);
    for s in &sums[..n] {
        total = total.add(s);
    }
    let c = total.div(&S::from_i64(ctx, n.max(1) as i64))?;
    let psi: Vec<S> = sums.iter().map(|s| c.sub(s)).collect();
    let mut residual: f64 = 0.0;
    for k in 0..n {
        let r = psi[k].sub(&psi[k + 1]).sub(&values[k]);
        residual = residual.max(r.to_f64().abs());
    }
    let sup_birkhoff = sums.iter().map(|s| s.to_f64().abs()).fold(0.0, f64::max);
    Ok(PsiOrbitTable {
        base: base.clone(),
        entries: points
            .into_iter()
            .zip(psi)
            .enumerate()
            .map(|(k, (point, psi))| PsiEntry { k, point, psi })
            .collect(),
        normalization: c,
        sup_birkhoff,
        identity_residual: residual,
        keane,
    })
}

fn keane_gate<S: Scalar>(t: &Iem<S>, horizon: usize) -> Result<KeaneVerdict> {
    let v = t.keane_check(horizon);
    if let KeaneVerdict::Fail { step, from, to } = &v {
        return Err(Error::KeaneViolation(format!(
            "orbit of the left end of {from} reaches the left end of {to} after {step} steps"
        )));
    }
    Ok(v)
}

/// `Ψ(T^k x) = c - S_k Φ(x)` for `k < N`, with `c` making the recorded
/// values average to zero.
pub fn psi_on_orbit<S: Scalar>(
    t: &Iem<S>,
    phi: &PiecewiseFunction<S>,
    base: &S,
    n: usize,
) -> Result<PsiOrbitTable<S>> {
    let keane = keane_gate(t, n)?;
    let coded = t.coded_orbit(base, n)?;
    let mut values = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for (x, a) in coded {
        values.push(phi.pieces[a].eval(&x.sub(&t.left(a)))?);
        points.push(x);
    }
    psi_from_values(t, base, points, &values, keane)
}

/// Bound on all Birkhoff sums at 0 from the decay of special sums.
#[derive(Debug, Clone, Serialize)]
pub struct BoundednessCertificate {
    /// `(n, ‖Z(n+1)‖ ‖S(0,n)Φ‖∞)`.
    pub terms: Vec<(usize, f64)>,
    pub partial_sum: f64,
    /// Partial sum plus the geometric tail estimate.
    pub majorant: f64,
    pub decay_rate: f64,
    pub converged: bool,
}

/// Partial sums of `Σ_n ‖Z(n+1)‖ ‖S(0,n)Φ‖∞` for `n < n_max`; the series is
/// accepted when its terms decay geometrically over the last quarter.
pub fn boundedness_certificate<S: Scalar>(
    trace: &InductionTrace<S>,
    phi: &PiecewiseFunction<S>,
    n_max: usize,
) -> Result<BoundednessCertificate> {
    if n_max + 1 > trace.blocks().len() {
        return Err(Error::RangeError(format!(
            "need {} blocks, have {}",
            n_max + 1,
            trace.blocks().len()
        )));
    }
    let mut terms = Vec::with_capacity(n_max);
    let mut s = phi.clone();
    for n in 0..n_max {
        if n > 0 {
            s = special_sum(trace, n - 1, n, &s)?;
        }
        let sup = function_sup_f64(&s)?;
        let z = num_traits::ToPrimitive::to_f64(&trace.z(n + 1).norm()).unwrap_or(f64::INFINITY);
        terms.push((n, z * sup));
    }
    let partial: f64 = terms.iter().map(|t| t.1).sum();
    if terms.iter().all(|t| t.1 == 0.0) {
        return Ok(BoundednessCertificate {
            terms,
            partial_sum: 0.0,
            majorant: 0.0,
            decay_rate: 0.0,
            converged: true,
        });
    }
    let k = (terms.len() / 4).max(3);
    if terms.len() < k {
        return Err(Error::NotSummable(format!("only {} terms", terms.len())));
    }
    let tail = &terms[terms.len() - k..];
    let xs: Vec<f64> = tail.iter().map(|t| t.0 as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|t| t.1.max(f64::MIN_POSITIVE).log2()).collect();
    let fit = linear_fit(&xs, &ys)?;
    if !fit.slope_below(0.0, 2.0) {
        return Err(Error::NotSummable(format!(
            "terms {:?} do not decay over the last {k} levels (log2 slope {:.4} ± {:.4})",
            tail,
            fit.slope,
            fit.slope_se
        )));
    }
    let r = fit.slope.exp2();
    let last = terms.last().unwrap().1;
    Ok(BoundednessCertificate {
        terms,
        partial_sum: partial,
        majorant: partial + last * r / (1.0 - r),
        decay_rate: r,
        converged: true,
    })
}

/// `(N, |S_N Φ(0)|)` for each requested `N`, with the largest failure of
/// `|S_N Φ(0)| ≤ majorant` (none when every sum is below it).
pub fn check_majorant<S: Scalar>(
    t: &Iem<S>,
    phi: &PiecewiseFunction<S>,
    majorant: f64,
    ns: &[usize],
) -> Result<(Vec<(usize, f64)>, Option<(usize, f64)>)> {
    let top = ns.iter().copied().max().unwrap_or(0);
    let zero = S::zero_in(t.ctx());
    let sums = birkhoff_sums(t, phi, &zero, top)?;
    let vals: Vec<(usize, f64)> = ns.iter().map(|&n| (n, sums[n].to_f64().abs())).collect();
    let worst = vals
        .iter()
        .filter(|v| v.1 > majorant)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .copied();
    Ok((vals, worst))
}

/// Result of a planted coboundary round trip.
#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub orbit_length: usize,
    /// `max_k |Ψ(T^k 0) - Ψ0(T^k 0) - c|` with `c` the mean difference.
    pub max_deviation: f64,
    pub offset: String,
    pub identity_residual: f64,
    pub sup_birkhoff: f64,
}

/// `Φ = Ψ0 - Ψ0∘T` as a piecewise function on the partition of `T`.
pub fn coboundary<S: Scalar>(
    psi0: &PiecewiseFunction<S>,
    t: &Iem<S>,
) -> Result<PiecewiseFunction<S>> {
    let mut phi = psi0.sub(&compose_with_map(psi0, t)?)?;
    phi.kind = FunctionKind::Bv;
    Ok(phi)
}

/// Recover a transfer function for the coboundary `phi` of `psi0` from the
/// Birkhoff sums of `phi` along the orbit of 0, and compare it with `psi0`
/// up to an additive constant.
pub fn coboundary_roundtrip<S: Scalar>(
    t: &Iem<S>,
    phi: &PiecewiseFunction<S>,
    psi0: &PiecewiseFunction<S>,
    n: usize,
) -> Result<RoundtripReport> {
    let zero = S::zero_in(t.ctx());
    let table = psi_on_orbit(t, phi, &zero, n)?;
    let ctx = t.ctx();
    let mut diffs = Vec::with_capacity(n);
    let mut total = S::zero_in(ctx);
    for e in &table.entries {
        let dv = e.psi.sub(&psi0.eval_at(t, &e.point)?);
        total = total.add(&dv);
        diffs.push(dv);
    }
    let offset = total.div(&S::from_i64(ctx, n.max(1) as i64))?;
    let max_deviation = diffs
        .iter()
        .map(|dv| dv.sub(&offset).to_f64().abs())
        .fold(0.0, f64::max);
    Ok(RoundtripReport {
        orbit_length: n,
        max_deviation,
        offset: offset.to_interchange(),
        identity_residual: table.identity_residual,
        sup_birkhoff: table.sup_birkhoff,
    })
}

/// `Ψ0 ∘ T` as a piecewise function on the partition of `T`; needs
/// decidable comparisons between interval endpoints.
pub fn compose_with_map<S: Scalar>(
    psi0: &PiecewiseFunction<S>,
    t: &Iem<S>,
) -> Result<PiecewiseFunction<S>> {
    let d = t.d();
    let ctx = t.ctx().clone();
    let mut pieces = Vec::with_capacity(d);
    for alpha in 0..d {
        let img = t.image_left(alpha);
        let len_a = t.length(alpha).clone();
        let mut segments = Vec::new();
        for beta in t.pair().row(0).iter().copied() {
            let lb = t.left(beta);
            let rb = lb.add(t.length(beta));
            // overlap of [img, img + len_a) with [lb, rb), in α-local terms
            let a = lb.sub(&img).max_checked(&S::zero_in(&ctx))?;
            let b = rb.sub(&img);
            let b = if b.cmp_checked(&len_a)? == Ordering::Greater { len_a.clone() } else { b };
            if a.cmp_checked(&b)? != Ordering::Less {
                continue;
            }
            let offset = img.add(&a).sub(&lb);
            let piece = psi0.pieces[beta].translated(&offset, &b.sub(&a))?;
            for s in piece.segments {
                segments.push(crate::function::Segment {
                    start: s.start.add(&a),
                    poly: s.poly.shift(&a.neg()),
                });
            }
        }
        pieces.push(crate::function::Piece { segments });
    }
    Ok(PiecewiseFunction::new(
        psi0.level,
        FunctionKind::Bv,
        pieces,
        t.lengths().to_vec(),
    ))
}

/// Solver parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    /// Levels summed in the correction series.
    pub truncation: usize,
    /// Look-ahead depth of the stable-space estimates.
    pub depth: usize,
    pub delta: f64,
    pub seed: u64,
    /// Levels used by the boundedness certificate and decay profile.
    pub levels: usize,
    /// Orbit length of the transfer-function table.
    pub orbit: usize,
}

impl Default for SolveConfig {
    /// The stable-space estimates are accurate to about their gap ratio, and
    /// any error there is amplified along the unstable directions; 64 levels
    /// of look-ahead keep it below double precision on the benchmarks.
    fn default() -> Self {
        SolveConfig {
            truncation: 50,
            depth: 64,
            delta: crate::roth::DEFAULT_DELTA,
            seed: 1,
            levels: 50,
            orbit: 10_000,
        }
    }
}

/// Everything the solver produces for one datum.
#[derive(Debug, Clone)]
pub struct Solution<S: Scalar> {
    pub primitive: PrimitiveCandidate<S>,
    pub decay: DecayProfile,
    pub certificate: std::result::Result<BoundednessCertificate, String>,
    pub table: PsiOrbitTable<S>,
    pub functoriality: Vec<FunctorialityResidual>,
}

/// Blocks a trace needs for [`solve`] with this configuration.
pub fn blocks_needed(cfg: &SolveConfig) -> usize {
    (cfg.truncation.max(cfg.levels + 1)) + cfg.depth
}

/// Full pipeline: corrected primitive, decay profile of the datum,
/// boundedness certificate, transfer function on the orbit of 0.
pub fn solve<S: Scalar>(
    trace: &InductionTrace<S>,
    phi: &PiecewiseFunction<S>,
    cfg: &SolveConfig,
) -> Result<Solution<S>> {
    let cocycle = MatrixCocycle::from_trace(trace);
    let mut cache = FrameCache::new(&cocycle, cfg.depth, cfg.delta, cfg.seed);
    let primitive = build_primitive(trace, &mut cache, phi, cfg.truncation)?;
    let decay = decay_profile(trace, phi, cfg.levels.min(trace.blocks().len()))?;
    let certificate = boundedness_certificate(trace, &primitive.phi, cfg.levels)
        .map_err(|e| e.to_string());
    let zero = S::zero_in(trace.ctx());
    let table = psi_on_orbit(trace.level(0), &primitive.phi, &zero, cfg.orbit)?;
    let pairs: Vec<(usize, usize)> = [(0, 1), (0, 2), (1, 3)]
        .into_iter()
        .filter(|&(_, n)| n < cfg.truncation)
        .collect();
    let functoriality = functoriality_residuals(trace, &mut cache, phi, &pairs, cfg.truncation)?;
    Ok(Solution {
        primitive,
        decay,
        certificate,
        table,
        functoriality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Piece, Poly};
    use crate::perm::PermutationPair;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn primitive_of_constant_is_centered_line() {
        let lengths = vec![q(2, 5), q(3, 5)];
        let f = PiecewiseFunction::from_constants(0, &[q(3, 1), q(-2, 1)], &lengths);
        let p = p0_primitive(&f).unwrap();
        // 3 (t - 1/5) on the first interval
        assert_eq!(p.eval_local(0, &q(0, 1)).unwrap(), q(-3, 5));
        assert_eq!(p.eval_local(0, &q(2, 5)).unwrap(), q(3, 5));
        assert!(p.means().unwrap().iter().all(|m| m == &q(0, 1)));
    }

    #[test]
    fn primitive_of_centered_line_is_quadratic() {
        // φ = 2t - ℓ on [0, ℓ) has primitive t² - ℓ t + ℓ²/6
        let l = q(1, 3);
        let f = PiecewiseFunction::new(
            0,
            FunctionKind::BvStar,
            vec![Piece::poly(Poly::new(vec![-l.clone(), q(2, 1)]))],
            vec![l.clone()],
        );
        let p = p0_primitive(&f).unwrap();
        let c = &p.pieces[0].segments[0].poly.coeffs;
        assert_eq!(c[0], &l * &l / BigInt::from(6));
        assert_eq!(c[1], -l.clone());
        assert_eq!(c[2], q(1, 1));
    }

    #[test]
    fn composition_with_map_matches_pointwise() {
        let t = Iem::new(PermutationPair::symmetric(3), vec![q(2, 7), q(3, 7), q(2, 7)], ()).unwrap();
        let psi0 = PiecewiseFunction::new(
            0,
            FunctionKind::Bv,
            (0..3)
                .map(|a| Piece::poly(Poly::new(vec![q(a, 1), q(1, 1), q(a - 1, 1)])))
                .collect(),
            t.lengths().to_vec(),
        );
        let comp = compose_with_map(&psi0, &t).unwrap();
        for k in 0..50 {
            let x = q(k, 50);
            let a = t.locate(&x).unwrap();
            let y = t.evaluate(&x).unwrap();
            let b = t.locate(&y).unwrap();
            let want = psi0.eval_local(b, &(&y - t.left(b))).unwrap();
            assert_eq!(comp.eval_local(a, &(&x - t.left(a))).unwrap(), want);
        }
    }
}
