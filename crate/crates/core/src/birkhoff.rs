//! Special Birkhoff sums, the orbit decomposition of plain Birkhoff sums,
//! and the decay profile of mean-zero data.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::fit::{tail_fit, LinearFit};
use crate::function::{Piece, PiecewiseFunction};
use crate::iem::Iem;
use crate::induction::{return_times, InductionTrace};
use crate::matrix::IntMatrix;

fn step_range<S: Scalar>(trace: &InductionTrace<S>, m: usize, n: usize) -> Result<(usize, usize)> {
    if m > n || n > trace.blocks().len() {
        return Err(Error::RangeError(format!(
            "need 0 <= m <= n <= {}, got m={m}, n={n}",
            trace.blocks().len()
        )));
    }
    let start = |k: usize| if k == 0 { 0 } else { trace.block(k).end };
    Ok((start(m), start(n)))
}

fn check_level<S: Scalar>(phi: &PiecewiseFunction<S>, m: usize) -> Result<()> {
    if phi.level != m {
        return Err(Error::RangeError(format!(
            "function lives at level {} but level {m} was requested",
            phi.level
        )));
    }
    Ok(())
}

/// `S(m, n) φ`: on `I_β(n)` the sum of `φ` along the orbit segment of length
/// `Q_β(m, n)` before the first return to `I(n)`.
///
/// Each elementary step replaces the loser's piece by the loser's piece plus
/// the winner's piece translated into position, and cuts the winner's piece
/// down to its new interval.
pub fn special_sum<S: Scalar>(
    trace: &InductionTrace<S>,
    m: usize,
    n: usize,
    phi: &PiecewiseFunction<S>,
) -> Result<PiecewiseFunction<S>> {
    check_level(phi, m)?;
    let (from, to) = step_range(trace, m, n)?;
    let mut pieces = phi.pieces.clone();
    let mut lengths = trace.level(m).lengths().to_vec();
    for s in &trace.steps()[from..to] {
        let (w, l) = (s.winner, s.loser);
        let moved = pieces[w].translated(&s.shift, &lengths[l])?;
        pieces[l] = pieces[l].add(&moved)?;
        pieces[w] = pieces[w].restrict(&s.shift)?;
        lengths[w] = s.shift.clone();
    }
    Ok(PiecewiseFunction::new(
        n,
        phi.kind,
        pieces,
        trace.level(n).lengths().to_vec(),
    ))
}

/// Same operator evaluated from the tower itineraries of level `n` over
/// level `m`; used to cross-check [`special_sum`].
pub fn special_sum_towers<S: Scalar>(
    trace: &InductionTrace<S>,
    m: usize,
    n: usize,
    phi: &PiecewiseFunction<S>,
) -> Result<PiecewiseFunction<S>> {
    check_level(phi, m)?;
    if m == n {
        return Ok(phi.clone());
    }
    let towers = trace.tower_structure(m, n)?;
    let lengths = trace.level(n).lengths().to_vec();
    let pieces = towers
        .iter()
        .zip(&lengths)
        .map(|(itin, len)| {
            let mut acc: Option<Piece<S>> = None;
            for (a, off) in itin {
                let p = phi.pieces[*a].translated(off, len)?;
                acc = Some(match acc {
                    None => p,
                    Some(q) => q.add(&p)?,
                });
            }
            Ok(acc.expect("itineraries are never empty"))
        })
        .collect::<Result<_>>()?;
    Ok(PiecewiseFunction::new(n, phi.kind, pieces, lengths))
}

/// Matrix of `S(m, n)` on per-letter constants: the transpose of `Q(m, n)`.
pub fn gamma_matrix<S: Scalar>(trace: &InductionTrace<S>, m: usize, n: usize) -> Result<IntMatrix> {
    if m >= n {
        return Err(Error::RangeError(format!("need m < n, got m={m}, n={n}")));
    }
    Ok(trace.cocycle(m, n)?.transpose())
}

/// `(Φ(x), Φ(Tx), ...)` partial sums: entry `k` is `Σ_{i<k} Φ(T^i x)`.
pub fn birkhoff_sums<S: Scalar>(
    t: &Iem<S>,
    phi: &PiecewiseFunction<S>,
    x: &S,
    n: usize,
) -> Result<Vec<S>> {
    let lefts: Vec<S> = (0..t.d()).map(|a| t.left(a)).collect();
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = S::zero_in(t.ctx());
    out.push(acc.clone());
    for (y, a) in t.coded_orbit(x, n)? {
        acc = acc.add(&phi.pieces[a].eval(&y.sub(&lefts[a]))?);
        out.push(acc.clone());
    }
    Ok(out)
}

/// One term `S(0, level) Φ (point)` of an orbit decomposition.
#[derive(Debug, Clone)]
pub struct OrbitTerm<S> {
    pub level: usize,
    pub point: S,
    /// Letter `β` with `point ∈ I_β(level)`.
    pub letter: usize,
    /// Return time of `point` to `I(level)`.
    pub length: BigInt,
}

/// Splitting of the orbit segment `0, T0, ..., T^{N-1}0` into full returns
/// to the nested domains `I(n)`.
#[derive(Debug, Clone)]
pub struct OrbitDecomposition<S> {
    pub total: usize,
    pub terms: Vec<OrbitTerm<S>>,
}

impl<S: Scalar> OrbitDecomposition<S> {
    /// Number of terms at every level `0..=max level`.
    pub fn level_counts(&self) -> Vec<usize> {
        let top = self.terms.iter().map(|t| t.level).max().unwrap_or(0);
        let mut c = vec![0; top + 1];
        for t in &self.terms {
            c[t.level] += 1;
        }
        c
    }

    /// Levels `n` where the count exceeds `‖Z(n+1)‖`.
    pub fn count_violations(&self, trace: &InductionTrace<S>) -> Vec<(usize, usize, BigInt)> {
        self.level_counts()
            .into_iter()
            .enumerate()
            .filter_map(|(n, c)| {
                let bound = trace.z(n + 1).norm();
                (BigInt::from(c) > bound).then_some((n, c, bound))
            })
            .collect()
    }

    /// `Σ_j S(0, n_j) Φ (x_j)` for `Φ` at level 0.
    pub fn reconstruct(&self, trace: &InductionTrace<S>, phi: &PiecewiseFunction<S>) -> Result<S> {
        check_level(phi, 0)?;
        let top = self.terms.iter().map(|t| t.level).max().unwrap_or(0);
        let mut sums = Vec::with_capacity(top + 1);
        sums.push(phi.clone());
        for n in 1..=top {
            let next = special_sum(trace, n - 1, n, &sums[n - 1])?;
            sums.push(next);
        }
        let mut acc = S::zero_in(trace.ctx());
        for t in &self.terms {
            let local = t.point.sub(&trace.level(t.level).left(t.letter));
            acc = acc.add(&sums[t.level].pieces[t.letter].eval(&local)?);
        }
        Ok(acc)
    }
}

/// Greedy tower descent for the orbit of 0: start at the highest level whose
/// return time of 0 is at most `N`, take full returns while they fit, then
/// drop one level. Levels never increase, so every level contributes at most
/// one return of the next level up.
pub fn orbit_decomposition<S: Scalar>(
    trace: &InductionTrace<S>,
    total: usize,
) -> Result<OrbitDecomposition<S>> {
    if total == 0 {
        return Err(Error::RangeError("orbit length must be at least 1".into()));
    }
    let ctx = trace.ctx();
    let zero = S::zero_in(ctx);
    let budget = BigInt::from(total);
    let ret = |n: usize, x: &S| -> Result<(usize, BigInt)> {
        let b = trace.level(n).locate(x)?;
        Ok((b, return_times(trace.q0(n))[b].clone()))
    };
    let len = trace.blocks().len();
    let mut top = 0;
    loop {
        if top + 1 > len {
            return Err(Error::HorizonExceeded(format!(
                "return time of 0 to I({len}) is still at most {total}; compute more blocks"
            )));
        }
        if ret(top + 1, &zero)?.1 > budget {
            break;
        }
        top += 1;
    }
    let mut terms = Vec::new();
    let mut level = top;
    let mut x = zero;
    let mut left = budget;
    while left > BigInt::from(0) {
        let (letter, r) = loop {
            let (b, r) = ret(level, &x)?;
            if r <= left || level == 0 {
                break (b, r);
            }
            level -= 1;
        };
        let next = trace.level(level).evaluate(&x)?;
        left -= &r;
        terms.push(OrbitTerm {
            level,
            point: x,
            letter,
            length: r,
        });
        x = next;
    }
    Ok(OrbitDecomposition { total, terms })
}

/// `a ≤ b`, or `true` when the comparison cannot be decided at the working
/// precision (an inequality is only reported as violated when certain).
fn le_or_undecided<S: Scalar>(a: &S, b: &S) -> bool {
    !matches!(a.cmp_checked(b), Ok(Ordering::Greater))
}

fn sup<S: Scalar>(f: &PiecewiseFunction<S>) -> Result<(S, bool)> {
    f.sup_norm()
}

/// One level of a decay profile.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRecord {
    pub n: usize,
    /// `‖Q(0, n)‖` (max column sum).
    pub q_norm: String,
    /// `‖Z(n)‖`, `"1"` at level 0.
    pub z_norm: String,
    /// `‖S(0, n) φ‖∞`.
    pub sum_sup: String,
    /// `‖φ_n‖∞` for the per-letter mean-zero part.
    pub phi_sup: String,
    /// `max_α Var_{I_α(n)} φ_n`.
    pub phi_max_var: String,
    /// `‖χ_n‖∞` for the per-letter constant part.
    pub chi_sup: String,
    /// `‖S(n-1, n) φ_{n-1}‖∞`; at level 0 this is `‖φ‖∞`.
    pub step_sup: String,
    pub log2_q_norm: f64,
    pub log2_sum_sup: f64,
}

/// Result of [`decay_profile`].
#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub records: Vec<DecayRecord>,
    /// `Var φ`.
    pub variation: String,
    /// `‖φ‖∞`.
    pub sup: String,
    /// Fit of `log ‖S(0,n)φ‖∞` against `log ‖Q(0,n)‖` over the second half.
    pub exponent: Option<LinearFit>,
    /// Whether every sup norm and variation was computed exactly (rather
    /// than bounded).
    pub exact: bool,
}

/// Measure `‖S(0, n) φ‖∞` for `n ≤ n_max` and check along the way the
/// chain of bounds on the splitting `S(n-1,n) φ_{n-1} = φ_n + χ_n`:
///
/// - `‖φ_n‖∞ ≤ max_α Var_{I_α(n)} φ_n ≤ Var φ`,
/// - `‖χ_0‖∞ ≤ ‖φ‖∞`,
/// - `‖χ_n‖∞ ≤ ‖S(n-1,n) φ_{n-1}‖∞ ≤ ‖Z(n)‖ Var φ`.
///
/// A violated bound is a defect and is raised as `BoundViolated`.
pub fn decay_profile<S: Scalar>(
    trace: &InductionTrace<S>,
    phi: &PiecewiseFunction<S>,
    n_max: usize,
) -> Result<DecayProfile> {
    check_level(phi, 0)?;
    step_range(trace, 0, n_max)?;
    phi.require_mean_zero()?;
    let (var_phi, var_exact) = phi.variation()?;
    let (sup_phi, sup_exact) = sup(phi)?;
    let mut exact = var_exact && sup_exact;
    let violated = |what: String| Err(Error::BoundViolated(what));

    let mut records = Vec::with_capacity(n_max + 1);
    let mut total = phi.clone();
    let mut step_sum = phi.clone();
    for n in 0..=n_max {
        if n > 0 {
            total = special_sum(trace, n - 1, n, &total)?;
        }
        let (phi_n, chi_n) = step_sum.mean_decompose()?;
        let (step_sup, e0) = sup(&step_sum)?;
        let (phi_sup, e1) = sup(&phi_n)?;
        let (chi_sup, e2) = sup(&chi_n)?;
        let (vars, e3) = phi_n.letter_variations()?;
        let (sum_sup, e4) = sup(&total)?;
        exact &= e0 && e1 && e2 && e3 && e4;
        let mut max_var = S::zero_in(trace.ctx());
        for v in &vars {
            max_var = max_var.max_bound(v)?;
        }
        if !le_or_undecided(&phi_sup, &max_var) {
            return violated(format!(
                "level {n}: sup of mean-zero part {} exceeds its largest interval variation {}",
                phi_sup.to_interchange(),
                max_var.to_interchange()
            ));
        }
        if !le_or_undecided(&max_var, &var_phi) {
            return violated(format!(
                "level {n}: interval variation {} exceeds Var φ = {}",
                max_var.to_interchange(),
                var_phi.to_interchange()
            ));
        }
        if !le_or_undecided(&chi_sup, &step_sup) {
            return violated(format!(
                "level {n}: sup of constant part {} exceeds sup of the special sum {}",
                chi_sup.to_interchange(),
                step_sup.to_interchange()
            ));
        }
        let z_norm = if n == 0 {
            BigInt::from(1)
        } else {
            trace.z(n).norm()
        };
        if n > 0 {
            let bound = var_phi.mul_int(&z_norm);
            if !le_or_undecided(&step_sup, &bound) {
                return violated(format!(
                    "level {n}: sup of S(n-1,n)φ_(n-1) {} exceeds ‖Z(n)‖ Var φ = {}",
                    step_sup.to_interchange(),
                    bound.to_interchange()
                ));
            }
        }
        let q_norm = trace.q0(n).norm();
        records.push(DecayRecord {
            n,
            q_norm: q_norm.to_string(),
            z_norm: z_norm.to_string(),
            sum_sup: sum_sup.to_interchange(),
            phi_sup: phi_sup.to_interchange(),
            phi_max_var: max_var.to_interchange(),
            chi_sup: chi_sup.to_interchange(),
            step_sup: step_sup.to_interchange(),
            log2_q_norm: trace.q0(n).log2_norm(),
            log2_sum_sup: sum_sup.log2_abs(),
        });
        if n < n_max {
            step_sum = special_sum(trace, n, n + 1, &phi_n)?;
        }
    }
    let xs: Vec<f64> = records.iter().map(|r| r.log2_q_norm).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.log2_sum_sup).collect();
    Ok(DecayProfile {
        records,
        variation: var_phi.to_interchange(),
        sup: sup_phi.to_interchange(),
        exponent: tail_fit(&xs, &ys).ok(),
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;
    use crate::function::{FunctionKind, Poly};
    use crate::induction::{Acceleration, InductionConfig};
    use crate::perm::PermutationPair;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn d3_trace(blocks: usize) -> InductionTrace<BigRational> {
        d3_trace_with(Acceleration::Rv, blocks)
    }

    fn d3_trace_with(acc: Acceleration, blocks: usize) -> InductionTrace<BigRational> {
        let t = Iem::new(
            PermutationPair::symmetric(3),
            vec![
                parse_rational("0.3183098861837906715377675267450287240689").unwrap(),
                parse_rational("0.4142135623730950488016887242096980785696").unwrap(),
                parse_rational("0.2674765514431142796605437490452731973614").unwrap(),
            ],
            (),
        )
        .unwrap();
        InductionTrace::run(t, InductionConfig::new(acc), blocks).unwrap()
    }

    fn linear(tr: &InductionTrace<BigRational>) -> PiecewiseFunction<BigRational> {
        let lengths = tr.level(0).lengths().to_vec();
        let pieces = (0..3)
            .map(|a| Piece::poly(Poly::new(vec![q(a as i64 - 1, 1), q(2 * a as i64 + 1, 3)])))
            .collect();
        PiecewiseFunction::new(0, FunctionKind::Bv, pieces, lengths)
    }

    #[test]
    fn stepwise_and_tower_sums_agree() {
        let tr = d3_trace(12);
        let phi = linear(&tr);
        for (m, n) in [(0, 5), (2, 9), (0, 12)] {
            let phi_m = special_sum(&tr, 0, m, &phi).unwrap();
            let a = special_sum(&tr, m, n, &phi_m).unwrap();
            let b = special_sum_towers(&tr, m, n, &phi_m).unwrap();
            for beta in 0..3 {
                let t = tr.level(n).length(beta).clone() / BigInt::from(3);
                assert_eq!(a.eval_local(beta, &t).unwrap(), b.eval_local(beta, &t).unwrap());
            }
            assert_eq!(a.integral().unwrap(), phi_m.integral().unwrap());
        }
    }

    #[test]
    fn special_sum_matches_direct_orbit_sum() {
        let tr = d3_trace(10);
        let phi = linear(&tr);
        let s = special_sum(&tr, 0, 10, &phi).unwrap();
        let t0 = tr.level(0);
        let q = tr.q0(10);
        let times = return_times(q);
        for beta in 0..3 {
            let x = tr.level(10).left(beta) + tr.level(10).length(beta) / BigInt::from(7);
            let r: usize = times[beta].clone().try_into().unwrap();
            let direct = birkhoff_sums(t0, &phi, &x, r).unwrap();
            let local = &x - tr.level(10).left(beta);
            assert_eq!(direct[r], s.eval_local(beta, &local).unwrap());
        }
    }

    #[test]
    fn gamma_matrix_is_transposed_cocycle() {
        let tr = d3_trace(8);
        let g = gamma_matrix(&tr, 2, 8).unwrap();
        let lengths = tr.level(2).lengths();
        for a in 0..3 {
            let ind = PiecewiseFunction::indicator(2, a, lengths);
            let s = special_sum(&tr, 2, 8, &ind).unwrap();
            let c = s.constants().unwrap();
            for (b, v) in c.iter().enumerate() {
                assert_eq!(v, &BigRational::from_integer(g.get(b, a).clone()));
            }
        }
    }

    #[test]
    fn decomposition_reconstructs_birkhoff_sum() {
        let tr = d3_trace_with(Acceleration::Accelerated, 30);
        let phi = linear(&tr);
        for n in [1, 2, 17, 250] {
            let dec = orbit_decomposition(&tr, n).unwrap();
            assert!(dec.count_violations(&tr).is_empty());
            let direct = birkhoff_sums(tr.level(0), &phi, &q(0, 1), n).unwrap();
            assert_eq!(dec.reconstruct(&tr, &phi).unwrap(), direct[n]);
        }
        let one = orbit_decomposition(&tr, 1).unwrap();
        assert_eq!(one.terms.len(), 1);
        assert_eq!(one.terms[0].level, 0);
    }
}
