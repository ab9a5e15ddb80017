//! Piecewise polynomial data on the intervals of an interval exchange.
//!
//! Every piece lives in the local coordinate `t ∈ [0, λ_α)` of its interval,
//! which makes translations along towers cheap: moving a piece to another
//! position is a Taylor shift of its polynomials.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::iem::Iem;

/// Kind tag of a piecewise function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    /// Constant on every interval.
    Gamma,
    /// Constant on every interval with zero total integral.
    GammaStar,
    /// Bounded variation on every interval.
    Bv,
    /// Bounded variation with zero total integral.
    BvStar,
    /// Lipschitz on every interval with a mean-zero derivative of bounded
    /// variation.
    Bv1,
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionKind::Gamma => "gamma",
            FunctionKind::GammaStar => "gamma_star",
            FunctionKind::Bv => "bv",
            FunctionKind::BvStar => "bv_star",
            FunctionKind::Bv1 => "bv1",
        })
    }
}

/// Polynomial in the local coordinate, lowest degree first.
///
/// The nominal degree (`coeffs.len() - 1`) never grows under translation or
/// addition; zero leading coefficients are not trimmed, since deciding that
/// a coefficient vanishes is not possible for every scalar mode.
#[derive(Debug, Clone)]
pub struct Poly<S> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Poly { coeffs }
    }

    pub fn constant(c: S) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: &S) -> S {
        let mut it = self.coeffs.iter().rev();
        let mut acc = it.next().unwrap().clone();
        for c in it {
            acc = acc.mul(t).add(c);
        }
        acc
    }

    /// `t ↦ p(t + c)`.
    pub fn shift(&self, c: &S) -> Self {
        if self.coeffs.len() == 1 {
            return self.clone();
        }
        let n = self.coeffs.len();
        let mut out: Vec<S> = vec![self.coeffs[n - 1].clone()];
        for a in self.coeffs[..n - 1].iter().rev() {
            // out <- out * (t + c) + a
            let mut next = Vec::with_capacity(out.len() + 1);
            next.push(out[0].mul(c).add(a));
            for i in 1..out.len() {
                next.push(out[i - 1].add(&out[i].mul(c)));
            }
            next.push(out[out.len() - 1].clone());
            out = next;
        }
        Poly { coeffs: out }
    }

    pub fn add(&self, o: &Self) -> Self {
        let (long, short) = if self.coeffs.len() >= o.coeffs.len() {
            (self, o)
        } else {
            (o, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c = c.add(s);
        }
        Poly { coeffs }
    }

    pub fn scale(&self, k: &S) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.mul(k)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            let ctx = self.coeffs[0].context();
            return Poly::constant(S::zero_in(&ctx));
        }
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.mul(&S::from_i64(&c.context(), i as i64)))
                .collect(),
        }
    }

    /// Antiderivative with value `c0` at `t = 0`.
    pub fn antiderivative(&self, c0: S) -> Result<Self> {
        let mut coeffs = vec![c0];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.div(&S::from_i64(&c.context(), i as i64 + 1))?);
        }
        Ok(Poly { coeffs })
    }

    /// `∫_a^b p`.
    pub fn integral(&self, a: &S, b: &S) -> Result<S> {
        let ctx = a.context();
        let f = self.antiderivative(S::zero_in(&ctx))?;
        Ok(f.eval(b).sub(&f.eval(a)))
    }

    /// Coefficients in the Bernstein basis of degree `n` on `[a, b]`.
    fn bernstein(&self, a: &S, b: &S) -> Result<Vec<S>> {
        let ctx = a.context();
        let w = b.sub(a);
        let mut q = self.shift(a).coeffs;
        let mut p = S::one_in(&ctx);
        for c in q.iter_mut() {
            *c = c.mul(&p);
            p = p.mul(&w);
        }
        let n = q.len() - 1;
        let binom = |n: usize, k: usize| -> i64 {
            let mut r: i64 = 1;
            for i in 0..k {
                r = r * (n - i) as i64 / (i + 1) as i64;
            }
            r
        };
        (0..=n)
            .map(|k| {
                let mut acc = S::zero_in(&ctx);
                for (j, c) in q.iter().enumerate().take(k + 1) {
                    let f = S::from_i64(&ctx, binom(k, j)).div(&S::from_i64(&ctx, binom(n, j)))?;
                    acc = acc.add(&c.mul(&f));
                }
                Ok(acc)
            })
            .collect()
    }

    /// Critical point of a quadratic, if it lies strictly inside `(a, b)`.
    fn quadratic_vertex(&self, a: &S, b: &S) -> Result<Option<S>> {
        let ctx = a.context();
        let a2 = &self.coeffs[2];
        if a2.is_zero_checked()? {
            return Ok(None);
        }
        let v = self.coeffs[1].neg().div(&a2.mul(&S::from_i64(&ctx, 2)))?;
        let inside = |x: Result<Ordering>, want: Ordering| x.map(|o| o == want).unwrap_or(true);
        if inside(v.cmp_checked(a), Ordering::Greater) && inside(v.cmp_checked(b), Ordering::Less) {
            Ok(Some(v))
        } else {
            Ok(None)
        }
    }

    /// Degree as far as the enclosures can tell: a leading coefficient that
    /// might be zero is treated as a higher-degree case.
    fn settled_quadratic(&self) -> bool {
        self.degree() == 2 && self.coeffs[2].is_zero_checked().is_ok()
    }

    /// `sup_{[a,b]} |p|`; the flag is `true` when the value is exact rather
    /// than an upper bound (degree three and higher).
    pub fn sup_abs(&self, a: &S, b: &S) -> Result<(S, bool)> {
        let pa = self.eval(a).abs_bound()?;
        if self.degree() == 0 {
            return Ok((pa, true));
        }
        let mut best = pa.max_bound(&self.eval(b).abs_bound()?)?;
        match self.degree() {
            1 => Ok((best, true)),
            2 if self.settled_quadratic() => {
                if let Some(v) = self.quadratic_vertex(a, b)? {
                    best = best.max_bound(&self.eval(&v).abs_bound()?)?;
                }
                Ok((best, true))
            }
            _ => {
                for c in self.bernstein(a, b)? {
                    best = best.max_bound(&c.abs_bound()?)?;
                }
                Ok((best, false))
            }
        }
    }

    /// Total variation on `[a, b]`, exact up to degree two and an upper
    /// bound beyond.
    pub fn variation(&self, a: &S, b: &S) -> Result<(S, bool)> {
        let ctx = a.context();
        match self.degree() {
            0 => Ok((S::zero_in(&ctx), true)),
            1 => Ok((self.eval(b).sub(&self.eval(a)).abs_bound()?, true)),
            2 if self.settled_quadratic() => match self.quadratic_vertex(a, b)? {
                Some(v) => {
                    let pv = self.eval(&v);
                    let left = pv.sub(&self.eval(a)).abs_bound()?;
                    let right = self.eval(b).sub(&pv).abs_bound()?;
                    Ok((left.add(&right), true))
                }
                None => Ok((self.eval(b).sub(&self.eval(a)).abs_bound()?, true)),
            },
            _ => {
                let (s, _) = self.derivative().sup_abs(a, b)?;
                Ok((s.mul(&b.sub(a)), false))
            }
        }
    }
}

/// A polynomial valid from `start` to the next segment's start.
#[derive(Debug, Clone)]
pub struct Segment<S> {
    pub start: S,
    pub poly: Poly<S>,
}

/// Piecewise polynomial on `[0, len)`; the first segment starts at 0 and
/// starts are strictly increasing.
#[derive(Debug, Clone)]
pub struct Piece<S> {
    pub segments: Vec<Segment<S>>,
}

impl<S: Scalar> Piece<S> {
    pub fn poly(p: Poly<S>) -> Self {
        let ctx = p.coeffs[0].context();
        Piece {
            segments: vec![Segment {
                start: S::zero_in(&ctx),
                poly: p,
            }],
        }
    }

    pub fn constant(c: S) -> Self {
        Piece::poly(Poly::constant(c))
    }

    /// Step function with the given values on `[b_i, b_{i+1})`; the first
    /// breakpoint must be 0.
    pub fn steps(breaks: Vec<S>, values: Vec<S>) -> Result<Self> {
        if breaks.len() != values.len() || breaks.is_empty() {
            return Err(Error::UnsupportedKind(
                "sampled piece needs one value per breakpoint".into(),
            ));
        }
        if !breaks[0].is_zero_checked()? {
            return Err(Error::UnsupportedKind(
                "sampled piece must start at local coordinate 0".into(),
            ));
        }
        for w in breaks.windows(2) {
            if w[0].cmp_checked(&w[1])? != Ordering::Less {
                return Err(Error::UnsupportedKind(
                    "sampled breakpoints must increase".into(),
                ));
            }
        }
        Ok(Piece {
            segments: breaks
                .into_iter()
                .zip(values)
                .map(|(start, v)| Segment {
                    start,
                    poly: Poly::constant(v),
                })
                .collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.segments.iter().map(|s| s.poly.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, t: &S) -> Result<S> {
        let mut idx = 0;
        for (i, s) in self.segments.iter().enumerate().skip(1) {
            if t.cmp_checked(&s.start)? == Ordering::Less {
                break;
            }
            idx = i;
        }
        Ok(self.segments[idx].poly.eval(t))
    }
}

/// Order of two breakpoints. Enclosures that overlap are identified: in
/// tracked-real mode breakpoints produced by different routes through the
/// same tower structure agree only up to rounding.
fn cmp_break<S: Scalar>(a: &S, b: &S) -> Result<Ordering> {
    match a.cmp_checked(b) {
        Err(Error::PrecisionExhausted(_)) if !S::is_exact() => Ok(Ordering::Equal),
        r => r,
    }
}

impl<S: Scalar> Piece<S> {
    /// End of segment `i` on a piece of length `len`.
    fn seg_end<'a>(&'a self, i: usize, len: &'a S) -> &'a S {
        self.segments.get(i + 1).map_or(len, |s| &s.start)
    }

    /// Keep only `[0, len)`.
    pub fn restrict(&self, len: &S) -> Result<Self> {
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 && cmp_break(&s.start, len)? != Ordering::Less {
                break;
            }
            segments.push(s.clone());
        }
        Ok(Piece { segments })
    }

    /// `t ↦ self(t + c)` on `[0, len)`.
    pub fn translated(&self, c: &S, len: &S) -> Result<Self> {
        let ctx = c.context();
        if self.segments.len() == 1 {
            return Ok(Piece {
                segments: vec![Segment {
                    start: S::zero_in(&ctx),
                    poly: self.segments[0].poly.shift(c),
                }],
            });
        }
        let end = c.add(len);
        let mut segments = Vec::new();
        for (i, s) in self.segments.iter().enumerate() {
            let seg_end_val = self.seg_end(i, &end).clone();
            // skip segments ending at or before c
            if i + 1 < self.segments.len() && cmp_break(&seg_end_val, c)? != Ordering::Greater {
                continue;
            }
            if cmp_break(&s.start, &end)? != Ordering::Less {
                break;
            }
            let start = if segments.is_empty() {
                S::zero_in(&ctx)
            } else {
                s.start.sub(c)
            };
            segments.push(Segment {
                start,
                poly: s.poly.shift(c),
            });
        }
        Ok(Piece { segments })
    }

    /// Pointwise sum of two pieces on the same interval.
    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.segments.len() == 1 && o.segments.len() == 1 {
            return Ok(Piece {
                segments: vec![Segment {
                    start: self.segments[0].start.clone(),
                    poly: self.segments[0].poly.add(&o.segments[0].poly),
                }],
            });
        }
        let (mut i, mut j) = (0, 0);
        let mut segments: Vec<Segment<S>> = Vec::new();
        loop {
            let start = match (i, j) {
                (0, 0) => self.segments[0].start.clone(),
                _ => {
                    let a = &self.segments[i].start;
                    let b = &o.segments[j].start;
                    a.max_bound(b)?
                }
            };
            segments.push(Segment {
                start,
                poly: self.segments[i].poly.add(&o.segments[j].poly),
            });
            let ni = self.segments.get(i + 1).map(|s| &s.start);
            let nj = o.segments.get(j + 1).map(|s| &s.start);
            match (ni, nj) {
                (None, None) => break,
                (Some(_), None) => i += 1,
                (None, Some(_)) => j += 1,
                (Some(a), Some(b)) => match cmp_break(a, b)? {
                    Ordering::Less => i += 1,
                    Ordering::Greater => j += 1,
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
        Ok(Piece { segments })
    }

    pub fn map_polys(&self, f: impl Fn(&Poly<S>) -> Poly<S>) -> Self {
        Piece {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    start: s.start.clone(),
                    poly: f(&s.poly),
                })
                .collect(),
        }
    }

    pub fn scale(&self, k: &S) -> Self {
        self.map_polys(|p| p.scale(k))
    }

    pub fn neg(&self) -> Self {
        self.map_polys(|p| p.neg())
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn integral(&self, len: &S) -> Result<S> {
        let ctx = len.context();
        let mut acc = S::zero_in(&ctx);
        for (i, s) in self.segments.iter().enumerate() {
            acc = acc.add(&s.poly.integral(&s.start, self.seg_end(i, len))?);
        }
        Ok(acc)
    }

    pub fn sup_abs(&self, len: &S) -> Result<(S, bool)> {
        let ctx = len.context();
        let mut best = S::zero_in(&ctx);
        let mut exact = true;
        for (i, s) in self.segments.iter().enumerate() {
            let (v, e) = s.poly.sup_abs(&s.start, self.seg_end(i, len))?;
            best = best.max_bound(&v)?;
            exact &= e;
        }
        Ok((best, exact))
    }

    /// Variation on `[0, len)`, including the jumps between segments.
    pub fn variation(&self, len: &S) -> Result<(S, bool)> {
        let ctx = len.context();
        let mut acc = S::zero_in(&ctx);
        let mut exact = true;
        for (i, s) in self.segments.iter().enumerate() {
            let end = self.seg_end(i, len);
            let (v, e) = s.poly.variation(&s.start, end)?;
            acc = acc.add(&v);
            exact &= e;
            if let Some(next) = self.segments.get(i + 1) {
                let jump = next.poly.eval(&next.start).sub(&s.poly.eval(end));
                acc = acc.add(&jump.abs_bound()?);
            }
        }
        Ok((acc, exact))
    }

    /// Antiderivative with value `c0` at 0, continuous across segments.
    pub fn antiderivative(&self, c0: S, len: &S) -> Result<Self> {
        let mut segments = Vec::with_capacity(self.segments.len());
        let mut value = c0;
        for (i, s) in self.segments.iter().enumerate() {
            let ctx = value.context();
            let f = s.poly.antiderivative(S::zero_in(&ctx))?;
            // F(t) = value + f(t) - f(start)
            let offset = value.sub(&f.eval(&s.start));
            let mut coeffs = f.coeffs;
            coeffs[0] = coeffs[0].add(&offset);
            let poly = Poly { coeffs };
            value = poly.eval(self.seg_end(i, len));
            segments.push(Segment {
                start: s.start.clone(),
                poly,
            });
        }
        Ok(Piece { segments })
    }

    pub fn is_constant_piece(&self) -> bool {
        self.segments.len() == 1 && self.segments[0].poly.degree() == 0
    }
}

/// A function on `⊔ I_α(level)`, one piece per letter.
#[derive(Debug, Clone)]
pub struct PiecewiseFunction<S: Scalar> {
    pub level: usize,
    pub kind: FunctionKind,
    pub pieces: Vec<Piece<S>>,
    /// Interval lengths at `level`.
    pub lengths: Vec<S>,
}

impl<S: Scalar> PiecewiseFunction<S> {
    pub fn new(level: usize, kind: FunctionKind, pieces: Vec<Piece<S>>, lengths: Vec<S>) -> Self {
        assert_eq!(pieces.len(), lengths.len());
        PiecewiseFunction {
            level,
            kind,
            pieces,
            lengths,
        }
    }

    /// Element of `Γ` with the given per-letter constants.
    pub fn from_constants(level: usize, values: &[S], lengths: &[S]) -> Self {
        PiecewiseFunction {
            level,
            kind: FunctionKind::Gamma,
            pieces: values.iter().map(|v| Piece::constant(v.clone())).collect(),
            lengths: lengths.to_vec(),
        }
    }

    /// Characteristic function of `I_α`.
    pub fn indicator(level: usize, letter: usize, lengths: &[S]) -> Self {
        let ctx = lengths[0].context();
        let values: Vec<S> = (0..lengths.len())
            .map(|b| if b == letter { S::one_in(&ctx) } else { S::zero_in(&ctx) })
            .collect();
        PiecewiseFunction::from_constants(level, &values, lengths)
    }

    pub fn zero(level: usize, lengths: &[S]) -> Self {
        let ctx = lengths[0].context();
        let values = vec![S::zero_in(&ctx); lengths.len()];
        PiecewiseFunction::from_constants(level, &values, lengths)
    }

    pub fn ctx(&self) -> S::Ctx {
        self.lengths[0].context()
    }

    pub fn d(&self) -> usize {
        self.pieces.len()
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Value at local coordinate `t` of interval `letter`.
    pub fn eval_local(&self, letter: usize, t: &S) -> Result<S> {
        self.pieces[letter].eval(t)
    }

    /// Value at a point of the domain of `t`, which must be the map at this
    /// function's level.
    pub fn eval_at(&self, t: &Iem<S>, x: &S) -> Result<S> {
        let a = t.locate(x)?;
        self.pieces[a].eval(&x.sub(&t.left(a)))
    }

    pub fn integral_on(&self, letter: usize) -> Result<S> {
        self.pieces[letter].integral(&self.lengths[letter])
    }

    pub fn integral(&self) -> Result<S> {
        let mut acc = S::zero_in(&self.ctx());
        for a in 0..self.d() {
            acc = acc.add(&self.integral_on(a)?);
        }
        Ok(acc)
    }

    /// Per-letter means `∫_{I_α} φ / λ_α`.
    pub fn means(&self) -> Result<Vec<S>> {
        (0..self.d())
            .map(|a| self.integral_on(a)?.div(&self.lengths[a]))
            .collect()
    }

    /// Sup norm, with a flag telling whether it is exact.
    pub fn sup_norm(&self) -> Result<(S, bool)> {
        let mut best = S::zero_in(&self.ctx());
        let mut exact = true;
        for (p, l) in self.pieces.iter().zip(&self.lengths) {
            let (v, e) = p.sup_abs(l)?;
            best = best.max_bound(&v)?;
            exact &= e;
        }
        Ok((best, exact))
    }

    /// `Σ_α Var_{I_α} φ`, with a flag telling whether it is exact.
    pub fn variation(&self) -> Result<(S, bool)> {
        let mut acc = S::zero_in(&self.ctx());
        let mut exact = true;
        for (p, l) in self.pieces.iter().zip(&self.lengths) {
            let (v, e) = p.variation(l)?;
            acc = acc.add(&v);
            exact &= e;
        }
        Ok((acc, exact))
    }

    /// `Var_{I_α} φ` for every letter, with a joint exactness flag.
    pub fn letter_variations(&self) -> Result<(Vec<S>, bool)> {
        let mut out = Vec::with_capacity(self.d());
        let mut exact = true;
        for (p, l) in self.pieces.iter().zip(&self.lengths) {
            let (v, e) = p.variation(l)?;
            out.push(v);
            exact &= e;
        }
        Ok((out, exact))
    }

    /// Per-letter constants when every piece is constant.
    pub fn constants(&self) -> Option<Vec<S>> {
        self.pieces
            .iter()
            .map(|p| p.is_constant_piece().then(|| p.segments[0].poly.coeffs[0].clone()))
            .collect()
    }

    fn zip_with(&self, o: &Self, f: impl Fn(&Piece<S>, &Piece<S>) -> Result<Piece<S>>) -> Result<Self> {
        if self.level != o.level || self.d() != o.d() {
            return Err(Error::RangeError(format!(
                "functions live on different levels ({} and {})",
                self.level, o.level
            )));
        }
        let pieces = self
            .pieces
            .iter()
            .zip(&o.pieces)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(PiecewiseFunction {
            level: self.level,
            kind: join_kind(self.kind, o.kind),
            pieces,
            lengths: self.lengths.clone(),
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, k: &S) -> Self {
        PiecewiseFunction {
            level: self.level,
            kind: self.kind,
            pieces: self.pieces.iter().map(|p| p.scale(k)).collect(),
            lengths: self.lengths.clone(),
        }
    }

    /// Same function with every scalar converted by `f`.
    pub fn map_scalars<R: Scalar>(&self, f: impl Fn(&S) -> R) -> PiecewiseFunction<R> {
        PiecewiseFunction {
            level: self.level,
            kind: self.kind,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    segments: p
                        .segments
                        .iter()
                        .map(|s| Segment {
                            start: f(&s.start),
                            poly: Poly {
                                coeffs: s.poly.coeffs.iter().map(&f).collect(),
                            },
                        })
                        .collect(),
                })
                .collect(),
            lengths: self.lengths.iter().map(&f).collect(),
        }
    }

    /// Split `φ = φ_0 + χ` with `χ` the per-letter means and `φ_0` mean-zero
    /// on every interval.
    pub fn mean_decompose(&self) -> Result<(Self, Self)> {
        let means = self.means()?;
        let chi = PiecewiseFunction::from_constants(self.level, &means, &self.lengths);
        let chi = PiecewiseFunction {
            kind: if self.kind.is_mean_zero() {
                FunctionKind::GammaStar
            } else {
                FunctionKind::Gamma
            },
            ..chi
        };
        let mut phi0 = self.sub(&chi)?;
        phi0.kind = self.kind;
        Ok((phi0, chi))
    }

    /// Retag as mean-zero after checking the total integral vanishes.
    pub fn require_mean_zero(&self) -> Result<()> {
        let i = self.integral()?;
        match i.sign() {
            Ok(Ordering::Equal) => Ok(()),
            Ok(_) if !S::is_exact() && i.to_f64().abs() < 1e-30 => Ok(()),
            Err(_) => Ok(()),
            Ok(_) => Err(Error::UnsupportedKind(format!(
                "function has total integral {} but a mean-zero datum is required",
                i.to_interchange()
            ))),
        }
    }
}

impl FunctionKind {
    pub fn is_mean_zero(self) -> bool {
        matches!(
            self,
            FunctionKind::GammaStar | FunctionKind::BvStar | FunctionKind::Bv1
        )
    }

    pub fn is_constant(self) -> bool {
        matches!(self, FunctionKind::Gamma | FunctionKind::GammaStar)
    }
}

fn join_kind(a: FunctionKind, b: FunctionKind) -> FunctionKind {
    use FunctionKind::*;
    match (a, b) {
        (x, y) if x == y => x,
        (Gamma | GammaStar, Gamma | GammaStar) => Gamma,
        _ => Bv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn poly(c: &[(i64, i64)]) -> Poly<BigRational> {
        Poly::new(c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = poly(&[(1, 1), (-2, 3), (5, 1), (1, 7)]);
        let c = q(3, 4);
        let s = p.shift(&c);
        for t in [q(0, 1), q(1, 3), q(-2, 1)] {
            assert_eq!(s.eval(&t), p.eval(&(&t + &c)));
        }
    }

    #[test]
    fn sup_and_variation_of_quadratics() {
        // (t - 1/2)^2 on [0, 1]: sup 1/4, variation 1/2
        let p = poly(&[(1, 4), (-1, 1), (1, 1)]);
        let (s, exact) = p.sup_abs(&q(0, 1), &q(1, 1)).unwrap();
        assert!(exact);
        assert_eq!(s, q(1, 4));
        assert_eq!(p.variation(&q(0, 1), &q(1, 1)).unwrap().0, q(1, 2));
        // linear t on [0, l]: variation l
        let lin = poly(&[(0, 1), (1, 1)]);
        assert_eq!(lin.variation(&q(0, 1), &q(3, 5)).unwrap().0, q(3, 5));
    }

    #[test]
    fn bernstein_bound_is_an_upper_bound() {
        let p = poly(&[(0, 1), (1, 1), (-3, 1), (2, 1)]);
        let (s, exact) = p.sup_abs(&q(0, 1), &q(1, 1)).unwrap();
        assert!(!exact);
        for k in 0..=100 {
            let t = q(k, 100);
            assert!(num_traits::Signed::abs(&p.eval(&t)) <= s);
        }
    }

    #[test]
    fn step_pieces_translate_and_add() {
        let st = Piece::steps(vec![q(0, 1), q(1, 2)], vec![q(1, 1), q(3, 1)]).unwrap();
        let moved = st.translated(&q(1, 4), &q(1, 2)).unwrap();
        assert_eq!(moved.segments.len(), 2);
        assert_eq!(moved.eval(&q(0, 1)).unwrap(), q(1, 1));
        assert_eq!(moved.eval(&q(1, 4)).unwrap(), q(3, 1));
        let tail = st.translated(&q(1, 2), &q(1, 2)).unwrap();
        assert_eq!(tail.segments.len(), 1);
        assert_eq!(tail.eval(&q(0, 1)).unwrap(), q(3, 1));
        let sum = st.add(&moved).unwrap();
        assert_eq!(sum.eval(&q(1, 8)).unwrap(), q(2, 1));
        assert_eq!(sum.eval(&q(3, 8)).unwrap(), q(4, 1));
        assert_eq!(sum.eval(&q(5, 8)).unwrap(), q(6, 1));
        // variation of the original step function is its jump
        assert_eq!(st.variation(&q(1, 1)).unwrap().0, q(2, 1));
    }

    #[test]
    fn mean_decomposition() {
        let lengths = vec![q(3, 5), q(2, 5)];
        let f = PiecewiseFunction::new(
            0,
            FunctionKind::Bv,
            vec![Piece::poly(poly(&[(0, 1), (1, 1)])), Piece::constant(q(2, 1))],
            lengths,
        );
        let (phi0, chi) = f.mean_decompose().unwrap();
        assert_eq!(chi.constants().unwrap(), vec![q(3, 10), q(2, 1)]);
        assert!(phi0.means().unwrap().iter().all(|m| m == &q(0, 1)));
    }

    #[test]
    fn antiderivative_is_continuous() {
        let st = Piece::steps(vec![q(0, 1), q(1, 2)], vec![q(1, 1), q(-1, 1)]).unwrap();
        let f = st.antiderivative(q(0, 1), &q(1, 1)).unwrap();
        assert_eq!(f.eval(&q(1, 2)).unwrap(), q(1, 2));
        assert_eq!(f.eval(&q(3, 4)).unwrap(), q(1, 4));
    }
}
