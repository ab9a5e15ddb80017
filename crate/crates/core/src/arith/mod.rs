//! Scalar arithmetic modes.
//!
//! Every algorithm in the crate is generic over [`Scalar`]. Three modes exist:
//!
//! * `rational` — exact [`BigRational`] arithmetic, the reference semantics;
//! * `real` — [`Ball`] arithmetic: a dyadic midpoint carrying a rigorous error
//!   radius. Comparisons whose balls overlap fail with
//!   [`crate::Error::PrecisionExhausted`] instead of guessing;
//! * `eigen` — [`FieldElem`], exact arithmetic in the number field generated by
//!   the Perron–Frobenius root of an integer matrix.
//!
//! Constants are created through a per-mode context (`Scalar::Ctx`): nothing
//! for rationals, a precision for balls, the shared field for eigen elements.

mod ball;
mod field;
mod numfmt;
mod poly;
mod rational;

pub use ball::{Ball, Mag};
pub use field::{charpoly, FieldElem, NumberField};
pub use numfmt::{format_rational, parse_decimal, parse_rational};
pub use poly::RatPoly;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;

/// Name of an arithmetic mode as it appears in interchange files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithMode {
    Rational,
    Real,
    Eigen,
}

impl fmt::Display for ArithMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithMode::Rational => "rational",
            ArithMode::Real => "real",
            ArithMode::Eigen => "eigen",
        })
    }
}

/// An ordered field (or a certified enclosure of one) the algorithms run over.
pub trait Scalar: Clone + fmt::Debug + Send + Sync + 'static {
    type Ctx: Clone + fmt::Debug + Send + Sync;

    const MODE: ArithMode;

    /// Whether comparisons and zero tests are always decidable.
    fn is_exact() -> bool;

    fn context(&self) -> Self::Ctx;
    fn from_bigint(ctx: &Self::Ctx, n: &BigInt) -> Self;
    fn from_rational(ctx: &Self::Ctx, q: &BigRational) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self>;

    /// Sign of the value, compared with zero.
    fn sign(&self) -> Result<Ordering>;

    fn to_f64(&self) -> f64;
    /// `log2 |x|`, robust for magnitudes far outside the `f64` range.
    fn log2_abs(&self) -> f64;
    /// Certified enclosure with (at least) `bits` bits of precision.
    fn to_ball(&self, bits: u32) -> Ball;
    /// Interchange text: `p/q` for rationals, decimal strings otherwise.
    fn to_interchange(&self) -> String;

    fn zero_in(ctx: &Self::Ctx) -> Self {
        Self::from_bigint(ctx, &BigInt::zero())
    }

    fn one_in(ctx: &Self::Ctx) -> Self {
        Self::from_bigint(ctx, &BigInt::one())
    }

    fn from_i64(ctx: &Self::Ctx, n: i64) -> Self {
        Self::from_bigint(ctx, &BigInt::from(n))
    }

    /// Exact conversion of a finite `f64` (a dyadic rational).
    fn from_f64(ctx: &Self::Ctx, x: f64) -> Self {
        Self::from_rational(ctx, &f64_to_rational(x))
    }

    fn cmp_checked(&self, rhs: &Self) -> Result<Ordering> {
        self.sub(rhs).sign()
    }

    fn is_zero_checked(&self) -> Result<bool> {
        Ok(self.sign()? == Ordering::Equal)
    }

    fn abs_checked(&self) -> Result<Self> {
        Ok(match self.sign()? {
            Ordering::Less => self.neg(),
            _ => self.clone(),
        })
    }

    fn mul_int(&self, n: &BigInt) -> Self {
        self.mul(&Self::from_bigint(&self.context(), n))
    }

    fn max_checked(&self, rhs: &Self) -> Result<Self> {
        Ok(if self.cmp_checked(rhs)? == Ordering::Less {
            rhs.clone()
        } else {
            self.clone()
        })
    }

    /// `|x|`, or for enclosures a value enclosing `|x|` even when the sign is
    /// undecidable.
    fn abs_bound(&self) -> Result<Self> {
        self.abs_checked()
    }

    /// `max(x, y)`, or for enclosures a value enclosing it.
    fn max_bound(&self, rhs: &Self) -> Result<Self> {
        self.max_checked(rhs)
    }
}

/// Exact value of a finite float.
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// Sum of a slice; `ctx` supplies the zero for empty input.
pub fn sum<S: Scalar>(ctx: &S::Ctx, xs: &[S]) -> S {
    xs.iter().fold(S::zero_in(ctx), |acc, x| acc.add(x))
}

/// Dot product `Σ a_i b_i`.
pub fn dot<S: Scalar>(ctx: &S::Ctx, a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero_in(ctx), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// Sup norm of a vector, as a scalar.
pub fn sup_abs<S: Scalar>(ctx: &S::Ctx, xs: &[S]) -> Result<S> {
    let mut best = S::zero_in(ctx);
    for x in xs {
        let a = x.abs_bound()?;
        best = best.max_bound(&a)?;
    }
    Ok(best)
}

/// `log2` of a big integer's magnitude (`-inf` for zero).
pub fn bigint_log2(n: &BigInt) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        let f = num_traits::ToPrimitive::to_f64(n).unwrap_or(f64::INFINITY);
        return f.abs().log2();
    }
    let shift = bits - 64;
    let top: BigInt = num_traits::Signed::abs(n) >> shift;
    num_traits::ToPrimitive::to_f64(&top).unwrap().log2() + shift as f64
}

/// Robust `f64` value of a rational with arbitrarily large parts.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let l = bigint_log2(q.numer()) - bigint_log2(q.denom());
    let sign = if num_traits::Signed::is_negative(q.numer()) { -1.0 } else { 1.0 };
    if l.abs() < 1000.0 {
        // Scale into range, then divide.
        let nb = q.numer().bits() as i64;
        let db = q.denom().bits() as i64;
        let s = 60 - (nb - db);
        let (n, d) = if s >= 0 {
            (q.numer() << (s as usize), q.denom().clone())
        } else {
            (q.numer().clone(), q.denom() << ((-s) as usize))
        };
        let quo = &n / &d;
        let f = num_traits::ToPrimitive::to_f64(&quo).unwrap_or(0.0);
        return ldexp(f, -s);
    }
    sign * l.exp2()
}

/// `f * 2^e` without intermediate overflow.
pub fn ldexp(f: f64, e: i64) -> f64 {
    let e = e.clamp(-4000, 4000) as i32;
    let half = e / 2;
    f * 2f64.powi(half) * 2f64.powi(e - half)
}

/// `log2 |q|` for a rational.
pub fn rational_log2(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let s = 64 - (nb - db);
    let (n, d) = if s >= 0 {
        (q.numer() << (s as usize), q.denom().clone())
    } else {
        (q.numer().clone(), q.denom() << ((-s) as usize))
    };
    let quo = num_traits::Signed::abs(&(&n / &d));
    bigint_log2(&quo) - s as f64
}
