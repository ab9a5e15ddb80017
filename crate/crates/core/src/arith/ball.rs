use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{bigint_log2, ldexp, ArithMode, Scalar};
use crate::error::{Error, Result};

const MAG_BITS: u32 = 30;

/// Nonnegative magnitude `m * 2^e` with a short mantissa.
///
/// Used for error radii; every operation rounds away from the exact result in
/// the direction that keeps bounds valid (up, except [`Mag::sub_down`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mag {
    m: u64,
    e: i64,
}

impl Mag {
    pub const ZERO: Mag = Mag { m: 0, e: 0 };

    pub fn pow2(e: i64) -> Mag {
        Mag { m: 1, e }
    }

    fn norm_up(m: u128, e: i64) -> Mag {
        if m == 0 {
            return Mag::ZERO;
        }
        let bits = 128 - m.leading_zeros();
        if bits <= MAG_BITS {
            return Mag { m: m as u64, e };
        }
        let s = bits - MAG_BITS;
        let mut q = m >> s;
        if q << s != m {
            q += 1;
        }
        // q may have grown to MAG_BITS + 1 bits; that is still fine.
        Mag {
            m: q as u64,
            e: e + s as i64,
        }
    }

    fn norm_down(m: u128, e: i64) -> Mag {
        if m == 0 {
            return Mag::ZERO;
        }
        let bits = 128 - m.leading_zeros();
        if bits <= MAG_BITS {
            return Mag { m: m as u64, e };
        }
        let s = bits - MAG_BITS;
        Mag {
            m: (m >> s) as u64,
            e: e + s as i64,
        }
    }

    /// `|x| * 2^exp`, rounded up.
    pub fn from_bigint_up(x: &BigInt, exp: i64) -> Mag {
        let a = x.abs();
        let bits = a.bits() as u32;
        if bits <= 64 {
            return Mag::norm_up(a.to_u64().unwrap() as u128, exp);
        }
        let s = bits - 64;
        let mut q: BigInt = &a >> s;
        if (&q << s) != a {
            q += 1;
        }
        Mag::norm_up(q.to_u64().unwrap_or(u64::MAX) as u128, exp + s as i64)
    }

    /// `|x| * 2^exp`, rounded down.
    pub fn from_bigint_down(x: &BigInt, exp: i64) -> Mag {
        let a = x.abs();
        let bits = a.bits() as u32;
        if bits <= 64 {
            return Mag::norm_down(a.to_u64().unwrap() as u128, exp);
        }
        let s = bits - 64;
        let q: BigInt = &a >> s;
        Mag::norm_down(q.to_u64().unwrap() as u128, exp + s as i64)
    }

    /// Upper bound of `|q|`.
    pub fn from_rational_up(q: &BigRational) -> Mag {
        if q.is_zero() {
            return Mag::ZERO;
        }
        let nb = q.numer().bits() as i64;
        let db = q.denom().bits() as i64;
        let s = 40 - (nb - db);
        let (n, d) = if s >= 0 {
            (q.numer().abs() << (s as usize), q.denom().clone())
        } else {
            (q.numer().abs(), q.denom() << ((-s) as usize))
        };
        let (quo, rem) = n.div_rem(&d);
        let quo = if rem.is_zero() { quo } else { quo + 1 };
        Mag::from_bigint_up(&quo, -s)
    }

    pub fn is_zero(self) -> bool {
        self.m == 0
    }

    pub fn add(self, o: Mag) -> Mag {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (a, b) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = (a.e - b.e) as u32;
        if d >= 40 {
            // b < 2^(b.e + 32) <= one unit of a's last place.
            return Mag::norm_up(a.m as u128 + 1, a.e);
        }
        Mag::norm_up(((a.m as u128) << d) + b.m as u128, b.e)
    }

    pub fn mul(self, o: Mag) -> Mag {
        if self.is_zero() || o.is_zero() {
            return Mag::ZERO;
        }
        Mag::norm_up(self.m as u128 * o.m as u128, self.e + o.e)
    }

    /// `self / o`, rounded up. `o` must be nonzero.
    pub fn div_up(self, o: Mag) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        assert!(!o.is_zero(), "division of a magnitude by zero");
        let q = ((self.m as u128) << 64) / o.m as u128 + 1;
        Mag::norm_up(q, self.e - o.e - 64)
    }

    /// `self - o` rounded down, or `None` when the difference is not positive.
    pub fn sub_down(self, o: Mag) -> Option<Mag> {
        if o.is_zero() {
            return Some(self);
        }
        if self.is_zero() {
            return None;
        }
        if self.e >= o.e {
            let d = (self.e - o.e) as u64;
            if d > 64 {
                let m = ((self.m as u128) << 32) - 1;
                return Some(Mag::norm_down(m, self.e - 32));
            }
            let a = (self.m as u128) << d;
            let b = o.m as u128;
            if a <= b {
                return None;
            }
            Some(Mag::norm_down(a - b, o.e))
        } else {
            let d = (o.e - self.e) as u64;
            if d > 64 {
                return None;
            }
            let b = (o.m as u128) << d;
            let a = self.m as u128;
            if a <= b {
                return None;
            }
            Some(Mag::norm_down(a - b, self.e))
        }
    }

    pub fn cmp_mag(self, o: Mag) -> Ordering {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let ta = self.e + (64 - self.m.leading_zeros()) as i64;
        let tb = o.e + (64 - o.m.leading_zeros()) as i64;
        if ta != tb {
            return ta.cmp(&tb);
        }
        let e = self.e.min(o.e);
        let a = (self.m as u128) << (self.e - e);
        let b = (o.m as u128) << (o.e - e);
        a.cmp(&b)
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.m as f64, self.e)
    }

    pub fn log2(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            (self.m as f64).log2() + self.e as f64
        }
    }
}

/// Tracked-precision real: a dyadic midpoint `mid * 2^exp` and a radius.
///
/// The represented value is guaranteed to lie in `[mid*2^exp - rad,
/// mid*2^exp + rad]`. The midpoint is kept to at most `prec` bits.
#[derive(Clone)]
pub struct Ball {
    mid: BigInt,
    exp: i64,
    rad: Mag,
    prec: u32,
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:.3e}", self.to_decimal(20), self.rad.to_f64())
    }
}

impl Ball {
    fn normalized(mid: BigInt, exp: i64, rad: Mag, prec: u32) -> Ball {
        let bits = mid.bits() as u32;
        if bits > prec {
            let s = bits - prec;
            let t: BigInt = &mid >> s;
            let mut rad = rad;
            if (&t << s) != mid {
                rad = rad.add(Mag::pow2(exp + s as i64));
            }
            return Ball {
                mid: t,
                exp: exp + s as i64,
                rad,
                prec,
            };
        }
        if mid.is_zero() {
            return Ball {
                mid,
                exp: 0,
                rad,
                prec,
            };
        }
        Ball { mid, exp, rad, prec }
    }

    pub fn zero(prec: u32) -> Ball {
        Ball {
            mid: BigInt::zero(),
            exp: 0,
            rad: Mag::ZERO,
            prec,
        }
    }

    pub fn from_bigint(n: &BigInt, prec: u32) -> Ball {
        Ball::normalized(n.clone(), 0, Mag::ZERO, prec)
    }

    /// Nearest `prec`-bit enclosure of a rational.
    pub fn from_rational(q: &BigRational, prec: u32) -> Ball {
        if q.is_zero() {
            return Ball::zero(prec);
        }
        let den = q.denom();
        let db = den.bits() as i64;
        let one = BigInt::one();
        if (den & (den - &one)).is_zero() {
            return Ball::normalized(q.numer().clone(), -(db - 1), Mag::ZERO, prec);
        }
        let nb = q.numer().bits() as i64;
        let s = prec as i64 + 2 + db - nb;
        let (n, d) = if s >= 0 {
            (q.numer() << (s as usize), den.clone())
        } else {
            (q.numer().clone(), den << ((-s) as usize))
        };
        let (quo, rem) = n.div_rem(&d);
        let rad = if rem.is_zero() { Mag::ZERO } else { Mag::pow2(-s) };
        Ball::normalized(quo, -s, rad, prec)
    }

    /// Ball with an explicit additional error bound.
    pub fn with_error(mut self, err: Mag) -> Ball {
        self.rad = self.rad.add(err);
        self
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn radius(&self) -> Mag {
        self.rad
    }

    /// Exact midpoint as a rational.
    pub fn midpoint(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mid << (self.exp as usize))
        } else {
            BigRational::new(self.mid.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }

    fn mid_mag_up(&self) -> Mag {
        Mag::from_bigint_up(&self.mid, self.exp)
    }

    fn mid_mag_down(&self) -> Mag {
        Mag::from_bigint_down(&self.mid, self.exp)
    }

    /// Upper bound of `|x|` for every `x` in the ball.
    pub fn abs_upper(&self) -> Mag {
        self.mid_mag_up().add(self.rad)
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.is_zero() || self.mid_mag_down().cmp_mag(self.rad) != Ordering::Greater
    }

    fn top(&self) -> i64 {
        if self.mid.is_zero() {
            i64::MIN / 4
        } else {
            self.exp + self.mid.bits() as i64
        }
    }

    pub fn add_ball(&self, o: &Ball) -> Ball {
        let prec = self.prec.max(o.prec);
        if o.mid.is_zero() {
            return Ball::normalized(self.mid.clone(), self.exp, self.rad.add(o.rad), prec);
        }
        if self.mid.is_zero() {
            return Ball::normalized(o.mid.clone(), o.exp, self.rad.add(o.rad), prec);
        }
        let (ta, tb) = (self.top(), o.top());
        let top = ta.max(tb);
        let cutoff = top - prec as i64 - 4;
        if tb < cutoff {
            let rad = self.rad.add(o.rad).add(o.mid_mag_up());
            return Ball::normalized(self.mid.clone(), self.exp, rad, prec);
        }
        if ta < cutoff {
            let rad = self.rad.add(o.rad).add(self.mid_mag_up());
            return Ball::normalized(o.mid.clone(), o.exp, rad, prec);
        }
        let e = self.exp.min(o.exp);
        let a: BigInt = &self.mid << ((self.exp - e) as usize);
        let b: BigInt = &o.mid << ((o.exp - e) as usize);
        Ball::normalized(a + b, e, self.rad.add(o.rad), prec)
    }

    pub fn neg_ball(&self) -> Ball {
        Ball {
            mid: -&self.mid,
            exp: self.exp,
            rad: self.rad,
            prec: self.prec,
        }
    }

    pub fn mul_ball(&self, o: &Ball) -> Ball {
        let prec = self.prec.max(o.prec);
        let rad = self
            .mid_mag_up()
            .mul(o.rad)
            .add(o.mid_mag_up().mul(self.rad))
            .add(self.rad.mul(o.rad));
        Ball::normalized(&self.mid * &o.mid, self.exp + o.exp, rad, prec)
    }

    pub fn div_ball(&self, o: &Ball) -> Result<Ball> {
        if o.contains_zero() {
            return Err(Error::PrecisionExhausted(
                "divisor ball contains zero".into(),
            ));
        }
        let prec = self.prec.max(o.prec);
        let k = prec as i64 + 2 + o.mid.bits() as i64 - self.mid.bits() as i64;
        let (n, d) = if k >= 0 {
            (&self.mid << (k as usize), o.mid.clone())
        } else {
            (self.mid.clone(), &o.mid << ((-k) as usize))
        };
        let (q, r) = n.div_rem(&d);
        let exp = self.exp - o.exp - k;
        let mut rad = if r.is_zero() { Mag::ZERO } else { Mag::pow2(exp) };
        if !(self.rad.is_zero() && o.rad.is_zero()) {
            let qmag = Mag::from_bigint_up(&q, exp).add(Mag::pow2(exp));
            let num = self.rad.add(qmag.mul(o.rad));
            let den = o
                .mid_mag_down()
                .sub_down(o.rad)
                .ok_or_else(|| Error::PrecisionExhausted("divisor ball contains zero".into()))?;
            rad = rad.add(num.div_up(den));
        }
        Ok(Ball::normalized(q, exp, rad, prec))
    }

    pub fn sign_checked(&self) -> Result<Ordering> {
        if self.mid.is_zero() {
            if self.rad.is_zero() {
                return Ok(Ordering::Equal);
            }
            return Err(Error::PrecisionExhausted(format!(
                "sign undecidable: 0 ± {:.3e}",
                self.rad.to_f64()
            )));
        }
        if self.mid_mag_down().cmp_mag(self.rad) == Ordering::Greater {
            Ok(if self.mid.sign() == Sign::Minus {
                Ordering::Less
            } else {
                Ordering::Greater
            })
        } else {
            Err(Error::PrecisionExhausted(format!(
                "sign undecidable: {} ± {:.3e}",
                self.to_decimal(12),
                self.rad.to_f64()
            )))
        }
    }

    pub fn mid_f64(&self) -> f64 {
        if self.mid.is_zero() {
            return 0.0;
        }
        let bits = self.mid.bits();
        if bits > 64 {
            let t: BigInt = &self.mid >> (bits - 64);
            ldexp(t.to_f64().unwrap(), self.exp + bits as i64 - 64)
        } else {
            ldexp(self.mid.to_f64().unwrap(), self.exp)
        }
    }

    pub fn mid_log2_abs(&self) -> f64 {
        bigint_log2(&self.mid) + self.exp as f64
    }

    /// Midpoint in scientific notation with `sig` significant digits.
    pub fn to_decimal(&self, sig: usize) -> String {
        if self.mid.is_zero() {
            return "0".to_string();
        }
        let sig = sig.max(1);
        let l10 = self.mid_log2_abs() * std::f64::consts::LOG10_2;
        let k = l10.floor() as i64;
        let p = sig as i64 - 1 - k;
        let ten = BigInt::from(10);
        let mut num = self.mid.abs();
        let mut den = BigInt::one();
        if p >= 0 {
            num *= num_traits::pow(ten.clone(), p as usize);
        } else {
            den *= num_traits::pow(ten.clone(), (-p) as usize);
        }
        if self.exp >= 0 {
            num <<= self.exp as usize;
        } else {
            den <<= (-self.exp) as usize;
        }
        let (q, r) = num.div_rem(&den);
        let r2: BigInt = r * 2;
        let q = if r2 >= den { q + 1 } else { q };
        let digits = q.to_string();
        let exp10 = k + (digits.len() as i64 - sig as i64);
        let digits = &digits[..sig.min(digits.len())];
        let sign = if self.mid.is_negative() { "-" } else { "" };
        if digits.len() == 1 {
            format!("{sign}{digits}e{exp10}")
        } else {
            format!("{sign}{}.{}e{exp10}", &digits[..1], &digits[1..])
        }
    }

    /// Ball containing `|x|` for every `x` in this ball.
    pub fn abs_ball(&self) -> Ball {
        Ball {
            mid: self.mid.abs(),
            exp: self.exp,
            rad: self.rad,
            prec: self.prec,
        }
    }

    /// Ball containing `max(x, y)` for all `x`, `y` in the two balls.
    pub fn max_ball(&self, o: &Ball) -> Ball {
        match self.sub(o).sign_checked() {
            Ok(Ordering::Less) => o.clone(),
            Ok(_) => self.clone(),
            Err(_) => {
                // Overlapping: widen the larger-midpoint ball to cover both.
                let (hi, lo) = if self.mid_f64() >= o.mid_f64() { (self, o) } else { (o, self) };
                let extra = lo.rad.add(Mag::from_rational_up(&(hi.midpoint() - lo.midpoint())));
                hi.clone().with_error(extra)
            }
        }
    }

    /// Re-round to a different precision.
    pub fn with_prec(&self, prec: u32) -> Ball {
        Ball::normalized(self.mid.clone(), self.exp, self.rad, prec)
    }
}

impl Scalar for Ball {
    type Ctx = u32;

    const MODE: ArithMode = ArithMode::Real;

    fn is_exact() -> bool {
        false
    }

    fn context(&self) -> u32 {
        self.prec
    }

    fn from_bigint(ctx: &u32, n: &BigInt) -> Self {
        Ball::from_bigint(n, *ctx)
    }

    fn from_rational(ctx: &u32, q: &BigRational) -> Self {
        Ball::from_rational(q, *ctx)
    }

    fn add(&self, rhs: &Self) -> Self {
        self.add_ball(rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add_ball(&rhs.neg_ball())
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.mul_ball(rhs)
    }

    fn neg(&self) -> Self {
        self.neg_ball()
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        self.div_ball(rhs)
    }

    fn sign(&self) -> Result<Ordering> {
        self.sign_checked()
    }

    fn to_f64(&self) -> f64 {
        self.mid_f64()
    }

    fn log2_abs(&self) -> f64 {
        self.mid_log2_abs()
    }

    fn to_ball(&self, bits: u32) -> Ball {
        self.with_prec(bits.max(self.prec))
    }

    fn abs_bound(&self) -> Result<Self> {
        Ok(self.abs_ball())
    }

    fn max_bound(&self, rhs: &Self) -> Result<Self> {
        Ok(self.max_ball(rhs))
    }

    fn to_interchange(&self) -> String {
        let digits = (self.prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
        self.to_decimal(digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn encloses(b: &Ball, x: &BigRational) -> bool {
        let diff = b.midpoint() - x;
        let bound = Mag::from_rational_up(&diff);
        bound.cmp_mag(b.radius()) != Ordering::Greater
    }

    #[test]
    fn rational_enclosure_is_valid() {
        for (n, d) in [(1, 3), (-7, 11), (22, 7), (1, 1 << 20), (123456789, 1000)] {
            let x = q(n, d);
            let b = Ball::from_rational(&x, 64);
            assert!(encloses(&b, &x), "{n}/{d}");
        }
    }

    #[test]
    fn dyadic_values_are_exact() {
        let b = Ball::from_rational(&q(3, 8), 64);
        assert!(b.radius().is_zero());
        assert_eq!(b.sign_checked().unwrap(), Ordering::Greater);
    }

    #[test]
    fn arithmetic_enclosures() {
        let a = q(1, 3);
        let b = q(-5, 7);
        let ba = Ball::from_rational(&a, 80);
        let bb = Ball::from_rational(&b, 80);
        assert!(encloses(&ba.add_ball(&bb), &(&a + &b)));
        assert!(encloses(&ba.mul_ball(&bb), &(&a * &b)));
        assert!(encloses(&ba.div_ball(&bb).unwrap(), &(&a / &b)));
        assert!(encloses(&bb.div_ball(&ba).unwrap(), &(&b / &a)));
        assert!(encloses(&ba.sub(&ba), &BigRational::zero()));
    }

    #[test]
    fn cancellation_raises_precision_exhausted() {
        let a = Ball::from_rational(&q(1, 3), 64);
        let z = a.sub(&a);
        assert!(matches!(z.sign(), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn decimal_output() {
        let b = Ball::from_rational(&q(1, 3), 128);
        assert_eq!(b.to_decimal(5), "3.3333e-1");
        let c = Ball::from_rational(&q(-25, 1), 64);
        assert_eq!(c.to_decimal(3), "-2.50e1");
    }

    #[test]
    fn mag_operations_bound_exact_values() {
        let a = Mag::from_bigint_up(&BigInt::from(1_000_000_007u64), 0);
        assert!(a.to_f64() >= 1_000_000_007.0);
        let d = a.sub_down(Mag::pow2(0)).unwrap();
        assert!(d.to_f64() <= 1_000_000_006.0);
        let r = Mag::pow2(0).div_up(Mag::from_bigint_up(&BigInt::from(3), 0));
        assert!(r.to_f64() >= 1.0 / 3.0);
    }
}
