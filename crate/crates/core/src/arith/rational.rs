use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{format_rational, rational_log2, rational_to_f64, ArithMode, Ball, Scalar};
use crate::error::{Error, Result};

impl Scalar for BigRational {
    type Ctx = ();

    const MODE: ArithMode = ArithMode::Rational;

    fn is_exact() -> bool {
        true
    }

    fn context(&self) -> Self::Ctx {}

    fn from_bigint(_: &(), n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn from_rational(_: &(), q: &BigRational) -> Self {
        q.clone()
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / rhs)
    }

    fn sign(&self) -> Result<Ordering> {
        Ok(if self.is_zero() {
            Ordering::Equal
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        })
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn log2_abs(&self) -> f64 {
        rational_log2(self)
    }

    fn to_ball(&self, bits: u32) -> Ball {
        Ball::from_rational(self, bits)
    }

    fn to_interchange(&self) -> String {
        format_rational(self)
    }
}
