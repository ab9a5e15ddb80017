use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{ArithMode, Ball, RatPoly, Scalar};
use crate::error::{Error, Result};

const MAX_SIGN_BITS: u32 = 1 << 16;

#[derive(Debug)]
struct FieldState {
    /// Squarefree polynomial having the generator as a simple root. It may be
    /// replaced by a factor when a zero divisor is discovered.
    modulus: RatPoly,
    /// Isolating interval `(lo, hi]` of the generator; `lo == hi` when the
    /// generator is rational.
    lo: BigRational,
    hi: BigRational,
    root_ball: Option<Ball>,
}

/// The real number field `Q(r)` generated by a distinguished real algebraic
/// number `r`, typically the Perron–Frobenius root of a nonnegative integer
/// matrix.
///
/// Elements are polynomials in `r`. Signs are decided from certified ball
/// evaluations; an element whose ball keeps containing zero is tested
/// exactly through a gcd with the modulus, which either proves it is zero or
/// splits off a factor the generator is not a root of.
pub struct NumberField {
    state: Mutex<FieldState>,
    precision_bits: u32,
}

impl fmt::Debug for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = self.state.lock().unwrap();
        write!(f, "Q(r), r root of {:?} in ({}, {}]", st.modulus, st.lo, st.hi)
    }
}

impl NumberField {
    /// Field generated by the largest real root of `poly`.
    pub fn largest_real_root(poly: &RatPoly, precision_bits: u32) -> Result<Arc<NumberField>> {
        let p = poly.squarefree();
        if p.degree().unwrap_or(0) == 0 {
            return Err(Error::NotPrimitive("polynomial has no roots".into()));
        }
        let sturm = p.sturm_sequence();
        let bound = p.root_bound();
        let mut lo = -bound.clone();
        let mut hi = bound;
        if RatPoly::count_roots(&sturm, &lo, &hi) == 0 {
            return Err(Error::NotPrimitive("polynomial has no real roots".into()));
        }
        let two = BigRational::from_integer(BigInt::from(2));
        while RatPoly::count_roots(&sturm, &lo, &hi) > 1 {
            let mid = (&lo + &hi) / &two;
            if RatPoly::count_roots(&sturm, &mid, &hi) >= 1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (modulus, lo, hi) = if p.sign_at(&hi) == Ordering::Equal {
            (RatPoly::new(vec![-hi.clone(), BigRational::one()]), hi.clone(), hi)
        } else {
            (p, lo, hi)
        };
        Ok(Arc::new(NumberField {
            state: Mutex::new(FieldState {
                modulus,
                lo,
                hi,
                root_ball: None,
            }),
            precision_bits,
        }))
    }

    /// Field generated by the Perron–Frobenius root of a square nonnegative
    /// integer matrix.
    pub fn perron_frobenius(m: &[Vec<BigInt>], precision_bits: u32) -> Result<Arc<NumberField>> {
        NumberField::largest_real_root(&charpoly(m), precision_bits)
    }

    /// Precision used when elements are rendered as decimals or floats.
    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn modulus(&self) -> RatPoly {
        self.state.lock().unwrap().modulus.clone()
    }

    pub fn degree(&self) -> usize {
        self.modulus().degree().unwrap_or(0)
    }

    /// The generator as an element.
    pub fn generator(self: &Arc<Self>) -> FieldElem {
        FieldElem::new(self, RatPoly::x())
    }

    pub fn element(self: &Arc<Self>, poly: RatPoly) -> FieldElem {
        FieldElem::new(self, poly)
    }

    /// Enclosure of the generator with radius at most `2^-bits`.
    pub fn root_ball(&self, bits: u32) -> Ball {
        let mut st = self.state.lock().unwrap();
        if let Some(b) = &st.root_ball {
            if b.prec() >= bits {
                return b.clone();
            }
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let target = BigRational::new(BigInt::one(), BigInt::one() << (bits as usize + 1));
        let sign_hi = st.modulus.sign_at(&st.hi);
        if sign_hi == Ordering::Equal {
            st.lo = st.hi.clone();
        }
        while st.hi.clone() - st.lo.clone() > target {
            let mid = (&st.lo + &st.hi) / &two;
            let s = st.modulus.sign_at(&mid);
            if s == Ordering::Equal {
                st.lo = mid.clone();
                st.hi = mid;
                break;
            }
            if s == sign_hi {
                st.hi = mid;
            } else {
                st.lo = mid;
            }
        }
        let center = (&st.lo + &st.hi) / &two;
        let half = (&st.hi - &st.lo) / &two;
        let prec = bits + 8;
        let ball = Ball::from_rational(&center, prec)
            .with_error(super::Mag::from_rational_up(&half));
        st.root_ball = Some(ball.clone());
        ball
    }

    fn reduce(&self, p: &RatPoly) -> RatPoly {
        let m = self.modulus();
        if p.degree().unwrap_or(0) >= m.degree().unwrap_or(0) {
            p.rem(&m)
        } else {
            p.clone()
        }
    }

    /// Decide exactly whether `p(r) = 0`, refining the modulus as a side effect.
    fn is_zero_at_root(&self, p: &RatPoly) -> bool {
        loop {
            let mut st = self.state.lock().unwrap();
            let p = p.rem(&st.modulus);
            if p.is_zero() {
                return true;
            }
            let g = st.modulus.gcd(&p);
            if g.is_constant() {
                return false;
            }
            if root_of(&g, &st.lo, &st.hi) {
                st.modulus = g;
                st.root_ball = None;
            } else {
                st.modulus = st.modulus.div_rem(&g).0.monic();
                st.root_ball = None;
            }
        }
    }

    fn eval_ball(&self, p: &RatPoly, bits: u32) -> Ball {
        let root = self.root_ball(bits);
        p.eval_ball(&root, bits + 8)
    }

    fn sign_of(&self, p: &RatPoly) -> Result<Ordering> {
        if p.is_constant() {
            return Ok(sign_rational(&p.constant_term()));
        }
        let mut bits = 96 + 2 * p.height_bits() as u32;
        let mut checked = false;
        loop {
            if let Ok(s) = self.eval_ball(p, bits).sign_checked() {
                return Ok(s);
            }
            if !checked {
                if self.is_zero_at_root(p) {
                    return Ok(Ordering::Equal);
                }
                checked = true;
            }
            bits *= 2;
            if bits > MAX_SIGN_BITS {
                return Err(Error::PrecisionExhausted(
                    "sign of a nonzero field element needs more than 65536 bits".into(),
                ));
            }
        }
    }

    fn inverse(&self, p: &RatPoly) -> Result<RatPoly> {
        loop {
            let m = self.modulus();
            let p = p.rem(&m);
            if p.is_zero() {
                return Err(Error::DivisionByZero);
            }
            let (g, s, _) = p.ext_gcd(&m);
            if g.is_constant() {
                return Ok(s);
            }
            if self.is_zero_at_root(&p) {
                return Err(Error::DivisionByZero);
            }
        }
    }
}

fn sign_rational(q: &BigRational) -> Ordering {
    if q.is_zero() {
        Ordering::Equal
    } else if q.is_negative() {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Whether the unique root of the modulus in `(lo, hi]` is a root of `g`,
/// given that `g` divides the modulus.
fn root_of(g: &RatPoly, lo: &BigRational, hi: &BigRational) -> bool {
    if lo == hi {
        return g.sign_at(hi) == Ordering::Equal;
    }
    let sturm = g.squarefree().sturm_sequence();
    RatPoly::count_roots(&sturm, lo, hi) > 0
}

/// Characteristic polynomial `det(xI - M)` by the Faddeev–LeVerrier recursion.
pub fn charpoly(m: &[Vec<BigInt>]) -> RatPoly {
    let n = m.len();
    let a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|v| BigRational::from_integer(v.clone())).collect())
        .collect();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut mk = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A * M_{k-1} + c_{n-k+1} I
        let prev = mk.clone();
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for l in 0..n {
                    s += &a[i][l] * &prev[l][j];
                }
                if i == j {
                    s += &coeffs[n - k + 1];
                }
                mk[i][j] = s;
            }
        }
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &mk[l][i];
            }
        }
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k as i64));
    }
    RatPoly::new(coeffs)
}

/// Exact element of a [`NumberField`].
#[derive(Clone)]
pub struct FieldElem {
    field: Arc<NumberField>,
    poly: RatPoly,
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{:?}]", self.to_interchange(), self.poly)
    }
}

impl FieldElem {
    fn new(field: &Arc<NumberField>, poly: RatPoly) -> FieldElem {
        FieldElem {
            poly: field.reduce(&poly),
            field: field.clone(),
        }
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    /// Representative polynomial in the generator.
    pub fn poly(&self) -> &RatPoly {
        &self.poly
    }

    /// Exact value when the element is rational (constant representative).
    pub fn as_rational(&self) -> Option<BigRational> {
        let p = self.field.reduce(&self.poly);
        p.is_constant().then(|| p.constant_term())
    }

    /// Enclosure whose radius is below `2^-bits` relative to the magnitude
    /// (absolute for values that are exactly zero).
    pub fn ball(&self, bits: u32) -> Ball {
        if self.poly.is_constant() {
            return Ball::from_rational(&self.poly.constant_term(), bits);
        }
        let mut work = bits + 32 + 2 * self.poly.height_bits() as u32;
        loop {
            let b = self.field.eval_ball(&self.poly, work);
            let mag = b.abs_upper();
            let good = !b.contains_zero()
                && b.radius().log2() <= mag.log2() - bits as f64;
            if good || work > MAX_SIGN_BITS {
                return b;
            }
            if b.contains_zero() && self.field.is_zero_at_root(&self.poly) {
                return Ball::zero(bits);
            }
            work *= 2;
        }
    }
}

impl Scalar for FieldElem {
    type Ctx = Arc<NumberField>;

    const MODE: ArithMode = ArithMode::Eigen;

    fn is_exact() -> bool {
        true
    }

    fn context(&self) -> Self::Ctx {
        self.field.clone()
    }

    fn from_bigint(ctx: &Self::Ctx, n: &BigInt) -> Self {
        FieldElem {
            field: ctx.clone(),
            poly: RatPoly::constant(BigRational::from_integer(n.clone())),
        }
    }

    fn from_rational(ctx: &Self::Ctx, q: &BigRational) -> Self {
        FieldElem {
            field: ctx.clone(),
            poly: RatPoly::constant(q.clone()),
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        FieldElem {
            field: self.field.clone(),
            poly: self.poly.add(&rhs.poly),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        FieldElem {
            field: self.field.clone(),
            poly: self.poly.sub(&rhs.poly),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.poly.is_constant() || rhs.poly.is_constant() {
            return FieldElem {
                field: self.field.clone(),
                poly: self.poly.mul(&rhs.poly),
            };
        }
        FieldElem::new(&self.field, self.poly.mul(&rhs.poly))
    }

    fn neg(&self) -> Self {
        FieldElem {
            field: self.field.clone(),
            poly: self.poly.neg(),
        }
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.poly.is_constant() {
            let c = rhs.poly.constant_term();
            if c.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(FieldElem {
                field: self.field.clone(),
                poly: self.poly.scale(&c.recip()),
            });
        }
        let inv = self.field.inverse(&rhs.poly)?;
        Ok(FieldElem::new(&self.field, self.poly.mul(&inv)))
    }

    fn sign(&self) -> Result<Ordering> {
        self.field.sign_of(&self.poly)
    }

    fn to_f64(&self) -> f64 {
        self.ball(60).mid_f64()
    }

    fn log2_abs(&self) -> f64 {
        self.ball(60).mid_log2_abs()
    }

    fn to_ball(&self, bits: u32) -> Ball {
        self.ball(bits)
    }

    fn to_interchange(&self) -> String {
        let bits = self.field.precision_bits;
        let digits = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize;
        self.ball(bits).to_decimal(digits.max(1))
    }
}
