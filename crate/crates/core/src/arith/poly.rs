use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Ball;

/// Dense univariate polynomial with rational coefficients, lowest degree first.
///
/// Always normalized: the leading coefficient is nonzero (the zero polynomial
/// has no coefficients).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> RatPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> RatPoly {
        RatPoly::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn zero() -> RatPoly {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> RatPoly {
        RatPoly::new(vec![c])
    }

    pub fn x() -> RatPoly {
        RatPoly::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeffs.first().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn add(&self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigRational::zero();
        RatPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn neg(&self) -> RatPoly {
        RatPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, o: &RatPoly) -> RatPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigRational) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &RatPoly) -> RatPoly {
        if self.is_zero() || o.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &RatPoly) -> (RatPoly, RatPoly) {
        let dd = d.degree().expect("polynomial division by zero");
        let lead = d.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (RatPoly::zero(), self.clone());
        }
        let mut quo = vec![BigRational::zero(); rem.len() - dd];
        for k in (0..quo.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, b) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * b;
                }
            }
            quo[k] = c;
        }
        rem.truncate(dd);
        (RatPoly::new(quo), RatPoly::new(rem))
    }

    pub fn rem(&self, d: &RatPoly) -> RatPoly {
        if self.coeffs.len() <= d.coeffs.len().saturating_sub(1) {
            return self.clone();
        }
        self.div_rem(d).1
    }

    pub fn monic(&self) -> RatPoly {
        match self.leading() {
            Some(l) => {
                let inv = l.recip();
                self.scale(&inv)
            }
            None => RatPoly::zero(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `(g, s, t)` with `s*self + t*o = g`, `g` the monic gcd.
    pub fn ext_gcd(&self, o: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (RatPoly::constant(BigRational::one()), RatPoly::zero());
        let (mut t0, mut t1) = (RatPoly::zero(), RatPoly::constant(BigRational::one()));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            let t2 = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        match r0.leading().cloned() {
            Some(l) => {
                let inv = l.recip();
                (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
            }
            None => (r0, s0, t0),
        }
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Squarefree part `p / gcd(p, p')`, monic.
    pub fn squarefree(&self) -> RatPoly {
        let g = self.gcd(&self.derivative());
        if g.is_constant() {
            return self.monic();
        }
        self.div_rem(&g).0.monic()
    }

    /// Yun's decomposition `p = c · Π f_i^i` into monic squarefree,
    /// pairwise coprime factors; returns the nonconstant `(f_i, i)`.
    pub fn squarefree_decomposition(&self) -> Vec<(RatPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let dp = self.derivative();
        let a = self.gcd(&dp);
        let mut b = self.div_rem(&a).0;
        let mut c = dp.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let f = b.gcd(&d);
            b = b.div_rem(&f).0;
            c = d.div_rem(&f).0;
            d = c.sub(&b.derivative());
            if f.degree().unwrap_or(0) > 0 {
                out.push((f.monic(), i));
            }
            i += 1;
        }
        out
    }

    /// `log2` of every positive root of a squarefree polynomial, each to
    /// within about `2^-bits` relative precision, in increasing order.
    pub fn positive_root_log2s(&self, bits: u32) -> Vec<f64> {
        let sturm = self.sturm_sequence();
        let upper = self.root_bound();
        let rev = RatPoly::new(self.coeffs.iter().rev().cloned().collect());
        // a root r > 0 of p gives the root 1/r of the reversed polynomial
        let lower = if self.coeffs[0].is_zero() {
            BigRational::new(BigInt::one(), BigInt::one() << 4096u32)
        } else {
            rev.root_bound().recip()
        };
        let lower = lower / BigRational::from_integer(BigInt::from(2));
        let tol = BigRational::new(BigInt::one(), BigInt::one() << bits);
        let two = BigRational::from_integer(BigInt::from(2));
        let mut out = Vec::new();
        let mut stack = vec![(lower, upper)];
        while let Some((lo, hi)) = stack.pop() {
            let n = RatPoly::count_roots(&sturm, &lo, &hi);
            if n == 0 {
                continue;
            }
            if n == 1 && (&hi - &lo) <= &lo * &tol {
                out.push(0.5 * (crate::arith::rational_log2(&lo) + crate::arith::rational_log2(&hi)));
                continue;
            }
            let mid = if hi > &lo * BigRational::from_integer(BigInt::from(4)) {
                let e = ((crate::arith::rational_log2(&lo) + crate::arith::rational_log2(&hi)) / 2.0)
                    .round() as i64;
                let m = if e >= 0 {
                    BigRational::from_integer(BigInt::one() << e as u64)
                } else {
                    BigRational::new(BigInt::one(), BigInt::one() << (-e) as u64)
                };
                if m > lo && m < hi {
                    m
                } else {
                    (&lo + &hi) / &two
                }
            } else {
                (&lo + &hi) / &two
            };
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        let v = self.eval(x);
        if v.is_zero() {
            Ordering::Equal
        } else if v.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Certified enclosure of the value on a ball argument.
    pub fn eval_ball(&self, x: &Ball, prec: u32) -> Ball {
        let mut acc = Ball::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ball(x).add_ball(&Ball::from_rational(c, prec));
        }
        acc
    }

    /// Largest bit length among numerators and denominators.
    pub fn height_bits(&self) -> u64 {
        self.coeffs
            .iter()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    /// Sturm sequence of a squarefree polynomial.
    pub fn sturm_sequence(&self) -> Vec<RatPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_roots(sturm: &[RatPoly], a: &BigRational, b: &BigRational) -> usize {
        let va = sign_changes(sturm, a);
        let vb = sign_changes(sturm, b);
        va.saturating_sub(vb)
    }

    /// A power of two bounding the absolute value of every root (Cauchy bound).
    pub fn root_bound(&self) -> BigRational {
        let n = self.degree().unwrap_or(0);
        if n == 0 {
            return BigRational::one();
        }
        let lead = self.coeffs[n].abs();
        let mut m = BigRational::zero();
        for c in &self.coeffs[..n] {
            let r = c.abs() / &lead;
            if r > m {
                m = r;
            }
        }
        let bound = m + BigRational::one();
        let mut p = BigRational::one();
        while p < bound {
            p *= BigRational::from_integer(BigInt::from(2));
        }
        p
    }

    /// Substitute `x -> x + c` (Taylor shift).
    pub fn shift(&self, c: &BigRational) -> RatPoly {
        let mut out = RatPoly::zero();
        let lin = RatPoly::new(vec![c.clone(), BigRational::one()]);
        for a in self.coeffs.iter().rev() {
            out = out.mul(&lin).add(&RatPoly::constant(a.clone()));
        }
        out
    }
}

fn sign_changes(seq: &[RatPoly], x: &BigRational) -> usize {
    let mut last = Ordering::Equal;
    let mut count = 0;
    for p in seq {
        let s = p.sign_at(x);
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn division_identity() {
        let a = RatPoly::from_ints(&[1, -3, 0, 2, 5]);
        let b = RatPoly::from_ints(&[2, 1, 3]);
        let (qt, r) = a.div_rem(&b);
        assert_eq!(qt.mul(&b).add(&r), a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn gcd_and_bezout() {
        // (x-1)(x+2) and (x-1)(x-3)
        let a = RatPoly::from_ints(&[-2, 1, 1]);
        let b = RatPoly::from_ints(&[3, -4, 1]);
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(g, RatPoly::from_ints(&[-1, 1]));
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }

    #[test]
    fn squarefree_part() {
        // (x-1)^2 (x+1)
        let p = RatPoly::from_ints(&[1, -1, -1, 1]);
        assert_eq!(p.squarefree(), RatPoly::from_ints(&[-1, 0, 1]));
    }

    #[test]
    fn sturm_counts_roots() {
        // x^2 - x - 1 has roots -0.618 and 1.618
        let p = RatPoly::from_ints(&[-1, -1, 1]);
        let s = p.sturm_sequence();
        assert_eq!(RatPoly::count_roots(&s, &q(-4, 1), &q(4, 1)), 2);
        assert_eq!(RatPoly::count_roots(&s, &q(0, 1), &q(4, 1)), 1);
        assert_eq!(RatPoly::count_roots(&s, &q(2, 1), &q(4, 1)), 0);
        assert!(p.root_bound() >= q(2, 1));
    }

    #[test]
    fn taylor_shift() {
        let p = RatPoly::from_ints(&[1, 2, 3]);
        let s = p.shift(&q(1, 2));
        for x in [q(0, 1), q(3, 7), q(-5, 2)] {
            assert_eq!(s.eval(&x), p.eval(&(&x + q(1, 2))));
        }
    }
}
