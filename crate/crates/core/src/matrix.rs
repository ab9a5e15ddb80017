//! Exact square integer matrices used for the renormalization cocycle.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{bigint_log2, Scalar};

/// Dense square matrix of big integers, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let r: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl Serialize for IntMatrix {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl IntMatrix {
    pub fn zeros(n: usize) -> IntMatrix {
        IntMatrix {
            n,
            data: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// `I + e_{row,col}`.
    pub fn elementary(n: usize, row: usize, col: usize) -> IntMatrix {
        let mut m = IntMatrix::identity(n);
        m.data[row * n + col] += 1;
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> IntMatrix {
        let n = rows.len();
        let mut m = IntMatrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "matrix must be square");
            for (j, v) in r.iter().enumerate() {
                m.data[i * n + j] = BigInt::from(*v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn mul(&self, o: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &o.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// In-place right multiplication by the elementary matrix `I + e_{row,col}`:
    /// adds column `row` to column `col`.
    pub fn mul_elementary_right(&mut self, row: usize, col: usize) {
        let n = self.n;
        for i in 0..n {
            let v = self.data[i * n + row].clone();
            self.data[i * n + col] += v;
        }
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].clone();
            }
        }
        out
    }

    /// Column sums `Σ_α M_{αβ}`.
    pub fn column_sums(&self) -> Vec<BigInt> {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| &self.data[i * n + j]).sum())
            .collect()
    }

    /// Row sums `Σ_β M_{αβ}`.
    pub fn row_sums(&self) -> Vec<BigInt> {
        let n = self.n;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().sum())
            .collect()
    }

    /// The fixed matrix norm: maximum over columns of the sum of absolute
    /// values.
    pub fn norm(&self) -> BigInt {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].abs()).sum::<BigInt>())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn log2_norm(&self) -> f64 {
        bigint_log2(&self.norm())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| !v.is_negative())
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|v| v.is_positive())
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Exact inverse, as a rational matrix (row-major rows).
    pub fn inverse_rational(&self) -> Option<Vec<Vec<BigRational>>> {
        let n = self.n;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..n)
                    .map(|j| BigRational::from_integer(self.get(i, j).clone()))
                    .collect();
                row.extend((0..n).map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }));
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero())?;
            a.swap(c, p);
            let inv = a[c][c].recip();
            for v in a[c].iter_mut() {
                *v *= &inv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    for j in 0..2 * n {
                        let t = &f * &a[c][j];
                        a[r][j] -= t;
                    }
                }
            }
        }
        Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    /// Matrix-vector product over any scalar mode.
    pub fn apply<S: Scalar>(&self, ctx: &S::Ctx, v: &[S]) -> Vec<S> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = S::zero_in(ctx);
                for (j, x) in v.iter().enumerate() {
                    let m = &self.data[i * n + j];
                    if m.is_zero() {
                        continue;
                    }
                    if m.is_one() {
                        acc = acc.add(x);
                    } else {
                        acc = acc.add(&x.mul_int(m));
                    }
                }
                acc
            })
            .collect()
    }

    /// Transposed matrix-vector product `ᵗM v`.
    pub fn apply_transpose<S: Scalar>(&self, ctx: &S::Ctx, v: &[S]) -> Vec<S> {
        self.transpose().apply(ctx, v)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n;
        nalgebra::DMatrix::from_fn(n, n, |i, j| {
            num_traits::ToPrimitive::to_f64(self.get(i, j)).unwrap_or(f64::INFINITY)
        })
    }

    /// Entries as decimal strings, row by row.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

/// Whether some power of a nonnegative matrix is strictly positive, using
/// Wielandt's bound `(n-1)^2 + 1` on the exponent.
pub fn is_primitive(m: &IntMatrix) -> bool {
    let n = m.dim();
    if !m.is_nonnegative() {
        return false;
    }
    let pattern: Vec<bool> = (0..n * n).map(|k| !m.data[k].is_zero()).collect();
    let mut p = pattern.clone();
    let limit = (n - 1) * (n - 1) + 1;
    for _ in 0..limit.max(1) {
        if p.iter().all(|&b| b) {
            return true;
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if !p[i * n + k] {
                    continue;
                }
                for j in 0..n {
                    if pattern[k * n + j] {
                        next[i * n + j] = true;
                    }
                }
            }
        }
        p = next;
    }
    p.iter().all(|&b| b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_inverse() {
        let m = IntMatrix::from_rows(&[vec![2, 1, 0], vec![1, 1, 0], vec![0, 3, 1]]);
        assert_eq!(m.det(), BigInt::from(1));
        let inv = m.inverse_rational().unwrap();
        let rows = m.rows();
        for i in 0..3 {
            for j in 0..3 {
                let s: BigRational = (0..3)
                    .map(|k| BigRational::from_integer(rows[i][k].clone()) * &inv[k][j])
                    .sum();
                let e = if i == j { BigRational::one() } else { BigRational::zero() };
                assert_eq!(s, e);
            }
        }
        let swap = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(swap.det(), BigInt::from(-1));
    }

    #[test]
    fn norm_is_max_column_sum() {
        let m = IntMatrix::from_rows(&[vec![1, 5], vec![3, 1]]);
        assert_eq!(m.norm(), BigInt::from(6));
        assert_eq!(m.column_sums(), vec![BigInt::from(4), BigInt::from(6)]);
    }

    #[test]
    fn elementary_right_multiplication() {
        let mut m = IntMatrix::from_rows(&[vec![1, 2], vec![3, 4]]);
        let e = IntMatrix::elementary(2, 0, 1);
        let expect = m.mul(&e);
        m.mul_elementary_right(0, 1);
        assert_eq!(m, expect);
    }

    #[test]
    fn primitivity() {
        assert!(is_primitive(&IntMatrix::from_rows(&[vec![1, 1], vec![1, 0]])));
        assert!(!is_primitive(&IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]])));
        assert!(!is_primitive(&IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]])));
    }
}
