//! Interval exchange maps with marked discontinuities.

use std::cmp::Ordering;

use serde::Serialize;

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::perm::PermutationPair;

/// An admissible pair together with positive lengths.
///
/// The domain is `[0, Σλ)`, split into the half-open intervals `I_α` laid out
/// in top-row order. Lengths are never renormalized.
#[derive(Clone, Debug)]
pub struct Iem<S: Scalar> {
    pair: PermutationPair,
    lengths: Vec<S>,
    ctx: S::Ctx,
}

/// Outcome of a bounded search for connections between discontinuities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum KeaneVerdict {
    Pass {
        horizon: usize,
    },
    Fail {
        step: usize,
        from: String,
        to: String,
    },
    /// Tracked-precision arithmetic could not decide a comparison.
    Inconclusive {
        step: usize,
        reason: String,
    },
}

impl KeaneVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, KeaneVerdict::Pass { .. })
    }
}

impl<S: Scalar> Iem<S> {
    pub fn new(pair: PermutationPair, lengths: Vec<S>, ctx: S::Ctx) -> Result<Self> {
        pair.require_admissible()?;
        if lengths.len() != pair.d() {
            return Err(Error::InvalidLengths(format!(
                "expected {} lengths, got {}",
                pair.d(),
                lengths.len()
            )));
        }
        for (a, l) in lengths.iter().enumerate() {
            match l.sign() {
                Ok(Ordering::Greater) => {}
                Ok(_) => {
                    return Err(Error::InvalidLengths(format!(
                        "length of {} is not positive",
                        pair.name(a)
                    )))
                }
                Err(e) => {
                    return Err(Error::PrecisionExhausted(format!(
                        "positivity of the length of {} is undecidable: {e}",
                        pair.name(a)
                    )))
                }
            }
        }
        Ok(Iem { pair, lengths, ctx })
    }

    /// Constructor for lengths already known to be positive.
    pub(crate) fn from_parts(pair: PermutationPair, lengths: Vec<S>, ctx: S::Ctx) -> Self {
        Iem { pair, lengths, ctx }
    }

    pub fn pair(&self) -> &PermutationPair {
        &self.pair
    }

    pub fn lengths(&self) -> &[S] {
        &self.lengths
    }

    pub fn length(&self, letter: usize) -> &S {
        &self.lengths[letter]
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn d(&self) -> usize {
        self.pair.d()
    }

    pub fn total(&self) -> S {
        crate::arith::sum(&self.ctx, &self.lengths)
    }

    /// Lengths divided by their sum: the point of the normalized simplex.
    pub fn normalized(&self) -> Result<Vec<S>> {
        let t = self.total();
        self.lengths.iter().map(|l| l.div(&t)).collect()
    }

    /// Left endpoint of `I_α`, `Σ_{π0(β)<π0(α)} λ_β`.
    pub fn left(&self, letter: usize) -> S {
        self.prefix(0, letter)
    }

    /// Left endpoint of `T(I_α)`, `Σ_{π1(β)<π1(α)} λ_β`.
    pub fn image_left(&self, letter: usize) -> S {
        self.prefix(1, letter)
    }

    fn prefix(&self, e: usize, letter: usize) -> S {
        let p = self.pair.pos(e, letter);
        let mut acc = S::zero_in(&self.ctx);
        for &b in &self.pair.row(e)[..p] {
            acc = acc.add(&self.lengths[b]);
        }
        acc
    }

    /// Translation applied on `I_α`.
    pub fn translation(&self, letter: usize) -> S {
        self.image_left(letter).sub(&self.left(letter))
    }

    /// Letter of the interval of row `e` containing `x`.
    fn locate_in_row(&self, e: usize, x: &S) -> Result<usize> {
        if x.sign()? == Ordering::Less {
            return Err(Error::RangeError(format!(
                "point {} is left of the domain",
                x.to_interchange()
            )));
        }
        let mut right = S::zero_in(&self.ctx);
        for &a in self.pair.row(e) {
            right = right.add(&self.lengths[a]);
            if x.cmp_checked(&right)? == Ordering::Less {
                return Ok(a);
            }
        }
        Err(Error::RangeError(format!(
            "point {} is right of the domain",
            x.to_interchange()
        )))
    }

    /// Letter `α` with `x ∈ I_α`.
    pub fn locate(&self, x: &S) -> Result<usize> {
        self.locate_in_row(0, x)
    }

    /// `T(x)`.
    pub fn evaluate(&self, x: &S) -> Result<S> {
        let a = self.locate(x)?;
        Ok(x.add(&self.translation(a)))
    }

    /// `T⁻¹(y)`.
    pub fn evaluate_inverse(&self, y: &S) -> Result<S> {
        let a = self.locate_in_row(1, y)?;
        Ok(y.sub(&self.translation(a)))
    }

    /// `(x, T x, ..., T^{n-1} x)`.
    pub fn orbit(&self, x: &S, n: usize) -> Result<Vec<S>> {
        let tr: Vec<S> = (0..self.d()).map(|a| self.translation(a)).collect();
        let mut out = Vec::with_capacity(n);
        let mut cur = x.clone();
        for k in 0..n {
            if k > 0 {
                let a = self.locate(&cur)?;
                cur = cur.add(&tr[a]);
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Orbit points together with the letter of the interval each lies in.
    pub fn coded_orbit(&self, x: &S, n: usize) -> Result<Vec<(S, usize)>> {
        let tr: Vec<S> = (0..self.d()).map(|a| self.translation(a)).collect();
        let mut out = Vec::with_capacity(n);
        let mut cur = x.clone();
        for _ in 0..n {
            let a = self.locate(&cur)?;
            let next = cur.add(&tr[a]);
            out.push((cur, a));
            cur = next;
        }
        Ok(out)
    }

    /// Search for an orbit segment joining two discontinuities.
    ///
    /// For every letter `α` not first in the bottom row, the forward orbit of
    /// `left_α` is followed for `horizon` steps; the check fails at step `m`
    /// if `T^m(left_α)` is the left endpoint of an interval that is not first
    /// in the top row.
    pub fn keane_check(&self, horizon: usize) -> KeaneVerdict {
        let tr: Vec<S> = (0..self.d()).map(|a| self.translation(a)).collect();
        let lefts: Vec<S> = (0..self.d()).map(|a| self.left(a)).collect();
        let mut best: Option<KeaneVerdict> = None;
        let mut limit = horizon;
        for start in 0..self.d() {
            if self.pair.pos(1, start) == 0 {
                continue;
            }
            let mut x = lefts[start].clone();
            let mut letter = start;
            for m in 1..=limit {
                x = x.add(&tr[letter]);
                letter = match self.locate(&x) {
                    Ok(a) => a,
                    Err(e) => {
                        best = Some(KeaneVerdict::Inconclusive {
                            step: m,
                            reason: e.to_string(),
                        });
                        limit = m;
                        break;
                    }
                };
                if self.pair.pos(0, letter) == 0 {
                    continue;
                }
                match x.cmp_checked(&lefts[letter]) {
                    Ok(Ordering::Equal) => {
                        best = Some(KeaneVerdict::Fail {
                            step: m,
                            from: self.pair.name(start).to_string(),
                            to: self.pair.name(letter).to_string(),
                        });
                        limit = m;
                        break;
                    }
                    Ok(_) => {}
                    Err(e) => {
                        best = Some(KeaneVerdict::Inconclusive {
                            step: m,
                            reason: e.to_string(),
                        });
                        limit = m;
                        break;
                    }
                }
            }
        }
        best.unwrap_or(KeaneVerdict::Pass { horizon })
    }

    /// Same map with lengths converted to another arithmetic mode.
    pub fn map_lengths<R: Scalar>(&self, ctx: R::Ctx, f: impl Fn(&S) -> R) -> Iem<R> {
        Iem {
            pair: self.pair.clone(),
            lengths: self.lengths.iter().map(f).collect(),
            ctx,
        }
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

    fn swap(a: BigRational, b: BigRational) -> Iem<BigRational> {
        Iem::new(PermutationPair::from_rows("A B", "B A").unwrap(), vec![a, b], ()).unwrap()
    }

    #[test]
    fn evaluate_swap() {
        let t = swap(q(3, 5), q(2, 5));
        assert_eq!(t.evaluate(&q(1, 5)).unwrap(), q(3, 5));
        assert_eq!(t.evaluate(&q(4, 5)).unwrap(), q(1, 5));
        assert_eq!(t.evaluate_inverse(&q(3, 5)).unwrap(), q(1, 5));
        assert!(matches!(t.evaluate(&q(1, 1)), Err(Error::RangeError(_))));
        assert_eq!(t.orbit(&q(0, 1), 3).unwrap(), vec![q(0, 1), q(2, 5), q(4, 5)]);
        assert!(t.orbit(&q(0, 1), 0).unwrap().is_empty());
    }

    #[test]
    fn fixed_letter_is_not_moved() {
        let p = PermutationPair::from_rows("A B C", "A C B");
        // the prefix {A} is shared, so the pair is not admissible
        assert!(p.is_err());
        let p = PermutationPair::new_unchecked(
            crate::perm::default_names(3),
            &[1, 2, 3],
            &[1, 3, 2],
        )
        .unwrap();
        let t = Iem::from_parts(p, vec![q(1, 3), q(1, 3), q(1, 3)], ());
        assert_eq!(t.evaluate(&q(1, 7)).unwrap(), q(1, 7));
    }

    #[test]
    fn keane_examples() {
        assert_eq!(
            swap(q(1, 2), q(1, 2)).keane_check(10),
            KeaneVerdict::Fail {
                step: 1,
                from: "A".into(),
                to: "B".into()
            }
        );
        match swap(q(2, 3), q(1, 3)).keane_check(10) {
            KeaneVerdict::Fail { step, .. } => assert!(step <= 3),
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_lengths() {
        let p = PermutationPair::from_rows("A B", "B A").unwrap();
        assert!(matches!(
            Iem::new(p, vec![q(1, 1), q(0, 1)], ()),
            Err(Error::InvalidLengths(_))
        ));
    }
}
