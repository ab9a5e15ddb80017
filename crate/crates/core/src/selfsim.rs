//! Self-similar interval exchange maps built from closed paths in a Rauzy
//! diagram.

use std::cmp::Ordering;
use std::sync::Arc;

use serde::Serialize;

use crate::arith::{FieldElem, NumberField, Scalar};
use crate::error::{Error, Result};
use crate::iem::Iem;
use crate::induction::step_type;
use crate::matrix::{is_primitive, IntMatrix};
use crate::perm::PermutationPair;
use crate::rauzy::path_matrix;

/// A closed path of step types based at a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RauzyLoop {
    pub base: PermutationPair,
    pub types: Vec<usize>,
}

impl RauzyLoop {
    pub fn new(base: PermutationPair, types: Vec<usize>) -> Result<Self> {
        base.require_admissible()?;
        if types.is_empty() || types.iter().any(|&e| e > 1) {
            return Err(Error::InvalidPermutation(
                "a loop is a nonempty sequence of types 0 and 1".into(),
            ));
        }
        let (_, end) = path_matrix(&base, &types)?;
        if end != base {
            return Err(Error::InvalidPermutation(format!(
                "path {:?} from {base} ends at {end}, not a loop",
                types
            )));
        }
        Ok(RauzyLoop { base, types })
    }

    /// `L = E_1 ⋯ E_k`, so that `λ = L λ'` after one traversal.
    pub fn matrix(&self) -> IntMatrix {
        path_matrix(&self.base, &self.types)
            .expect("validated loop")
            .0
    }

    /// The loop traversed `k` times.
    pub fn repeated(&self, k: usize) -> RauzyLoop {
        RauzyLoop {
            base: self.base.clone(),
            types: self.types.repeat(k),
        }
    }
}

/// Determinant by cofactor expansion; only ring operations are used.
fn det_expand<S: Scalar>(ctx: &S::Ctx, m: &[Vec<S>]) -> S {
    let n = m.len();
    match n {
        0 => S::one_in(ctx),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = S::zero_in(ctx);
            for j in 0..n {
                let minor: Vec<Vec<S>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][j].mul(&det_expand(ctx, &minor));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Column `col` of the adjugate of `m`.
fn adjugate_column<S: Scalar>(ctx: &S::Ctx, m: &[Vec<S>], col: usize) -> Vec<S> {
    let n = m.len();
    (0..n)
        .map(|i| {
            // adj(m)[i][col] = (-1)^(i+col) det(m without row col, column i)
            let minor: Vec<Vec<S>> = (0..n)
                .filter(|&r| r != col)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c].clone()).collect())
                .collect();
            let v = det_expand(ctx, &minor);
            if (i + col) % 2 == 0 {
                v
            } else {
                v.neg()
            }
        })
        .collect()
}

/// Positive eigenvector for the Perron–Frobenius root of a primitive
/// matrix, normalized to total 1, over the field generated by that root.
pub fn perron_frobenius_vector(
    l: &IntMatrix,
    precision_bits: u32,
) -> Result<(Arc<NumberField>, Vec<FieldElem>)> {
    if !is_primitive(l) {
        return Err(Error::NotPrimitive(format!("{l:?}")));
    }
    let field = NumberField::perron_frobenius(&l.rows(), precision_bits)?;
    let r = field.generator();
    let n = l.dim();
    let a: Vec<Vec<FieldElem>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = FieldElem::from_bigint(&field, l.get(i, j)).neg();
                    if i == j {
                        e.add(&r)
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let v = adjugate_column(&field, &a, col);
        let total = crate::arith::sum(&field, &v);
        if total.sign()? == Ordering::Equal {
            continue;
        }
        let v: Vec<FieldElem> = v.iter().map(|x| x.div(&total)).collect::<Result<_>>()?;
        return Ok((field, v));
    }
    Err(Error::NotPrimitive(
        "Perron-Frobenius root is not simple".into(),
    ))
}

/// The interval exchange at the loop's base pair whose lengths are the
/// Perron–Frobenius eigenvector of the loop matrix.
pub fn self_similar_from_loop(lp: &RauzyLoop, precision_bits: u32) -> Result<Iem<FieldElem>> {
    let (field, v) = perron_frobenius_vector(&lp.matrix(), precision_bits)?;
    Iem::new(lp.base.clone(), v, field)
}

/// Whether the first `periods` traversals of the induction path of `t`
/// repeat the loop's types.
pub fn follows_loop<S: Scalar>(t: &Iem<S>, lp: &RauzyLoop, periods: usize) -> Result<bool> {
    let mut cur = t.clone();
    for _ in 0..periods {
        for &e in &lp.types {
            if step_type(&cur)? != e {
                return Ok(false);
            }
            cur = crate::induction::rv_step(&cur)?.0;
        }
    }
    Ok(true)
}
