//! JSON interchange for maps and piecewise functions.
//!
//! Map files look like
//!
//! ```json
//! {"alphabet": ["A", "B"], "pi0": {"A": 1, "B": 2}, "pi1": {"A": 2, "B": 1},
//!  "lengths": {"mode": "rational", "values": {"A": "3/5", "B": "2/5"}}}
//! ```
//!
//! with 1-based positions and `lengths.mode` one of `rational`, `real` (decimal strings plus
//! `precision_bits` and an optional `error_bound`) or `eigen` (a loop of step
//! types based at the pair, plus `precision_bits`).
//!
//! Function files give one piece per letter in local coordinates
//! `t = x - left_α`; `"center": true` subtracts the total mean:
//!
//! ```json
//! {"level": 0, "kind": "bv_star",
//!  "pieces": {"A": {"kind": "poly", "coeffs": ["-3/10", "1"]},
//!             "B": {"kind": "steps", "breaks": ["0", "1/5"], "values": ["1", "-1"]}}}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational, ArithMode, Ball, FieldElem, Mag, Scalar};
use crate::error::{Error, Result};
use crate::function::{FunctionKind, Piece, PiecewiseFunction, Poly};
use crate::iem::Iem;
use crate::perm::PermutationPair;
use crate::selfsim::{self_similar_from_loop, RauzyLoop};

/// Length block of a map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum LengthSpec {
    Rational {
        values: BTreeMap<String, String>,
    },
    Real {
        values: BTreeMap<String, String>,
        precision_bits: u32,
        /// Common radius added to every parsed value.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error_bound: Option<String>,
    },
    Eigen {
        #[serde(rename = "loop")]
        types: Vec<usize>,
        precision_bits: u32,
    },
}

impl LengthSpec {
    pub fn mode(&self) -> ArithMode {
        match self {
            LengthSpec::Rational { .. } => ArithMode::Rational,
            LengthSpec::Real { .. } => ArithMode::Real,
            LengthSpec::Eigen { .. } => ArithMode::Eigen,
        }
    }
}

/// A map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IemSpec {
    #[serde(flatten)]
    pub pair: PermutationPair,
    pub lengths: LengthSpec,
}

/// A map in whichever arithmetic its file asked for.
#[derive(Debug, Clone)]
pub enum LoadedIem {
    Rational(Iem<BigRational>),
    Real(Iem<Ball>),
    Eigen(Iem<FieldElem>, RauzyLoop),
}

impl LoadedIem {
    pub fn mode(&self) -> ArithMode {
        match self {
            LoadedIem::Rational(_) => ArithMode::Rational,
            LoadedIem::Real(_) => ArithMode::Real,
            LoadedIem::Eigen(..) => ArithMode::Eigen,
        }
    }

    pub fn pair(&self) -> &PermutationPair {
        match self {
            LoadedIem::Rational(t) => t.pair(),
            LoadedIem::Real(t) => t.pair(),
            LoadedIem::Eigen(t, _) => t.pair(),
        }
    }
}

fn letter_values<'a>(
    pair: &PermutationPair,
    values: &'a BTreeMap<String, String>,
) -> Result<Vec<&'a str>> {
    if values.len() != pair.d() {
        return Err(Error::InvalidLengths(format!(
            "expected {} lengths, got {}",
            pair.d(),
            values.len()
        )));
    }
    pair.names()
        .iter()
        .map(|a| {
            values
                .get(a)
                .map(String::as_str)
                .ok_or_else(|| Error::InvalidLengths(format!("no length for letter {a}")))
        })
        .collect()
}

impl IemSpec {
    pub fn build(&self) -> Result<LoadedIem> {
        self.pair.require_admissible()?;
        match &self.lengths {
            LengthSpec::Rational { values } => {
                let ls = letter_values(&self.pair, values)?
                    .into_iter()
                    .map(parse_rational)
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedIem::Rational(Iem::new(self.pair.clone(), ls, ())?))
            }
            LengthSpec::Real {
                values,
                precision_bits,
                error_bound,
            } => {
                let radius = match error_bound {
                    Some(e) => Some(Mag::from_rational_up(&parse_rational(e)?)),
                    None => None,
                };
                let ls = letter_values(&self.pair, values)?
                    .into_iter()
                    .map(|s| {
                        let b = Ball::from_rational(&parse_rational(s)?, *precision_bits);
                        Ok(match radius {
                            Some(r) => b.with_error(r),
                            None => b,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedIem::Real(Iem::new(self.pair.clone(), ls, *precision_bits)?))
            }
            LengthSpec::Eigen {
                types,
                precision_bits,
            } => {
                let lp = RauzyLoop::new(self.pair.clone(), types.clone())?;
                let t = self_similar_from_loop(&lp, *precision_bits)?;
                Ok(LoadedIem::Eigen(t, lp))
            }
        }
    }

    /// File form of a rational map.
    pub fn from_rational(t: &Iem<BigRational>) -> Self {
        IemSpec {
            pair: t.pair().clone(),
            lengths: LengthSpec::Rational {
                values: t
                    .pair()
                    .names()
                    .iter()
                    .cloned()
                    .zip(t.lengths().iter().map(format_rational))
                    .collect(),
            },
        }
    }

    /// File form of a tracked-real map; radii are folded into `error_bound`.
    pub fn from_real(t: &Iem<Ball>) -> Self {
        let bits = *t.ctx();
        let radius = t
            .lengths()
            .iter()
            .map(|l| l.radius())
            .fold(Ball::zero(bits).radius(), |a, b| if a.cmp_mag(b).is_lt() { b } else { a });
        IemSpec {
            pair: t.pair().clone(),
            lengths: LengthSpec::Real {
                values: t
                    .pair()
                    .names()
                    .iter()
                    .cloned()
                    .zip(t.lengths().iter().map(|l| format_rational(&l.midpoint())))
                    .collect(),
                precision_bits: bits,
                error_bound: (!radius.is_zero())
                    .then(|| format_rational(&crate::arith::f64_to_rational(radius.to_f64()))),
            },
        }
    }

    /// File form of a self-similar map.
    pub fn from_loop(lp: &RauzyLoop, precision_bits: u32) -> Self {
        IemSpec {
            pair: lp.base.clone(),
            lengths: LengthSpec::Eigen {
                types: lp.types.clone(),
                precision_bits,
            },
        }
    }
}

pub fn parse_iem(text: &str) -> Result<IemSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_iem(path: &Path) -> Result<LoadedIem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_iem(&text)?.build()
}

/// One piece of a function file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PieceSpec {
    Constant { value: String },
    Poly { coeffs: Vec<String> },
    Steps { breaks: Vec<String>, values: Vec<String> },
    /// `t - ℓ/2` scaled by `slope` (default 1), mean zero on the interval.
    Sawtooth {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slope: Option<String>,
    },
    Segments { segments: Vec<SegmentSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: String,
    pub coeffs: Vec<String>,
}

/// A function file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(default)]
    pub level: usize,
    #[serde(default = "default_kind")]
    pub kind: FunctionKind,
    pub pieces: BTreeMap<String, PieceSpec>,
    /// Subtract the total mean, making the function mean-zero; needed for
    /// polynomial data on maps with irrational lengths.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub center: bool,
}

fn default_kind() -> FunctionKind {
    FunctionKind::Bv
}

fn scalars<S: Scalar>(ctx: &S::Ctx, xs: &[String]) -> Result<Vec<S>> {
    xs.iter()
        .map(|s| Ok(S::from_rational(ctx, &parse_rational(s)?)))
        .collect()
}

impl PieceSpec {
    fn build<S: Scalar>(&self, ctx: &S::Ctx, len: &S) -> Result<Piece<S>> {
        match self {
            PieceSpec::Constant { value } => Ok(Piece::constant(S::from_rational(
                ctx,
                &parse_rational(value)?,
            ))),
            PieceSpec::Poly { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::Parse("polynomial piece without coefficients".into()));
                }
                Ok(Piece::poly(Poly::new(scalars(ctx, coeffs)?)))
            }
            PieceSpec::Steps { breaks, values } => {
                Piece::steps(scalars(ctx, breaks)?, scalars(ctx, values)?)
            }
            PieceSpec::Sawtooth { slope } => {
                let k = match slope {
                    Some(s) => S::from_rational(ctx, &parse_rational(s)?),
                    None => S::one_in(ctx),
                };
                let half = len.div(&S::from_i64(ctx, 2))?;
                Ok(Piece::poly(Poly::new(vec![half.mul(&k).neg(), k])))
            }
            PieceSpec::Segments { segments } => {
                let mut breaks = Vec::with_capacity(segments.len());
                let mut polys = Vec::with_capacity(segments.len());
                for s in segments {
                    breaks.push(S::from_rational(ctx, &parse_rational(&s.start)?));
                    polys.push(Poly::new(scalars(ctx, &s.coeffs)?));
                }
                let values = vec![S::zero_in(ctx); breaks.len()];
                let mut p = Piece::steps(breaks, values)?;
                for (seg, poly) in p.segments.iter_mut().zip(polys) {
                    seg.poly = poly;
                }
                Ok(p)
            }
        }
    }
}

impl FunctionSpec {
    /// Materialize on the intervals of `t` (which must be the map at the
    /// file's level).
    pub fn build<S: Scalar>(&self, t: &Iem<S>) -> Result<PiecewiseFunction<S>> {
        let pair = t.pair();
        if self.pieces.len() != pair.d() {
            return Err(Error::Parse(format!(
                "expected one piece per letter ({}), got {}",
                pair.d(),
                self.pieces.len()
            )));
        }
        let pieces = pair
            .names()
            .iter()
            .enumerate()
            .map(|(a, name)| {
                self.pieces
                    .get(name)
                    .ok_or_else(|| Error::Parse(format!("no piece for letter {name}")))?
                    .build(t.ctx(), t.length(a))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut f = PiecewiseFunction::new(self.level, self.kind, pieces, t.lengths().to_vec());
        if self.center {
            let m = f.integral()?.div(&t.total())?;
            let c = PiecewiseFunction::from_constants(self.level, &vec![m; pair.d()], t.lengths());
            f = f.sub(&c)?;
            f.kind = self.kind;
        }
        if self.kind.is_mean_zero() {
            f.require_mean_zero()?;
        }
        Ok(f)
    }

    /// File form of a function; numbers use the interchange text of their
    /// mode.
    pub fn from_function<S: Scalar>(f: &PiecewiseFunction<S>, pair: &PermutationPair) -> Self {
        let text = |xs: &[S]| xs.iter().map(Scalar::to_interchange).collect::<Vec<_>>();
        let pieces = pair
            .names()
            .iter()
            .cloned()
            .zip(f.pieces.iter().map(|p| {
                if p.segments.len() == 1 {
                    PieceSpec::Poly {
                        coeffs: text(&p.segments[0].poly.coeffs),
                    }
                } else {
                    PieceSpec::Segments {
                        segments: p
                            .segments
                            .iter()
                            .map(|s| SegmentSpec {
                                start: s.start.to_interchange(),
                                coeffs: text(&s.poly.coeffs),
                            })
                            .collect(),
                    }
                }
            }))
            .collect();
        FunctionSpec {
            level: f.level,
            kind: f.kind,
            pieces,
            center: false,
        }
    }
}

pub fn parse_function(text: &str) -> Result<FunctionSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_function(path: &Path) -> Result<FunctionSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_function(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWAP: &str = r#"{"alphabet": ["A", "B"], "pi0": {"A": 1, "B": 2}, "pi1": {"A": 2, "B": 1},
        "lengths": {"mode": "rational", "values": {"A": "3/5", "B": "2/5"}}}"#;

    #[test]
    fn rational_map_round_trips() {
        let spec = parse_iem(SWAP).unwrap();
        let LoadedIem::Rational(t) = spec.build().unwrap() else {
            panic!("wrong mode")
        };
        assert_eq!(format_rational(t.length(0)), "3/5");
        let back = IemSpec::from_rational(&t);
        assert_eq!(back, spec);
        let text = serde_json::to_string(&back).unwrap();
        assert_eq!(parse_iem(&text).unwrap(), spec);
    }

    #[test]
    fn eigen_map_follows_its_loop() {
        let text = r#"{"alphabet": ["A", "B"], "pi0": {"A": 1, "B": 2}, "pi1": {"A": 2, "B": 1},
            "lengths": {"mode": "eigen", "loop": [0, 1], "precision_bits": 128}}"#;
        let LoadedIem::Eigen(t, lp) = parse_iem(text).unwrap().build().unwrap() else {
            panic!("wrong mode")
        };
        assert!(crate::selfsim::follows_loop(&t, &lp, 3).unwrap());
    }

    #[test]
    fn missing_mode_is_rejected() {
        let text = r#"{"alphabet": ["A", "B"], "pi0": {"A": 1, "B": 2}, "pi1": {"A": 2, "B": 1},
            "lengths": {"values": {"A": "3/5", "B": "2/5"}}}"#;
        assert!(matches!(parse_iem(text), Err(Error::Parse(_))));
    }

    #[test]
    fn real_lengths_carry_their_radius() {
        let text = r#"{"alphabet": ["A", "B"], "pi0": {"A": 1, "B": 2}, "pi1": {"A": 2, "B": 1},
            "lengths": {"mode": "real", "precision_bits": 128, "error_bound": "1e-30",
                        "values": {"A": "0.618033988749894848204586834365638117720", "B": "1"}}}"#;
        let LoadedIem::Real(t) = parse_iem(text).unwrap().build().unwrap() else {
            panic!("wrong mode")
        };
        assert!(t.length(0).radius().to_f64() >= 1e-30);
    }

    #[test]
    fn function_file_builds_mean_zero_sawtooth() {
        let LoadedIem::Rational(t) = parse_iem(SWAP).unwrap().build().unwrap() else {
            panic!("wrong mode")
        };
        let f = parse_function(
            r#"{"kind": "bv_star", "pieces": {"A": {"kind": "sawtooth"},
                "B": {"kind": "steps", "breaks": ["0", "1/5"], "values": ["1", "-1"]}}}"#,
        )
        .unwrap()
        .build(&t)
        .unwrap();
        assert_eq!(f.eval_local(0, &BigRational::from_integer(0.into())).unwrap(), parse_rational("-3/10").unwrap());
        assert_eq!(f.integral().unwrap(), parse_rational("0").unwrap());
        let spec = FunctionSpec::from_function(&f, t.pair());
        assert_eq!(spec.build(&t).unwrap().means().unwrap(), f.means().unwrap());
    }
}
