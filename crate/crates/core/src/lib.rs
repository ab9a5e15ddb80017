//! Interval exchange maps: Rauzy–Veech induction and its accelerations,
//! special Birkhoff sums, Roth-type diagnostics and a constructive solver
//! for the cohomological equation `Ψ - Ψ∘T = Φ`.
//!
//! Algorithms are generic over [`Scalar`]: exact rationals, certified
//! balls, or exact elements of a number field for self-similar maps.

pub mod arith;
pub mod benchmarks;
pub mod birkhoff;
pub mod cohomology;
pub mod error;
pub mod fit;
pub mod function;
pub mod iem;
pub mod induction;
pub mod io;
pub mod matrix;
pub mod perm;
pub mod rauzy;
pub mod roth;
pub mod run;
pub mod selfsim;

pub use arith::{ArithMode, Ball, FieldElem, NumberField, Scalar};
pub use error::{Error, Result};
pub use function::{FunctionKind, PiecewiseFunction};
pub use iem::{Iem, KeaneVerdict};
pub use induction::{Acceleration, InductionConfig, InductionTrace};
pub use matrix::IntMatrix;
pub use perm::PermutationPair;
pub use rauzy::{NameConvention, RauzyDiagram};
pub use roth::{MatrixCocycle, RothReport, RothVerdict};
pub use run::{Command, OutputFormat, RunConfig};
pub use selfsim::RauzyLoop;
