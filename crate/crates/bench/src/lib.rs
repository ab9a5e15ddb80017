//! Fixtures shared by the benchmarks.

use iemlab::{benchmarks, Ball, InductionConfig, InductionTrace, PiecewiseFunction, Scalar};
use iemlab::function::{Piece, Poly};
use iemlab::FunctionKind;

pub const BITS: u32 = 256;

/// Benchmark map `name` (golden, d3, d4) induced for `blocks` blocks in
/// real mode.
pub fn ball_trace(name: &str, blocks: usize) -> InductionTrace<Ball> {
    let t = match name {
        "golden" => benchmarks::golden(),
        "d3" => benchmarks::d3(),
        "d4" => benchmarks::d4(),
        other => panic!("unknown benchmark {other}"),
    }
    .expect("benchmark builds");
    InductionTrace::run(t, InductionConfig::default(), blocks)
        .expect("benchmark induction")
        .to_ball(BITS)
}

/// Mean-zero datum `k_α (t - ℓ_α/2)` with slopes cycling through 1, -2, 3.
pub fn sawtooth<S: Scalar>(lengths: &[S]) -> PiecewiseFunction<S> {
    let ctx = lengths[0].context();
    let half = S::from_f64(&ctx, 0.5);
    let pieces = lengths
        .iter()
        .enumerate()
        .map(|(a, len)| {
            let k = S::from_i64(&ctx, [1, -2, 3][a % 3]);
            Piece::poly(Poly::new(vec![k.mul(&len.mul(&half)).neg(), k]))
        })
        .collect();
    PiecewiseFunction::new(0, FunctionKind::BvStar, pieces, lengths.to_vec())
}
