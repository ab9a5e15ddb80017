//! Rauzy–Veech induction, its Zorich accelerations, and the cocycle.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{Ball, Scalar};
use crate::error::{Error, Result};
use crate::iem::Iem;
use crate::matrix::IntMatrix;
use crate::perm::PermutationPair;
use crate::rauzy::{arrow_name, NameConvention};

pub const DEFAULT_STEP_CAP: usize = 1_000_000;

/// How elementary steps are grouped into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Acceleration {
    /// One block per elementary step.
    Rv,
    /// Maximal runs of steps carrying the same name.
    Zorich,
    /// Maximal runs whose names do not yet exhaust the alphabet.
    #[default]
    Accelerated,
}

impl fmt::Display for Acceleration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Acceleration::Rv => "rv",
            Acceleration::Zorich => "zorich",
            Acceleration::Accelerated => "accelerated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InductionConfig {
    pub acceleration: Acceleration,
    pub convention: NameConvention,
    /// Maximum number of elementary steps inside one block.
    pub step_cap: usize,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig {
            acceleration: Acceleration::Accelerated,
            convention: NameConvention::Winner,
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

impl InductionConfig {
    pub fn new(acceleration: Acceleration) -> Self {
        InductionConfig {
            acceleration,
            ..Default::default()
        }
    }
}

/// Type of the next induction step: `ε` such that the last interval of row
/// `ε` is strictly longer than the last interval of the other row.
pub fn step_type<S: Scalar>(t: &Iem<S>) -> Result<usize> {
    let p = t.pair();
    let a0 = t.length(p.last(0));
    let a1 = t.length(p.last(1));
    match a0.cmp_checked(a1)? {
        Ordering::Greater => Ok(0),
        Ordering::Less => Ok(1),
        Ordering::Equal => Err(Error::KeaneViolation(format!(
            "last intervals {} and {} have equal length {}",
            p.name(p.last(0)),
            p.name(p.last(1)),
            a0.to_interchange()
        ))),
    }
}

/// One elementary step: the first return map on the domain shortened by
/// the losing interval, its type, and `E` with `λ_old = E λ_new`.
pub fn rv_step<S: Scalar>(t: &Iem<S>) -> Result<(Iem<S>, usize, IntMatrix)> {
    let (next, step) = elementary(t)?;
    let e = IntMatrix::elementary(t.d(), step.winner, step.loser);
    Ok((next, step.eps, e))
}

#[derive(Debug, Clone)]
struct RawStep<S> {
    eps: usize,
    winner: usize,
    loser: usize,
    shift: S,
}

fn elementary<S: Scalar>(t: &Iem<S>) -> Result<(Iem<S>, RawStep<S>)> {
    let eps = step_type(t)?;
    let p = t.pair();
    let winner = p.last(eps);
    let loser = p.last(1 - eps);
    let mut lengths = t.lengths().to_vec();
    lengths[winner] = lengths[winner].sub(&lengths[loser]);
    let pair = p.rauzy_move(eps)?;
    let shift = lengths[winner].clone();
    Ok((
        Iem::from_parts(pair, lengths, t.ctx().clone()),
        RawStep {
            eps,
            winner,
            loser,
            shift,
        },
    ))
}

/// One elementary step of a trace.
#[derive(Debug, Clone)]
pub struct Step<S> {
    /// Index of the source pair in the trace's pair table.
    pub pair: usize,
    pub eps: usize,
    /// Letter whose interval is shortened.
    pub winner: usize,
    /// Letter whose interval is removed from the domain.
    pub loser: usize,
    /// New length of the winner, which is also the offset at which the
    /// loser's new interval enters the winner's old one.
    pub shift: S,
    /// Arrow name under the trace's convention.
    pub name: usize,
}

/// Steps `start..end` with product matrix `z`.
#[derive(Debug, Clone)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    pub z: IntMatrix,
}

/// Append-only record of an induction run starting at `T(0)`.
///
/// Block `n ≥ 1` is stored at index `n - 1`, carries `Z(n)` and produces
/// `T(n)`, so that `λ(n-1) = Z(n) λ(n)`.
#[derive(Debug)]
pub struct InductionTrace<S: Scalar> {
    config: InductionConfig,
    pairs: Vec<PermutationPair>,
    pair_ids: HashMap<PermutationPair, usize>,
    steps: Vec<Step<S>>,
    blocks: Vec<Block>,
    levels: Vec<Iem<S>>,
    head: Iem<S>,
    prefix: Vec<IntMatrix>,
    cache: Mutex<HashMap<(usize, usize), Arc<IntMatrix>>>,
}

impl<S: Scalar> InductionTrace<S> {
    pub fn new(t0: Iem<S>, config: InductionConfig) -> Self {
        let d = t0.d();
        let mut tr = InductionTrace {
            config,
            pairs: Vec::new(),
            pair_ids: HashMap::new(),
            steps: Vec::new(),
            blocks: Vec::new(),
            levels: vec![t0.clone()],
            head: t0.clone(),
            prefix: vec![IntMatrix::identity(d)],
            cache: Mutex::new(HashMap::new()),
        };
        tr.intern(t0.pair().clone());
        tr
    }

    /// Trace with `blocks` blocks computed.
    pub fn run(t0: Iem<S>, config: InductionConfig, blocks: usize) -> Result<Self> {
        let mut tr = InductionTrace::new(t0, config);
        tr.extend_to(blocks)?;
        Ok(tr)
    }

    fn intern(&mut self, p: PermutationPair) -> usize {
        if let Some(&i) = self.pair_ids.get(&p) {
            return i;
        }
        let i = self.pairs.len();
        self.pair_ids.insert(p.clone(), i);
        self.pairs.push(p);
        i
    }

    pub fn config(&self) -> &InductionConfig {
        &self.config
    }

    pub fn d(&self) -> usize {
        self.levels[0].d()
    }

    pub fn ctx(&self) -> &S::Ctx {
        self.levels[0].ctx()
    }

    /// Number of computed blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn steps(&self) -> &[Step<S>] {
        &self.steps
    }

    pub fn pair_of(&self, step: &Step<S>) -> &PermutationPair {
        &self.pairs[step.pair]
    }

    /// Name of a step's arrow under any convention.
    pub fn step_name(&self, step: &Step<S>, conv: NameConvention) -> usize {
        arrow_name(&self.pairs[step.pair], step.eps, conv)
    }

    /// Block `n` (1-based).
    pub fn block(&self, n: usize) -> &Block {
        &self.blocks[n - 1]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `Z(n)`, 1-based.
    pub fn z(&self, n: usize) -> &IntMatrix {
        &self.blocks[n - 1].z
    }

    /// `T(n)`.
    pub fn level(&self, n: usize) -> &Iem<S> {
        &self.levels[n]
    }

    /// Steps of block `n`.
    pub fn block_steps(&self, n: usize) -> &[Step<S>] {
        let b = self.block(n);
        &self.steps[b.start..b.end]
    }

    /// Same trace with every length and offset converted by `f`, e.g. exact
    /// lengths enclosed in balls.
    pub fn map_scalars<R: Scalar>(&self, ctx: R::Ctx, f: impl Fn(&S) -> R) -> InductionTrace<R> {
        let conv = |t: &Iem<S>| t.map_lengths(ctx.clone(), &f);
        InductionTrace {
            config: self.config,
            pairs: self.pairs.clone(),
            pair_ids: self.pair_ids.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    pair: s.pair,
                    eps: s.eps,
                    winner: s.winner,
                    loser: s.loser,
                    shift: f(&s.shift),
                    name: s.name,
                })
                .collect(),
            blocks: self.blocks.clone(),
            levels: self.levels.iter().map(conv).collect(),
            head: conv(&self.head),
            prefix: self.prefix.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Enclose every length in a ball of `bits` bits of precision.
    pub fn to_ball(&self, bits: u32) -> InductionTrace<Ball> {
        self.map_scalars(bits, |x| x.to_ball(bits))
    }

    /// Compute blocks until `n` are available.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.blocks.len() < n {
            self.next_block()?;
        }
        Ok(())
    }

    fn ensure_step(&mut self, k: usize) -> Result<()> {
        while self.steps.len() <= k {
            let (next, raw) = elementary(&self.head)?;
            let pid = self.intern(self.head.pair().clone());
            let name = arrow_name(&self.pairs[pid], raw.eps, self.config.convention);
            self.steps.push(Step {
                pair: pid,
                eps: raw.eps,
                winner: raw.winner,
                loser: raw.loser,
                shift: raw.shift,
                name,
            });
            self.head = next;
        }
        Ok(())
    }

    fn next_block(&mut self) -> Result<()> {
        let start = self.blocks.last().map_or(0, |b| b.end);
        let d = self.d();
        let cap = self.config.step_cap;
        let horizon = |n: usize| {
            Error::HorizonExceeded(format!(
                "block {} did not close within {cap} elementary steps",
                n + 1
            ))
        };
        let end = match self.config.acceleration {
            Acceleration::Rv => {
                self.ensure_step(start)?;
                start + 1
            }
            Acceleration::Zorich => {
                self.ensure_step(start)?;
                let first = self.steps[start].name;
                let mut j = start + 1;
                loop {
                    if j - start > cap {
                        return Err(horizon(self.blocks.len()));
                    }
                    self.ensure_step(j)?;
                    if self.steps[j].name != first {
                        break j;
                    }
                    j += 1;
                }
            }
            Acceleration::Accelerated => {
                let mut names = BTreeSet::new();
                let mut j = start;
                loop {
                    if j - start > cap {
                        return Err(horizon(self.blocks.len()));
                    }
                    self.ensure_step(j)?;
                    let nm = self.steps[j].name;
                    if !names.contains(&nm) && names.len() + 1 == d {
                        break j;
                    }
                    names.insert(nm);
                    j += 1;
                }
            }
        };
        let mut z = IntMatrix::identity(d);
        let mut cur = self.levels.last().unwrap().clone();
        for k in start..end {
            let s = &self.steps[k];
            z.mul_elementary_right(s.winner, s.loser);
            let mut lengths = cur.lengths().to_vec();
            lengths[s.winner] = s.shift.clone();
            let pair = self.pairs[s.pair].rauzy_move(s.eps)?;
            cur = Iem::from_parts(pair, lengths, cur.ctx().clone());
        }
        let q = self.prefix.last().unwrap().mul(&z);
        self.prefix.push(q);
        self.levels.push(cur);
        self.blocks.push(Block { start, end, z });
        Ok(())
    }

    fn check_range(&self, m: usize, n: usize) -> Result<()> {
        if m > n || n > self.blocks.len() {
            return Err(Error::RangeError(format!(
                "need 0 <= m <= n <= {}, got m={m}, n={n}",
                self.blocks.len()
            )));
        }
        Ok(())
    }

    /// `Q(m, n) = Z(m+1) ⋯ Z(n)`; the identity when `m = n`.
    pub fn cocycle(&self, m: usize, n: usize) -> Result<IntMatrix> {
        self.check_range(m, n)?;
        if m == 0 {
            return Ok(self.prefix[n].clone());
        }
        let mut acc = IntMatrix::identity(self.d());
        let mut i = m;
        while i < n {
            let mut len = 1usize;
            while i % (len * 2) == 0 && i + len * 2 <= n {
                len *= 2;
            }
            acc = acc.mul(&self.segment(i, len));
            i += len;
        }
        Ok(acc)
    }

    /// `Q(0, n)`, maintained incrementally.
    pub fn q0(&self, n: usize) -> &IntMatrix {
        &self.prefix[n]
    }

    /// Product of the `len` blocks following level `i`; `len` is a power of
    /// two dividing `i`.
    fn segment(&self, i: usize, len: usize) -> Arc<IntMatrix> {
        if len == 1 {
            return Arc::new(self.blocks[i].z.clone());
        }
        if let Some(m) = self.cache.lock().unwrap().get(&(i, len)) {
            return m.clone();
        }
        let half = len / 2;
        let m = Arc::new(self.segment(i, half).mul(&self.segment(i + half, half)));
        self.cache.lock().unwrap().insert((i, len), m.clone());
        m
    }

    /// Smallest `n > m` with every entry of `Q(m, n)` positive.
    pub fn positivity_horizon(&self, m: usize) -> Result<usize> {
        self.check_range(m, m)?;
        let mut q = IntMatrix::identity(self.d());
        for n in m + 1..=self.blocks.len() {
            q = q.mul(self.z(n));
            if q.is_positive() {
                return Ok(n);
            }
        }
        Err(Error::HorizonExceeded(format!(
            "Q({m}, n) not positive for any computed n <= {}",
            self.blocks.len()
        )))
    }

    /// For each letter `β`, the itinerary of `I_β(n)` through the intervals
    /// `I_α(m)` before its first return: pairs `(α, offset)` meaning that a
    /// point at local coordinate `t` in `I_β(n)` visits `I_α(m)` at local
    /// coordinate `t + offset`.
    pub fn tower_structure(&self, m: usize, n: usize) -> Result<Vec<Vec<(usize, S)>>> {
        if m >= n {
            return Err(Error::RangeError(format!("tower needs m < n, got m={m}, n={n}")));
        }
        self.check_range(m, n)?;
        let ctx = self.ctx();
        let mut itin: Vec<Vec<(usize, S)>> =
            (0..self.d()).map(|a| vec![(a, S::zero_in(ctx))]).collect();
        let from = if m == 0 { 0 } else { self.block(m).end };
        let to = self.block(n).end;
        for s in &self.steps[from..to] {
            let shifted: Vec<(usize, S)> = itin[s.winner]
                .iter()
                .map(|(a, off)| (*a, off.add(&s.shift)))
                .collect();
            let own = std::mem::take(&mut itin[s.loser]);
            itin[s.loser] = if s.eps == 0 {
                own.into_iter().chain(shifted).collect()
            } else {
                shifted.into_iter().chain(own).collect()
            };
        }
        Ok(itin)
    }

    /// Lengths check `λ(m) = Q(m, n) λ(n)`; returns the residual vector.
    pub fn length_residual(&self, m: usize, n: usize) -> Result<Vec<S>> {
        let q = self.cocycle(m, n)?;
        let pushed = q.apply(self.ctx(), self.levels[n].lengths());
        Ok(self.levels[m]
            .lengths()
            .iter()
            .zip(&pushed)
            .map(|(a, b)| a.sub(b))
            .collect())
    }

    /// Names (under `conv`) taken by the steps of blocks `from+1 ..= to`.
    pub fn names_between(&self, from: usize, to: usize, conv: NameConvention) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for n in from + 1..=to {
            for s in self.block_steps(n) {
                out.insert(self.step_name(s, conv));
            }
        }
        out
    }

    /// First window of `window` consecutive blocks missing some name, if any.
    pub fn name_coverage_gap(&self, window: usize, conv: NameConvention) -> Option<usize> {
        let len = self.blocks.len();
        if len < window {
            return (self.names_between(0, len, conv).len() < self.d()).then_some(0);
        }
        (0..=len - window).find(|&s| self.names_between(s, s + window, conv).len() < self.d())
    }

    /// Per-step type sequence of block `n`.
    pub fn block_types(&self, n: usize) -> Vec<usize> {
        self.block_steps(n).iter().map(|s| s.eps).collect()
    }
}

/// Return times `Q_β = Σ_α Q_{αβ}` (column sums).
pub fn return_times(q: &IntMatrix) -> Vec<BigInt> {
    q.column_sums()
}
