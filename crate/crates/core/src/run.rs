//! Command execution behind the `iemlab` binary: configuration checks, one
//! entry point per command and report emission.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{ArithMode, Ball, FieldElem, Scalar};
use crate::benchmarks;
use crate::birkhoff::{birkhoff_sums, decay_profile, orbit_decomposition};
use crate::cohomology::{self, check_majorant, coboundary, coboundary_roundtrip, SolveConfig};
use crate::error::{Error, Result};
use crate::function::PiecewiseFunction;
use crate::iem::Iem;
use crate::induction::{Acceleration, InductionConfig, InductionTrace};
use crate::io::{load_function, load_iem, FunctionSpec, IemSpec, LoadedIem};
use crate::rauzy::{NameConvention, RauzyDiagram};
use crate::roth::{roth_report, MatrixCocycle, RothConfig, DEFAULT_DELTA};
use crate::selfsim::follows_loop;

pub const DEFAULT_PRECISION_BITS: u32 = 256;
/// Environment variable overriding the default precision.
pub const PRECISION_ENV: &str = "IEMLAB_PRECISION_BITS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Diagram,
    Induct,
    Birkhoff,
    Roth,
    Solve,
    Selfsim,
    Roundtrip,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Diagram => "diagram",
            Command::Induct => "induct",
            Command::Birkhoff => "birkhoff",
            Command::Roth => "roth",
            Command::Solve => "solve",
            Command::Selfsim => "selfsim",
            Command::Roundtrip => "roundtrip",
        }
    }

    pub fn formats(self) -> &'static [OutputFormat] {
        use OutputFormat::*;
        match self {
            Command::Diagram => &[Dot, Json],
            Command::Induct | Command::Birkhoff | Command::Roth | Command::Solve => &[Json, Csv],
            Command::Selfsim | Command::Roundtrip => &[Json],
        }
    }

    fn needs_function(self) -> bool {
        matches!(self, Command::Birkhoff | Command::Solve | Command::Roundtrip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Dot,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Dot => "dot",
        }
    }
}

/// Everything a command needs; `None` numeric fields take per-command
/// defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub iem: Option<PathBuf>,
    /// Built-in instance (`golden`, `d3`, `d4`) instead of a map file.
    pub benchmark: Option<String>,
    /// Datum `φ` (birkhoff, solve) or planted `Ψ0` (roundtrip).
    pub function: Option<PathBuf>,
    pub blocks: Option<usize>,
    pub acceleration: Acceleration,
    pub truncation: usize,
    pub orbit: usize,
    pub levels: usize,
    pub precision_bits: u32,
    pub delta: f64,
    pub depth: usize,
    pub horizon: usize,
    pub seed: u64,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let solve = SolveConfig::default();
        RunConfig {
            command,
            iem: None,
            benchmark: None,
            function: None,
            blocks: None,
            acceleration: Acceleration::Accelerated,
            truncation: solve.truncation,
            orbit: solve.orbit,
            levels: solve.levels,
            precision_bits: DEFAULT_PRECISION_BITS,
            delta: DEFAULT_DELTA,
            depth: solve.depth,
            horizon: 10_000,
            seed: solve.seed,
            format: command.formats()[0],
        }
    }

    fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            truncation: self.truncation,
            depth: self.depth,
            delta: self.delta,
            seed: self.seed,
            levels: self.levels,
            orbit: self.orbit,
        }
    }

    /// Blocks to compute when `--blocks` was not given.
    pub fn effective_blocks(&self) -> usize {
        self.blocks.unwrap_or(match self.command {
            Command::Solve => cohomology::blocks_needed(&self.solve_config()),
            Command::Roth => 3 * self.depth.min(24) + 3,
            Command::Birkhoff => self.levels + 1,
            _ => 50,
        })
    }

    /// Look-ahead depth; the Roth report defaults to a shorter one than the
    /// solver.
    fn roth_depth(&self) -> usize {
        self.depth.min(self.effective_blocks().saturating_sub(2))
    }
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

fn diag(field: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        field: field.into(),
        message: message.into(),
    }
}

/// Schema and cross-field checks, without running anything.
pub fn validate(cfg: &RunConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !cfg.command.formats().contains(&cfg.format) {
        out.push(diag(
            "format",
            format!(
                "format invalid for command: {} does not emit {}",
                cfg.command.name(),
                cfg.format.extension()
            ),
        ));
    }
    let mut spec = None;
    match (&cfg.iem, &cfg.benchmark) {
        (Some(_), Some(_)) => out.push(diag("iem", "give either a map file or a benchmark, not both")),
        (None, None) => out.push(diag("iem", "a map file or a benchmark is required")),
        (None, Some(b)) => {
            if benchmark_loop(b).is_none() {
                out.push(diag("benchmark", format!("unknown benchmark {b:?}")));
            }
        }
        (Some(p), None) => match std::fs::read_to_string(p) {
            Err(e) => out.push(diag("iem", format!("{}: {e}", p.display()))),
            Ok(text) => match serde_json::from_str::<Value>(&text) {
                Err(e) => out.push(diag("iem", format!("not JSON: {e}"))),
                Ok(v) => {
                    if v.get("lengths").and_then(|l| l.get("mode")).is_none() {
                        out.push(diag("iem.lengths.mode", "missing lengths mode"));
                    }
                    match serde_json::from_value::<IemSpec>(v) {
                        Ok(s) => {
                            if let Err(e) = s.pair.require_admissible() {
                                out.push(diag("iem.pi", e.to_string()));
                            }
                            spec = Some(s);
                        }
                        Err(e) => out.push(diag("iem", e.to_string())),
                    }
                }
            },
        },
    }
    if cfg.command == Command::Selfsim {
        if let Some(s) = &spec {
            if s.lengths.mode() != ArithMode::Eigen {
                out.push(diag("iem.lengths.mode", "selfsim needs eigen lengths"));
            }
        }
    }
    match (&cfg.function, cfg.command.needs_function()) {
        (None, true) => out.push(diag("function", format!("{} needs --fn", cfg.command.name()))),
        (Some(_), false) => out.push(diag("function", format!("{} takes no function", cfg.command.name()))),
        (Some(p), true) => match load_function(p) {
            Err(e) => out.push(diag("function", e.to_string())),
            Ok(f) => {
                let names: Vec<String> = match (&spec, &cfg.benchmark) {
                    (Some(s), _) => s.pair.names().to_vec(),
                    (None, Some(b)) => benchmark_loop(b)
                        .map(|l| l.base.names().to_vec())
                        .unwrap_or_default(),
                    _ => Vec::new(),
                };
                if !names.is_empty() {
                    for n in &names {
                        if !f.pieces.contains_key(n) {
                            out.push(diag("function.pieces", format!("no piece for letter {n}")));
                        }
                    }
                    for k in f.pieces.keys() {
                        if !names.contains(k) {
                            out.push(diag("function.pieces", format!("unknown letter {k}")));
                        }
                    }
                }
                if f.level != 0 {
                    out.push(diag("function.level", "data must live at level 0"));
                }
            }
        },
        (None, false) => {}
    }
    for (name, v) in [
        ("blocks", cfg.blocks.unwrap_or(1)),
        ("truncation", cfg.truncation),
        ("orbit", cfg.orbit),
        ("levels", cfg.levels),
        ("depth", cfg.depth),
        ("horizon", cfg.horizon),
    ] {
        if v == 0 {
            out.push(diag(name, "must be positive"));
        }
    }
    if cfg.precision_bits < 64 {
        out.push(diag("precision_bits", "must be at least 64"));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        out.push(diag("delta", "must lie in (0, 1)"));
    }
    if cfg.command == Command::Solve {
        let need = cohomology::blocks_needed(&cfg.solve_config());
        if cfg.effective_blocks() < need {
            out.push(diag(
                "blocks",
                format!("solve needs at least {need} blocks (truncation or levels, plus depth)"),
            ));
        }
    }
    out
}

fn benchmark_loop(name: &str) -> Option<crate::selfsim::RauzyLoop> {
    benchmarks::all_loops()
        .into_iter()
        .find(|(l, _)| *l == name)
        .map(|(_, lp)| lp)
}

fn load_input(cfg: &RunConfig) -> Result<LoadedIem> {
    match (&cfg.iem, &cfg.benchmark) {
        (Some(p), _) => load_iem(p),
        (None, Some(b)) => {
            let lp = benchmark_loop(b).ok_or_else(|| Error::Parse(format!("unknown benchmark {b:?}")))?;
            IemSpec::from_loop(&lp, cfg.precision_bits).build()
        }
        (None, None) => Err(Error::Parse("no map given".into())),
    }
}

/// A file produced by a run, named relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

/// Result of one run: the JSON report (always produced, also on error) and
/// the artifacts in the requested format.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub artifacts: Vec<Artifact>,
    pub error: Option<Error>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    /// The artifact in the requested format.
    pub fn primary(&self) -> Option<&Artifact> {
        self.artifacts.first()
    }
}

struct Produced {
    mode: String,
    result: Value,
    artifacts: Vec<Artifact>,
}

/// Run one command. Never panics on bad input: errors end up in the report
/// with their class.
pub fn run(cfg: &RunConfig) -> Outcome {
    let diagnostics = validate(cfg);
    let config = serde_json::to_value(cfg).expect("config serializes");
    let base = |status: &str| {
        json!({
            "command": cfg.command.name(),
            "status": status,
            "config": config,
        })
    };
    if !diagnostics.is_empty() {
        let err = Error::Parse(
            diagnostics
                .iter()
                .map(|d| format!("{}: {}", d.field, d.message))
                .collect::<Vec<_>>()
                .join("; "),
        );
        let mut report = base("error");
        report["error_class"] = json!(err.class());
        report["error"] = json!(err.to_string());
        report["diagnostics"] = json!(diagnostics);
        return Outcome {
            report,
            artifacts: Vec::new(),
            error: Some(err),
        };
    }
    match execute(cfg) {
        Ok(p) => {
            let mut report = base("ok");
            report["mode"] = json!(p.mode);
            report["result"] = p.result;
            let mut artifacts = p.artifacts;
            if cfg.format == OutputFormat::Json {
                artifacts.insert(
                    0,
                    Artifact {
                        name: format!("{}.json", cfg.command.name()),
                        content: pretty(&report),
                    },
                );
            }
            Outcome {
                report,
                artifacts,
                error: None,
            }
        }
        Err(e) => {
            let mut report = base("error");
            report["error_class"] = json!(e.class());
            report["error"] = json!(e.to_string());
            Outcome {
                report,
                artifacts: Vec::new(),
                error: Some(e),
            }
        }
    }
}

/// Independent runs fanned out over the rayon pool; results keep input
/// order.
pub fn run_all(cfgs: &[RunConfig]) -> Vec<Outcome> {
    cfgs.par_iter().map(run).collect()
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn mode_label(loaded: &LoadedIem, bits: u32, converted: bool) -> String {
    match (loaded.mode(), converted) {
        (ArithMode::Real, _) => format!("real ({bits} bits)"),
        (m, true) => format!("{m} (evaluated in real mode at {bits} bits)"),
        (m, false) => m.to_string(),
    }
}

/// Run `$body` with `$t` bound to the map in its own arithmetic.
macro_rules! dispatch {
    ($loaded:expr, $t:ident => $body:expr) => {
        match &$loaded {
            LoadedIem::Rational($t) => $body,
            LoadedIem::Real($t) => $body,
            LoadedIem::Eigen($t, _) => $body,
        }
    };
}
fn execute(cfg: &RunConfig) -> Result<Produced> {
    let loaded = load_input(cfg)?;
    let bits = cfg.precision_bits;
    match cfg.command {
        Command::Diagram => diagram(cfg, &loaded),
        Command::Selfsim => selfsim(cfg, &loaded),
        Command::Roth => {
            let r = dispatch!(loaded, t => roth(cfg, t))?;
            Ok(Produced {
                mode: mode_label(&loaded, bits, loaded.mode() != ArithMode::Real),
                ..r
            })
        }
        Command::Solve => {
            let r = dispatch!(loaded, t => solve(cfg, t))?;
            Ok(Produced {
                mode: mode_label(&loaded, bits, loaded.mode() != ArithMode::Real),
                ..r
            })
        }
        Command::Induct => {
            let r = dispatch!(loaded, t => induct(cfg, t))?;
            Ok(Produced {
                mode: mode_label(&loaded, bits, false),
                ..r
            })
        }
        Command::Birkhoff => {
            let r = dispatch!(loaded, t => birkhoff(cfg, t))?;
            Ok(Produced {
                mode: mode_label(&loaded, bits, false),
                ..r
            })
        }
        Command::Roundtrip => match &loaded {
            LoadedIem::Eigen(t, _) => {
                let r = roundtrip_converted(cfg, t)?;
                Ok(Produced {
                    mode: mode_label(&loaded, bits, true),
                    ..r
                })
            }
            _ => {
                let r = dispatch!(loaded, t => roundtrip(cfg, t))?;
                Ok(Produced {
                    mode: mode_label(&loaded, bits, false),
                    ..r
                })
            }
        },
    }
}

fn diagram(cfg: &RunConfig, loaded: &LoadedIem) -> Result<Produced> {
    let d = RauzyDiagram::extended_class(loaded.pair(), NameConvention::default())?;
    let result = json!({
        "vertices": d.vertices().len(),
        "arrows": d.arrows().len(),
        "strongly_connected": d.is_strongly_connected(),
        "diagram": d.to_json(),
    });
    let artifacts = match cfg.format {
        OutputFormat::Dot => vec![Artifact {
            name: "diagram.dot".into(),
            content: d.export_dot(),
        }],
        _ => Vec::new(),
    };
    Ok(Produced {
        mode: loaded.mode().to_string(),
        result,
        artifacts,
    })
}

fn rows_text(m: &crate::matrix::IntMatrix) -> String {
    m.to_string_rows()
        .iter()
        .map(|r| r.join(" "))
        .collect::<Vec<_>>()
        .join(";")
}

fn induct<S: Scalar>(cfg: &RunConfig, t: &Iem<S>) -> Result<Produced> {
    let blocks = cfg.effective_blocks();
    let tr = InductionTrace::run(t.clone(), InductionConfig::new(cfg.acceleration), blocks)?;
    let conv = tr.config().convention;
    let mut records = Vec::with_capacity(blocks);
    for n in 1..=blocks {
        let steps = tr.block_steps(n);
        let names: Vec<&str> = steps
            .iter()
            .map(|s| tr.pair_of(s).name(tr.step_name(s, conv)))
            .collect();
        records.push(json!({
            "n": n,
            "steps": steps.len(),
            "types": tr.block_types(n).iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "),
            "names": names.join(" "),
            "z": rows_text(tr.z(n)),
            "z_norm": tr.z(n).norm().to_string(),
            "q_norm": tr.q0(n).norm().to_string(),
        }));
    }
    let horizon = tr.positivity_horizon(0).ok();
    let window = blocks.min(1000);
    let result = json!({
        "blocks": blocks,
        "acceleration": cfg.acceleration,
        "convention": conv,
        "positivity_horizon": horizon,
        "coverage_window": window,
        "coverage_gap_at": tr.name_coverage_gap(window, conv),
        "lengths": tr.level(blocks).lengths().iter().map(Scalar::to_interchange).collect::<Vec<_>>(),
        "records": records,
    });
    let artifacts = if cfg.format == OutputFormat::Csv {
        let header = ["n", "steps", "types", "names", "z", "z_norm", "q_norm"];
        let rows = records.iter().map(|r| {
            header
                .iter()
                .map(|h| match &r[*h] {
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                })
                .collect()
        });
        vec![Artifact {
            name: "induct.csv".into(),
            content: csv_text(&header, rows)?,
        }]
    } else {
        Vec::new()
    };
    Ok(Produced {
        mode: String::new(),
        result,
        artifacts,
    })
}

fn function_on<S: Scalar>(cfg: &RunConfig, t: &Iem<S>) -> Result<PiecewiseFunction<S>> {
    let path = cfg
        .function
        .as_ref()
        .ok_or_else(|| Error::Parse("no function given".into()))?;
    load_function(path)?.build(t)
}

fn birkhoff<S: Scalar>(cfg: &RunConfig, t: &Iem<S>) -> Result<Produced> {
    let phi = function_on(cfg, t)?;
    let n = cfg.orbit;
    let zero = S::zero_in(t.ctx());
    let points = t.orbit(&zero, n)?;
    let sums = birkhoff_sums(t, &phi, &zero, n)?;
    let blocks = cfg.effective_blocks();
    let tr = InductionTrace::run(t.clone(), InductionConfig::new(cfg.acceleration), blocks)?;
    let decomposition = match orbit_decomposition(&tr, n) {
        Ok(dec) => {
            let rec = dec.reconstruct(&tr, &phi)?;
            json!({
                "terms": dec.terms.len(),
                "level_counts": dec.level_counts(),
                "count_violations": dec.count_violations(&tr).iter()
                    .map(|(n, c, b)| json!({"n": n, "count": c, "bound": b.to_string()}))
                    .collect::<Vec<_>>(),
                "reconstructed": rec.to_interchange(),
                "direct": sums[n].to_interchange(),
            })
        }
        Err(e) => json!({"error_class": e.class(), "error": e.to_string()}),
    };
    let decay = if phi.kind.is_mean_zero() {
        let levels = cfg.levels.min(blocks);
        serde_json::to_value(decay_profile(&tr, &phi, levels)?)?
    } else {
        Value::Null
    };
    let sup = sums.iter().map(|s| s.to_f64().abs()).fold(0.0, f64::max);
    let result = json!({
        "orbit": n,
        "final_sum": sums[n].to_interchange(),
        "sup_abs_sum": format!("{sup:e}"),
        "decomposition": decomposition,
        "decay_profile": decay,
    });
    let rows = (0..n).map(|k| {
        vec![
            k.to_string(),
            points[k].to_interchange(),
            sums[k + 1].to_interchange(),
        ]
    });
    let table = csv_text(&["k", "point", "partial_sum"], rows)?;
    let artifacts = vec![Artifact {
        name: "birkhoff.csv".into(),
        content: table,
    }];
    Ok(Produced {
        mode: String::new(),
        result,
        artifacts,
    })
}

fn ball_trace<S: Scalar>(cfg: &RunConfig, t: &Iem<S>, blocks: usize) -> Result<InductionTrace<Ball>> {
    let tr = InductionTrace::run(t.clone(), InductionConfig::new(cfg.acceleration), blocks)?;
    Ok(tr.to_ball(cfg.precision_bits))
}

fn roth<S: Scalar>(cfg: &RunConfig, t: &Iem<S>) -> Result<Produced> {
    let blocks = cfg.effective_blocks();
    let tr = ball_trace(cfg, t, blocks)?;
    let c = MatrixCocycle::from_trace(&tr);
    let depth = cfg.roth_depth();
    let n_c = blocks.saturating_sub(depth);
    let rc = RothConfig {
        n_max: blocks - 1,
        depth,
        delta: cfg.delta,
        m_list: [0, 1, 2].into_iter().filter(|&m| m < n_c).collect(),
        seed: cfg.seed,
    };
    let report = roth_report(&c, &rc);
    let result = json!({
        "config": rc,
        "verdict_text": report.verdict.to_string(),
        "report": report,
    });
    let artifacts = if cfg.format == OutputFormat::Csv {
        let rows = report.records.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.z_next_norm.clone().unwrap_or_default(),
                r.q_norm.clone(),
                r.gamma_star_norm.clone().unwrap_or_default(),
                r.log2_quotient_inverse_norm.map(|x| format!("{x}")).unwrap_or_default(),
            ]
        });
        vec![Artifact {
            name: "roth.csv".into(),
            content: csv_text(
                &["n", "z_next_norm", "q_norm", "gamma_star_norm", "log2_quotient_inverse_norm"],
                rows,
            )?,
        }]
    } else {
        Vec::new()
    };
    Ok(Produced {
        mode: String::new(),
        result,
        artifacts,
    })
}

/// 100 evenly spread orbit lengths up to `n`.
fn sample_lengths(n: usize) -> Vec<usize> {
    let k = n.min(100);
    (1..=k).map(|i| i * n / k).collect()
}

fn solve<S: Scalar>(cfg: &RunConfig, t: &Iem<S>) -> Result<Produced> {
    let blocks = cfg.effective_blocks();
    let tr = ball_trace(cfg, t, blocks)?;
    let phi = function_on(cfg, tr.level(0))?;
    let scfg = cfg.solve_config();
    let sol = cohomology::solve(&tr, &phi, &scfg)?;
    let pair = tr.level(0).pair();
    let majorant_check = match &sol.certificate {
        Ok(c) => {
            let (_, worst) = check_majorant(tr.level(0), &sol.primitive.phi, c.majorant, &sample_lengths(cfg.orbit))?;
            json!({"samples": sample_lengths(cfg.orbit).len(), "worst_excess": worst.map(|(n, v)| json!({"n": n, "value": v}))})
        }
        Err(_) => Value::Null,
    };
    let delta = &sol.primitive.delta;
    let result = json!({
        "solve_config": scfg,
        "blocks": blocks,
        "primitive": FunctionSpec::from_function(&sol.primitive.phi, pair),
        "correction": {
            "level": delta.level,
            "truncation": delta.truncation,
            "quotient_dim": delta.quotient_dim,
            "coordinates": delta.coords.iter().map(Scalar::to_interchange).collect::<Vec<_>>(),
            "representative": delta.representative.iter().map(Scalar::to_interchange).collect::<Vec<_>>(),
            "tail_bound": delta.tail_bound,
            "decay_rate": delta.decay_rate,
            "terms": delta.terms,
        },
        "decay_profile": sol.decay,
        "certificate": match &sol.certificate {
            Ok(c) => json!({"converged": c.converged, "majorant": c.majorant, "partial_sum": c.partial_sum, "decay_rate": c.decay_rate, "terms": c.terms}),
            Err(e) => json!({"converged": false, "error": e}),
        },
        "majorant_check": majorant_check,
        "psi": {
            "base": sol.table.base.to_interchange(),
            "orbit": sol.table.entries.len(),
            "normalization": sol.table.normalization.to_interchange(),
            "sup_birkhoff": sol.table.sup_birkhoff,
            "identity_residual": sol.table.identity_residual,
            "keane": sol.table.keane,
        },
        "functoriality": sol.functoriality,
    });
    let rows = sol.table.entries.iter().map(|e| {
        vec![e.k.to_string(), e.point.to_interchange(), e.psi.to_interchange()]
    });
    let table = csv_text(&["k", "point", "psi"], rows)?;
    Ok(Produced {
        mode: String::new(),
        result,
        artifacts: vec![Artifact {
            name: "psi.csv".into(),
            content: table,
        }],
    })
}

fn selfsim(_cfg: &RunConfig, loaded: &LoadedIem) -> Result<Produced> {
    let LoadedIem::Eigen(t, lp) = loaded else {
        return Err(Error::UnsupportedKind("selfsim needs eigen lengths".into()));
    };
    let field = t.ctx();
    let periodic = follows_loop(t, lp, 3)?;
    let result = json!({
        "spec": IemSpec::from_loop(lp, field.precision_bits()),
        "loop_matrix": lp.matrix().to_string_rows(),
        "minimal_polynomial": field.modulus().coeffs().iter().map(crate::arith::format_rational).collect::<Vec<_>>(),
        "perron_frobenius_root": field.root_ball(field.precision_bits()).to_interchange(),
        "lengths": t.lengths().iter().map(Scalar::to_interchange).collect::<Vec<_>>(),
        "follows_loop_periods": 3,
        "periodic": periodic,
    });
    if !periodic {
        return Err(Error::BoundViolated(
            "induction path of the eigen lengths does not repeat the loop".into(),
        ));
    }
    Ok(Produced {
        mode: ArithMode::Eigen.to_string(),
        result,
        artifacts: Vec::new(),
    })
}

fn roundtrip<S: Scalar>(cfg: &RunConfig, t: &Iem<S>) -> Result<Produced> {
    let psi0 = function_on(cfg, t)?;
    let phi = coboundary(&psi0, t)?;
    let r = coboundary_roundtrip(t, &phi, &psi0, cfg.orbit)?;
    Ok(Produced {
        mode: String::new(),
        result: serde_json::to_value(r)?,
        artifacts: Vec::new(),
    })
}

/// Coboundary formed exactly in the field, transfer function recovered in
/// real mode.
fn roundtrip_converted(cfg: &RunConfig, t: &Iem<FieldElem>) -> Result<Produced> {
    let bits = cfg.precision_bits;
    let psi0 = function_on(cfg, t)?;
    let phi = coboundary(&psi0, t)?;
    let conv = |x: &FieldElem| x.to_ball(bits);
    let tb = t.map_lengths(bits, conv);
    let r = coboundary_roundtrip(&tb, &phi.map_scalars(conv), &psi0.map_scalars(conv), cfg.orbit)?;
    Ok(Produced {
        mode: String::new(),
        result: serde_json::to_value(r)?,
        artifacts: Vec::new(),
    })
}
