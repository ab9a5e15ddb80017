use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iemlab::run::{pretty, run_all, validate, Outcome, DEFAULT_PRECISION_BITS};
use iemlab::{Acceleration, Command, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "iemlab", version, about = "Interval exchange maps: induction, Birkhoff sums, Roth diagnostics, cohomological equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extended Rauzy class of the map's pair (DOT or JSON).
    Diagram(Common),
    /// Run the induction and list the blocks.
    Induct(Common),
    /// Birkhoff sums of a function along the orbit of 0.
    Birkhoff(Common),
    /// Diagnostics for the three Roth-type conditions.
    Roth(Common),
    /// Solve the cohomological equation for a mean-zero datum.
    Solve(Common),
    /// Self-similar map from an eigen-mode file or a benchmark.
    Selfsim(Common),
    /// Plant a transfer function, form its coboundary and recover it.
    Roundtrip(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    Csv,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Rv,
    Zorich,
    Accelerated,
}

#[derive(Args, Clone)]
struct Common {
    /// Map file(s); several files run in parallel as a sweep.
    #[arg(long, num_args = 1..)]
    iem: Vec<PathBuf>,
    /// Built-in instance instead of a file: golden, d3 or d4.
    #[arg(long, conflicts_with = "iem")]
    benchmark: Option<String>,
    /// Function file: the datum (birkhoff, solve) or planted Ψ0 (roundtrip).
    #[arg(long = "fn")]
    function: Option<PathBuf>,
    /// Blocks to compute (default depends on the command).
    #[arg(long)]
    blocks: Option<usize>,
    /// Block grouping of the induction.
    #[arg(long, value_enum, default_value = "accelerated")]
    mode: Mode,
    /// Levels summed in the correction series.
    #[arg(long = "truncate", default_value_t = 50)]
    truncation: usize,
    /// Orbit length for sums and transfer-function tables.
    #[arg(long, alias = "n", default_value_t = 10_000)]
    orbit: usize,
    /// Levels of the decay profile and boundedness certificate.
    #[arg(long, default_value_t = 50)]
    levels: usize,
    /// Look-ahead depth of the stable-space estimates.
    #[arg(long, default_value_t = 64)]
    depth: usize,
    #[arg(long, default_value_t = iemlab::roth::DEFAULT_DELTA)]
    delta: f64,
    /// Working precision of tracked-real arithmetic.
    #[arg(long, env = "IEMLAB_PRECISION_BITS", default_value_t = DEFAULT_PRECISION_BITS)]
    precision_bits: u32,
    /// Keane-check horizon cap.
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output format (default: first format the command supports).
    #[arg(long, value_enum)]
    emit: Option<Emit>,
    /// Directory receiving the report and artifacts; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only run the configuration checks.
    #[arg(long)]
    check: bool,
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Diagram(c) => (Command::Diagram, c),
            Cmd::Induct(c) => (Command::Induct, c),
            Cmd::Birkhoff(c) => (Command::Birkhoff, c),
            Cmd::Roth(c) => (Command::Roth, c),
            Cmd::Solve(c) => (Command::Solve, c),
            Cmd::Selfsim(c) => (Command::Selfsim, c),
            Cmd::Roundtrip(c) => (Command::Roundtrip, c),
        }
    }
}

fn config(command: Command, c: &Common, iem: Option<PathBuf>) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    cfg.iem = iem;
    cfg.benchmark = c.benchmark.clone();
    cfg.function = c.function.clone();
    cfg.blocks = c.blocks;
    cfg.acceleration = match c.mode {
        Mode::Rv => Acceleration::Rv,
        Mode::Zorich => Acceleration::Zorich,
        Mode::Accelerated => Acceleration::Accelerated,
    };
    cfg.truncation = c.truncation;
    cfg.orbit = c.orbit;
    cfg.levels = c.levels;
    cfg.depth = c.depth;
    cfg.delta = c.delta;
    cfg.precision_bits = c.precision_bits;
    cfg.horizon = c.horizon;
    cfg.seed = c.seed;
    if let Some(e) = c.emit {
        cfg.format = match e {
            Emit::Json => OutputFormat::Json,
            Emit::Csv => OutputFormat::Csv,
            Emit::Dot => OutputFormat::Dot,
        };
    }
    cfg
}

fn write_outcome(o: &Outcome, out: Option<&Path>, tag: Option<&str>) -> std::io::Result<()> {
    match out {
        Some(dir) => {
            let dir = match tag {
                Some(t) => dir.join(t),
                None => dir.to_path_buf(),
            };
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("report.json"), pretty(&o.report))?;
            for a in &o.artifacts {
                fs::write(dir.join(&a.name), &a.content)?;
            }
        }
        None => match o.primary() {
            Some(a) if o.ok() => print!("{}", a.content),
            _ => print!("{}", pretty(&o.report)),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = cli.command.split();
    let cfgs: Vec<RunConfig> = if common.iem.is_empty() {
        vec![config(command, &common, None)]
    } else {
        common
            .iem
            .iter()
            .map(|p| config(command, &common, Some(p.clone())))
            .collect()
    };

    if common.check {
        let mut clean = true;
        for cfg in &cfgs {
            for d in validate(cfg) {
                clean = false;
                println!("{}: {}", d.field, d.message);
            }
        }
        return if clean { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    }

    let outcomes = run_all(&cfgs);
    let mut failed = false;
    for (cfg, o) in cfgs.iter().zip(&outcomes) {
        let tag = (cfgs.len() > 1).then(|| {
            cfg.iem
                .as_ref()
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
        if let Some(e) = &o.error {
            failed = true;
            eprintln!("error [{}]: {e}", e.class());
        }
        if let Err(e) = write_outcome(o, common.out.as_deref(), tag.as_deref()) {
            eprintln!("error [IoError]: {e}");
            failed = true;
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
