//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dupsched_core::engine::{schedule_general, GammaRule};
use dupsched_core::generate::{generate_dag, DagShape};
use dupsched_core::validate::validate;
use dupsched_core::Dag;

use crate::bench::{run_bench, DEFAULT_LADDER};
use crate::config::{RunConfig, SEED_ENV};
use crate::io::{parse_dag, parse_schedule, write_dag, write_schedule};
use crate::report::{estimate_csv, phase_log_json, round_trace_csv};

#[derive(Debug, Parser)]
#[command(name = "dupsched", version, about = "Schedule unit-job DAGs under communication delay with duplication")]
pub struct Cli {
    /// Flat key = value configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Schedule a graph.
    Schedule(ScheduleArgs),
    /// Check a schedule for feasibility.
    Validate(ValidateArgs),
    /// Estimate ancestor counts for every vertex.
    Estimate(EstimateArgs),
    /// Time the engine across a ladder of instance sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeKind {
    Chain,
    Antichain,
    Layered,
    ErDag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GammaRuleArg {
    InvSqrtLnRho,
    InvSqrtRho,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub shape: ShapeKind,
    /// Vertex count for chain, antichain and er-dag.
    #[arg(long, short)]
    pub n: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    /// Edge probability for layered and er-dag.
    #[arg(long, short)]
    pub p: Option<f64>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Defaults to stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, short)]
    pub machines: Option<u32>,
    #[arg(long, short)]
    pub rho: Option<u64>,
    /// Fixed gamma in (0, 1/4).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub gamma_rule: Option<GammaRuleArg>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Phase log JSON; defaults to the output path with `.log.json` appended.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Per-round sampling counters as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Record wall time in the phase log (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub dag: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    /// Defaults to the delay stated in the schedule header.
    #[arg(long, short)]
    pub rho: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Defaults to stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Add exact ancestor counts from graph traversal.
    #[arg(long)]
    pub with_exact: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Target edge counts.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Instances per size, seeded from the master seed upwards.
    #[arg(long, default_value_t = 3)]
    pub instances: u64,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// CSV report; defaults to stdout. The summary goes to stderr.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn base_config(cli_config: Option<&Path>) -> Result<RunConfig> {
    Ok(match cli_config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    })
}

impl EngineArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(m) = self.machines {
            config.machines = m;
        }
        if let Some(r) = self.rho {
            config.rho = r;
        }
        if let Some(g) = self.gamma {
            config.gamma = Some(g);
        }
        if let Some(rule) = self.gamma_rule {
            config.gamma = None;
            config.gamma_rule = match rule {
                GammaRuleArg::InvSqrtLnRho => GammaRule::InverseSqrtLnRho,
                GammaRuleArg::InvSqrtRho => GammaRule::InverseSqrtRho,
            };
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn emit(path: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write(p, contents),
        None => stdout.write_all(contents.as_bytes()).context("cannot write to stdout"),
    }
}

fn load_dag(path: &Path) -> Result<Dag> {
    parse_dag(&read(path)?).with_context(|| format!("invalid graph file {}", path.display()))
}

/// Runs one command. Returns the process exit code; hard failures are errors.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let mut config = base_config(cli.config.as_deref())?;
    match cli.command {
        Command::Gen(args) => {
            let seed = args.seed.unwrap_or(config.seed);
            let need = |v: Option<usize>, name: &str| v.with_context(|| format!("--{name} is required for this shape"));
            let shape = match args.shape {
                ShapeKind::Chain => DagShape::Chain { n: need(args.n, "n")? },
                ShapeKind::Antichain => DagShape::Antichain { n: need(args.n, "n")? },
                ShapeKind::Layered => DagShape::Layered {
                    layers: need(args.layers, "layers")?,
                    width: need(args.width, "width")?,
                    p: args.p.context("--p is required for this shape")?,
                },
                ShapeKind::ErDag => {
                    DagShape::ErDag { n: need(args.n, "n")?, p: args.p.context("--p is required for this shape")? }
                }
            };
            let dag = generate_dag(&shape, seed)?;
            emit(args.output.as_deref(), &write_dag(&dag), stdout)?;
        }
        Command::Schedule(args) => {
            args.engine.apply(&mut config);
            if let Some(p) = args.input {
                config.input = Some(p);
            }
            if let Some(p) = args.output {
                config.output = Some(p);
            }
            if let Some(p) = args.log {
                config.log = Some(p);
            }
            let input = config.input.clone().context("--input is required")?;
            let output = config.output.clone().context("--output is required")?;
            let engine = config.engine()?;
            let dag = load_dag(&input)?;
            let t0 = Instant::now();
            let (schedule, log) = schedule_general(&dag, &engine, config.seed)?;
            let wall = t0.elapsed();
            write(&output, &write_schedule(&schedule, engine.rho))?;
            let log_path = config.log.clone().unwrap_or_else(|| {
                let mut p = output.clone().into_os_string();
                p.push(".log.json");
                p.into()
            });
            let json = phase_log_json(&dag, &schedule, &log, config.seed, args.timing.then_some(wall));
            write(&log_path, &(serde_json::to_string_pretty(&json)? + "\n"))?;
            if let Some(trace) = args.trace {
                write(&trace, &round_trace_csv(&log))?;
            }
        }
        Command::Validate(args) => {
            let dag = load_dag(&args.dag)?;
            let file = parse_schedule(&read(&args.schedule)?)
                .with_context(|| format!("invalid schedule file {}", args.schedule.display()))?;
            let rho = args.rho.unwrap_or(file.rho);
            let violations = validate(&dag, &file.schedule, rho);
            if !violations.is_empty() {
                writeln!(stderr, "{} violation(s):", violations.len())?;
                for v in &violations {
                    writeln!(stderr, "{:?}: {}", v.kind, v.detail)?;
                }
                return Ok(1);
            }
            writeln!(stdout, "feasible: {} entries, makespan {}", file.schedule.entries.len(), file.makespan)?;
        }
        Command::Estimate(args) => {
            if let Some(s) = args.seed {
                config.seed = s;
            }
            let input = args.input.or(config.input.clone()).context("--input is required")?;
            let dag = load_dag(&input)?;
            let csv = estimate_csv(&dag, &config.sketch, config.seed, args.with_exact)?;
            emit(args.output.as_deref(), &csv, stdout)?;
        }
        Command::Bench(args) => {
            args.engine.apply(&mut config);
            if args.engine.machines.is_none() && cli.config.is_none() {
                config.machines = 8;
            }
            if args.engine.rho.is_none() && cli.config.is_none() {
                config.rho = 16;
            }
            if let Some(r) = args.repetitions {
                config.bench_repetitions = r;
            }
            if args.instances == 0 {
                bail!("--instances must be at least 1");
            }
            let engine = config.engine()?;
            let sizes = args.sizes.unwrap_or_else(|| DEFAULT_LADDER.to_vec());
            let seeds: Vec<u64> = (0..args.instances).map(|i| config.seed.wrapping_add(i)).collect();
            let report = run_bench(&engine, &sizes, &seeds, config.bench_repetitions)?;
            emit(args.output.as_deref(), &report.csv(), stdout)?;
            write!(stderr, "{}", report.summary())?;
        }
    }
    Ok(0)
}
