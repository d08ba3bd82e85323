//! `schedsim`: run one simulation, generate workloads or the bundled suite,
//! and compare policies over a suite.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 on internal failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use schedsim::engine::{self, SimError};
use schedsim::harness::{compare_policies, PolicyKind};
use schedsim::metrics::compute;
use schedsim::nmlfq::AdmissionMode;
use schedsim::policy::RrConfig;
use schedsim::workload::{self, suite, GenError, ValueMode, WorkloadIoError};
use schedsim::{GenSpec, Rational, Scalar, SimConfig, TimeDelta, TimePoint, Workload};

#[derive(Parser)]
#[command(name = "schedsim", version, about = "Deterministic uniprocessor scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one workload under one policy.
    Run(RunArgs),
    /// Generate a synthetic workload file.
    Gen(GenArgs),
    /// Write the bundled twenty-case suite.
    Suite(SuiteArgs),
    /// Run several policies over a suite and tabulate response times.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Ticks of dispatch latency on every switch to a different job.
    #[arg(long, default_value_t = 0)]
    dispatch_latency: u64,
    #[arg(long, default_value_t = 0)]
    context_switch_cost: u64,
    /// Abort jobs at their deadline (default: policy decides).
    #[arg(long)]
    abort_on_miss: Option<bool>,
    /// Stop the simulation at this tick.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    rr_quantum: u64,
    #[arg(long, default_value_t = 1000)]
    base_quantum: u64,
    #[arg(long, default_value_t = 2)]
    min_levels: usize,
    #[arg(long, default_value_t = 8)]
    max_levels: usize,
    #[arg(long, default_value = "1")]
    urgency_factor: String,
    /// Default: 10 x base quantum x current level count.
    #[arg(long)]
    aging_threshold: Option<u64>,
    #[arg(long, default_value = "planning")]
    admission: AdmissionMode,
}

impl SimArgs {
    fn config(&self) -> Result<SimConfig, Failure> {
        let mut cfg = SimConfig {
            dispatch_latency: TimeDelta(self.dispatch_latency),
            context_switch_cost: TimeDelta(self.context_switch_cost),
            abort_on_miss: self.abort_on_miss,
            horizon: self.horizon.map(TimePoint),
            rr: RrConfig { quantum: TimeDelta(self.rr_quantum) },
            ..SimConfig::default()
        };
        cfg.nmlfq.base_quantum = TimeDelta(self.base_quantum);
        cfg.nmlfq.min_levels = self.min_levels;
        cfg.nmlfq.max_levels = self.max_levels;
        cfg.nmlfq.urgency_factor = Rational::parse_decimal(&self.urgency_factor)
            .ok_or_else(|| invalid(anyhow!("--urgency-factor: not a number: `{}`", self.urgency_factor)))?;
        cfg.nmlfq.aging_threshold = self.aging_threshold.map(TimeDelta);
        cfg.nmlfq.admission = self.admission;
        cfg.nmlfq.validate().map_err(|e| invalid(anyhow!(e)))?;
        if self.rr_quantum == 0 {
            return Err(invalid(anyhow!("--rr-quantum must be at least 1")));
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    workload: PathBuf,
    #[arg(long)]
    policy: PolicyKind,
    /// Output directory.
    #[arg(long, env = "SCHEDSIM_OUT", default_value = "schedsim-out")]
    out: PathBuf,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    tasks: usize,
    /// Total burst over span.
    #[arg(long)]
    load: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    span: u64,
    /// Default: 200, or `--burst-max` when that is smaller.
    #[arg(long)]
    burst_min: Option<u64>,
    #[arg(long, default_value_t = 12_000)]
    burst_max: u64,
    /// `LO,HI`: relative deadline is burst times a factor in this range.
    #[arg(long, default_value = "1.5,4")]
    deadline_tightness: String,
    /// `unit` or `uniform:LO,HI`.
    #[arg(long, default_value = "unit")]
    value_mode: String,
    /// Workload name (default `gen-s<seed>`).
    #[arg(long)]
    name: Option<String>,
    /// Output file. Without it the workload goes to `$SCHEDSIM_OUT/<name>.csv`,
    /// or to stdout when that is unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, env = "SCHEDSIM_OUT", default_value = "schedsim-out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Directory holding a manifest and case files (see `suite`).
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "nmlfq,dasa,lbesa")]
    policies: Vec<PolicyKind>,
    #[arg(long, env = "SCHEDSIM_OUT", default_value = "schedsim-out")]
    out: PathBuf,
    /// Run cases one after another instead of in parallel.
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    sim: SimArgs,
}

/// A failed command and the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn invalid(error: anyhow::Error) -> Failure {
    Failure { code: 1, error }
}

fn internal(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn workload_error(e: WorkloadIoError) -> Failure {
    invalid(e.into())
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(internal)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(internal)
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let cfg = args.sim.config()?;
    let w: Workload = workload::parse(&args.workload).map_err(workload_error)?;
    let mut policy = args.policy.build(&cfg).map_err(|e| invalid(anyhow!(e)))?;
    let run = match engine::run(&w, &mut policy, &cfg) {
        Ok(run) => run,
        Err(SimError::HorizonExceeded { horizon, unfinished, run }) => {
            eprintln!("warning: horizon {horizon} reached with {unfinished} unfinished jobs; trace truncated");
            *run
        }
        Err(e @ SimError::InvalidWorkload(_)) => return Err(invalid(e.into())),
        Err(e) => return Err(internal(e.into())),
    };
    let report = compute(&run.trace, &run.jobs).map_err(|e| internal(e.into()))?;
    create_dir(&args.out)?;
    write(&args.out.join("trace.csv"), &run.trace.to_csv())?;
    write(&args.out.join("metrics.csv"), &report.to_csv())?;
    let summary = report.summary_text();
    write(&args.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn parse_pair(flag: &str, s: &str) -> Result<(Rational, Rational), Failure> {
    let bad = || invalid(anyhow!("--{flag}: expected `LO,HI`, got `{s}`"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    Ok((Rational::parse_decimal(lo).ok_or_else(bad)?, Rational::parse_decimal(hi).ok_or_else(bad)?))
}

fn gen_spec(args: &GenArgs) -> Result<GenSpec, Failure> {
    let load =
        Rational::parse_decimal(&args.load).ok_or_else(|| invalid(anyhow!("--load: not a number: `{}`", args.load)))?;
    let mut g = GenSpec::new(args.tasks, load, args.seed);
    if let Some(name) = &args.name {
        g.name = name.clone();
    }
    g.span = TimeDelta(args.span);
    g.burst_range = (args.burst_min.unwrap_or(200.min(args.burst_max)), args.burst_max);
    g.deadline_tightness = parse_pair("deadline-tightness", &args.deadline_tightness)?;
    g.value_mode = match args.value_mode.as_str() {
        "unit" => ValueMode::Unit,
        other => match other.strip_prefix("uniform:") {
            Some(range) => {
                let (lo, hi) = parse_pair("value-mode", range)?;
                ValueMode::Uniform(lo, hi)
            }
            None => return Err(invalid(anyhow!("--value-mode: expected `unit` or `uniform:LO,HI`, got `{other}`"))),
        },
    };
    Ok(g)
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let g = gen_spec(&args)?;
    let w = workload::generate(&g).map_err(|e: GenError| invalid(e.into()))?;
    let text = workload::to_csv_string(&w);
    let target =
        args.out.or_else(|| std::env::var_os("SCHEDSIM_OUT").map(|d| PathBuf::from(d).join(format!("{}.csv", w.name))));
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                create_dir(dir)?;
            }
            write(&path, &text)?;
            eprintln!("wrote {} ({} tasks, total burst {})", path.display(), w.len(), w.total_burst());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_suite(args: SuiteArgs) -> Result<(), Failure> {
    let written = suite::write_suite::<Rational>(&args.out).map_err(|e| internal(e.into()))?;
    eprintln!("wrote {} files to {}", written.len(), args.out.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let mut policies = Vec::new();
    for p in &args.policies {
        if !policies.contains(p) {
            policies.push(*p);
        }
    }
    if policies.len() < 2 {
        return Err(invalid(anyhow!("--policies: need at least two distinct policies")));
    }
    let cfg = args.sim.config()?;
    let cases: Vec<Workload> = suite::load_suite(&args.suite).map_err(|e| invalid(e.into()))?;
    let (outcomes, table) = compare_policies(&cases, &policies, &cfg, !args.serial).map_err(|e| internal(e.into()))?;

    let metrics_dir = args.out.join("metrics");
    create_dir(&metrics_dir)?;
    for o in &outcomes {
        write(&metrics_dir.join(format!("{}-{}.csv", o.report.workload, o.policy)), &o.report.to_csv())?;
    }
    write(&args.out.join("comparison.csv"), &table.to_csv())?;
    let text = table.to_text();
    write(&args.out.join("comparison.txt"), &text)?;
    write(&args.out.join("response.svg"), &table.to_svg())?;
    print!("{text}");
    for (p, cell) in table.policies.iter().zip(&table.aggregate) {
        if *p != table.reference {
            let r = cell.reduction.as_ref().map_or("n/a".to_string(), |r| format!("{:.1}%", r.to_f64() * 100.0));
            println!("{} response reduction vs {p}: {r}", table.reference);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
