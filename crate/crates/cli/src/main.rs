use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use epcomm::belief::DepthBound;
use epcomm::bench::{report, run_matrix, write_csv, BenchRecord, DomainKind, MapSpec, MatrixConfig, Outcome};
use epcomm::compiler::{compile, prune_unreachable, ClassicalTask, CompileOptions};
use epcomm::domains::{CommModel, GroundTruth, Scenario};
use epcomm::epddl::{parse_domain, parse_problem, render_domain, render_problem, DomainSpec, ProblemSpec};
use epcomm::execution::{build_query_set, metrics, simulate, MetricsRecord, Trace};
use epcomm::search::{solve, validate_plan, Limits, Plan, PlanStep, Provenance, Strategy};

const DOMAIN_FILE: &str = "domain.epddl";
const PROBLEM_FILE: &str = "problem.eprob";
const GROUND_TRUTH_FILE: &str = "groundtruth.json";
const RECORDS_FILE: &str = "records.json";

#[derive(Parser)]
#[command(name = "epcomm", version, about = "Epistemic planning with communication actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark task: domain, problem and ground truth.
    Gen(GenArgs),
    /// Compile a task to a classical planning task (JSON).
    Compile(CompileArgs),
    /// Solve a task and print the plan with its provenance (JSON).
    Plan(PlanArgs),
    /// Check a plan against the compiled task.
    Validate(ValidateArgs),
    /// Replay a plan on belief states and report team metrics.
    Simulate(SimulateArgs),
    /// Run the evaluation matrix or summarise its results.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct TaskFiles {
    /// EPDDL domain file.
    #[arg(long)]
    domain: PathBuf,
    /// EPDDL problem file.
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args)]
struct CompileFlags {
    /// Maximum belief nesting.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Round-robin turn-taking with per-agent no-ops.
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    turns: Switch,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "gridworld")]
    domain: DomainKind,
    /// `WxH` for Gridworld, `roomsN` for BW4T.
    #[arg(long)]
    map: String,
    #[arg(long)]
    agents: usize,
    /// S1..S5.
    #[arg(long, default_value = "S1")]
    scenario: Scenario,
    /// selective, nocomm or commall.
    #[arg(long, default_value = "selective")]
    model: CommModel,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    task: TaskFiles,
    #[command(flatten)]
    flags: CompileFlags,
    /// Drop relaxed-unreachable actions and fluents.
    #[arg(long)]
    prune: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    task: TaskFiles,
    #[command(flatten)]
    flags: CompileFlags,
    #[arg(long, default_value = "gbfs")]
    strategy: Strategy,
    #[arg(long, default_value_t = 5_000_000)]
    max_expansions: u64,
    /// Wall-clock limit; 0 disables it.
    #[arg(long, default_value_t = 60_000)]
    timeout_ms: u64,
    /// Search the full table instead of the pruned task.
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    task: TaskFiles,
    #[command(flatten)]
    flags: CompileFlags,
    /// Plan file: the JSON written by `plan`, or one action label per line.
    #[arg(long)]
    plan: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    task: TaskFiles,
    #[arg(long)]
    ground_truth: PathBuf,
    /// Plan file: the JSON written by `plan`, or one action label per line.
    #[arg(long)]
    plan: PathBuf,
    /// Also report overlap for every agent pair.
    #[arg(long)]
    pairwise: bool,
    /// Include the per-step trace in the output.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run every coordinate of a matrix and write `records.json`.
    Run {
        /// Matrix configuration (JSON); the default matrix when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Summarise `records.json` from a results directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct PlanOutput {
    plan: Vec<String>,
    length: usize,
    provenance: Provenance,
    valid: bool,
}

#[derive(Serialize)]
struct SimulateOutput {
    metrics: MetricsRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Trace>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(task: &TaskFiles) -> Result<(DomainSpec, ProblemSpec)> {
    let d = parse_domain(&read(&task.domain)?).with_context(|| format!("parsing {}", task.domain.display()))?;
    let p = parse_problem(&read(&task.problem)?).with_context(|| format!("parsing {}", task.problem.display()))?;
    Ok((d, p))
}

fn compile_task(d: &DomainSpec, p: &ProblemSpec, flags: &CompileFlags) -> Result<ClassicalTask> {
    let opts = CompileOptions {
        depth: DepthBound::new(flags.depth)?,
        turn_taking: flags.turns == Switch::On,
    };
    Ok(compile(d, p, opts)?)
}

fn load_plan(path: &Path) -> Result<Plan> {
    let text = read(path)?;
    let (labels, provenance) = match serde_json::from_str::<PlanOutput>(&text) {
        Ok(p) => (p.plan, p.provenance),
        Err(_) => (
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with(';'))
                .map(String::from)
                .collect(),
            // plain-text plans carry no search statistics
            Provenance {
                strategy: Strategy::default(),
                expansions: 0,
                generated: 0,
                planning_ms: 0.0,
            },
        ),
    };
    Ok(Plan {
        steps: labels.into_iter().map(|label| PlanStep { action: 0, label }).collect(),
        provenance,
    })
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{json}")?;
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let task = MapSpec::new(a.domain, a.map, a.agents).generate(a.scenario, a.model, a.seed)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    fs::write(a.out.join(DOMAIN_FILE), render_domain(&task.domain))?;
    fs::write(a.out.join(PROBLEM_FILE), render_problem(&task.problem))?;
    fs::write(
        a.out.join(GROUND_TRUTH_FILE),
        serde_json::to_string_pretty(&task.ground_truth)? + "\n",
    )?;
    eprintln!(
        "wrote {DOMAIN_FILE}, {PROBLEM_FILE}, {GROUND_TRUTH_FILE} to {}",
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn compile_cmd(a: CompileArgs) -> Result<ExitCode> {
    let (d, p) = load(&a.task)?;
    let mut t = compile_task(&d, &p, &a.flags)?;
    if a.prune {
        t = prune_unreachable(&t);
    }
    emit(&t, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn plan_cmd(a: PlanArgs) -> Result<ExitCode> {
    let (d, p) = load(&a.task)?;
    let full = compile_task(&d, &p, &a.flags)?;
    let searched = if a.no_prune {
        full.clone()
    } else {
        prune_unreachable(&full)
    };
    let limits = Limits {
        max_expansions: a.max_expansions,
        timeout_ms: (a.timeout_ms > 0).then_some(a.timeout_ms),
    };
    let plan = solve(&searched, a.strategy, limits)?;
    let valid = validate_plan(&full, &plan).valid;
    let out = PlanOutput {
        length: plan.len(),
        plan: plan.labels().into_iter().map(String::from).collect(),
        provenance: plan.provenance,
        valid,
    };
    emit(&out, a.out.as_deref())?;
    Ok(if valid { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn validate_cmd(a: ValidateArgs) -> Result<ExitCode> {
    let (d, p) = load(&a.task)?;
    let t = compile_task(&d, &p, &a.flags)?;
    let r = validate_plan(&t, &load_plan(&a.plan)?);
    emit(&r, None)?;
    Ok(if r.valid { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn simulate_cmd(a: SimulateArgs) -> Result<ExitCode> {
    let (d, p) = load(&a.task)?;
    let gt: GroundTruth = serde_json::from_str(&read(&a.ground_truth)?).context("parsing ground truth")?;
    let plan = load_plan(&a.plan)?;
    let trace = simulate(&plan, &gt, &d, &p)?;
    let queries = build_query_set(&p, &d)?;
    let m = metrics(&plan, &trace, &queries, a.pairwise)?;
    emit(
        &SimulateOutput {
            metrics: m,
            trace: a.trace.then_some(trace),
        },
        None,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn bench_run(config: Option<PathBuf>, out: PathBuf, jobs: Option<usize>) -> Result<ExitCode> {
    let mut c: MatrixConfig = match &config {
        Some(path) => serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        None => MatrixConfig::default(),
    };
    if jobs.is_some() {
        c.jobs = jobs;
    }
    let records = run_matrix(&c);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join(RECORDS_FILE), serde_json::to_string_pretty(&records)? + "\n")?;
    let errors = records.iter().filter(|r| r.outcome == Outcome::Error).count();
    for r in &records {
        eprintln!(
            "{:<45} {:<10} {}",
            r.coordinate.to_string(),
            r.outcome.to_string(),
            r.error.as_deref().unwrap_or("")
        );
    }
    eprintln!(
        "{} records written to {}",
        records.len(),
        out.join(RECORDS_FILE).display()
    );
    Ok(if errors == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn bench_report(input: PathBuf, format: ReportFormat) -> Result<ExitCode> {
    let path = if input.is_dir() {
        input.join(RECORDS_FILE)
    } else {
        input
    };
    let records: Vec<BenchRecord> =
        serde_json::from_str(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
    match format {
        ReportFormat::Csv => write_csv(&records, io::stdout().lock())?,
        ReportFormat::Json => emit(&report(&records)?, None)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Compile(a) => compile_cmd(a),
        Command::Plan(a) => plan_cmd(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Bench(BenchCommand::Run { config, out, jobs }) => bench_run(config, out, jobs),
        Command::Bench(BenchCommand::Report { input, format }) => bench_report(input, format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
