use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polyrlt::driver::{solve, BranchingRule, IntegerMode, NlpStrategy, SolveReport, SolverConfig};
use polyrlt::harness::{
    load_configs, load_instances, performance_profile, profile_csv, read_records, run_bench, summarize, write_records,
    ProfileMetric,
};
use polyrlt::io::read_instance;
use polyrlt::poly::Problem;
use polyrlt::tighten::ObbtMode;
use polyrlt::Error;

const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(name = "polyrlt", version, about = "Global solver for mixed-integer polynomial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Solve every *.poly instance of a directory under several configurations.
    Bench(BenchArgs),
    /// Performance-profile CSV from a records file.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_name = "S")]
    time_limit: Option<f64>,
    #[arg(long, value_name = "G")]
    rel_gap: Option<f64>,
    #[arg(long, value_name = "G")]
    abs_gap: Option<f64>,
    #[arg(long, value_name = "N")]
    node_limit: Option<usize>,
    #[arg(long, value_enum)]
    branching_rule: Option<RuleArg>,
    #[arg(long, value_enum)]
    integer_mode: Option<ModeArg>,
    /// Depth from which nodes are solved as MILPs (with --integer-mode milp).
    #[arg(long, value_name = "D")]
    milp_depth: Option<usize>,
    #[arg(long, value_enum)]
    obbt: Option<ObbtArg>,
    #[arg(long)]
    no_fbbt: bool,
    #[arg(long, value_enum)]
    nlp_strategy: Option<NlpArg>,
    #[arg(long)]
    no_minlp_end: bool,
    #[arg(long)]
    no_minlp_stuck: bool,
    /// Write the full report as JSON.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Write one JSON line per processed node.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    /// JSON array of {"name": ..., "config": {...}} objects.
    #[arg(long, value_name = "FILE")]
    configs: PathBuf,
    #[arg(long, value_name = "K", default_value_t = 1)]
    workers: usize,
    /// Write the records CSV here; without it the CSV goes to stdout and the
    /// summary table to stderr.
    #[arg(long, value_name = "FILE")]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    records: PathBuf,
    #[arg(long, value_enum)]
    metric: MetricArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Sum,
    Range,
    Dual,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Milp,
    RltFirst,
    IntFirst,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObbtArg {
    Lp,
    Milp,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum NlpArg {
    Round,
    Fix,
    RoundFix,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Time,
    Gap,
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("polyrlt: {e}");
    ExitCode::from(match e {
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    })
}

fn create(path: &PathBuf) -> polyrlt::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn solver_config(a: &SolveArgs) -> polyrlt::Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(v) = a.time_limit {
        cfg.time_limit = v;
    }
    if let Some(v) = a.rel_gap {
        cfg.rel_gap = v;
    }
    if let Some(v) = a.abs_gap {
        cfg.abs_gap = v;
    }
    cfg.node_limit = a.node_limit;
    if let Some(r) = a.branching_rule {
        cfg.branching_rule = match r {
            RuleArg::Sum => BranchingRule::Sum,
            RuleArg::Range => BranchingRule::Range,
            RuleArg::Dual => BranchingRule::Dual,
        };
    }
    let depth = match (a.milp_depth, cfg.integer_mode) {
        (Some(d), _) => d,
        (None, IntegerMode::MilpAtDepth(d)) => d,
        (None, _) => 1,
    };
    cfg.integer_mode = match a.integer_mode {
        Some(ModeArg::RltFirst) => IntegerMode::RltFirst,
        Some(ModeArg::IntFirst) => IntegerMode::IntegralityFirst,
        Some(ModeArg::Milp) | None => IntegerMode::MilpAtDepth(depth),
    };
    if a.milp_depth.is_some() && !matches!(cfg.integer_mode, IntegerMode::MilpAtDepth(_)) {
        return Err(Error::Usage("--milp-depth requires --integer-mode milp".into()));
    }
    if let Some(o) = a.obbt {
        cfg.obbt_mode = match o {
            ObbtArg::Lp => ObbtMode::Lp,
            ObbtArg::Milp => ObbtMode::Milp,
            ObbtArg::Off => ObbtMode::Off,
        };
    }
    cfg.fbbt = !a.no_fbbt;
    if let Some(s) = a.nlp_strategy {
        cfg.nlp_strategy = match s {
            NlpArg::Round => NlpStrategy::Round,
            NlpArg::Fix => NlpStrategy::Fix,
            NlpArg::RoundFix => NlpStrategy::RoundFix,
            NlpArg::Off => NlpStrategy::Off,
        };
    }
    cfg.minlp_end = !a.no_minlp_end;
    cfg.minlp_on_stuck = !a.no_minlp_stuck;
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(problem: &Problem, r: &SolveReport) {
    let num = |v: f64| if v.is_finite() { format!("{v:.9}") } else { format!("{v}") };
    println!("instance    {}", r.instance);
    println!("status      {:?}", r.status);
    println!("objective   {}", num(r.objective));
    println!("bound       {}", num(r.bound));
    println!("rel gap     {}", num(r.rel_gap));
    println!("abs gap     {}", num(r.abs_gap));
    println!("nodes       {}", r.nodes);
    println!("time        {:.3} s", r.wall_time);
    if let Some(inc) = &r.incumbent {
        println!("solution ({:?})", inc.source);
        for (name, v) in problem.var_names.iter().zip(&inc.point) {
            println!("  {name:<12} {:.9}", v + 0.0);
        }
    }
}

fn run_solve(a: &SolveArgs) -> polyrlt::Result<ExitCode> {
    let cfg = solver_config(a)?;
    let problem = read_instance(&a.file)?;
    let report = solve(&problem, &cfg)?;
    print_report(&problem, &report);
    if let Some(path) = &a.json {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
    }
    if let Some(path) = &a.log {
        let mut w = create(path)?;
        for ev in &report.events {
            serde_json::to_writer(&mut w, ev).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    Ok(ExitCode::from(report.status.exit_code() as u8))
}

fn run_bench_cmd(a: &BenchArgs) -> polyrlt::Result<ExitCode> {
    let configs = load_configs(&a.configs)?;
    let instances = load_instances(&a.dir)?;
    let records = run_bench(&instances, &configs, a.workers)?;
    let summary = summarize(&records)?;
    match &a.records {
        Some(path) => {
            let mut w = create(path)?;
            write_records(&mut w, &records)?;
            w.flush()?;
            print!("{}", summary.render());
        }
        None => {
            write_records(std::io::stdout().lock(), &records)?;
            eprint!("{}", summary.render());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_profile(a: &ProfileArgs) -> polyrlt::Result<ExitCode> {
    let file = File::open(&a.records).map_err(|e| Error::Io(format!("{}: {e}", a.records.display())))?;
    let records = read_records(file)?;
    let metric = match a.metric {
        MetricArg::Time => ProfileMetric::Time,
        MetricArg::Gap => ProfileMetric::Gap,
    };
    let curves = performance_profile(&records, metric)?;
    print!("{}", profile_csv(&curves));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Bench(a) => run_bench_cmd(a),
        Command::Profile(a) => run_profile(a),
    };
    result.unwrap_or_else(|e| exit_for(&e))
}
