use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbe::cli::{self, BenchConfig, Builtin, Command, Method, ProblemConfig, RunConfig};
use gbe::Result;

#[derive(Parser)]
#[command(name = "gbe", version = cli_version(), about = "Dynamic programming for multi-stage problems")]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid resolution factor for the planning problems.
    #[arg(long, global = true)]
    grid_scale: Option<f64>,
    /// gbe, bellman, augment, rollout or enumerate.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Polynomial degree of the level-set fit.
    #[arg(long, global = true)]
    degree: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve a configured problem and write its value table and trajectories.
    Solve,
    /// Set-entry planning; defaults to the Dubins car.
    Plan,
    /// Invariant set of the switching system with a level-set fit.
    Invariant,
    /// Time gbe, augmentation and rollout on the nested-radical problem.
    Bench,
    /// Check a solved problem against the oracles; exits 1 on failure.
    Verify,
}

fn cli_version() -> &'static str {
    Box::leak(cli::version().into_boxed_str())
}

fn load_run(args: &Args, default: Option<Builtin>) -> Result<RunConfig> {
    let mut config = match (&args.config, default) {
        (Some(path), _) => cli::parse_config(&std::fs::read_to_string(path)?)?,
        (None, Some(builtin)) => RunConfig::for_problem(ProblemConfig::Builtin(builtin)),
        (None, None) => {
            return Err(gbe::Error::Config { key: "--config".into(), expected: "a JSON run configuration".into() })
        }
    };
    if let Some(m) = &args.method {
        config.method = Some(Method::parse(m)?);
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.out.is_some() {
        config.out = args.out.clone();
    }
    if args.degree.is_some() {
        config.degree = args.degree;
    }
    if let Some(scale) = args.grid_scale {
        config.set_grid_scale(scale)?;
    }
    config.validate()?;
    Ok(config)
}

fn load_bench(args: &Args) -> Result<BenchConfig> {
    let mut config = match &args.config {
        Some(path) => BenchConfig::parse(&std::fs::read_to_string(path)?)?,
        None => BenchConfig::default(),
    };
    if let Some(m) = &args.method {
        config = config.only(Method::parse(m)?)?;
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    Ok(config)
}

fn execute(args: &Args) -> Result<bool> {
    let dubins = || Builtin::Dubins {
        grid_scale: None,
        horizon: None,
        inputs: None,
        box_margin: None,
        lookup: Default::default(),
        starts: None,
    };
    let fthmis = || Builtin::Fthmis { grid_points: None, inputs: None, lookup: Default::default(), starts: Vec::new() };
    let manifest = match args.command {
        Sub::Solve => cli::run(Command::Solve, &load_run(args, None)?)?,
        Sub::Plan => cli::run(Command::Plan, &load_run(args, Some(dubins()))?)?,
        Sub::Invariant => cli::run(Command::Invariant, &load_run(args, Some(fthmis()))?)?,
        Sub::Bench => {
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from(cli::DEFAULT_OUT_DIR));
            let report = cli::bench_to_dir(&load_bench(args)?, &dir)?;
            for row in &report.rows {
                match row.seconds {
                    Some(s) => println!("{:<8} T={:<7} {:.6}s value {:?}", row.method.name(), row.horizon, s, row.value),
                    None => println!("{:<8} T={:<7} skipped (budget)", row.method.name(), row.horizon),
                }
            }
            println!("gbe slope {:?}, augment ratio {:?}", report.gbe_slope, report.augment_ratio);
            return Ok(true);
        }
        Sub::Verify => {
            let config = load_run(args, None)?;
            let report = cli::verify_to_dir(&config, &cli::out_dir(&config))?;
            for check in &report.checks {
                println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
            }
            return Ok(report.passed());
        }
    };
    for r in &manifest.results {
        println!("start {:?}: value {:?}, cost {:?}, feasible {}", r.start, r.value, r.cost, r.feasible);
    }
    for note in &manifest.notes {
        println!("{note}");
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
