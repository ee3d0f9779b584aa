use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rindler_core::factory::IdentitySuite;
use rindler_core::opexpr::{parse_scenario, OutputFormat};
use rindler_core::scenario::{
    exit, physics_table, run_and_write, Overrides, RunError, RunOptions, ScenarioReport,
};

#[derive(Parser, Debug)]
#[command(name = "rindler-lab", version, about = "Composite-particle dynamics for inertial and accelerated observers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one or more scenario configs.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Scenario config files (TOML).
    #[arg(required_unless_present = "identity_suite_only")]
    configs: Vec<PathBuf>,
    /// Only run the operator identity suite and write its report.
    #[arg(long)]
    identity_suite_only: bool,
    /// Identity case file replacing the shipped suite.
    #[arg(long, value_name = "FILE")]
    cases: Option<PathBuf>,
    /// Heavy-mass mode: c.m. frozen at the branch centers, pure internal phases.
    #[arg(long)]
    frozen_cm: bool,
    /// Highest ε order kept in the Hamiltonian.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    order: Option<u8>,
    /// Output directory (overrides the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Curve format (overrides the config).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Recorded in the report; the dynamics are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
    /// Worker threads (independent configs run in parallel).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Skip the identity suite during scenario runs.
    #[arg(long)]
    skip_identities: bool,
}

fn identity_only(args: &RunArgs) -> i32 {
    let suite = match &args.cases {
        Some(p) => match IdentitySuite::from_path(p) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return exit::CONFIG;
            }
        },
        None => IdentitySuite::shipped(),
    };
    let table = physics_table();
    let report = rindler_core::factory::run_identity_suite(&table, &suite);
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let path = dir.join("identities.report.json");
    let written = std::fs::create_dir_all(&dir)
        .and_then(|_| std::fs::write(&path, serde_json::to_string_pretty(&report).expect("report serializes") + "\n"));
    if let Err(e) = written {
        eprintln!("error: writing {}: {e}", path.display());
        return exit::CONFIG;
    }
    if !args.quiet {
        println!("identities: {}/{} passed -> {}", report.passed, report.total, path.display());
        for c in report.failures() {
            println!("  FAIL {}: {}", c.name, c.error.as_deref().unwrap_or(&c.residual));
        }
    }
    if report.all_passed() {
        exit::PASS
    } else {
        exit::PHYSICS
    }
}

/// With several configs each one writes below its own subdirectory.
fn run_one(path: &Path, args: &RunArgs, isolate: bool) -> Result<ScenarioReport, RunError> {
    let cfg = parse_scenario(path)?;
    let base = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let overrides = Overrides {
        frozen_cm: args.frozen_cm,
        order: args.order,
        out: Some(if isolate { base.join(stem(path)) } else { base }),
        format: args.format.map(|f| match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
    };
    let cfg = overrides.apply(cfg)?;
    let opts = RunOptions { identity_suite: !args.skip_identities, seed: args.seed };
    let (report, paths) = run_and_write(&cfg, &opts)?;
    if !args.quiet {
        println!(
            "{}: {} ({} checks, {:.2}s) -> {}",
            report.name,
            if report.passed { "pass" } else { "FAIL" },
            report.checks.len(),
            report.stats.wall_clock_s,
            paths.report.display()
        );
        for c in report.failed_checks() {
            println!("  FAIL {}: {:e} > {:e}", c.name, c.value, c.limit);
        }
    }
    Ok(report)
}

fn run(args: &RunArgs) -> i32 {
    if args.identity_suite_only {
        return identity_only(args);
    }
    if args.cases.is_some() {
        eprintln!("error: --cases only applies with --identity-suite-only");
        return exit::CONFIG;
    }
    let many = args.configs.len() > 1;
    let codes: Vec<i32> = args
        .configs
        .par_iter()
        .map(|path| {
            match run_one(path, args, many) {
                Ok(r) => r.exit_code(),
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    e.exit_code()
                }
            }
        })
        .collect();
    codes.into_iter().max().unwrap_or(exit::PASS)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "config".into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    let code = match args.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| run(&args)),
            Err(e) => {
                eprintln!("error: thread pool: {e}");
                exit::CONFIG
            }
        },
        None => run(&args),
    };
    ExitCode::from(code as u8)
}
