use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spinlab::experiment::{self, ExperimentConfig, ExperimentError, SUITES};

/// Runs exact verification suites for two-spin dynamics.
#[derive(Debug, Parser)]
#[command(name = "spinlab", version)]
struct Cli {
    /// Suite id, `run` (suite taken from the config) or `list`.
    target: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory.
    #[arg(long, default_value = "spinlab-out")]
    out: PathBuf,
}

const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATED: u8 = 2;

fn list() {
    for s in SUITES {
        println!("{:<24} {}  [{}]", s.id, s.description, s.certifies);
    }
}

fn max_states_from_env() -> Result<Option<usize>, ExperimentError> {
    match std::env::var("SPINLAB_MAX_STATES") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| ExperimentError::ConfigInvalid(format!("SPINLAB_MAX_STATES must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match (&cli.config, cli.target.as_str()) {
        (Some(path), "run") => ExperimentConfig::from_file(path)?,
        (None, "run") => return Err(ExperimentError::ConfigInvalid("`run` needs --config FILE".into())),
        (Some(path), id) => {
            let cfg = ExperimentConfig::from_file(path)?;
            if cfg.experiment != id {
                return Err(ExperimentError::ConfigInvalid(format!(
                    "config is for `{}` but `{id}` was requested",
                    cfg.experiment
                )));
            }
            cfg
        }
        (None, id) => ExperimentConfig::for_suite(id),
    };
    if experiment::suite_info(&cfg.experiment).is_none() {
        return Err(ExperimentError::UnknownSuite(cfg.experiment));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(cap) = max_states_from_env()? {
        cfg.max_states = Some(cfg.max_states.map_or(cap, |c| c.min(cap)));
    }
    Ok(cfg)
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
    if cli.target == "list" {
        list();
        return ExitCode::SUCCESS;
    }
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = build_config(&cli).and_then(|cfg| {
        let out = cfg.out_dir.clone().unwrap_or_else(|| cli.out.clone());
        let report = experiment::run(&cfg)?;
        report.write(&out)?;
        Ok((report, out))
    });
    match result {
        Ok((report, out)) => {
            for c in report.checks.iter().filter(|c| c.verdict == spinlab::stability::Verdict::Violated) {
                eprintln!("violated: {} (formula {}, measured {:?})", c.name, c.formula_value, c.measured_value);
            }
            for n in &report.notes {
                println!("note: {n}");
            }
            println!(
                "{}: {} checks, {} violated; reports in {}",
                report.suite,
                report.checks.len(),
                report.violations(),
                out.display()
            );
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
