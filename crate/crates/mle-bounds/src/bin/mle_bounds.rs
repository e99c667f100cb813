//! Thin command-line front end over the library; all logic lives in
//! `mle_bounds::report`.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mle_bounds::report::{
    emit_rows, run_bound, run_certify_beta, run_lemma_check, run_rate, run_verify,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "mle-bounds",
    about = "Explicit bounds on the normal approximation of maximum likelihood estimators, \
             with Monte Carlo verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration file (flat key-value with section headers)
    #[arg(long)]
    config: std::path::PathBuf,
    /// Override the configured base seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured replicate count
    #[arg(long)]
    reps: Option<usize>,
    /// Output path (defaults to stdout, or the config's `out`)
    #[arg(long)]
    out: Option<String>,
    /// Report each bound as value + 3 standard errors
    #[arg(long)]
    conservative: bool,
}

impl ConfigArgs {
    fn load(&self) -> mle_bounds::Result<ExperimentConfig> {
        let text = std::fs::read_to_string(&self.config)?;
        let mut cfg = ExperimentConfig::parse(&text)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(reps) = self.reps {
            cfg.reps = reps;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.conservative |= self.conservative;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form bounds over the configured grid
    Bound(ConfigArgs),
    /// Estimate true distances and check bound dominance; nonzero exit on
    /// any failing cell
    Verify(ConfigArgs),
    /// Gate, admissibility and bound certificate for a Beta model
    CertifyBeta {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Fit log-log convergence rates of the bounds over the configured grid
    Rate(ConfigArgs),
    /// Run the randomized conditional-expectation inequality suite
    LemmaCheck {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run() -> mle_bounds::Result<ExitCode> {
    match Cli::parse().command {
        Command::Bound(args) => {
            let cfg = args.load()?;
            let rows = run_bound(&cfg)?;
            emit_rows(&rows, cfg.out.as_deref(), true)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let cfg = args.load()?;
            let (rows, all_pass) = run_verify(&cfg)?;
            emit_rows(&rows, cfg.out.as_deref(), false)?;
            if all_pass {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("dominance failed on at least one cell");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::CertifyBeta { alpha, beta, n, out } => {
            let report = run_certify_beta(alpha, beta, n)?;
            let json = serde_json::to_string_pretty(&report).expect("serializable");
            match out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rate(args) => {
            let cfg = args.load()?;
            let (rows, fits) = run_rate(&cfg)?;
            emit_rows(&rows, cfg.out.as_deref(), false)?;
            let json = serde_json::to_string_pretty(&fits).expect("serializable");
            match cfg.out.as_deref() {
                Some(path) => std::fs::write(format!("{path}.fits.json"), json)?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::LemmaCheck { cases, seed } => {
            let summary = run_lemma_check(cases, seed)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
            if summary.passed == summary.cases {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
