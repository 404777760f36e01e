//! Command-line harness for recovery sweeps, the counterexample demo,
//! certificate audits, and tail-bound audits.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use corrsense::error::Error;
use corrsense::experiment::{
    emit_csv_with_provenance, run_certificate_audit, run_concentration_audits,
    run_counterexample, run_phase_transition, recovery_frequencies, ExperimentConfig, Mode,
};

#[derive(Parser)]
#[command(
    name = "corrsense",
    about = "Sparse recovery from partially corrupted partial-Fourier measurements",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML config file; omitted fields take built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 means one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV path (audit mode: output directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reject composite signal lengths.
    #[arg(long)]
    theory_mode: Option<bool>,
    /// Use desk-scale block sizing for certificates.
    #[arg(long)]
    desk_constants: Option<bool>,
}

#[derive(Subcommand)]
enum Command {
    /// Recovery-probability sweep over (n, m, k, gamma_c, lambda) cells.
    Phase {
        #[command(flatten)]
        common: CommonArgs,
        /// Trials per cell (overrides the config).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Square-length demo where the comb signal defeats recovery at small weights.
    Counterexample {
        #[command(flatten)]
        common: CommonArgs,
        /// Signal length (a perfect square).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Certificate construction and verification sweep with margins.
    Certify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Tail-bound audits; writes one CSV per audit into the output directory.
    Audit {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_config(common: &CommonArgs, mode: Mode) -> Result<ExperimentConfig, Error> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default_for(mode),
    };
    config.mode = mode;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(jobs) = common.jobs {
        config.jobs = jobs;
    }
    if let Some(t) = common.theory_mode {
        config.theory_mode = t;
    }
    if let Some(d) = common.desk_constants {
        config.desk_constants = d;
    }
    config.validate()?;
    Ok(config)
}

fn out_path(common: &CommonArgs, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn run() -> Result<(), Error> {
    let cli = Cli::try_parse().map_err(|e| Error::Config(e.to_string()))?;
    match cli.command {
        Command::Phase { common, trials } => {
            let mut config = load_config(&common, Mode::Phase)?;
            if let Some(t) = trials {
                config.trials = t;
            }
            config.validate()?;
            let records = run_phase_transition(&config)?;
            let path = out_path(&common, "phase.csv");
            emit_csv_with_provenance(&records, &path, &config.provenance())?;
            println!("wrote {} rows to {}", records.len(), path.display());
            for ((n, m, k, gamma_bits, lambda_bits), freq, total) in
                recovery_frequencies(&records)
            {
                println!(
                    "n={n} m={m} k={k} gamma_c={:.3} lambda={:.4}: recovery {freq:.3} ({total} trials)",
                    f64::from_bits(gamma_bits),
                    f64::from_bits(lambda_bits),
                );
            }
            Ok(())
        }
        Command::Counterexample { common, n } => {
            let mut config = load_config(&common, Mode::Counterexample)?;
            if let Some(n) = n {
                config.counterexample_n = vec![n];
            }
            config.validate()?;
            let mut records = Vec::new();
            for &n in &config.counterexample_n {
                records.extend(run_counterexample(
                    n,
                    &config.counterexample_lambda,
                    config.solver_max_iter,
                )?);
            }
            let path = out_path(&common, "counterexample.csv");
            emit_csv_with_provenance(&records, &path, &config.provenance())?;
            for r in &records {
                let verdict = if r.exact { "recovered" } else { "not recovered" };
                let status = if r.asserted { "asserted" } else { "recorded" };
                println!(
                    "n={} lambda={}: objective {:.6} (comb {:.6}, swap {:.6}) -> {verdict} [{status}]",
                    r.n, r.lambda, r.solver_objective, r.comb_objective, r.swap_objective
                );
            }
            println!("wrote {} rows to {}", records.len(), path.display());
            Ok(())
        }
        Command::Certify { common, trials } => {
            let mut config = load_config(&common, Mode::Certify)?;
            if let Some(t) = trials {
                config.trials = t;
            }
            config.validate()?;
            let records = run_certificate_audit(&config)?;
            let path = out_path(&common, "certify.csv");
            emit_csv_with_provenance(&records, &path, &config.provenance())?;
            let passes = records.iter().filter(|r| r.cert_pass == Some(true)).count();
            let sound = records.iter().all(|r| r.sound != Some(false));
            println!(
                "wrote {} rows to {}; certificates passed {passes}/{}; soundness {}",
                records.len(),
                path.display(),
                records.len(),
                if sound { "ok" } else { "VIOLATED" }
            );
            Ok(())
        }
        Command::Audit { common } => {
            let config = load_config(&common, Mode::Audit)?;
            let dir = out_path(&common, "audits");
            std::fs::create_dir_all(&dir)
                .map_err(|e| Error::io(dir.display().to_string(), e))?;
            let tables = run_concentration_audits(&config)?;
            for (name, records) in &tables {
                let path = dir.join(format!("{name}.csv"));
                emit_csv_with_provenance(records, &path, &config.provenance())?;
                let all_pass = records.iter().all(|r| r.pass);
                println!(
                    "{}: {} rows, {}",
                    path.display(),
                    records.len(),
                    if all_pass { "all pass" } else { "FAILURES" }
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(message)) => {
            eprintln!("{message}");
            ExitCode::from(1)
        }
        Err(other) => {
            eprintln!("error: {other}");
            ExitCode::from(2)
        }
    }
}
