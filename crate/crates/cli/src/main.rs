//! `normef`: run, search, check and compare error-feedback experiments
//! described by TOML configs.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use normef::harness::{
    check_suite, compare, grid_search_k, run_experiment, write_compare_csv, ExperimentConfig,
};
use normef::problems::{generate_synthetic, serialize_libsvm};
use normef::rng::seeded_rng;

#[derive(Parser)]
#[command(
    name = "normef",
    version,
    about = "Error-feedback optimization testbed"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment and emit its CSV.
    Run {
        config: PathBuf,
        /// Override [run] seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override [run] out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run client steps on a thread pool.
        #[arg(long)]
        parallel_clients: bool,
    },
    /// Find the smallest horizon K on a grid reaching the gradient target.
    Grid {
        config: PathBuf,
        /// Target on ‖∇f‖² (defaults to [run] epsilon).
        #[arg(long)]
        eps: Option<f64>,
        /// Grid step.
        #[arg(long)]
        step: usize,
        /// Largest horizon to try.
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the invariant-verification suite for a config.
    Check {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic dataset and write it in LIBSVM format.
    GenData {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run two configs on a shared problem instance and emit a joint CSV.
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_config(path: &std::path::Path, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(path)
        .with_context(|| format!("loading config {}", path.display()))?;
    if let Some(seed) = seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn real_main() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            parallel_clients,
        } => {
            let mut cfg = load_config(&config, seed)?;
            if let Some(out) = out {
                cfg.run.out = Some(out.to_string_lossy().into_owned());
            }
            if parallel_clients {
                cfg.run.parallel_clients = true;
            }
            let record = run_experiment(&cfg)?;
            let last = record.rows.last().expect("nonempty record");
            eprintln!(
                "run complete: {} rows, final f = {:.6e}, min ||grad||^2 = {:.6e}",
                record.rows.len(),
                last.f_value,
                record.final_min_grad_norm_sq()
            );
            if let Some(out) = &cfg.run.out {
                eprintln!("csv written to {out}");
            }
            Ok(true)
        }
        Command::Grid {
            config,
            eps,
            step,
            kmax,
            seed,
        } => {
            let cfg = load_config(&config, seed)?;
            let eps = eps.unwrap_or(cfg.run.epsilon);
            let k = grid_search_k(&cfg, eps, step, kmax)?;
            println!("{k}");
            Ok(true)
        }
        Command::Check { config, seed } => {
            let cfg = load_config(&config, seed)?;
            let report = check_suite(&cfg)?;
            print!("{}", report.render());
            Ok(report.all_passed())
        }
        Command::GenData { n, d, seed, out } => {
            let mut rng = seeded_rng(seed);
            let ds = generate_synthetic(n, d, &mut rng)?;
            std::fs::write(&out, serialize_libsvm(&ds))
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {n} x {d} dataset to {}", out.display());
            Ok(true)
        }
        Command::Compare {
            config_a,
            config_b,
            out,
            seed,
        } => {
            let cfg_a = load_config(&config_a, seed)?;
            let cfg_b = load_config(&config_b, seed)?;
            let (rec_a, rec_b) = compare(&cfg_a, &cfg_b)?;
            eprintln!(
                "A: final ||grad||^2 = {:.6e}   B: final ||grad||^2 = {:.6e}",
                rec_a.final_grad_norm_sq(),
                rec_b.final_grad_norm_sq()
            );
            if let Some(out) = out {
                write_compare_csv(&rec_a, &rec_b, &out)?;
                eprintln!("joint csv written to {}", out.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
