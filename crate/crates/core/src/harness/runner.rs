//! Builds problems from configs, resolves stepsize rules against horizons,
//! and executes runs.
//!
//! Seed derivation: the master seed from `[run] seed` feeds three child
//! streams: dataset generation, the initial point, and the algorithm master
//! (whose own children drive per-(client, round) sampling). `compare` runs
//! two configs against one shared problem and initial point while giving each
//! algorithm an independent child seed.

use std::path::Path;

use crate::algorithms::{self, AlgoConfig, InitMode, RoundDiag};
use crate::compressors::alpha_of;
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, ProblemConfig, SourceConfig};
use crate::harness::record::{write_csv, RunRecord};
use crate::problems::{
    generate_synthetic, logistic_constants, parse_libsvm, poly_constants, poly_l_from_d,
    scale_features, LabelMap, LogisticProblem, PolynomialProblem, Problem, SmoothnessConstants,
};
use crate::rng::{sample_gaussian, seeded_rng, RngStream};
use crate::schedules::RuleInputs;
use crate::vector::DenseVector;

const TAG_DATA: u64 = 10;
const TAG_X0: u64 = 11;
const TAG_ALGO: u64 = 12;

/// A problem instance plus everything reusable across horizons: smoothness
/// constants, the sampled initial point, and the compression factor.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub cfg: ExperimentConfig,
    pub problem: Problem,
    pub constants: SmoothnessConstants,
    pub x0: DenseVector,
    pub alpha: f64,
}

/// Builds the problem, samples x⁰, and completes the smoothness constants
/// (for the polynomial, the classical L from the box radius D = max|x⁰_i|).
pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedExperiment> {
    cfg.validate()?;
    let master = seeded_rng(cfg.run.seed);

    let (problem, mut constants) = match &cfg.problem {
        ProblemConfig::Polynomial { d, l0, l1 } => {
            let (lambda, coeffs, constants) = poly_constants(*d, *l1, *l0)?;
            let p = PolynomialProblem::new(*d, lambda, coeffs)?;
            (Problem::Polynomial(p), constants)
        }
        ProblemConfig::Logistic {
            source,
            lambda,
            scale,
            label_map,
            n_clients,
            dim_override,
        } => {
            let dataset = match source {
                SourceConfig::Path { path } => {
                    let text = std::fs::read_to_string(path)?;
                    parse_libsvm(&text, &LabelMap(label_map.clone()), *dim_override)?
                }
                SourceConfig::Synthetic { n, d } => {
                    let mut data_rng = master.child(&[TAG_DATA]);
                    generate_synthetic(*n, *d, &mut data_rng)?
                }
            };
            let dataset = if *scale {
                scale_features(&dataset)?
            } else {
                dataset
            };
            let clients = n_clients.unwrap_or(dataset.n_rows());
            let p = LogisticProblem::from_dataset(&dataset, *lambda, clients)?;
            let constants = logistic_constants(&p);
            (Problem::Logistic(p), constants)
        }
    };

    let (mean, std) = cfg.x0_distribution();
    let mut x0_rng = master.child(&[TAG_X0]);
    let x0 = sample_gaussian(&mut x0_rng, problem.dim(), mean, std)?;

    if let Problem::Polynomial(p) = &problem {
        let box_radius = x0.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let l = poly_l_from_d(p, box_radius)?;
        constants.l = Some(l);
        constants.box_radius = Some(box_radius);
        constants.l_hat = vec![l];
    }

    let alpha = alpha_of(&cfg.compressor(), problem.dim());
    Ok(PreparedExperiment {
        cfg: cfg.clone(),
        problem,
        constants,
        x0,
        alpha,
    })
}

impl PreparedExperiment {
    /// Resolves the configured rule for a horizon into a runnable config.
    pub fn algo_config(&self, k_horizon: usize) -> Result<AlgoConfig> {
        let inputs = RuleInputs {
            l: self.constants.l,
            l_tilde: self.constants.l_tilde(),
            l1: self.constants.l1,
            alpha: self.alpha,
        };
        let steps = self.cfg.rule().resolve(k_horizon, &inputs)?;
        let variant = self.cfg.algorithm.variant.into();
        Ok(AlgoConfig {
            variant,
            compressor: self.cfg.compressor(),
            gamma: steps.gamma,
            eta: steps.eta,
            init_mode: self
                .cfg
                .algorithm
                .init_mode
                .map(Into::into)
                .unwrap_or_else(|| InitMode::default_for(variant)),
            batch: self.cfg.algorithm.batch,
            noise_sigma: self.cfg.algorithm.noise_sigma,
            parallel_clients: self.cfg.run.parallel_clients,
        })
    }

    fn algo_rng(&self, salt: Option<u64>) -> RngStream {
        let master = seeded_rng(self.cfg.run.seed);
        match salt {
            None => master.child(&[TAG_ALGO]),
            Some(s) => master.child(&[TAG_ALGO, s]),
        }
    }

    /// Runs the experiment at the given horizon. `salt` separates the
    /// algorithmic randomness of runs that share this problem instance.
    pub fn execute(&self, k_horizon: usize, salt: Option<u64>) -> Result<RunRecord> {
        let algo = self.algo_config(k_horizon)?;
        let mut record = algorithms::run(
            &self.problem,
            &algo,
            &self.x0,
            k_horizon,
            &self.algo_rng(salt),
        )?;
        record.config_echo = Some(self.cfg.to_toml()?);
        record.seed = self.cfg.run.seed;
        Ok(record)
    }

    /// As [`PreparedExperiment::execute`], also returning per-round
    /// diagnostics.
    pub fn execute_with_diagnostics(
        &self,
        k_horizon: usize,
        salt: Option<u64>,
    ) -> Result<(RunRecord, Vec<RoundDiag>)> {
        let algo = self.algo_config(k_horizon)?;
        let (mut record, diags) = algorithms::run_with_diagnostics(
            &self.problem,
            &algo,
            &self.x0,
            k_horizon,
            &self.algo_rng(salt),
        )?;
        record.config_echo = Some(self.cfg.to_toml()?);
        record.seed = self.cfg.run.seed;
        Ok((record, diags))
    }
}

/// Runs a config end to end and writes its CSV when `[run] out` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let prep = prepare(cfg)?;
    let record = prep.execute(cfg.run.k_iters, None)?;
    if let Some(out) = &cfg.run.out {
        write_csv(&record, Path::new(out))?;
    }
    Ok(record)
}

/// Runs two configs over one shared problem instance and initial point
/// (taken from config A), giving each side an independent algorithm seed.
/// The problem sections must agree.
pub fn compare(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
) -> Result<(RunRecord, RunRecord)> {
    if cfg_a.problem != cfg_b.problem {
        return Err(Error::config(
            "problem",
            "compare requires identical [problem] sections",
        ));
    }
    let prep_a = prepare(cfg_a)?;
    let mut cfg_b_shared = cfg_b.clone();
    cfg_b_shared.run.seed = cfg_a.run.seed;
    let prep_b = PreparedExperiment {
        cfg: cfg_b_shared,
        problem: prep_a.problem.clone(),
        constants: prep_a.constants.clone(),
        x0: prep_a.x0.clone(),
        alpha: alpha_of(&cfg_b.compressor(), prep_a.problem.dim()),
    };
    let rec_a = prep_a.execute(cfg_a.run.k_iters, Some(0))?;
    let rec_b = prep_b.execute(cfg_b.run.k_iters, Some(1))?;
    Ok((rec_a, rec_b))
}

/// Joint CSV for overlay plots: both records side by side, shorter record
/// padded with empty fields.
pub fn compare_csv(a: &RunRecord, b: &RunRecord) -> String {
    let mut out = String::new();
    for (tag, rec) in [("a", a), ("b", b)] {
        if let Some(echo) = &rec.config_echo {
            for line in echo.lines() {
                out.push_str(&format!("# [{tag}] {line}\n"));
            }
        }
    }
    out.push_str(
        "k,f_a,grad_norm_sq_a,min_grad_norm_a,bits_a,f_b,grad_norm_sq_b,min_grad_norm_b,bits_b\n",
    );
    let fmt = |v: f64| format!("{v:.16e}");
    let n = a.rows.len().max(b.rows.len());
    for k in 0..n {
        let left = a
            .rows
            .get(k)
            .map(|r| {
                format!(
                    "{},{},{},{}",
                    fmt(r.f_value),
                    fmt(r.grad_norm_sq),
                    fmt(r.min_grad_norm),
                    r.bits_cumulative
                )
            })
            .unwrap_or_else(|| ",,,".into());
        let right = b
            .rows
            .get(k)
            .map(|r| {
                format!(
                    "{},{},{},{}",
                    fmt(r.f_value),
                    fmt(r.grad_norm_sq),
                    fmt(r.min_grad_norm),
                    r.bits_cumulative
                )
            })
            .unwrap_or_else(|| ",,,".into());
        out.push_str(&format!("{k},{left},{right}\n"));
    }
    out
}

/// Writes the joint CSV of [`compare`].
pub fn write_compare_csv(a: &RunRecord, b: &RunRecord, path: &Path) -> Result<()> {
    std::fs::write(path, compare_csv(a, b))?;
    Ok(())
}
