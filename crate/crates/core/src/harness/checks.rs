//! Invariant-verification suite: empirical generalized smoothness, the two
//! gradient-growth inequalities, compressor contractivity, and the per-round
//! descent diagnostics for normalized deterministic runs. Failures are report
//! entries, not errors.

use crate::algorithms::RoundDiag;
use crate::compressors::{alpha_of, compress, CompressorKind};
use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::runner::{prepare, PreparedExperiment};
use crate::problems::Problem;
use crate::rng::{sample_gaussian, seeded_rng, RngStream};
use crate::schedules::TheoryConstants;
use crate::vector::DenseVector;

const TAG_CHECKS: u64 = 20;

/// Absolute tolerance on inequality margins.
pub const INEQ_TOL: f64 = 1e-9;

/// One named check with its worst observed margin (RHS − LHS; negative
/// beyond tolerance means failure).
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub detail: String,
}

impl CheckResult {
    fn from_margin(name: &str, worst_margin: f64, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed: worst_margin >= -INEQ_TOL,
            worst_margin,
            detail,
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        CheckResult {
            name: name.into(),
            passed: true,
            worst_margin: f64::INFINITY,
            detail: format!("skipped: {why}"),
        }
    }
}

/// Report of the whole suite.
#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let margin = if c.worst_margin.is_finite() {
                format!("worst margin {:+.3e}", c.worst_margin)
            } else {
                String::new()
            };
            out.push_str(&format!(
                "{status} {:<24} {} {}\n",
                c.name, margin, c.detail
            ));
        }
        out
    }
}

/// Central finite differences of an arbitrary scalar function.
pub fn finite_diff_of(
    f: impl Fn(&DenseVector) -> Result<f64>,
    x: &DenseVector,
    h: f64,
) -> Result<DenseVector> {
    let d = x.dim();
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let mut plus = x.as_slice().to_vec();
        let mut minus = plus.clone();
        plus[j] += h;
        minus[j] -= h;
        let fp = f(&DenseVector::from_vec(plus)?)?;
        let fm = f(&DenseVector::from_vec(minus)?)?;
        out.push((fp - fm) / (2.0 * h));
    }
    DenseVector::from_vec(out)
}

/// Central finite differences of f_i: ((f_i(x+h e_j) − f_i(x−h e_j)) / 2h)_j.
pub fn finite_diff_grad(
    problem: &Problem,
    client: usize,
    x: &DenseVector,
    h: f64,
) -> Result<DenseVector> {
    finite_diff_of(|p| problem.client_value(client, p), x, h)
}

/// Draws a point pair (x, y) with ‖x − y‖ ≤ 1: x gaussian around `center`,
/// y displaced along a random direction by a uniform radius in (0, 1].
fn sample_pair(
    rng: &mut RngStream,
    d: usize,
    center: f64,
    spread: f64,
) -> (DenseVector, DenseVector) {
    let x = sample_gaussian(rng, d, center, spread).expect("pair sample");
    let dir = sample_gaussian(rng, d, 0.0, 1.0).expect("pair direction");
    let norm = dir.norm2();
    let radius = rng.uniform().max(1e-6);
    let y = if norm == 0.0 {
        x.clone()
    } else {
        x.add_scaled(radius / norm, &dir)
    };
    (x, y)
}

/// Empirical generalized smoothness: over random pairs with ‖x−y‖ ≤ 1 and a
/// cycling client index,
/// ‖∇f_i(x) − ∇f_i(y)‖ ≤ (L0 + L1·max over a 50-point θ-grid of
/// ‖∇f_i(u_θ)‖)·‖x−y‖·(1 + 1e−6).
pub fn empirical_smoothness_check(
    problem: &Problem,
    l0: f64,
    l1: f64,
    n_pairs: usize,
    centers: &[(f64, f64)],
    rng: &mut RngStream,
) -> Result<CheckResult> {
    let d = problem.dim();
    let n = problem.n_clients();
    let mut worst = f64::INFINITY;
    for pair_idx in 0..n_pairs {
        let (center, spread) = centers[pair_idx % centers.len()];
        let (x, y) = sample_pair(rng, d, center, spread);
        let client = pair_idx % n;
        let gx = problem.client_grad(client, &x)?;
        let gy = problem.client_grad(client, &y)?;
        let lhs = gx.dist(&gy);
        let mut sup = 0.0f64;
        for j in 0..50 {
            let theta = j as f64 / 49.0;
            let u = x.scale(theta).add(&y.scale(1.0 - theta));
            sup = sup.max(problem.client_grad(client, &u)?.norm2());
        }
        let rhs = (l0 + l1 * sup) * x.dist(&y) * (1.0 + 1e-6);
        worst = worst.min(rhs - lhs);
    }
    Ok(CheckResult::from_margin(
        "empirical-smoothness",
        worst,
        format!("{n_pairs} pairs, 50-point segment grid"),
    ))
}

/// Gradient-growth inequality per client:
/// ‖∇f_i(x)‖²/(4(L0 + L1‖∇f_i(x)‖)) ≤ f_i(x) − f_i^inf at every point.
/// Unknown infima are replaced by the lower bound 0 (valid here since both
/// objectives are nonnegative), which only weakens the check.
pub fn gradient_growth_check(
    problem: &Problem,
    l0: f64,
    l1: f64,
    points: &[DenseVector],
) -> Result<CheckResult> {
    let n = problem.n_clients();
    let mut worst = f64::INFINITY;
    for (idx, x) in points.iter().enumerate() {
        let client = idx % n;
        let g = problem.client_grad(client, x)?.norm2();
        let f_inf = problem.client_f_inf(client).unwrap_or(0.0);
        let lhs = g * g / (4.0 * (l0 + l1 * g));
        let rhs = problem.client_value(client, x)? - f_inf;
        worst = worst.min(rhs - lhs);
    }
    Ok(CheckResult::from_margin(
        "gradient-growth",
        worst,
        format!("{} points", points.len()),
    ))
}

/// Mean gradient-norm bound at run iterates:
/// (1/n)Σ‖∇f_i(x)‖ ≤ 8·L1·(f(x) − f^inf) + 8·L1·δ^inf + L0/L1, with unknown
/// infima replaced by 0 (weaker, still valid for nonnegative objectives).
pub fn mean_grad_bound_check(diags: &[RoundDiag], l0: f64, l1: f64, delta_inf: f64) -> CheckResult {
    let mut worst = f64::INFINITY;
    for d in diags {
        let rhs = 8.0 * l1 * d.f_value + 8.0 * l1 * delta_inf + l0 / l1;
        worst = worst.min(rhs - d.mean_client_grad_norm);
    }
    CheckResult::from_margin(
        "mean-grad-bound",
        worst,
        format!("{} iterates", diags.len()),
    )
}

/// Normalized-step descent inequality at every executed round:
/// f(x^{k+1}) ≤ f(x^k) − γ‖∇f(x^k)‖ + 2γ‖∇f(x^k) − g^k‖
///            + (γ²/2)·exp(γL1)·(L0 + L1·(1/n)Σ‖∇f_i(x^k)‖).
pub fn descent_check(diags: &[RoundDiag], l0: f64, l1: f64) -> CheckResult {
    let mut worst = f64::INFINITY;
    for d in diags {
        let g = d.gamma;
        let rhs = d.f_value - g * d.grad_norm
            + 2.0 * g * d.grad_minus_g_norm
            + 0.5 * g * g * (g * l1).exp() * (l0 + l1 * d.mean_client_grad_norm);
        worst = worst.min(rhs - d.f_next);
    }
    CheckResult::from_margin(
        "descent-inequality",
        worst,
        format!("{} rounds", diags.len()),
    )
}

/// Potential descent between consecutive executed rounds (proof form, with
/// the exp factors): V^{k+1} ≤ V^k + c1·e^{L1γ}γ²·(1/n)Σ‖∇f_i(x^k)‖
/// − γ‖∇f(x^k)‖ + c0·e^{L1γ}γ², where
/// V^k = f(x^k) − f^inf + (2γ/(1−√(1−α)))·(1/n)Σ‖∇f_i(x^k) − g_i^k‖.
pub fn potential_descent_check(
    diags: &[RoundDiag],
    constants: &TheoryConstants,
    l1: f64,
    alpha: f64,
    f_inf: f64,
) -> CheckResult {
    let weight = |gamma: f64| 2.0 * gamma / (1.0 - (1.0 - alpha).sqrt());
    let potential = |d: &RoundDiag| d.f_value - f_inf + weight(d.gamma) * d.ef_residual_mean;
    let mut worst = f64::INFINITY;
    for pair in diags.windows(2) {
        let (now, next) = (&pair[0], &pair[1]);
        let g = now.gamma;
        let factor = (l1 * g).exp() * g * g;
        let rhs = potential(now) + constants.c1 * factor * now.mean_client_grad_norm
            - g * now.grad_norm
            + constants.c0 * factor;
        worst = worst.min(rhs - potential(next));
    }
    CheckResult::from_margin(
        "potential-descent",
        worst,
        format!("{} round pairs", diags.len().saturating_sub(1)),
    )
}

/// Contractivity of the configured compressor at the problem dimension:
/// exact per-draw inequality for the deterministic operators, an empirical
/// 1e4-draw mean within (1 + 3/√1e4) for rand-k.
pub fn contractivity_check(
    kind: &CompressorKind,
    d: usize,
    rng: &mut RngStream,
) -> Result<CheckResult> {
    let alpha = alpha_of(kind, d);
    match kind {
        CompressorKind::RandK { .. } => {
            let n_draws = 10_000;
            let slack = 1.0 + 3.0 / (n_draws as f64).sqrt();
            let mut worst = f64::INFINITY;
            for _ in 0..20 {
                let v = sample_gaussian(rng, d, 0.0, 1.0)?;
                let mut acc = 0.0;
                for _ in 0..n_draws {
                    acc += compress(kind, &v, rng)?.sub(&v).norm2_sq();
                }
                let mean = acc / n_draws as f64;
                worst = worst.min((1.0 - alpha) * v.norm2_sq() * slack - mean);
            }
            Ok(CheckResult::from_margin(
                "compressor-contractivity",
                worst,
                format!("rand-k empirical, 20 vectors x {n_draws} draws"),
            ))
        }
        _ => {
            let mut worst = f64::INFINITY;
            for _ in 0..1000 {
                let v = sample_gaussian(rng, d, 0.0, 1.0)?;
                let err = compress(kind, &v, rng)?.sub(&v).norm2_sq();
                worst = worst.min((1.0 - alpha) * v.norm2_sq() - err);
            }
            Ok(CheckResult::from_margin(
                "compressor-contractivity",
                worst,
                "deterministic, 1000 vectors".into(),
            ))
        }
    }
}

/// Runs the whole suite for a config: the configured run supplies the
/// iterates for the pointwise and per-round checks.
pub fn check_suite(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let prep = prepare(cfg)?;
    check_suite_prepared(&prep, cfg.run.k_iters)
}

/// Suite body over an already-prepared experiment.
pub fn check_suite_prepared(prep: &PreparedExperiment, k_horizon: usize) -> Result<CheckReport> {
    let l0 = prep.constants.l0;
    let l1 = prep.constants.l1;
    let problem = &prep.problem;
    let mut rng = seeded_rng(prep.cfg.run.seed).child(&[TAG_CHECKS]);

    let (_, diags) = prep.execute_with_diagnostics(k_horizon, None)?;
    let algo = prep.algo_config(k_horizon)?;

    let mut checks = Vec::new();

    // Sampling centers: around the origin and around the x0 region.
    let (x0_mean, x0_std) = prep.cfg.x0_distribution();
    let centers = [(0.0, 2.0), (x0_mean, x0_std.max(0.5))];
    checks.push(empirical_smoothness_check(
        problem, l0, l1, 1000, &centers, &mut rng,
    )?);

    // Pointwise gradient-growth check at run iterates plus fresh samples.
    let mut points: Vec<DenseVector> = diags.iter().map(|d| d.x_k.clone()).collect();
    for i in 0..200 {
        let (center, spread) = centers[i % centers.len()];
        points.push(sample_gaussian(&mut rng, problem.dim(), center, spread)?);
    }
    checks.push(gradient_growth_check(problem, l0, l1, &points)?);

    let delta_inf = problem.delta_inf().unwrap_or(0.0);
    checks.push(mean_grad_bound_check(&diags, l0, l1, delta_inf));

    checks.push(contractivity_check(
        &prep.cfg.compressor(),
        problem.dim(),
        &mut rng,
    )?);

    // Descent diagnostics only make sense for normalized deterministic runs
    // with a known f^inf.
    let normalized_det = algo.variant.normalized() && !algo.variant.stochastic();
    match (normalized_det, problem.f_inf()) {
        (true, Some(f_inf)) => {
            checks.push(descent_check(&diags, l0, l1));
            let constants = TheoryConstants::new(l0, l1, prep.alpha)?;
            checks.push(potential_descent_check(
                &diags, &constants, l1, prep.alpha, f_inf,
            ));
        }
        (false, _) => {
            checks.push(CheckResult::skipped(
                "descent-inequality",
                "non-normalized or stochastic variant",
            ));
            checks.push(CheckResult::skipped(
                "potential-descent",
                "non-normalized or stochastic variant",
            ));
        }
        (true, None) => {
            checks.push(descent_check(&diags, l0, l1));
            checks.push(CheckResult::skipped(
                "potential-descent",
                "f^inf unknown for this objective",
            ));
        }
    }

    Ok(CheckReport { checks })
}
