//! Horizon grid search: the smallest K on the grid {step, 2·step, …, K_max}
//! whose run reaches min_{k=0..K} ‖∇f(x^k)‖² < ε. The stepsize rule is
//! re-resolved for every candidate (horizon-dependent rules change γ with K),
//! while the problem instance and initial point stay fixed.

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::runner::prepare;

/// First-hit grid search over the horizon. Candidates are evaluated in
/// increasing order; the search stops at the first success and therefore
/// never returns a larger K than a passing one.
pub fn grid_search_k(
    cfg: &ExperimentConfig,
    epsilon: f64,
    step: usize,
    k_max: usize,
) -> Result<usize> {
    if step == 0 {
        return Err(Error::param("grid step must be >= 1"));
    }
    if k_max < step {
        return Err(Error::param("k_max must be >= step"));
    }
    let prep = prepare(cfg)?;
    let mut best = f64::INFINITY;
    let mut k = step;
    while k <= k_max {
        let record = prep.execute(k, None)?;
        let achieved = record.min_grad_norm_sq_through(k);
        if achieved < epsilon {
            return Ok(k);
        }
        best = best.min(achieved);
        k += step;
    }
    Err(Error::GridExhausted { k_max, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_cfg() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
[problem]
kind = "polynomial"
d = 4
l0 = 4.0
l1 = 1.0

[algorithm]
variant = "norm-ef21"
compressor = "top-k"
k = 1
rule = "normalized-sqrt-k"
gamma0 = 1.0

[run]
k_iters = 0
seed = 0
"#,
        )
        .unwrap()
    }

    #[test]
    fn infinite_target_returns_first_candidate() {
        let k = grid_search_k(&poly_cfg(), f64::INFINITY, 500, 4000).unwrap();
        assert_eq!(k, 500);
    }

    #[test]
    fn first_hit_semantics() {
        // A target loose enough to pass at the first candidate must return it
        // (a later candidate would also pass, but is never reached).
        let k = grid_search_k(&poly_cfg(), 1e6, 250, 2000).unwrap();
        assert_eq!(k, 250);
    }

    #[test]
    fn exhaustion_reports_best_value() {
        let err = grid_search_k(&poly_cfg(), 1e-300, 50, 100).unwrap_err();
        match err {
            Error::GridExhausted { k_max, best } => {
                assert_eq!(k_max, 100);
                assert!(best.is_finite());
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rejects_bad_grid_parameters() {
        assert!(grid_search_k(&poly_cfg(), 1e-4, 0, 100).is_err());
        assert!(grid_search_k(&poly_cfg(), 1e-4, 200, 100).is_err());
    }
}
