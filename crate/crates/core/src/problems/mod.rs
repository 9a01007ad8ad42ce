//! Testbed objectives: the quartic polynomial and regularized logistic
//! regression, behind one [`Problem`] dispatch used by the algorithms and
//! the harness.

pub mod dataset;
pub mod logistic;
pub mod polynomial;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::DenseVector;

pub use dataset::{
    generate_synthetic, parse_libsvm, scale_features, serialize_libsvm, shard_ranges, Dataset,
    LabelMap,
};
pub use logistic::{logistic_constants, LogisticProblem};
pub use polynomial::{poly_constants, poly_grad, poly_l_from_d, poly_value, PolynomialProblem};

/// Smoothness constants of an objective. `l` (classical smoothness of f) may
/// be unknown until a box radius is fixed (polynomial case); `l_hat` holds
/// per-client classical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessConstants {
    pub l: Option<f64>,
    pub l_hat: Vec<f64>,
    pub l0: f64,
    pub l1: f64,
    /// Box radius D backing `l`, when applicable.
    pub box_radius: Option<f64>,
}

impl SmoothnessConstants {
    /// L̃ = sqrt(mean of per-client L̂_i²).
    pub fn l_tilde(&self) -> Option<f64> {
        if self.l_hat.is_empty() {
            return None;
        }
        let mean_sq = self.l_hat.iter().map(|l| l * l).sum::<f64>() / self.l_hat.len() as f64;
        Some(mean_sq.sqrt())
    }
}

/// An evaluable distributed objective f(x) = (1/n) Σ f_i(x).
#[derive(Debug, Clone)]
pub enum Problem {
    Polynomial(PolynomialProblem),
    Logistic(LogisticProblem),
}

impl Problem {
    pub fn dim(&self) -> usize {
        match self {
            Problem::Polynomial(p) => p.d,
            Problem::Logistic(p) => p.d,
        }
    }

    pub fn n_clients(&self) -> usize {
        match self {
            Problem::Polynomial(_) => 1,
            Problem::Logistic(p) => p.n_clients(),
        }
    }

    pub fn client_value(&self, client: usize, x: &DenseVector) -> Result<f64> {
        match self {
            Problem::Polynomial(p) => {
                check_client(client, 1)?;
                poly_value(p, x)
            }
            Problem::Logistic(p) => p.client_value(client, x),
        }
    }

    pub fn client_grad(&self, client: usize, x: &DenseVector) -> Result<DenseVector> {
        match self {
            Problem::Polynomial(p) => {
                check_client(client, 1)?;
                poly_grad(p, x)
            }
            Problem::Logistic(p) => p.client_grad(client, x),
        }
    }

    /// Global objective value, the mean of client values in client order.
    pub fn value(&self, x: &DenseVector) -> Result<f64> {
        match self {
            Problem::Polynomial(p) => poly_value(p, x),
            Problem::Logistic(_) => {
                let n = self.n_clients();
                let mut acc = 0.0;
                for c in 0..n {
                    acc += self.client_value(c, x)?;
                }
                Ok(acc / n as f64)
            }
        }
    }

    /// Global gradient, reduced over clients in fixed order.
    pub fn grad(&self, x: &DenseVector) -> Result<DenseVector> {
        match self {
            Problem::Polynomial(p) => poly_grad(p, x),
            Problem::Logistic(_) => {
                let grads: Vec<DenseVector> = (0..self.n_clients())
                    .map(|c| self.client_grad(c, x))
                    .collect::<Result<_>>()?;
                DenseVector::mean_of(&grads)
            }
        }
    }

    /// Unbiased stochastic gradient for one client. Logistic: a uniform
    /// without-replacement batch from the client's shard (`batch = None` is
    /// the full shard). Polynomial: the exact gradient plus N(0, σ²/d) noise
    /// per coordinate. Degenerate cases (full batch, σ = 0) reuse the exact
    /// path and consume no randomness.
    pub fn stochastic_grad(
        &self,
        client: usize,
        x: &DenseVector,
        batch: Option<usize>,
        noise_sigma: f64,
        rng: &mut RngStream,
    ) -> Result<DenseVector> {
        match self {
            Problem::Polynomial(p) => {
                check_client(client, 1)?;
                let exact = poly_grad(p, x)?;
                if noise_sigma == 0.0 {
                    return Ok(exact);
                }
                let std = noise_sigma / (p.d as f64).sqrt();
                let noisy: Vec<f64> = exact
                    .as_slice()
                    .iter()
                    .map(|g| g + rng.gaussian(0.0, std))
                    .collect();
                DenseVector::from_vec(noisy)
            }
            Problem::Logistic(p) => {
                let b = match batch {
                    Some(b) => b,
                    None => p.shard_len(client)?,
                };
                p.stochastic_client_grad(client, x, b, rng)
            }
        }
    }

    /// Infimum of f, when known (polynomial: 0).
    pub fn f_inf(&self) -> Option<f64> {
        match self {
            Problem::Polynomial(_) => Some(0.0),
            Problem::Logistic(_) => None,
        }
    }

    /// Infimum of f_i, when known (polynomial: 0).
    pub fn client_f_inf(&self, _client: usize) -> Option<f64> {
        match self {
            Problem::Polynomial(_) => Some(0.0),
            Problem::Logistic(_) => None,
        }
    }

    /// Mean over clients of f^inf − f_i^inf, when every infimum is known.
    pub fn delta_inf(&self) -> Option<f64> {
        let f_inf = self.f_inf()?;
        let n = self.n_clients();
        let mut acc = 0.0;
        for c in 0..n {
            acc += f_inf - self.client_f_inf(c)?;
        }
        Some(acc / n as f64)
    }
}

fn check_client(client: usize, n: usize) -> Result<()> {
    if client >= n {
        return Err(Error::param(format!("unknown client id {client}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_gaussian, seeded_rng};

    fn poly_problem() -> Problem {
        let (lambda, coeffs, _) = poly_constants(4, 1.0, 4.0).unwrap();
        Problem::Polynomial(PolynomialProblem::new(4, lambda, coeffs).unwrap())
    }

    #[test]
    fn poly_sigma_zero_is_exact_bitwise() {
        let p = poly_problem();
        let mut rng = seeded_rng(2);
        let x = sample_gaussian(&mut rng, 4, 20.0, 1.0).unwrap();
        let mut srng = seeded_rng(3);
        let s = p.stochastic_grad(0, &x, None, 0.0, &mut srng).unwrap();
        let g = p.client_grad(0, &x).unwrap();
        assert_eq!(s, g);
        // No draws were consumed.
        assert_eq!(srng.next_u64(), seeded_rng(3).next_u64());
    }

    #[test]
    fn poly_noise_mean_matches_clt_bound() {
        let p = poly_problem();
        let mut rng = seeded_rng(8);
        let x = sample_gaussian(&mut rng, 4, 0.0, 1.0).unwrap();
        let exact = p.client_grad(0, &x).unwrap();
        let sigma = 0.5;
        let n_draws = 10_000usize;
        let mut acc = [0.0; 4];
        for _ in 0..n_draws {
            let s = p.stochastic_grad(0, &x, None, sigma, &mut rng).unwrap();
            for (a, v) in acc.iter_mut().zip(s.as_slice()) {
                *a += v;
            }
        }
        // Per-coordinate tolerance 4σ/√(n_draws·d)·√d = 4σ/√n_draws.
        let tol = 4.0 * sigma / (n_draws as f64).sqrt();
        for (a, e) in acc.iter().zip(exact.as_slice()) {
            assert!((a / n_draws as f64 - e).abs() < tol);
        }
    }

    #[test]
    fn unknown_client_rejected() {
        let p = poly_problem();
        let x = crate::vector::DenseVector::zeros(4);
        assert!(p.client_grad(1, &x).is_err());
    }

    #[test]
    fn l_tilde_is_quadratic_mean() {
        let c = SmoothnessConstants {
            l: None,
            l_hat: vec![3.0, 4.0],
            l0: 1.0,
            l1: 1.0,
            box_radius: None,
        };
        assert!((c.l_tilde().unwrap() - (12.5f64).sqrt()).abs() < 1e-15);
    }
}
