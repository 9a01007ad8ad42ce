//! Quartic-plus-saturating-regularizer testbed objective
//!
//!   f(x) = Σ_i a_i x_i^4 + λ Σ_i x_i^2 / (1 + x_i^2),
//!
//! a nonnegative nonconvex function with f(0) = 0 (so its infimum is 0). With
//! a_i = λ/24 the Hessian loses positive definiteness at x = (±1, …, ±1).
//! The pair (L0, L1) below makes it generalized smooth for any L1 > 0 via
//! L0 = 9λd²/(2L1²) + 2λ, and on the box max|x_i| ≤ D it is classically
//! L-smooth with L = λ√d·D²/2 + 2λ.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

use super::SmoothnessConstants;

/// Single-node polynomial problem with per-coordinate quartic weights.
#[derive(Debug, Clone)]
pub struct PolynomialProblem {
    pub d: usize,
    pub lambda: f64,
    pub coeffs: Vec<f64>,
}

impl PolynomialProblem {
    pub fn new(d: usize, lambda: f64, coeffs: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("polynomial: d must be >= 1"));
        }
        if lambda <= 0.0 {
            return Err(Error::param("polynomial: lambda must be > 0"));
        }
        if coeffs.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|a| *a <= 0.0) {
            return Err(Error::param("polynomial: coefficients must be > 0"));
        }
        Ok(PolynomialProblem { d, lambda, coeffs })
    }

    fn check_dim(&self, x: &DenseVector) -> Result<()> {
        if x.dim() != self.d {
            return Err(Error::DimMismatch {
                expected: self.d,
                got: x.dim(),
            });
        }
        Ok(())
    }
}

/// Objective value Σ a_i x_i^4 + λ Σ x_i²/(1+x_i²).
pub fn poly_value(p: &PolynomialProblem, x: &DenseVector) -> Result<f64> {
    p.check_dim(x)?;
    let mut quartic = 0.0;
    let mut reg = 0.0;
    for (a, xi) in p.coeffs.iter().zip(x.as_slice()) {
        let sq = xi * xi;
        quartic += a * sq * sq;
        reg += sq / (1.0 + sq);
    }
    Ok(quartic + p.lambda * reg)
}

/// Gradient component j: 4·a_j·x_j³ + 2λ·x_j/(1+x_j²)².
pub fn poly_grad(p: &PolynomialProblem, x: &DenseVector) -> Result<DenseVector> {
    p.check_dim(x)?;
    let values = p
        .coeffs
        .iter()
        .zip(x.as_slice())
        .map(|(a, xi)| {
            let denom = 1.0 + xi * xi;
            4.0 * a * xi * xi * xi + 2.0 * p.lambda * xi / (denom * denom)
        })
        .collect();
    DenseVector::from_vec(values)
}

/// Solves λ from the target generalized-smoothness pair, then sets
/// a_i = λ/24: λ = L0_target / (9d²/(2·L1²) + 2). The classical constant L is
/// left unset until the box radius D is known.
pub fn poly_constants(
    d: usize,
    l1: f64,
    l0_target: f64,
) -> Result<(f64, Vec<f64>, SmoothnessConstants)> {
    if d == 0 {
        return Err(Error::param("poly_constants: d must be >= 1"));
    }
    if l1 <= 0.0 || l0_target <= 0.0 {
        return Err(Error::param("poly_constants: L1 and L0 target must be > 0"));
    }
    let denom = 9.0 * (d * d) as f64 / (2.0 * l1 * l1) + 2.0;
    let lambda = l0_target / denom;
    let coeffs = vec![lambda / 24.0; d];
    let constants = SmoothnessConstants {
        l: None,
        l_hat: Vec::new(),
        l0: l0_target,
        l1,
        box_radius: None,
    };
    Ok((lambda, coeffs, constants))
}

/// Classical smoothness constant on the box max|x_i| ≤ D:
/// L = λ√d·D²/2 + 2λ. D is estimated from the initial point as max|x_i⁰|.
pub fn poly_l_from_d(p: &PolynomialProblem, box_radius: f64) -> Result<f64> {
    if box_radius <= 0.0 {
        return Err(Error::param("poly_l_from_d: D must be > 0"));
    }
    let d = p.d as f64;
    Ok(p.lambda * d.sqrt() * box_radius * box_radius / 2.0 + 2.0 * p.lambda)
}
