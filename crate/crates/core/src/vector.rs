//! Dense 64-bit vectors used for iterates, gradients and messages.
//!
//! Values are immutable once a vector is returned from a public operation,
//! so vectors can be shared freely across threads.

use crate::error::{Error, Result};

/// A d-dimensional vector of 64-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    /// Wraps an owned buffer. Rejects empty or non-finite input.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("vector dimension must be >= 1"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("vector construction".into()));
        }
        Ok(DenseVector { values })
    }

    /// The zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        DenseVector {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Euclidean norm sqrt(sum v_j^2).
    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Squared Euclidean norm.
    pub fn norm2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, rhs: &DenseVector) -> f64 {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.values
            .iter()
            .zip(&rhs.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn add(&self, rhs: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        DenseVector {
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        DenseVector {
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> DenseVector {
        DenseVector {
            values: self.values.iter().map(|a| a * s).collect(),
        }
    }

    /// self + s * rhs.
    pub fn add_scaled(&self, s: f64, rhs: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.dim(), rhs.dim());
        DenseVector {
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    /// Mean of a nonempty set of equal-dimension vectors, reduced in slice
    /// order so distributed aggregates are reproducible.
    pub fn mean_of(vectors: &[DenseVector]) -> Result<DenseVector> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::param("mean of empty vector set"))?;
        let dim = first.dim();
        let mut acc = vec![0.0; dim];
        for v in vectors {
            if v.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
            for (a, b) in acc.iter_mut().zip(&v.values) {
                *a += b;
            }
        }
        let inv = 1.0 / vectors.len() as f64;
        Ok(DenseVector {
            values: acc.into_iter().map(|a| a * inv).collect(),
        })
    }

    /// Distance ‖self − rhs‖.
    pub fn dist(&self, rhs: &DenseVector) -> f64 {
        self.sub(rhs).norm2()
    }
}

/// Euclidean norm of `v` (free-function form).
pub fn norm2(v: &DenseVector) -> f64 {
    v.norm2()
}
