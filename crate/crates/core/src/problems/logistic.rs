//! Logistic regression with a nonconvex saturating regularizer, sharded
//! across clients:
//!
//!   f_i(x) = mean over client i's rows of log(1 + exp(-b a·x))
//!            + λ Σ_j x_j²/(1+x_j²),
//!   f(x)   = (1/n) Σ_i f_i(x).
//!
//! With the default one-row-per-client sharding this is the plain averaged
//! logistic loss. Losses use the log1p form and the sigmoid factor is clamped
//! for |margin| > 35 so no intermediate overflows.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

use super::dataset::{shard_ranges, Dataset};
use super::SmoothnessConstants;

/// Sharded logistic problem over a dense copy of the dataset.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    /// Dense feature rows (n_rows × d).
    rows: Vec<Vec<f64>>,
    labels: Vec<f64>,
    pub d: usize,
    pub lambda: f64,
    shards: Vec<std::ops::Range<usize>>,
}

const MARGIN_CLAMP: f64 = 35.0;

/// log(1 + exp(t)) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// exp(-m)/(1+exp(-m)) = 1/(1+exp(m)), clamped for |m| > 35.
fn sigmoid_factor(m: f64) -> f64 {
    if m >= MARGIN_CLAMP {
        (-m).exp()
    } else if m <= -MARGIN_CLAMP {
        1.0
    } else {
        1.0 / (1.0 + m.exp())
    }
}

/// Regularizer gradient entry: 2λ·x/(1+x²)².
fn reg_grad_entry(lambda: f64, x: f64) -> f64 {
    let denom = 1.0 + x * x;
    2.0 * lambda * x / (denom * denom)
}

impl LogisticProblem {
    /// Builds from a dataset; rows are assigned to clients contiguously in
    /// near-equal shards. `n_clients = n_rows` gives one row per client.
    pub fn from_dataset(ds: &Dataset, lambda: f64, n_clients: usize) -> Result<Self> {
        if ds.rows.is_empty() {
            return Err(Error::param("logistic: empty dataset"));
        }
        if lambda <= 0.0 {
            return Err(Error::param("logistic: lambda must be > 0"));
        }
        for label in &ds.labels {
            if *label != 1.0 && *label != -1.0 {
                return Err(Error::param("logistic: labels must be -1 or +1"));
            }
        }
        let shards = shard_ranges(ds.n_rows(), n_clients)?;
        let rows = (0..ds.n_rows()).map(|i| ds.dense_row(i)).collect();
        Ok(LogisticProblem {
            rows,
            labels: ds.labels.clone(),
            d: ds.dim,
            lambda,
            shards,
        })
    }

    pub fn n_clients(&self) -> usize {
        self.shards.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn shard_len(&self, client: usize) -> Result<usize> {
        self.shard(client).map(|r| r.len())
    }

    fn shard(&self, client: usize) -> Result<std::ops::Range<usize>> {
        self.shards
            .get(client)
            .cloned()
            .ok_or_else(|| Error::param(format!("unknown client id {client}")))
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

    fn margin(&self, row: usize, x: &DenseVector) -> f64 {
        let xs = x.as_slice();
        let dot: f64 = self.rows[row].iter().zip(xs).map(|(a, x)| a * x).sum();
        self.labels[row] * dot
    }

    fn regularizer(&self, x: &DenseVector) -> f64 {
        self.lambda
            * x.as_slice()
                .iter()
                .map(|xi| xi * xi / (1.0 + xi * xi))
                .sum::<f64>()
    }

    /// Mean loss over the given rows (in the given order) plus regularizer.
    fn value_over_rows(&self, rows: &[usize], x: &DenseVector) -> f64 {
        let mean = rows
            .iter()
            .map(|&r| softplus(-self.margin(r, x)))
            .sum::<f64>()
            / rows.len() as f64;
        mean + self.regularizer(x)
    }

    /// Mean of per-row gradients over the given rows plus regularizer
    /// gradient. Summation order follows `rows`.
    fn grad_over_rows(&self, rows: &[usize], x: &DenseVector) -> DenseVector {
        let mut acc = vec![0.0; self.d];
        for &r in rows {
            let s = sigmoid_factor(self.margin(r, x));
            let coef = -s * self.labels[r];
            for (a, v) in acc.iter_mut().zip(&self.rows[r]) {
                *a += coef * v;
            }
        }
        let inv = 1.0 / rows.len() as f64;
        let values = acc
            .into_iter()
            .zip(x.as_slice())
            .map(|(a, xi)| a * inv + reg_grad_entry(self.lambda, *xi))
            .collect();
        DenseVector::from_vec(values).expect("finite gradient")
    }

    pub fn client_value(&self, client: usize, x: &DenseVector) -> Result<f64> {
        self.check_dim(x)?;
        let rows: Vec<usize> = self.shard(client)?.collect();
        Ok(self.value_over_rows(&rows, x))
    }

    pub fn client_grad(&self, client: usize, x: &DenseVector) -> Result<DenseVector> {
        self.check_dim(x)?;
        let rows: Vec<usize> = self.shard(client)?.collect();
        Ok(self.grad_over_rows(&rows, x))
    }

    /// Mean of per-row gradients over a uniform without-replacement batch
    /// from the client's shard (plus regularizer gradient). A full batch is
    /// the deterministic client gradient and consumes no randomness.
    pub fn stochastic_client_grad(
        &self,
        client: usize,
        x: &DenseVector,
        batch: usize,
        rng: &mut crate::rng::RngStream,
    ) -> Result<DenseVector> {
        self.check_dim(x)?;
        let shard = self.shard(client)?;
        if batch == 0 {
            return Err(Error::param("batch must be >= 1"));
        }
        if batch > shard.len() {
            return Err(Error::param(format!(
                "batch {batch} exceeds shard size {} of client {client}",
                shard.len()
            )));
        }
        if batch == shard.len() {
            let rows: Vec<usize> = shard.collect();
            return Ok(self.grad_over_rows(&rows, x));
        }
        let base = shard.start;
        let mut picked = rng.sample_without_replacement(shard.len(), batch);
        picked.sort_unstable(); // canonical summation order
        let rows: Vec<usize> = picked.into_iter().map(|i| base + i).collect();
        Ok(self.grad_over_rows(&rows, x))
    }
}

/// Smoothness constants from the raw formulas; exposed separately from the
/// constructor so boundary cases (λ = 0) stay testable.
pub fn logistic_constants_from_parts(
    rows: &[Vec<f64>],
    shards: &[std::ops::Range<usize>],
    lambda: f64,
    d: usize,
) -> SmoothnessConstants {
    let row_norms: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let max_row_norm = row_norms.iter().cloned().fold(0.0, f64::max);
    let l_hat: Vec<f64> = shards
        .iter()
        .map(|s| {
            let mean_sq =
                s.clone().map(|r| row_norms[r] * row_norms[r]).sum::<f64>() / s.len() as f64;
            mean_sq / 4.0 + 2.0 * lambda
        })
        .collect();
    let spectral = spectral_norm(rows, d);
    SmoothnessConstants {
        l: Some(spectral * spectral / (4.0 * rows.len() as f64) + 2.0 * lambda),
        l_hat,
        l0: 2.0 * lambda + lambda * (d as f64).sqrt() * max_row_norm,
        l1: max_row_norm,
        box_radius: None,
    }
}

/// Smoothness constants of the problem:
/// L = ‖A‖²/(4n) + 2λ, L̂_i = mean‖a_r‖²/4 + 2λ over client i's rows,
/// L0 = 2λ + λ√d·max_r‖a_r‖, L1 = max_r‖a_r‖.
pub fn logistic_constants(p: &LogisticProblem) -> SmoothnessConstants {
    logistic_constants_from_parts(&p.rows, &p.shards, p.lambda, p.d)
}

/// Spectral norm of the row matrix via deterministic power iteration on AᵀA.
fn spectral_norm(rows: &[Vec<f64>], d: usize) -> f64 {
    if rows.is_empty() || d == 0 {
        return 0.0;
    }
    // Gram matrix G = AᵀA (d×d, d stays desk-scale here).
    let mut gram = vec![0.0; d * d];
    for row in rows {
        for i in 0..d {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                gram[i * d + j] += row[i] * row[j];
            }
        }
    }
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda_prev = 0.0;
    for _ in 0..10_000 {
        let mut w = vec![0.0; d];
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += gram[i * d + j] * v[j];
            }
            w[i] = acc;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        let lambda = {
            let mut acc = 0.0;
            for i in 0..d {
                let mut gi = 0.0;
                for j in 0..d {
                    gi += gram[i * d + j] * w[j];
                }
                acc += w[i] * gi;
            }
            acc
        };
        v = w;
        if (lambda - lambda_prev).abs() <= 1e-13 * lambda.abs().max(1.0) {
            return lambda.max(0.0).sqrt();
        }
        lambda_prev = lambda;
    }
    lambda_prev.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::dataset::{generate_synthetic, parse_libsvm, LabelMap};
    use crate::rng::{sample_gaussian, seeded_rng};

    fn one_row_problem(a: &[f64], b: f64, lambda: f64) -> LogisticProblem {
        let rows = vec![a
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32 + 1, *v))
            .collect()];
        let ds = Dataset {
            rows,
            labels: vec![b],
            dim: a.len(),
        };
        LogisticProblem::from_dataset(&ds, lambda, 1).unwrap()
    }

    fn synthetic_problem(n: usize, d: usize, n_clients: usize, seed: u64) -> LogisticProblem {
        let mut rng = seeded_rng(seed);
        let ds = generate_synthetic(n, d, &mut rng).unwrap();
        LogisticProblem::from_dataset(&ds, 0.1, n_clients).unwrap()
    }

    #[test]
    fn value_at_origin_is_log_two() {
        let p = synthetic_problem(20, 10, 20, 1);
        let f = p.client_value(0, &DenseVector::zeros(10)).unwrap();
        assert!((f - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn value_single_row_example() {
        // a=[1,0], b=1, λ=0.1, x=[10,0]: log(1+e^-10) + 0.1·(100/101).
        let p = one_row_problem(&[1.0, 0.0], 1.0, 0.1);
        let x = DenseVector::from_vec(vec![10.0, 0.0]).unwrap();
        let f = p.client_value(0, &x).unwrap();
        let expected = (-10.0f64).exp().ln_1p() + 0.1 * (100.0 / 101.0);
        assert!((f - expected).abs() < 1e-15);
        assert!((f - 0.09905529988931588).abs() < 1e-15);
    }

    #[test]
    fn value_nonnegative() {
        let p = synthetic_problem(20, 10, 4, 2);
        let mut rng = seeded_rng(3);
        for _ in 0..200 {
            let x = sample_gaussian(&mut rng, 10, 0.0, 3.0).unwrap();
            for c in 0..4 {
                assert!(p.client_value(c, &x).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn value_stable_at_extreme_margins() {
        let p = one_row_problem(&[1.0], 1.0, 0.1);
        let far = DenseVector::from_vec(vec![-800.0]).unwrap();
        let f = p.client_value(0, &far).unwrap();
        assert!(f.is_finite() && f > 799.0);
        let g = p.client_grad(0, &far).unwrap();
        assert!(g.is_finite());
    }

    #[test]
    fn grad_at_origin_single_row() {
        // sigmoid(0) = 1/2 and zero regularizer gradient.
        let p = one_row_problem(&[2.0, -1.0], 1.0, 0.1);
        let g = p.client_grad(0, &DenseVector::zeros(2)).unwrap();
        assert_eq!(g.as_slice(), &[-1.0, 0.5]);
    }

    #[test]
    fn full_grad_is_mean_of_client_grads() {
        let p = synthetic_problem(21, 6, 4, 9); // uneven shards {6,5,5,5}
        let mut rng = seeded_rng(10);
        let x = sample_gaussian(&mut rng, 6, 0.0, 1.0).unwrap();
        let grads: Vec<DenseVector> = (0..4).map(|c| p.client_grad(c, &x).unwrap()).collect();
        let mean = DenseVector::mean_of(&grads).unwrap();

        // Full objective = mean of client objectives; compare with finite
        // differences of that mean.
        let h = 1e-6;
        for j in 0..6 {
            let mut xp = x.as_slice().to_vec();
            let mut xm = xp.clone();
            xp[j] += h;
            xm[j] -= h;
            let xp = DenseVector::from_vec(xp).unwrap();
            let xm = DenseVector::from_vec(xm).unwrap();
            let fp: f64 = (0..4).map(|c| p.client_value(c, &xp).unwrap()).sum::<f64>() / 4.0;
            let fm: f64 = (0..4).map(|c| p.client_value(c, &xm).unwrap()).sum::<f64>() / 4.0;
            let fd = (fp - fm) / (2.0 * h);
            assert!((mean.as_slice()[j] - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn constants_single_row_example() {
        // a=[1,0], b=1, λ=0.1, d=2: L = 0.45, L1 = 1, L0 = 0.2 + 0.1·√2.
        let p = one_row_problem(&[1.0, 0.0], 1.0, 0.1);
        let c = logistic_constants(&p);
        assert!((c.l.unwrap() - 0.45).abs() < 1e-12);
        assert!((c.l1 - 1.0).abs() < 1e-12);
        assert!((c.l0 - (0.2 + 0.1 * 2.0f64.sqrt())).abs() < 1e-12);
        assert_eq!(c.l_hat.len(), 1);
        assert!((c.l_hat[0] - 0.45).abs() < 1e-12);
    }

    #[test]
    fn constants_scale_homogeneously() {
        let p1 = one_row_problem(&[1.0, 2.0], 1.0, 0.1);
        let p2 = one_row_problem(&[2.0, 4.0], 1.0, 0.1);
        let c1 = logistic_constants(&p1);
        let c2 = logistic_constants(&p2);
        assert!((c2.l1 - 2.0 * c1.l1).abs() < 1e-12);
        let lam = 0.1;
        assert!(((c2.l.unwrap() - 2.0 * lam) - 4.0 * (c1.l.unwrap() - 2.0 * lam)).abs() < 1e-12);
    }

    #[test]
    fn constants_vanish_with_zero_lambda() {
        let rows = [vec![1.0, 0.0]];
        let shards: Vec<std::ops::Range<usize>> = shard_ranges(1, 1).unwrap();
        let c = logistic_constants_from_parts(&rows, &shards, 0.0, 2);
        assert_eq!(c.l0, 0.0);
    }

    #[test]
    fn spectral_norm_known_matrix() {
        // Rows (3,0),(0,4): singular values 4 and 3.
        let rows = vec![vec![3.0, 0.0], vec![0.0, 4.0]];
        assert!((spectral_norm(&rows, 2) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn full_batch_equals_client_grad_bitwise() {
        let p = synthetic_problem(12, 5, 3, 15);
        let mut rng = seeded_rng(77);
        let x = sample_gaussian(&mut rng.clone(), 5, 0.0, 1.0).unwrap();
        for c in 0..3 {
            let full = p.shard_len(c).unwrap();
            let s = p.stochastic_client_grad(c, &x, full, &mut rng).unwrap();
            let g = p.client_grad(c, &x).unwrap();
            assert_eq!(s, g);
        }
    }

    #[test]
    fn batch_larger_than_shard_rejected() {
        let p = synthetic_problem(6, 3, 3, 1);
        let mut rng = seeded_rng(0);
        let x = DenseVector::zeros(3);
        assert!(p.stochastic_client_grad(0, &x, 3, &mut rng).is_err());
        assert!(p.stochastic_client_grad(0, &x, 0, &mut rng).is_err());
        assert!(p.client_grad(5, &x).is_err());
    }

    #[test]
    fn rejects_bad_labels() {
        let ds = parse_libsvm("+1 1:1\n-1 1:2", &LabelMap::default(), None).unwrap();
        let mut bad = ds.clone();
        bad.labels[0] = 3.0;
        assert!(LogisticProblem::from_dataset(&bad, 0.1, 1).is_err());
    }
}
