//! Sparse datasets in LIBSVM text format: parsing, serialization, feature
//! scaling, synthetic generation and sharding.
//!
//! Format: one record per line, `<label> <idx>:<val> <idx>:<val> ...` with
//! 1-based strictly increasing indices. Empty lines are skipped. The same
//! format doubles as the on-disk dataset cache.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Maps raw file labels onto {-1, +1} (e.g. {2 → -1, 4 → +1} for the
/// breast-cancer data). An empty map requires labels to already be ±1.
#[derive(Debug, Clone, Default)]
pub struct LabelMap(pub Vec<(f64, f64)>);

impl LabelMap {
    fn apply(&self, raw: f64) -> Option<f64> {
        for &(from, to) in &self.0 {
            if raw == from {
                return Some(to);
            }
        }
        if raw == 1.0 || raw == -1.0 {
            Some(raw)
        } else {
            None
        }
    }
}

/// Sparse feature records with class labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Per-row (index, value) pairs, indices 1-based and strictly increasing.
    pub rows: Vec<Vec<(u32, f64)>>,
    /// Per-row labels, each -1.0 or +1.0.
    pub labels: Vec<f64>,
    /// Dense feature dimension.
    pub dim: usize,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Row as a dense vector of length `dim` (absent indices are 0).
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(idx, val) in &self.rows[i] {
            out[idx as usize - 1] = val;
        }
        out
    }
}

/// Parses LIBSVM text. `dim_override`, when given, must be at least the
/// largest index seen; otherwise the dimension is the largest index.
pub fn parse_libsvm(text: &str, map: &LabelMap, dim_override: Option<usize>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index: usize = 0;

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue; // empty line
        };
        let raw_label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("nonnumeric label `{label_tok}`"),
        })?;
        let label = map.apply(raw_label).ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("unmappable label `{label_tok}` (expected -1/+1 or a mapped value)"),
        })?;

        let mut row: Vec<(u32, f64)> = Vec::new();
        let mut prev_index: u32 = 0;
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("malformed token `{tok}` (expected idx:val)"),
            })?;
            let idx: u32 = idx_s.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad feature index `{idx_s}`"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("nonnumeric value `{val_s}`"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "feature indices are 1-based".into(),
                });
            }
            if idx == prev_index {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("duplicate index {idx} within a line"),
                });
            }
            if idx < prev_index {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("indices not strictly increasing at {idx}"),
                });
            }
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value `{val_s}`"),
                });
            }
            prev_index = idx;
            max_index = max_index.max(idx as usize);
            row.push((idx, val));
        }
        rows.push(row);
        labels.push(label);
    }

    let dim = match dim_override {
        Some(d) if d < max_index => {
            return Err(Error::param(format!(
                "dimension override {d} below largest feature index {max_index}"
            )));
        }
        Some(d) => d,
        None => max_index,
    };

    Ok(Dataset { rows, labels, dim })
}

/// Serializes back to LIBSVM text (shortest round-trip float formatting).
pub fn serialize_libsvm(ds: &Dataset) -> String {
    let mut out = String::new();
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        out.push_str(&format!("{label}"));
        for &(idx, val) in row {
            out.push_str(&format!(" {idx}:{val}"));
        }
        out.push('\n');
    }
    out
}

/// Per-column affine map sending [min, max] → [-1, 1]; constant columns map
/// to 0. Implicit zeros participate in the column ranges, so scaled rows are
/// emitted densely.
pub fn scale_features(ds: &Dataset) -> Result<Dataset> {
    if ds.rows.is_empty() {
        return Err(Error::param("scale_features: empty dataset"));
    }
    let d = ds.dim;
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for i in 0..ds.n_rows() {
        for (j, v) in ds.dense_row(i).into_iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    let rows = (0..ds.n_rows())
        .map(|i| {
            ds.dense_row(i)
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    let scaled = if max[j] == min[j] {
                        0.0
                    } else {
                        2.0 * (v - min[j]) / (max[j] - min[j]) - 1.0
                    };
                    (j as u32 + 1, scaled)
                })
                .collect()
        })
        .collect();
    Ok(Dataset {
        rows,
        labels: ds.labels.clone(),
        dim: d,
    })
}

/// Synthetic dataset: n×d i.i.d. standard normal features, labels uniform on
/// {-1, +1}. Draw order per row: d feature gaussians, then one label uniform.
pub fn generate_synthetic(n: usize, d: usize, rng: &mut RngStream) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::param("generate_synthetic: n and d must be >= 1"));
    }
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row = (0..d)
            .map(|j| (j as u32 + 1, rng.gaussian(0.0, 1.0)))
            .collect();
        rows.push(row);
        labels.push(if rng.uniform() < 0.5 { -1.0 } else { 1.0 });
    }
    Ok(Dataset {
        rows,
        labels,
        dim: d,
    })
}

/// Contiguous near-equal partition of 0..n into `n_clients` shards (sizes
/// differ by at most one; the first n % n_clients shards get the extra row).
pub fn shard_ranges(n: usize, n_clients: usize) -> Result<Vec<std::ops::Range<usize>>> {
    if n_clients == 0 {
        return Err(Error::param("shard: n_clients must be >= 1"));
    }
    if n_clients > n {
        return Err(Error::param(format!(
            "shard: n_clients = {n_clients} exceeds n = {n} rows"
        )));
    }
    let base = n / n_clients;
    let rem = n % n_clients;
    let mut out = Vec::with_capacity(n_clients);
    let mut start = 0;
    for c in 0..n_clients {
        let len = base + usize::from(c < rem);
        out.push(start..start + len);
        start += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn parses_basic_line() {
        let ds = parse_libsvm("+1 1:0.5 3:-1.2", &LabelMap::default(), None).unwrap();
        assert_eq!(ds.labels, vec![1.0]);
        assert_eq!(ds.rows[0], vec![(1, 0.5), (3, -1.2)]);
        assert!(ds.dim >= 3);
    }

    #[test]
    fn skips_empty_lines() {
        let ds = parse_libsvm("+1 1:1\n\n-1 1:2\n", &LabelMap::default(), None).unwrap();
        assert_eq!(ds.n_rows(), 2);
    }

    #[test]
    fn applies_label_map() {
        let map = LabelMap(vec![(2.0, -1.0)]);
        let ds = parse_libsvm("2 1:1.0", &map, None).unwrap();
        assert_eq!(ds.labels, vec![-1.0]);
    }

    #[test]
    fn reports_line_numbers_on_errors() {
        let err = parse_libsvm("+1 1:1\n-1 2:x", &LabelMap::default(), None).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");

        let err = parse_libsvm("+1 1:1 1:2", &LabelMap::default(), None).unwrap_err();
        assert!(err.to_string().contains("duplicate index"), "{err}");

        let err = parse_libsvm("+1 3:1 1:2", &LabelMap::default(), None).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");

        let err = parse_libsvm("5 1:1", &LabelMap::default(), None).unwrap_err();
        assert!(err.to_string().contains("unmappable"), "{err}");

        let err = parse_libsvm("+1 oops", &LabelMap::default(), None).unwrap_err();
        assert!(err.to_string().contains("malformed token"), "{err}");
    }

    #[test]
    fn round_trip_preserves_numeric_content() {
        let mut rng = seeded_rng(21);
        let ds = generate_synthetic(12, 5, &mut rng).unwrap();
        let text = serialize_libsvm(&ds);
        let back = parse_libsvm(&text, &LabelMap::default(), Some(ds.dim)).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn scaling_maps_ranges() {
        // Column values {0, 5, 10} → {-1, 0, 1}; constant column → 0.
        let text = "+1 1:0 2:3\n-1 1:5 2:3\n+1 1:10 2:3";
        let ds = parse_libsvm(text, &LabelMap::default(), None).unwrap();
        let scaled = scale_features(&ds).unwrap();
        let col0: Vec<f64> = (0..3).map(|i| scaled.dense_row(i)[0]).collect();
        assert_eq!(col0, vec![-1.0, 0.0, 1.0]);
        let col1: Vec<f64> = (0..3).map(|i| scaled.dense_row(i)[1]).collect();
        assert_eq!(col1, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn scaling_preserves_in_range_endpoints() {
        let text = "+1 1:-1\n-1 1:1\n+1 1:0.25";
        let ds = parse_libsvm(text, &LabelMap::default(), None).unwrap();
        let scaled = scale_features(&ds).unwrap();
        assert_eq!(scaled.dense_row(0)[0], -1.0);
        assert_eq!(scaled.dense_row(1)[0], 1.0);
        assert_eq!(scaled.dense_row(2)[0], 0.25);
    }

    #[test]
    fn synthetic_shape_and_determinism() {
        let mut a = seeded_rng(77);
        let ds = generate_synthetic(20, 10, &mut a).unwrap();
        assert_eq!(ds.n_rows(), 20);
        assert_eq!(ds.dim, 10);
        assert!(ds.rows.iter().all(|r| r.len() == 10));

        let mut b = seeded_rng(77);
        let ds2 = generate_synthetic(20, 10, &mut b).unwrap();
        assert_eq!(ds, ds2);
    }

    #[test]
    fn synthetic_label_mean_near_zero() {
        let mut rng = seeded_rng(5);
        let ds = generate_synthetic(100_000, 1, &mut rng).unwrap();
        let mean = ds.labels.iter().sum::<f64>() / ds.labels.len() as f64;
        assert!(mean.abs() < 0.02, "label mean = {mean}");
    }

    #[test]
    fn shard_sizes() {
        let even = shard_ranges(10, 5).unwrap();
        assert!(even.iter().all(|r| r.len() == 2));

        let uneven = shard_ranges(7, 3).unwrap();
        let sizes: Vec<usize> = uneven.iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
        assert_eq!(uneven.last().unwrap().end, 7);

        let single = shard_ranges(4, 1).unwrap();
        assert_eq!(single, vec![0..4]);

        assert!(shard_ranges(3, 4).is_err());
    }
}
