//! Experiment configuration: TOML files with `[problem]`, `[algorithm]` and
//! `[run]` sections. Configs serialize losslessly, and the serialized text is
//! echoed into emitted CSVs as `#` comments for provenance.

use serde::{Deserialize, Serialize};

use crate::algorithms::{InitMode, Variant};
use crate::compressors::CompressorKind;
use crate::error::{Error, Result};
use crate::schedules::{RuleKind, StepsizeRule};

/// Where a logistic dataset comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceConfig {
    /// LIBSVM text file on disk.
    Path { path: String },
    /// Synthetic n×d standard-normal features with uniform ±1 labels.
    Synthetic { n: usize, d: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Quartic + saturating regularizer, parameterized by its generalized
    /// smoothness targets.
    Polynomial { d: usize, l0: f64, l1: f64 },
    Logistic {
        source: SourceConfig,
        lambda: f64,
        /// Scale features per-column to [-1, 1].
        #[serde(default)]
        scale: bool,
        /// Raw-label → ±1 pairs, e.g. [[2, -1], [4, 1]].
        #[serde(default)]
        label_map: Vec<(f64, f64)>,
        /// Defaults to one client per row.
        #[serde(default)]
        n_clients: Option<usize>,
        /// Feature dimension override (must cover the largest index).
        #[serde(default)]
        dim_override: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantConfig {
    Ef21,
    NormEf21,
    Ef21Sgdm,
    NormEf21Sgdm,
}

impl From<VariantConfig> for Variant {
    fn from(v: VariantConfig) -> Variant {
        match v {
            VariantConfig::Ef21 => Variant::Ef21,
            VariantConfig::NormEf21 => Variant::NormEf21,
            VariantConfig::Ef21Sgdm => Variant::Ef21Sgdm,
            VariantConfig::NormEf21Sgdm => Variant::NormEf21Sgdm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompressorConfig {
    TopK,
    RandK,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitModeConfig {
    ZeroMemory,
    GradientAtX0,
}

impl From<InitModeConfig> for InitMode {
    fn from(m: InitModeConfig) -> InitMode {
        match m {
            InitModeConfig::ZeroMemory => InitMode::ZeroMemory,
            InitModeConfig::GradientAtX0 => InitMode::GradientAtX0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub variant: VariantConfig,
    pub compressor: CompressorConfig,
    /// Sparsifier budget; required for top-k / rand-k.
    #[serde(default)]
    pub k: Option<usize>,
    /// Bits per transmitted value in payload accounting.
    #[serde(default = "default_value_bits")]
    pub value_bits: u32,
    pub rule: RuleKind,
    #[serde(default)]
    pub gamma0: Option<f64>,
    /// Slack factor for the single-node constant rule (β ≥ 2).
    #[serde(default)]
    pub beta: Option<f64>,
    /// Clamp an over-cap γ0 to the momentum cap instead of rejecting.
    #[serde(default)]
    pub clamp_gamma0: bool,
    #[serde(default)]
    pub init_mode: Option<InitModeConfig>,
    /// Per-client batch size; omitted means the full shard.
    #[serde(default)]
    pub batch: Option<usize>,
    /// Polynomial stochastic-oracle noise scale.
    #[serde(default)]
    pub noise_sigma: f64,
}

fn default_value_bits() -> u32 {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Horizon K: rounds k = 0..=K are executed.
    pub k_iters: usize,
    #[serde(default)]
    pub seed: u64,
    /// CSV output path (optional).
    #[serde(default)]
    pub out: Option<String>,
    /// Target on ‖∇f‖² for grid search and reporting.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Initial-point distribution N(mean, std²); defaults are problem-kind
    /// specific (polynomial: N(20, 1); logistic: N(0, 1)).
    #[serde(default)]
    pub x0_mean: Option<f64>,
    #[serde(default)]
    pub x0_std: Option<f64>,
    #[serde(default)]
    pub parallel_clients: bool,
}

fn default_epsilon() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.problem {
            ProblemConfig::Polynomial { d, l0, l1 } => {
                if *d == 0 {
                    return Err(Error::config("problem.d", "must be >= 1"));
                }
                if *l0 <= 0.0 || *l1 <= 0.0 {
                    return Err(Error::config("problem.l0/l1", "must be > 0"));
                }
            }
            ProblemConfig::Logistic {
                source,
                lambda,
                n_clients,
                ..
            } => {
                if *lambda <= 0.0 {
                    return Err(Error::config("problem.lambda", "must be > 0"));
                }
                if let SourceConfig::Synthetic { n, d } = source {
                    if *n == 0 || *d == 0 {
                        return Err(Error::config(
                            "problem.source",
                            "synthetic n and d must be >= 1",
                        ));
                    }
                }
                if n_clients == &Some(0) {
                    return Err(Error::config("problem.n_clients", "must be >= 1"));
                }
            }
        }

        match self.algorithm.compressor {
            CompressorConfig::TopK | CompressorConfig::RandK => match self.algorithm.k {
                Some(k) if k >= 1 => {}
                Some(_) => return Err(Error::config("algorithm.k", "must be >= 1")),
                None => {
                    return Err(Error::config("algorithm.k", "required for top-k / rand-k"));
                }
            },
            CompressorConfig::Identity => {}
        }

        let needs_gamma0 = matches!(
            self.algorithm.rule,
            RuleKind::NormalizedSqrtK | RuleKind::Sgdm
        );
        if needs_gamma0 {
            match self.algorithm.gamma0 {
                Some(g) if g > 0.0 => {}
                Some(_) => return Err(Error::config("algorithm.gamma0", "must be > 0")),
                None => return Err(Error::config("algorithm.gamma0", "required by this rule")),
            }
        }
        if self.algorithm.rule == RuleKind::SingleNodeConstant {
            if let Some(beta) = self.algorithm.beta {
                if beta < 2.0 {
                    return Err(Error::config("algorithm.beta", "must be >= 2"));
                }
            }
        }
        let stochastic = matches!(
            self.algorithm.variant,
            VariantConfig::Ef21Sgdm | VariantConfig::NormEf21Sgdm
        );
        if stochastic && self.algorithm.rule != RuleKind::Sgdm {
            return Err(Error::config(
                "algorithm.rule",
                "stochastic variants need the momentum-bearing `sgdm` rule",
            ));
        }
        if stochastic && self.algorithm.init_mode == Some(InitModeConfig::GradientAtX0) {
            return Err(Error::config(
                "algorithm.init_mode",
                "gradient-at-x0 is only defined for deterministic variants",
            ));
        }
        if self.algorithm.batch == Some(0) {
            return Err(Error::config("algorithm.batch", "must be >= 1"));
        }
        if self.algorithm.noise_sigma < 0.0 {
            return Err(Error::config("algorithm.noise_sigma", "must be >= 0"));
        }
        if self.run.epsilon <= 0.0 {
            return Err(Error::config("run.epsilon", "must be > 0"));
        }
        if let Some(std) = self.run.x0_std {
            if std < 0.0 {
                return Err(Error::config("run.x0_std", "must be >= 0"));
            }
        }
        Ok(())
    }

    /// The compressor described by `[algorithm]`.
    pub fn compressor(&self) -> CompressorKind {
        let value_bits = self.algorithm.value_bits;
        match self.algorithm.compressor {
            CompressorConfig::TopK => CompressorKind::TopK {
                k: self.algorithm.k.unwrap_or(1),
                value_bits,
            },
            CompressorConfig::RandK => CompressorKind::RandK {
                k: self.algorithm.k.unwrap_or(1),
                value_bits,
            },
            CompressorConfig::Identity => CompressorKind::Identity { value_bits },
        }
    }

    /// The stepsize rule described by `[algorithm]`.
    pub fn rule(&self) -> StepsizeRule {
        StepsizeRule {
            kind: self.algorithm.rule,
            gamma0: self.algorithm.gamma0,
            beta: self.algorithm.beta,
            clamp_gamma0: self.algorithm.clamp_gamma0,
        }
    }

    /// Initial-point distribution, with problem-kind defaults.
    pub fn x0_distribution(&self) -> (f64, f64) {
        let (dm, ds) = match self.problem {
            ProblemConfig::Polynomial { .. } => (20.0, 1.0),
            ProblemConfig::Logistic { .. } => (0.0, 1.0),
        };
        (
            self.run.x0_mean.unwrap_or(dm),
            self.run.x0_std.unwrap_or(ds),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const POLY_TOML: &str = r#"
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
k_iters = 2000
seed = 0
epsilon = 1e-4
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(POLY_TOML).unwrap();
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.x0_distribution(), (20.0, 1.0));
    }

    #[test]
    fn synthetic_logistic_source() {
        let toml = r#"
[problem]
kind = "logistic"
lambda = 0.1

[problem.source]
n = 20
d = 10

[algorithm]
variant = "norm-ef21"
compressor = "top-k"
k = 1
rule = "normalized-sqrt-k"
gamma0 = 1.0

[run]
k_iters = 100
"#;
        let cfg = ExperimentConfig::from_toml(toml).unwrap();
        assert!(matches!(
            cfg.problem,
            ProblemConfig::Logistic {
                source: SourceConfig::Synthetic { n: 20, d: 10 },
                ..
            }
        ));
        assert_eq!(cfg.x0_distribution(), (0.0, 1.0));
        assert_eq!(cfg.run.epsilon, 1e-4);
    }

    #[test]
    fn rejects_missing_k_for_top_k() {
        let bad = POLY_TOML.replace("k = 1\n", "");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("algorithm.k"), "{err}");
    }

    #[test]
    fn rejects_stochastic_variant_with_deterministic_rule() {
        let bad = POLY_TOML.replace("norm-ef21", "norm-ef21-sgdm");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("algorithm.rule"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = POLY_TOML.replace("seed = 0", "seed = 0\nbogus = 1");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }
}
