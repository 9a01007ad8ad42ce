//! Theoretical stepsize and momentum rules, plus the derived constants they
//! are built from. Rules are resolved once per run against a fixed horizon K
//! (the analyses use constant stepsizes indexed by the horizon); resolution
//! is a pure function, so re-evaluating gives identical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants derived from (L0, L1, α):
/// c_i = (1/2 + 2√(1−α)/(1−√(1−α)))·L_i, θ = 1−√(1−α) (also written C_α),
/// β = (1−α)/(1−√(1−α)), and optionally the drift constant
/// B = 2c0 + 8·L1·c1·δ^inf when the infima gap δ^inf is known.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConstants {
    pub c0: f64,
    pub c1: f64,
    pub theta: f64,
    pub beta: f64,
    pub drift_b: Option<f64>,
}

impl TheoryConstants {
    pub fn new(l0: f64, l1: f64, alpha: f64) -> Result<Self> {
        let (c0, c1) = c_constants(l0, l1, alpha)?;
        let root = (1.0 - alpha).sqrt();
        let theta = 1.0 - root;
        let beta = (1.0 - alpha) / theta;
        Ok(TheoryConstants {
            c0,
            c1,
            theta,
            beta,
            drift_b: None,
        })
    }

    /// Same quantity as `theta`, under its stochastic-analysis name.
    pub fn c_alpha(&self) -> f64 {
        self.theta
    }

    /// Attaches B = 2c0 + 8·L1·c1·δ^inf (δ^inf = mean of f^inf − f_i^inf).
    pub fn with_drift(mut self, l1: f64, delta_inf: f64) -> Self {
        self.drift_b = Some(2.0 * self.c0 + 8.0 * l1 * self.c1 * delta_inf);
        self
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("alpha = {alpha} outside (0, 1]")));
    }
    Ok(())
}

/// (c0, c1) with c_i = (1/2 + 2√(1−α)/(1−√(1−α)))·L_i.
pub fn c_constants(l0: f64, l1: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if l0 <= 0.0 || l1 <= 0.0 {
        return Err(Error::param("c_constants: L0 and L1 must be > 0"));
    }
    let root = (1.0 - alpha).sqrt();
    let mult = 0.5 + 2.0 * root / (1.0 - root);
    Ok((mult * l0, mult * l1))
}

/// Constant γ = γ0/√(K+1) for a horizon-K run.
pub fn normalized_sqrt_k_stepsize(gamma0: f64, k_horizon: usize) -> Result<f64> {
    if gamma0 <= 0.0 {
        return Err(Error::param("gamma0 must be > 0"));
    }
    Ok(gamma0 / ((k_horizon as f64 + 1.0).sqrt()))
}

/// Single-node constant stepsize γ = 1/(β·c1(L1, α)) with β ≥ 2.
pub fn single_node_stepsize(l1: f64, alpha: f64, beta: f64) -> Result<f64> {
    if beta < 2.0 {
        return Err(Error::param(format!(
            "single-node rule requires beta >= 2, got {beta}"
        )));
    }
    let (_, c1) = c_constants(1.0, l1, alpha)?;
    Ok(1.0 / (beta * c1))
}

/// Classical error-feedback stepsize γ = 1/(L + L̃·√(β/θ)) with
/// θ = 1−√(1−α) and β = (1−α)/θ.
pub fn ef21_classical_stepsize(l: f64, l_tilde: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if l <= 0.0 || l_tilde <= 0.0 {
        return Err(Error::param(
            "ef21_classical_stepsize: L and L-tilde must be > 0",
        ));
    }
    let root = (1.0 - alpha).sqrt();
    let theta = 1.0 - root;
    let beta = (1.0 - alpha) / theta;
    Ok(1.0 / (l + l_tilde * (beta / theta).sqrt()))
}

/// Momentum-rule pair γ = γ0/(K+1)^{3/4}, η = (K+1)^{-1/2}, subject to the
/// cap γ0 ≤ (1/(16·L1))·min{(K+1)^{1/2}·C_α, 1}. A violating γ0 is rejected
/// with the cap reported.
pub fn sgdm_stepsizes(gamma0: f64, k_horizon: usize, l1: f64, alpha: f64) -> Result<(f64, f64)> {
    let cap = sgdm_gamma0_cap(k_horizon, l1, alpha)?;
    if gamma0 <= 0.0 {
        return Err(Error::param("gamma0 must be > 0"));
    }
    if gamma0 > cap {
        return Err(Error::param(format!(
            "gamma0 = {gamma0} exceeds the momentum-rule cap {cap}"
        )));
    }
    let kp1 = k_horizon as f64 + 1.0;
    Ok((gamma0 / kp1.powf(0.75), 1.0 / kp1.sqrt()))
}

/// The γ0 cap of the momentum rule.
pub fn sgdm_gamma0_cap(k_horizon: usize, l1: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if l1 <= 0.0 {
        return Err(Error::param("sgdm cap: L1 must be > 0"));
    }
    let c_alpha = 1.0 - (1.0 - alpha).sqrt();
    let kp1 = k_horizon as f64 + 1.0;
    Ok((kp1.sqrt() * c_alpha).min(1.0) / (16.0 * l1))
}

/// Stepsize rule selector, resolved against a horizon at run construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// γ = γ0/√(K+1) (needs gamma0).
    NormalizedSqrtK,
    /// γ = 1/(β·c1) (needs beta ≥ 2; uses L1, α).
    SingleNodeConstant,
    /// γ = 1/(L + L̃√(β/θ)) (uses L, L̃, α).
    Ef21Classical,
    /// γ = γ0/(K+1)^{3/4}, η = (K+1)^{-1/2} (needs gamma0 within the cap).
    Sgdm,
}

/// A fully specified rule plus everything needed to resolve it.
#[derive(Debug, Clone, PartialEq)]
pub struct StepsizeRule {
    pub kind: RuleKind,
    pub gamma0: Option<f64>,
    pub beta: Option<f64>,
    /// When true, a γ0 above the momentum cap is clamped to the cap instead
    /// of rejected (explicit opt-in; default is rejection).
    pub clamp_gamma0: bool,
}

/// Resolved per-run values: a constant γ and, for momentum rules, η ∈ (0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedSteps {
    pub gamma: f64,
    pub eta: Option<f64>,
}

/// Problem-side inputs rule resolution may need.
#[derive(Debug, Clone, Copy)]
pub struct RuleInputs {
    pub l: Option<f64>,
    pub l_tilde: Option<f64>,
    pub l1: f64,
    pub alpha: f64,
}

impl StepsizeRule {
    pub fn resolve(&self, k_horizon: usize, inputs: &RuleInputs) -> Result<ResolvedSteps> {
        match self.kind {
            RuleKind::NormalizedSqrtK => {
                let gamma0 = self.gamma0.ok_or_else(|| {
                    Error::config("algorithm.gamma0", "required by the sqrt-K rule")
                })?;
                Ok(ResolvedSteps {
                    gamma: normalized_sqrt_k_stepsize(gamma0, k_horizon)?,
                    eta: None,
                })
            }
            RuleKind::SingleNodeConstant => {
                let beta = self.beta.unwrap_or(2.0);
                Ok(ResolvedSteps {
                    gamma: single_node_stepsize(inputs.l1, inputs.alpha, beta)?,
                    eta: None,
                })
            }
            RuleKind::Ef21Classical => {
                let l = inputs.l.ok_or_else(|| {
                    Error::param("classical rule needs the classical smoothness constant L")
                })?;
                let l_tilde = inputs.l_tilde.unwrap_or(l);
                Ok(ResolvedSteps {
                    gamma: ef21_classical_stepsize(l, l_tilde, inputs.alpha)?,
                    eta: None,
                })
            }
            RuleKind::Sgdm => {
                let mut gamma0 = self.gamma0.ok_or_else(|| {
                    Error::config("algorithm.gamma0", "required by the sgdm rule")
                })?;
                if self.clamp_gamma0 {
                    let cap = sgdm_gamma0_cap(k_horizon, inputs.l1, inputs.alpha)?;
                    if gamma0 > cap {
                        gamma0 = cap;
                    }
                }
                let (gamma, eta) = sgdm_stepsizes(gamma0, k_horizon, inputs.l1, inputs.alpha)?;
                Ok(ResolvedSteps {
                    gamma,
                    eta: Some(eta),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_constants_alpha_one() {
        let (c0, c1) = c_constants(4.0, 1.0, 1.0).unwrap();
        assert_eq!(c0, 2.0);
        assert_eq!(c1, 0.5);
    }

    #[test]
    fn c_constants_quarter_alpha() {
        let (_, c1) = c_constants(4.0, 1.0, 0.25).unwrap();
        let root: f64 = 0.75f64.sqrt();
        let expected = 0.5 + 2.0 * root / (1.0 - root);
        assert!((c1 - expected).abs() < 1e-12);
        assert!((c1 - 13.428203230275503).abs() < 1e-10);
    }

    #[test]
    fn c_ratio_matches_l_ratio() {
        for (l0, l1, alpha) in [(4.0, 1.5, 0.3), (0.2, 9.0, 0.99), (7.0, 7.0, 0.01)] {
            let (c0, c1) = c_constants(l0, l1, alpha).unwrap();
            assert!((c0 / c1 - l0 / l1).abs() < 1e-12 * (l0 / l1));
        }
        assert!(c_constants(1.0, 1.0, 0.0).is_err());
        assert!(c_constants(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn sqrt_k_rule_values() {
        let g = normalized_sqrt_k_stepsize(1.0, 1999).unwrap();
        assert!((g - 1.0 / 2000f64.sqrt()).abs() < 1e-15);
        assert_eq!(normalized_sqrt_k_stepsize(0.5, 0).unwrap(), 0.5);
        // Quadrupling K+1 halves γ.
        let a = normalized_sqrt_k_stepsize(1.0, 99).unwrap();
        let b = normalized_sqrt_k_stepsize(1.0, 399).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(normalized_sqrt_k_stepsize(0.0, 10).is_err());
    }

    #[test]
    fn single_node_rule_values() {
        let g = single_node_stepsize(1.0, 0.25, 2.0).unwrap();
        assert!((g - 1.0 / (2.0 * 13.428203230275509)).abs() < 1e-12);
        assert!((g - 0.0372350635022182).abs() < 1e-12);
        assert_eq!(single_node_stepsize(4.0, 1.0, 2.0).unwrap(), 0.25);
        assert!(single_node_stepsize(1.0, 0.25, 1.9).is_err());
    }

    #[test]
    fn classical_rule_values() {
        let g = ef21_classical_stepsize(1.0, 1.0, 0.25).unwrap();
        let theta = 1.0 - 0.75f64.sqrt();
        let beta = 0.75 / theta;
        assert!((g - 1.0 / (1.0 + (beta / theta).sqrt())).abs() < 1e-15);
        assert!((g - 0.133975).abs() < 1e-6);

        // α = 1 removes the compression penalty.
        assert_eq!(ef21_classical_stepsize(2.0, 5.0, 1.0).unwrap(), 0.5);

        // Increasing α increases γ for fixed L, L̃.
        let mut prev = 0.0;
        for alpha in [0.1, 0.25, 0.5, 0.75, 1.0] {
            let g = ef21_classical_stepsize(1.0, 1.0, alpha).unwrap();
            assert!(g > prev);
            prev = g;
        }
    }

    #[test]
    fn sgdm_rule_values() {
        // K+1 = 1e4: γ = γ0/1000, η = 0.01.
        let (g, e) = sgdm_stepsizes(0.01, 9999, 1.0, 1.0).unwrap();
        assert!((g - 0.01 / 1000.0).abs() < 1e-18);
        assert!((e - 0.01).abs() < 1e-15);

        // Cap with L1=1, α=1, K+1=1e4: min{100, 1}/16.
        let cap = sgdm_gamma0_cap(9999, 1.0, 1.0).unwrap();
        assert_eq!(cap, 0.0625);

        // K = 0 disables momentum.
        let cap0 = sgdm_gamma0_cap(0, 1.0, 1.0).unwrap();
        let (_, eta) = sgdm_stepsizes(cap0, 0, 1.0, 1.0).unwrap();
        assert_eq!(eta, 1.0);

        // Violation is rejected and reports the cap.
        let err = sgdm_stepsizes(1.0, 9999, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("0.0625"), "{err}");
    }

    #[test]
    fn resolve_is_pure() {
        let rule = StepsizeRule {
            kind: RuleKind::Sgdm,
            gamma0: Some(0.01),
            beta: None,
            clamp_gamma0: false,
        };
        let inputs = RuleInputs {
            l: None,
            l_tilde: None,
            l1: 2.0,
            alpha: 0.25,
        };
        let a = rule.resolve(4095, &inputs).unwrap();
        let b = rule.resolve(4095, &inputs).unwrap();
        assert_eq!(a, b);
        assert!(a.eta.unwrap() > 0.0 && a.eta.unwrap() <= 1.0);
    }

    #[test]
    fn clamp_mode_applies_cap() {
        let rule = StepsizeRule {
            kind: RuleKind::Sgdm,
            gamma0: Some(100.0),
            beta: None,
            clamp_gamma0: true,
        };
        let inputs = RuleInputs {
            l: None,
            l_tilde: None,
            l1: 1.0,
            alpha: 1.0,
        };
        let resolved = rule.resolve(9999, &inputs).unwrap();
        let cap = sgdm_gamma0_cap(9999, 1.0, 1.0).unwrap();
        assert!((resolved.gamma - cap / 1e4f64.powf(0.75)).abs() < 1e-15);
    }

    #[test]
    fn theory_constants_drift() {
        let tc = TheoryConstants::new(4.0, 1.0, 0.25)
            .unwrap()
            .with_drift(1.0, 0.0);
        assert_eq!(tc.drift_b.unwrap(), 2.0 * tc.c0);
        assert_eq!(tc.c_alpha(), tc.theta);
        assert!(tc.theta > 0.0 && tc.theta <= 1.0);
        assert!(tc.beta >= 0.0);
    }
}
