//! Simulated client/server rounds for error-feedback optimization, in four
//! variants: the classical memory-residual method, its normalized version,
//! and the momentum-bearing stochastic pair.
//!
//! A round is a barrier-synchronized superstep: every client compresses the
//! residual against its memory (optionally in parallel), then the server
//! reduces the increments in fixed client order and moves the iterate. All
//! per-(client, round) randomness comes from child streams derived off the
//! master seed, so serial and parallel execution produce identical
//! trajectories.

use rayon::prelude::*;

use crate::compressors::{compress, payload_bits, CompressorKind};
use crate::error::{Error, Result};
use crate::harness::record::{MetricRow, RunRecord};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::vector::DenseVector;

const TAG_MOMENTUM_INIT: u64 = 1;
const TAG_ROUND: u64 = 2;

/// The stream a client consumes while initializing its momentum estimator.
/// Exposed so reference implementations can reproduce the draws.
pub fn momentum_init_stream(master: &RngStream, client: usize) -> RngStream {
    master.child(&[TAG_MOMENTUM_INIT, client as u64])
}

/// The stream a client consumes during one round (stochastic-gradient
/// sampling first, then compressor randomness).
pub fn round_stream(master: &RngStream, client: usize, round: usize) -> RngStream {
    master.child(&[TAG_ROUND, client as u64, round as u64])
}

/// Algorithm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// x ← x − γ·g (memory-residual baseline).
    Ef21,
    /// x ← x − γ·g/‖g‖.
    NormEf21,
    /// Stochastic gradients + momentum, non-normalized step.
    Ef21Sgdm,
    /// Stochastic gradients + momentum, normalized step.
    NormEf21Sgdm,
}

impl Variant {
    pub fn normalized(self) -> bool {
        matches!(self, Variant::NormEf21 | Variant::NormEf21Sgdm)
    }

    pub fn stochastic(self) -> bool {
        matches!(self, Variant::Ef21Sgdm | Variant::NormEf21Sgdm)
    }
}

/// Memory initialization for g_i^{-1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    ZeroMemory,
    GradientAtX0,
}

impl InitMode {
    /// Deterministic variants compare against runs started at the exact
    /// gradient; stochastic ones start from zero memories.
    pub fn default_for(variant: Variant) -> Self {
        if variant.stochastic() {
            InitMode::ZeroMemory
        } else {
            InitMode::GradientAtX0
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct AlgoConfig {
    pub variant: Variant,
    pub compressor: CompressorKind,
    pub gamma: f64,
    /// Momentum weight η ∈ (0, 1]; required by the stochastic variants.
    pub eta: Option<f64>,
    pub init_mode: InitMode,
    /// Per-client batch size; None means the full shard.
    pub batch: Option<usize>,
    /// Noise scale for the polynomial stochastic oracle.
    pub noise_sigma: f64,
    /// Run client steps on a rayon pool (bitwise-identical to serial).
    pub parallel_clients: bool,
}

impl AlgoConfig {
    pub fn validate(&self, problem: &Problem) -> Result<()> {
        self.compressor.validate(problem.dim())?;
        if self.gamma <= 0.0 {
            return Err(Error::param("gamma must be > 0"));
        }
        if self.variant.stochastic() {
            match self.eta {
                Some(eta) if eta > 0.0 && eta <= 1.0 => {}
                Some(eta) => {
                    return Err(Error::param(format!("eta = {eta} outside (0, 1]")));
                }
                None => {
                    return Err(Error::param(
                        "stochastic variants need a momentum-bearing rule (eta missing)",
                    ));
                }
            }
            if self.init_mode == InitMode::GradientAtX0 {
                return Err(Error::config(
                    "algorithm.init_mode",
                    "gradient-at-x0 initialization is only defined for deterministic variants",
                ));
            }
        }
        Ok(())
    }
}

/// Per-client error-feedback memory g_i^{k-1} plus the momentum estimator
/// v_i^{k-1} for the stochastic variants.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientState {
    pub g_prev: DenseVector,
    pub v_prev: Option<DenseVector>,
}

/// Server iterate and aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub x: DenseVector,
    pub g: DenseVector,
    pub k: usize,
    pub n_clients: usize,
}

/// Initializes server and client states. ZeroMemory sets g_i^{-1} = 0;
/// GradientAtX0 sets g_i^{-1} = ∇f_i(x⁰) (deterministic variants only).
/// Stochastic variants draw v_i^{-1} as one stochastic gradient at x⁰ per
/// client from independent child streams.
pub fn init_run(
    problem: &Problem,
    cfg: &AlgoConfig,
    x0: &DenseVector,
    rng: &RngStream,
) -> Result<(ServerState, Vec<ClientState>)> {
    let d = problem.dim();
    if x0.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: x0.dim(),
        });
    }
    cfg.validate(problem)?;
    let n = problem.n_clients();

    let mut clients = Vec::with_capacity(n);
    for i in 0..n {
        let g_prev = match cfg.init_mode {
            InitMode::ZeroMemory => DenseVector::zeros(d),
            InitMode::GradientAtX0 => problem.client_grad(i, x0)?,
        };
        let v_prev = if cfg.variant.stochastic() {
            let mut crng = momentum_init_stream(rng, i);
            Some(problem.stochastic_grad(i, x0, cfg.batch, cfg.noise_sigma, &mut crng)?)
        } else {
            None
        };
        clients.push(ClientState { g_prev, v_prev });
    }

    let g = DenseVector::mean_of(&clients.iter().map(|c| c.g_prev.clone()).collect::<Vec<_>>())?;
    Ok((
        ServerState {
            x: x0.clone(),
            g,
            k: 0,
            n_clients: n,
        },
        clients,
    ))
}

/// One deterministic client round: Δ = C(∇f_i(x) − g_prev), g ← g_prev + Δ.
pub fn client_step_deterministic(
    state: &ClientState,
    x: &DenseVector,
    problem: &Problem,
    client: usize,
    compressor: &CompressorKind,
    rng: &mut RngStream,
) -> Result<(DenseVector, ClientState)> {
    let grad = problem.client_grad(client, x)?;
    let delta = compress(compressor, &grad.sub(&state.g_prev), rng)?;
    let g_new = state.g_prev.add(&delta);
    Ok((
        delta,
        ClientState {
            g_prev: g_new,
            v_prev: state.v_prev.clone(),
        },
    ))
}

/// One momentum client round: advance v toward a fresh stochastic gradient,
/// then Δ = C(v − g_prev), g ← g_prev + Δ. The update is written in
/// fixed-point form v + η·(s − v) so v is bitwise-unchanged when s equals it,
/// and η = 1 short-circuits to the fresh gradient.
#[allow(clippy::too_many_arguments)]
pub fn client_step_momentum(
    state: &ClientState,
    x: &DenseVector,
    problem: &Problem,
    client: usize,
    eta: f64,
    compressor: &CompressorKind,
    rng: &mut RngStream,
    batch: Option<usize>,
    noise_sigma: f64,
) -> Result<(DenseVector, ClientState)> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param(format!("eta = {eta} outside (0, 1]")));
    }
    let v_prev = state
        .v_prev
        .as_ref()
        .ok_or_else(|| Error::param("momentum step on a client without v state"))?;
    let sgrad = problem.stochastic_grad(client, x, batch, noise_sigma, rng)?;
    let v_new = if eta == 1.0 {
        sgrad
    } else {
        v_prev.add_scaled(eta, &sgrad.sub(v_prev))
    };
    let delta = compress(compressor, &v_new.sub(&state.g_prev), rng)?;
    let g_new = state.g_prev.add(&delta);
    Ok((
        delta,
        ClientState {
            g_prev: g_new,
            v_prev: Some(v_new),
        },
    ))
}

/// Server reduction and move: g ← g + (1/n)ΣΔ_i, then either the normalized
/// step x ← x − γ·g/‖g‖ (g = 0 leaves x unchanged) or the plain step
/// x ← x − γ·g.
pub fn server_step(
    server: &ServerState,
    deltas: &[DenseVector],
    gamma: f64,
    normalized: bool,
) -> Result<ServerState> {
    if deltas.len() != server.n_clients {
        return Err(Error::param(format!(
            "expected {} client deltas, got {}",
            server.n_clients,
            deltas.len()
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::param("gamma must be > 0"));
    }
    let mean_delta = DenseVector::mean_of(deltas)?;
    let g = server.g.add(&mean_delta);
    let x = if normalized {
        let g_norm = g.norm2();
        if g_norm == 0.0 {
            server.x.clone()
        } else {
            server.x.add_scaled(-gamma / g_norm, &g)
        }
    } else {
        server.x.add_scaled(-gamma, &g)
    };
    Ok(ServerState {
        x,
        g,
        k: server.k + 1,
        n_clients: server.n_clients,
    })
}

/// The analysis potential V = f(x) − f^inf + (2γ/(1−√(1−α)))·(1/n)Σ‖∇f_i(x) − g_i‖.
pub fn lyapunov_value(
    server: &ServerState,
    clients: &[ClientState],
    problem: &Problem,
    gamma: f64,
    alpha: f64,
    f_inf: f64,
) -> Result<f64> {
    let f = problem.value(&server.x)?;
    let mut residual = 0.0;
    for (i, c) in clients.iter().enumerate() {
        residual += problem.client_grad(i, &server.x)?.dist(&c.g_prev);
    }
    residual /= clients.len() as f64;
    let weight = 2.0 * gamma / (1.0 - (1.0 - alpha).sqrt());
    Ok(f - f_inf + weight * residual)
}

/// Per-round quantities captured for the descent diagnostics. Values indexed
/// by the round's iterate x^k; memory-dependent entries use the post-update
/// memories g_i^k (the ones that determined the move to x^{k+1}).
#[derive(Debug, Clone)]
pub struct RoundDiag {
    pub k: usize,
    /// The round's iterate x^k.
    pub x_k: DenseVector,
    pub f_value: f64,
    pub f_next: f64,
    pub grad_norm: f64,
    pub mean_client_grad_norm: f64,
    /// ‖∇f(x^k) − g^k‖.
    pub grad_minus_g_norm: f64,
    /// (1/n)Σ‖∇f_i(x^k) − g_i^k‖.
    pub ef_residual_mean: f64,
    pub gamma: f64,
    /// ‖x^{k+1} − x^k‖.
    pub step_norm: f64,
    /// ‖g^k‖.
    pub g_norm: f64,
    /// ‖server g − mean of client memories‖ after the round.
    pub server_client_gap: f64,
}

/// Executes rounds k = 0..=K and records rows for iterates x^0..x^{K+1}
/// (K+2 rows; row k carries metrics at x^k and k·payload bits).
pub fn run(
    problem: &Problem,
    cfg: &AlgoConfig,
    x0: &DenseVector,
    k_horizon: usize,
    rng: &RngStream,
) -> Result<RunRecord> {
    run_inner(problem, cfg, x0, k_horizon, rng, false).map(|(rec, _)| rec)
}

/// Like [`run`], additionally collecting one [`RoundDiag`] per executed round.
pub fn run_with_diagnostics(
    problem: &Problem,
    cfg: &AlgoConfig,
    x0: &DenseVector,
    k_horizon: usize,
    rng: &RngStream,
) -> Result<(RunRecord, Vec<RoundDiag>)> {
    run_inner(problem, cfg, x0, k_horizon, rng, true)
}

fn run_inner(
    problem: &Problem,
    cfg: &AlgoConfig,
    x0: &DenseVector,
    k_horizon: usize,
    rng: &RngStream,
    collect_diags: bool,
) -> Result<(RunRecord, Vec<RoundDiag>)> {
    let d = problem.dim();
    let n = problem.n_clients();
    let payload = payload_bits(&cfg.compressor, d);
    let (mut server, mut clients) = init_run(problem, cfg, x0, rng)?;

    let mut rows = Vec::with_capacity(k_horizon + 2);
    let mut diags = Vec::new();
    let mut min_grad_norm = f64::INFINITY;

    fn record_row(
        problem: &Problem,
        server: &ServerState,
        k: usize,
        payload: u64,
        min_grad_norm: &mut f64,
        rows: &mut Vec<MetricRow>,
    ) -> Result<(f64, f64)> {
        let f_k = problem.value(&server.x)?;
        let grad_k = problem.grad(&server.x)?;
        let gn = grad_k.norm2();
        if !f_k.is_finite() || !gn.is_finite() {
            return Err(Error::NonFinite(format!("metrics at round {k}")));
        }
        *min_grad_norm = min_grad_norm.min(gn);
        rows.push(MetricRow {
            k,
            f_value: f_k,
            grad_norm_sq: gn * gn,
            min_grad_norm: *min_grad_norm,
            bits_cumulative: k as u64 * payload,
        });
        Ok((f_k, gn))
    }

    for k in 0..=k_horizon {
        let (f_k, grad_norm_k) =
            record_row(problem, &server, k, payload, &mut min_grad_norm, &mut rows)?;

        let step = |i: usize| -> Result<(DenseVector, ClientState)> {
            let mut crng = round_stream(rng, i, k);
            if cfg.variant.stochastic() {
                client_step_momentum(
                    &clients[i],
                    &server.x,
                    problem,
                    i,
                    cfg.eta.expect("validated"),
                    &cfg.compressor,
                    &mut crng,
                    cfg.batch,
                    cfg.noise_sigma,
                )
            } else {
                client_step_deterministic(
                    &clients[i],
                    &server.x,
                    problem,
                    i,
                    &cfg.compressor,
                    &mut crng,
                )
            }
        };

        let stepped: Vec<(DenseVector, ClientState)> = if cfg.parallel_clients {
            (0..n).into_par_iter().map(step).collect::<Result<_>>()?
        } else {
            (0..n).map(step).collect::<Result<_>>()?
        };

        let x_prev = server.x.clone();
        let deltas: Vec<DenseVector> = stepped.iter().map(|(d, _)| d.clone()).collect();
        let next_server = server_step(&server, &deltas, cfg.gamma, cfg.variant.normalized())?;
        clients = stepped.into_iter().map(|(_, s)| s).collect();

        if !next_server.x.is_finite() || !next_server.g.is_finite() {
            return Err(Error::NonFinite(format!("server state after round {k}")));
        }

        if collect_diags {
            let client_grads: Vec<DenseVector> = (0..n)
                .map(|i| problem.client_grad(i, &x_prev))
                .collect::<Result<_>>()?;
            let mean_client_grad_norm =
                client_grads.iter().map(|g| g.norm2()).sum::<f64>() / n as f64;
            let ef_residual_mean = client_grads
                .iter()
                .zip(&clients)
                .map(|(g, c)| g.dist(&c.g_prev))
                .sum::<f64>()
                / n as f64;
            let grad_at_prev = DenseVector::mean_of(&client_grads)?;
            let memory_mean = DenseVector::mean_of(
                &clients.iter().map(|c| c.g_prev.clone()).collect::<Vec<_>>(),
            )?;
            diags.push(RoundDiag {
                k,
                x_k: x_prev.clone(),
                f_value: f_k,
                f_next: problem.value(&next_server.x)?,
                grad_norm: grad_norm_k,
                mean_client_grad_norm,
                grad_minus_g_norm: grad_at_prev.dist(&next_server.g),
                ef_residual_mean,
                gamma: cfg.gamma,
                step_norm: next_server.x.dist(&x_prev),
                g_norm: next_server.g.norm2(),
                server_client_gap: next_server.g.dist(&memory_mean),
            });
        }

        server = next_server;
    }

    record_row(
        problem,
        &server,
        k_horizon + 1,
        payload,
        &mut min_grad_norm,
        &mut rows,
    )?;

    Ok((
        RunRecord {
            rows,
            config_echo: None,
            seed: rng.seed(),
        },
        diags,
    ))
}
