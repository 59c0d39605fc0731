//! Synchronous simulation of the full protocol.
//!
//! Each round follows the fixed order: measure `y(t)`, exchange `x(t)`,
//! update `x` with `w(t)` and `γ(t)`, then update `w` and `γ`.

mod analysis;
mod record;

use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::adversary::{measure_all, AttackPolicy, ParameterTrajectory};
use crate::error::{Error, Result};
use crate::graph::{balance_residual, is_strongly_connected, weight_update_step, Digraph};
use crate::protocol::{
    rewb_step_into, validate_params, AgentStates, Executor, GammaSystem, ProtocolParams, WeightMode,
};
use crate::scalar::Real;

pub use analysis::{compare, rate_fit, Comparison, RateFit, RATE_FIT_MIN_ROWS};
pub use record::{Row, RunRecord, Summary, CSV_COLUMNS, CSV_SCHEMA};

#[derive(Clone, Debug)]
pub struct ExperimentConfig<T> {
    pub graph: Digraph,
    pub params: ProtocolParams<T>,
    pub trajectory: ParameterTrajectory<T>,
    pub attack: AttackPolicy<T>,
    pub horizon: u64,
    /// Log every `stride`-th step (the final step is always logged).
    pub stride: u64,
    /// Treat the sufficient parameter conditions as errors.
    pub strict: bool,
    /// Worker threads for the per-agent update. Results do not depend on it.
    pub workers: usize,
    /// Balancing iterations applied to `w(0)` before the first round.
    pub pre_balance_rounds: usize,
    /// Overrides `x(0) = 0`.
    pub initial_state: Option<AgentStates<T>>,
    /// Overrides `γ₁(0) = 0, γ₂(0) = Θ`.
    pub initial_gamma: Option<GammaSystem<T>>,
}

impl<T: Real> ExperimentConfig<T> {
    /// Reference defaults (N = 100 setup) on the given graph and seed.
    pub fn new(graph: Digraph, seed: u64) -> Self {
        let params = ProtocolParams::reference_defaults();
        let attack = AttackPolicy {
            s: params.s,
            membership: crate::adversary::Membership::Fixed,
            spoof: crate::adversary::SpoofModel::UniformNegative,
            seed,
        };
        Self {
            graph,
            params,
            trajectory: ParameterTrajectory::reference_default(),
            attack,
            horizon: 100_000,
            stride: 10,
            strict: false,
            workers: 1,
            pre_balance_rounds: 0,
            initial_state: None,
            initial_gamma: None,
        }
    }

    /// SHA-256 over everything that influences the output.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.graph.to_json().as_bytes());
        // workers is excluded on purpose: it cannot change results
        let text = format!(
            "{:?}|{:?}|{:?}|{}|{}|{}|{}|{:?}|{:?}",
            self.params,
            self.trajectory,
            self.attack,
            self.horizon,
            self.stride,
            self.strict,
            self.pre_balance_rounds,
            self.initial_state,
            self.initial_gamma,
        );
        h.update(text.as_bytes());
        hex::encode(h.finalize())
    }

    fn check(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.stride < 1 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if self.trajectory.dim < 1 {
            return Err(Error::Config(
                "parameter dimension must be at least 1".into(),
            ));
        }
        if !is_strongly_connected(&self.graph) {
            return Err(Error::NotStronglyConnected);
        }
        self.attack.bad_count(self.graph.n())?;
        if let Some(x0) = &self.initial_state {
            if x0.n() != self.graph.n() || x0.dim() != self.trajectory.dim {
                return Err(Error::Dimension {
                    what: "initial state",
                    expected: self.graph.n() * self.trajectory.dim,
                    got: x0.n() * x0.dim(),
                });
            }
        }
        Ok(())
    }
}

fn frobenius_distance<T: Real>(x: &AgentStates<T>, center: &[T]) -> (T, T) {
    let mut total = T::zero();
    let mut worst = T::zero();
    for i in 0..x.n() {
        let d = x
            .row(i)
            .iter()
            .zip(center)
            .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b));
        total = total + d;
        worst = worst.max(d);
    }
    (total.sqrt(), worst.sqrt())
}

/// Runs the protocol for `horizon` rounds and returns the logged series.
pub fn run<T: Real>(config: &ExperimentConfig<T>) -> Result<RunRecord<T>> {
    let started = Instant::now();
    config.check()?;
    let g = &config.graph;
    let params = &config.params;
    let n = g.n();
    let dim = config.trajectory.dim;

    let mut w = params.initial_weights(n);
    validate_params(params, g, &w, config.strict)?.into_result()?;
    if params.weight_mode == WeightMode::Dynamic {
        for _ in 0..config.pre_balance_rounds {
            w = weight_update_step(g, &w)?;
        }
    }

    let exec = Executor::with_threads(config.workers)?;
    let mut x = config
        .initial_state
        .clone()
        .unwrap_or_else(|| AgentStates::zeros(n, dim));
    let mut next = AgentStates::zeros(n, dim);
    let mut gs = config
        .initial_gamma
        .unwrap_or_else(|| GammaSystem::initial(params.theta_bound));
    let mut y = vec![T::zero(); n * dim];
    let mut gains = vec![T::one(); n];
    let sqrt_n = T::from_count(n).sqrt();

    let mut rows = Vec::new();
    let mut tally = record::Tally::default();

    for t in 0..=config.horizon {
        let gamma = gs.gamma();
        if !(gamma >= T::zero()) {
            return Err(Error::NegativeGamma {
                step: t,
                gamma: gamma.as_f64(),
            });
        }
        let theta = config.trajectory.theta_star(t);
        measure_all(&config.trajectory, &config.attack, t, n, &mut y)?;

        let (error, worst) = frobenius_distance(&x, &theta);
        let bound = sqrt_n * gamma;

        if t < config.horizon {
            rewb_step_into(
                g, &x, &w, &y, gamma, params, t, &exec, &mut next, &mut gains,
            )?;
        } else {
            for (i, k) in gains.iter_mut().enumerate() {
                *k = crate::protocol::innovation_gain(&y[i * dim..(i + 1) * dim], x.row(i), gamma);
            }
        }
        let k_min = gains.iter().copied().fold(T::infinity(), T::min);
        let k_max = gains.iter().copied().fold(T::neg_infinity(), T::max);
        tally.observe(t, error.as_f64(), bound.as_f64(), k_min.as_f64());

        if t % config.stride == 0 || t == config.horizon {
            let mean = x.mean();
            let (disagreement, _) = frobenius_distance(&x, &mean);
            let mean_dist = mean
                .iter()
                .zip(&theta)
                .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b))
                .sqrt();
            rows.push(Row {
                t,
                error_l2: error,
                bound,
                gamma,
                gamma1: gs.gamma1,
                gamma2: gs.gamma2,
                disagreement,
                mean_dist,
                balance_residual: balance_residual(g, &w),
                k_min,
                k_max,
                theta_star_norm: config.trajectory.norm(t),
                max_agent_error: worst,
            });
        }

        if t == config.horizon {
            break;
        }
        std::mem::swap(&mut x, &mut next);
        if !x.is_finite() {
            return Err(Error::NonFinite { step: t + 1 });
        }
        if params.weight_mode == WeightMode::Dynamic {
            w = weight_update_step(g, &w)?;
        }
        gs = gs.step(params, n);
    }

    let summary = record::summarize(config, &rows, &tally, &x, started.elapsed().as_secs_f64());
    Ok(RunRecord {
        rows,
        summary,
        final_state: x,
        final_weights: w,
    })
}
