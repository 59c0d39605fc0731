use std::io::Write;

use serde::Serialize;

use super::ExperimentConfig;
use crate::error::Result;
use crate::protocol::AgentStates;
use crate::scalar::Real;

/// First line of every run CSV.
pub const CSV_SCHEMA: &str = "# rewb-run-v1";

pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "error_l2",
    "bound",
    "gamma",
    "gamma1",
    "gamma2",
    "disagreement",
    "mean_dist",
    "balance_residual",
    "k_min",
    "k_max",
    "theta_star_norm",
];

/// One logged step.
#[derive(Clone, Debug, PartialEq)]
pub struct Row<T> {
    pub t: u64,
    /// `‖x(t) − 𝟙θ*(t)ᵀ‖_F`.
    pub error_l2: T,
    /// `√N · γ(t)`.
    pub bound: T,
    pub gamma: T,
    pub gamma1: T,
    pub gamma2: T,
    /// `‖x(t) − 𝟙x̄(t)ᵀ‖_F`.
    pub disagreement: T,
    /// `‖x̄(t) − θ*(t)‖`.
    pub mean_dist: T,
    /// `‖L(t) 𝟙‖∞` for the weights used at step `t`.
    pub balance_residual: T,
    pub k_min: T,
    pub k_max: T,
    pub theta_star_norm: T,
    /// `max_i ‖x_i(t) − θ*(t)‖`. Not exported to CSV.
    pub max_agent_error: T,
}

impl<T: Real> Row<T> {
    fn values(&self) -> [T; 11] {
        [
            self.error_l2,
            self.bound,
            self.gamma,
            self.gamma1,
            self.gamma2,
            self.disagreement,
            self.mean_dist,
            self.balance_residual,
            self.k_min,
            self.k_max,
            self.theta_star_norm,
        ]
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub(crate) fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub config_hash: String,
    pub n: usize,
    pub dim: usize,
    pub horizon: u64,
    pub bad_agents: usize,
    pub initial_error: f64,
    pub final_error: f64,
    pub final_disagreement: f64,
    pub final_mean_dist: f64,
    pub final_gamma: f64,
    pub final_bound: f64,
    /// Steps (out of every step, logged or not) with `e(t) > √N γ(t)`.
    pub envelope_violations: u64,
    pub first_violation: Option<u64>,
    /// `max_t e(t) / (√N γ(t))` over every step.
    pub max_envelope_ratio: f64,
    /// Smallest `k_i(t)` seen over the run.
    pub min_gain: f64,
    /// Steps with at least one saturated agent (`k_min < 1`).
    pub saturated_steps: u64,
    /// Least-squares `−d log e / d log(t+1)` over the last decade of logged steps.
    pub fitted_error_exponent: Option<f64>,
    /// Same fit for `γ(t)`.
    pub fitted_gamma_exponent: Option<f64>,
    /// `α₁ − β₁`: largest rate exponent covered by the convergence guarantee.
    pub rate_exponent_limit: f64,
    /// `α₁ − μ₁`: decay exponent limit of the bound system.
    pub gamma_exponent_limit: f64,
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug)]
pub struct RunRecord<T> {
    pub rows: Vec<Row<T>>,
    pub summary: Summary,
    pub final_state: AgentStates<T>,
    pub final_weights: Vec<T>,
}

/// Equality ignores wall time.
impl<T: PartialEq> PartialEq for RunRecord<T> {
    fn eq(&self, other: &Self) -> bool {
        let mut a = self.summary.clone();
        a.wall_time_secs = other.summary.wall_time_secs;
        self.rows == other.rows
            && a == other.summary
            && self.final_state == other.final_state
            && self.final_weights == other.final_weights
    }
}

impl<T: Real> RunRecord<T> {
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_SCHEMA} config={}", self.summary.config_hash)?;
        writeln!(out, "{}", CSV_COLUMNS.join(","))?;
        for row in &self.rows {
            write!(out, "{}", row.t)?;
            for v in row.values() {
                write!(out, ",{}", fmt_float(v.as_f64()))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }

    pub fn last(&self) -> &Row<T> {
        self.rows.last().expect("a run logs at least one row")
    }
}

#[derive(Default)]
pub(super) struct Tally {
    violations: u64,
    first_violation: Option<u64>,
    max_ratio: f64,
    min_gain: f64,
    saturated_steps: u64,
    initial_error: Option<f64>,
}

impl Tally {
    pub(super) fn observe(&mut self, t: u64, error: f64, bound: f64, k_min: f64) {
        if self.initial_error.is_none() {
            self.initial_error = Some(error);
            self.min_gain = f64::INFINITY;
        }
        if error > bound {
            self.violations += 1;
            self.first_violation.get_or_insert(t);
        }
        let ratio = if bound > 0.0 {
            error / bound
        } else if error > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.max_ratio = self.max_ratio.max(ratio);
        self.min_gain = self.min_gain.min(k_min);
        if k_min < 1.0 {
            self.saturated_steps += 1;
        }
    }
}

/// Least-squares slope of `ln v` against `ln(t+1)` over rows with
/// `t ≥ t_last / 10` and `v > 0`, negated. `None` with fewer than 3 points.
pub(crate) fn tail_exponent<T: Real>(rows: &[Row<T>], value: impl Fn(&Row<T>) -> T) -> Option<f64> {
    let t_last = rows.last()?.t;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= t_last / 10 && r.t > 0)
        .map(|r| ((r.t as f64 + 1.0).ln(), value(r).as_f64()))
        .filter(|&(_, v)| v > 0.0 && v.is_finite())
        .map(|(x, v)| (x, v.ln()))
        .collect();
    least_squares_slope(&pts).map(|s| -s)
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub(super) fn summarize<T: Real>(
    config: &ExperimentConfig<T>,
    rows: &[Row<T>],
    tally: &Tally,
    final_state: &AgentStates<T>,
    wall_time_secs: f64,
) -> Summary {
    let last = rows.last().expect("at least one row");
    let p = &config.params;
    Summary {
        config_hash: config.fingerprint(),
        n: config.graph.n(),
        dim: final_state.dim(),
        horizon: config.horizon,
        bad_agents: config.attack.bad_count(config.graph.n()).unwrap_or(0),
        initial_error: tally.initial_error.unwrap_or(f64::NAN),
        final_error: last.error_l2.as_f64(),
        final_disagreement: last.disagreement.as_f64(),
        final_mean_dist: last.mean_dist.as_f64(),
        final_gamma: last.gamma.as_f64(),
        final_bound: last.bound.as_f64(),
        envelope_violations: tally.violations,
        first_violation: tally.first_violation,
        max_envelope_ratio: tally.max_ratio,
        min_gain: tally.min_gain,
        saturated_steps: tally.saturated_steps,
        fitted_error_exponent: tail_exponent(rows, |r| r.error_l2),
        fitted_gamma_exponent: tail_exponent(rows, |r| r.gamma),
        rate_exponent_limit: (p.alpha1 - p.beta1).as_f64(),
        gamma_exponent_limit: (p.alpha1 - p.mu1).as_f64(),
        wall_time_secs,
    }
}
