use std::fmt;

use super::{ProtocolParams, WeightMode};
use crate::error::{Error, Result};
use crate::graph::{
    balance_residual, balance_weights, default_balance_tolerance, default_max_iter, diameter,
    is_strongly_connected, psi, spectral_report, Digraph, SpectralReport,
};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Short stable identifier, e.g. `beta0-psi`.
    pub check: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}[{}]: {}", self.check, self.message)
    }
}

/// Diagnostics plus the graph constants they were computed from.
#[derive(Clone, Debug)]
pub struct ValidationReport<T> {
    pub diagnostics: Vec<Diagnostic>,
    pub psi: Option<T>,
    pub diameter: Option<usize>,
    /// `(1/d_out_max)^(2Φ+1)`.
    pub initial_weight_bound: Option<T>,
    /// `(λ_m − β₀ λ_M) β₀ / (2 c₁)`.
    pub mu0_bound: Option<T>,
    pub spectral: Option<SpectralReport<T>>,
}

impl<T> ValidationReport<T> {
    pub fn has_errors(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
    }

    pub fn find(&self, check: &str) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.check == check)
    }

    /// `Err(Error::Params)` listing every error-level diagnostic.
    pub fn into_result(self) -> Result<Self> {
        if !self.has_errors() {
            return Ok(self);
        }
        let msg = self
            .diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Params(msg))
    }
}

/// Checks the protocol's initialization constraints.
///
/// The structural constraints (positivity, `0 < β₁ < μ₁ < α₁ < θ₁`,
/// `α₀ ≤ 1/(1−2s)`, `0 < η < 1`) are always errors. The graph-dependent
/// sufficient conditions (`β₀ < ψ`, the `μ₀` bound, the `w(0)` bound) are
/// warnings unless `strict` is set.
///
/// Returns `Err` only when the graph itself is unusable (not strongly
/// connected, or balancing fails).
pub fn validate_params<T: Real>(
    params: &ProtocolParams<T>,
    g: &Digraph,
    w0: &[T],
    strict: bool,
) -> Result<ValidationReport<T>> {
    let mut diags = Vec::new();
    let mut error = |check: &'static str, message: String| {
        diags.push(Diagnostic {
            severity: Severity::Error,
            check,
            message,
        })
    };

    let positive = [
        ("alpha0", params.alpha0),
        ("beta0", params.beta0),
        ("mu0", params.mu0),
        ("c1", params.c1),
        ("c2", params.c2),
        ("theta-bound", params.theta_bound),
    ];
    for (name, v) in positive {
        if !(v > T::zero()) {
            error("positivity", format!("{name} must be > 0, got {v}"));
        }
    }
    let ordered = T::zero() < params.beta1
        && params.beta1 < params.mu1
        && params.mu1 < params.alpha1
        && params.alpha1 < params.theta1;
    if !ordered {
        error(
            "exponent-order",
            format!(
                "need 0 < beta1 < mu1 < alpha1 < theta1, got beta1={} mu1={} alpha1={} theta1={}",
                params.beta1, params.mu1, params.alpha1, params.theta1
            ),
        );
    }
    let half = T::lit(0.5);
    if !(params.s >= T::zero() && params.s < half) {
        error(
            "resilience",
            format!("s must be in [0, 0.5), got {}", params.s),
        );
    } else {
        let cap = T::one() / (T::one() - T::lit(2.0) * params.s);
        if params.alpha0 > cap {
            error(
                "alpha0-bound",
                format!("alpha0 = {} exceeds 1/(1-2s) = {cap}", params.alpha0),
            );
        }
    }
    if !(params.eta > T::zero() && params.eta < T::one()) {
        error(
            "eta-range",
            format!("eta must be in (0, 1), got {}", params.eta),
        );
    }
    if w0.len() != g.n() {
        error(
            "initial-weights",
            format!("expected {} initial weights, got {}", g.n(), w0.len()),
        );
    } else if let Some(i) = w0.iter().position(|&v| !(v > T::zero())) {
        error(
            "initial-weights",
            format!("initial weight {i} is not strictly positive"),
        );
    }

    if !is_strongly_connected(g) {
        return Err(Error::NotStronglyConnected);
    }
    let mut report = ValidationReport {
        diagnostics: diags,
        psi: None,
        diameter: None,
        initial_weight_bound: None,
        mu0_bound: None,
        spectral: None,
    };
    if report.has_errors() {
        return Ok(report);
    }

    let sufficient = if strict {
        Severity::Error
    } else {
        Severity::Warning
    };
    let flag = |report: &mut ValidationReport<T>, check: &'static str, message: String| {
        report.diagnostics.push(Diagnostic {
            severity: sufficient,
            check,
            message,
        })
    };

    let psi_v = psi::<T>(g);
    report.psi = Some(psi_v);
    if !(params.beta0 < psi_v) {
        flag(
            &mut report,
            "beta0-psi",
            format!("beta0 = {} is not below psi = {psi_v:e}", params.beta0),
        );
    }

    let phi = diameter(g)?;
    report.diameter = Some(phi);
    let exponent = i32::try_from(2 * phi + 1).unwrap_or(i32::MAX);
    let w_bound = (T::one() / T::from_count(g.max_out_degree())).powi(exponent);
    report.initial_weight_bound = Some(w_bound);
    if let Some(&w_max) = w0
        .iter()
        .max_by(|a, b| a.partial_cmp(b).expect("finite weights"))
    {
        if w_max > w_bound {
            flag(
                &mut report,
                "initial-weight-bound",
                format!(
                    "initial weight {w_max} exceeds (1/d_out_max)^(2*diameter+1) = {w_bound:e}"
                ),
            );
        }
    }

    // tolerance relative to the weight scale, so tiny w(0) balances as well as large
    let scale = w0.iter().copied().fold(T::zero(), T::max);
    let tol = default_balance_tolerance::<T>() * scale.min(T::one());
    let balanced = balance_weights(g, w0, tol, default_max_iter(g)?.max(1000))?;
    let spectral = spectral_report(g, &balanced.weights, params.beta0)?;
    let mu_bound = spectral.mu0_bound(params.beta0, params.c1);
    report.mu0_bound = Some(mu_bound);
    if !(params.mu0 < mu_bound) {
        flag(
            &mut report,
            "mu0-bound",
            format!(
                "mu0 = {} is not below (lambda_m - beta0*lambda_M)*beta0/(2*c1) = {mu_bound:e}",
                params.mu0
            ),
        );
    }
    report.spectral = Some(spectral);

    if params.weight_mode == WeightMode::Frozen {
        let scale = w0.iter().copied().fold(T::zero(), T::max) * T::from_count(g.max_out_degree());
        if balance_residual(g, w0) / scale > T::lit(1e-8) {
            report.diagnostics.push(Diagnostic {
                severity: Severity::Warning,
                check: "frozen-unbalanced",
                message:
                    "frozen weights do not balance this graph; estimates will not reach consensus"
                        .into(),
            });
        }
    }
    Ok(report)
}
