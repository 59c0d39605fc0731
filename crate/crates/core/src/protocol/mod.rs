//! The resilient update law: step-size schedules, the saturating innovation
//! gain, the two-state bound system and the synchronous per-round update.

mod gamma;
mod update;
mod validate;

use crate::scalar::Real;

pub use gamma::{gamma_step, GammaSystem};
pub use update::{innovation_gain, rewb_step, rewb_step_into, AgentStates, Executor};
pub use validate::{validate_params, Diagnostic, Severity, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// Node weights follow the balancing iteration every round.
    Dynamic,
    /// Node weights stay at their initial values. With unit weights this is
    /// the unbalanced unit-weight (SIU-like) baseline.
    Frozen,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams<T> {
    pub alpha0: T,
    pub alpha1: T,
    pub beta0: T,
    pub beta1: T,
    pub mu0: T,
    pub mu1: T,
    pub c1: T,
    pub c2: T,
    pub eta: T,
    /// Resilience index assumed by the protocol.
    pub s: T,
    /// `Θ`, known bound on `‖θ*(t)‖`.
    pub theta_bound: T,
    /// `θ₁`, decay exponent of the parameter variation bound.
    pub theta1: T,
    /// `w_i(0)` for every agent.
    pub initial_weight: T,
    pub weight_mode: WeightMode,
}

fn power_law<T: Real>(c: T, exponent: T, t: u64) -> T {
    let tf = T::from_u64(t).expect("step as float");
    c / (T::one() + tf).powf(exponent)
}

impl<T: Real> ProtocolParams<T> {
    /// Values used for the N = 100 simulation study.
    pub fn reference_defaults() -> Self {
        Self {
            alpha0: T::lit(0.01),
            alpha1: T::lit(0.075),
            beta0: T::lit(0.01),
            beta1: T::lit(0.01),
            mu0: T::lit(0.025),
            mu1: T::lit(0.025),
            c1: T::lit(75.0),
            c2: T::lit(75.0),
            eta: T::lit(0.5),
            s: T::lit(0.405),
            theta_bound: T::lit(50.0),
            theta1: T::one(),
            initial_weight: T::lit(0.1),
            weight_mode: WeightMode::Dynamic,
        }
    }

    /// Innovation step `α(t) = α₀/(1+t)^α₁`.
    pub fn alpha(&self, t: u64) -> T {
        power_law(self.alpha0, self.alpha1, t)
    }

    /// Consensus step `β(t) = β₀/(1+t)^β₁`.
    pub fn beta(&self, t: u64) -> T {
        power_law(self.beta0, self.beta1, t)
    }

    /// `μ(t) = μ₀/(t+1)^μ₁`, used only by the bound system.
    pub fn mu(&self, t: u64) -> T {
        power_law(self.mu0, self.mu1, t)
    }

    pub fn initial_weights(&self, n: usize) -> Vec<T> {
        vec![self.initial_weight; n]
    }
}

pub fn alpha<T: Real>(params: &ProtocolParams<T>, t: u64) -> T {
    params.alpha(t)
}

pub fn beta<T: Real>(params: &ProtocolParams<T>, t: u64) -> T {
    params.beta(t)
}

pub fn mu<T: Real>(params: &ProtocolParams<T>, t: u64) -> T {
    params.mu(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_at_zero() {
        let p = ProtocolParams::<f64>::reference_defaults();
        assert_eq!(p.alpha(0), 0.01);
        assert_eq!(p.beta(0), 0.01);
        assert_eq!(p.mu(0), 0.025);
    }

    #[test]
    fn schedules_decrease() {
        let p = ProtocolParams::<f64>::reference_defaults();
        let mut prev = (p.alpha(0), p.beta(0), p.mu(0));
        for t in [1, 2, 10, 1000, 1_000_000] {
            let cur = (p.alpha(t), p.beta(t), p.mu(t));
            assert!(cur.0 <= prev.0 && cur.1 <= prev.1 && cur.2 <= prev.2);
            prev = cur;
        }
        assert!((p.alpha(99) - 0.01 / 100f64.powf(0.075)).abs() < 1e-18);
    }

    #[test]
    fn schedules_in_single_precision() {
        let p = ProtocolParams::<f32>::reference_defaults();
        assert!((p.alpha(0) - 0.01).abs() < 1e-9);
    }
}
