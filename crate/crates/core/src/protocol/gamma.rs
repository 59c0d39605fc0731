use super::ProtocolParams;
use crate::scalar::Real;

/// Two-state bound system. `γ = γ₁ + γ₂` saturates the innovation step;
/// `γ₁` tracks disagreement and `γ₂` tracks the bias of the network average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaSystem<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub t: u64,
}

impl<T: Real> GammaSystem<T> {
    /// `γ₁(0) = 0`, `γ₂(0) = Θ`.
    pub fn initial(theta_bound: T) -> Self {
        Self {
            gamma1: T::zero(),
            gamma2: theta_bound,
            t: 0,
        }
    }

    pub fn gamma(&self) -> T {
        self.gamma1 + self.gamma2
    }

    /// Advances one step for a network of `n` agents:
    ///
    /// ```text
    /// γ₁⁺ = (1 − c₁μ(t) + (1+√N)α(t)) γ₁ + (1+√N)α(t) γ₂ + c₂ ηᵗ
    /// γ₂⁺ = α(t) γ₁ + (1 − α(t)(1−2s)) γ₂ + 1/(1+t)^θ₁
    /// ```
    pub fn step(&self, params: &ProtocolParams<T>, n: usize) -> Self {
        let t = self.t;
        let a = params.alpha(t);
        let mu = params.mu(t);
        let tf = T::from_u64(t).expect("step as float");
        let spread = (T::one() + T::from_count(n).sqrt()) * a;
        let eta_t = params.eta.powf(tf);
        let two = T::lit(2.0);

        let gamma1 = (T::one() - params.c1 * mu + spread) * self.gamma1
            + spread * self.gamma2
            + params.c2 * eta_t;
        let gamma2 = a * self.gamma1
            + (T::one() - a * (T::one() - two * params.s)) * self.gamma2
            + T::one() / (T::one() + tf).powf(params.theta1);
        Self {
            gamma1,
            gamma2,
            t: t + 1,
        }
    }
}

pub fn gamma_step<T: Real>(
    gs: &GammaSystem<T>,
    params: &ProtocolParams<T>,
    n: usize,
) -> GammaSystem<T> {
    gs.step(params, n)
}
