use super::{balance_residual, laplacian, Digraph};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, symmetric_eigenvalues, Matrix};
use crate::scalar::Real;

/// `ψ = 2 / (N · d_in_max · (d_in_max + d_out_max))`, the sufficient upper
/// bound on the consensus step coefficient.
pub fn psi<T: Real>(g: &Digraph) -> T {
    let din = T::from_count(g.max_in_degree());
    let dout = T::from_count(g.max_out_degree());
    T::lit(2.0) / (T::from_count(g.n()) * din * (din + dout))
}

/// Spectral quantities of the balanced Laplacian `L∞ = (D_out − A)·diag(w∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport<T> {
    /// Second-smallest eigenvalue of `L∞ᵀ + L∞`.
    pub lambda2_sym: T,
    /// Largest eigenvalue of `L∞ᵀ + L∞`.
    pub lambda_max_sym: T,
    /// Second-smallest eigenvalue of `L∞ᵀ L∞`.
    pub lambda2_gram: T,
    /// Largest eigenvalue of `L∞ᵀ L∞`.
    pub lambda_max_gram: T,
    pub psi: T,
    pub beta: T,
    /// `‖J − β L∞‖₂` with `J = I − 𝟙𝟙ᵀ/N`.
    pub contraction_norm: T,
}

impl<T: Real> SpectralReport<T> {
    /// Upper bound on `μ₀` for a given `β₀` and `c₁`:
    /// `(λ_m − β₀ λ_M) β₀ / (2 c₁)`.
    pub fn mu0_bound(&self, beta0: T, c1: T) -> T {
        (self.lambda2_sym - beta0 * self.lambda_max_gram) * beta0 / (T::lit(2.0) * c1)
    }
}

/// Relative balance tolerance accepted by [`spectral_report`].
pub const SPECTRAL_BALANCE_TOL: f64 = 1e-8;

pub fn spectral_report<T: Real>(g: &Digraph, w_inf: &[T], beta: T) -> Result<SpectralReport<T>> {
    let l = laplacian(g, w_inf)?;
    let scale =
        w_inf.iter().copied().fold(T::zero(), T::max) * T::from_count(g.max_out_degree().max(1));
    let residual = balance_residual(g, w_inf) / scale;
    if !(residual <= T::lit(SPECTRAL_BALANCE_TOL)) {
        return Err(Error::NotBalanced {
            residual: residual.as_f64(),
        });
    }

    let sym = l.transpose().add(&l);
    let gram = l.gram();
    let e_sym = symmetric_eigenvalues(&sym)?;
    let e_gram = symmetric_eigenvalues(&gram)?;

    let n = g.n();
    let inv_n = T::one() / T::from_count(n);
    let mut j = Matrix::identity(n);
    for r in 0..n {
        for c in 0..n {
            j[(r, c)] = j[(r, c)] - inv_n;
        }
    }
    let contraction_norm = spectral_norm(&j.sub(&l.scale(beta)))?;

    Ok(SpectralReport {
        lambda2_sym: e_sym[1],
        lambda_max_sym: e_sym[n - 1],
        lambda2_gram: e_gram[1],
        lambda_max_gram: e_gram[n - 1],
        psi: psi(g),
        beta,
        contraction_norm,
    })
}
