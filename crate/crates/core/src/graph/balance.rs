//! Iterative node-weight balancing and the weighted out-degree Laplacian.
//!
//! Each node mixes half of its own weight with half of the average of its
//! in-neighbours' weights, the average taken over its own out-degree:
//! `w⁺ = ½ (I + D_out⁻¹ A) w`. Fixed points satisfy
//! `w_i · d_i^out = Σ_{j ∈ N_i} w_j`, i.e. `L 𝟙 = 0` for
//! `L = (D_out − A)·diag(w)`; `𝟙ᵀ L = 0` holds for every `w`.

use super::{diameter, Digraph};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{count, half, Field, Real};

fn check_len<T>(g: &Digraph, w: &[T]) -> Result<()> {
    if w.len() != g.n() {
        return Err(Error::Dimension {
            what: "weight vector",
            expected: g.n(),
            got: w.len(),
        });
    }
    Ok(())
}

/// One balancing step `P w`. Works over any field, so exact rationals give
/// exact iterates.
pub fn weight_update_step<T: Field>(g: &Digraph, w: &[T]) -> Result<Vec<T>> {
    check_len(g, w)?;
    let h = half::<T>();
    (0..g.n())
        .map(|i| {
            let d = g.out_degree(i);
            if d == 0 {
                return Err(Error::InvalidGraph(format!("vertex {i} has out-degree 0")));
            }
            let inflow = g
                .in_neighbors(i)
                .iter()
                .fold(T::zero(), |acc, &j| acc + w[j].clone());
            Ok(h.clone() * w[i].clone() + h.clone() * inflow / count(d))
        })
        .collect()
}

/// `L = (D_out − A)·diag(w)`: `L[i][i] = d_i^out w_i`, `L[i][j] = −w_j` for `j → i`.
pub fn laplacian<T: Field>(g: &Digraph, w: &[T]) -> Result<Matrix<T>> {
    check_len(g, w)?;
    let mut l = Matrix::zeros(g.n());
    for i in 0..g.n() {
        l[(i, i)] = count::<T>(g.out_degree(i)) * w[i].clone();
        for &j in g.in_neighbors(i) {
            l[(i, j)] = T::zero() - w[j].clone();
        }
    }
    Ok(l)
}

/// `‖L(w) 𝟙‖∞ = max_i |d_i^out w_i − Σ_{j∈N_i} w_j|`.
pub fn balance_residual<T: Real>(g: &Digraph, w: &[T]) -> T {
    (0..g.n())
        .map(|i| {
            let inflow = g
                .in_neighbors(i)
                .iter()
                .fold(T::zero(), |acc, &j| acc + w[j]);
            (T::from_count(g.out_degree(i)) * w[i] - inflow).abs()
        })
        .fold(T::zero(), T::max)
}

/// Result of [`balance_weights`].
#[derive(Clone, Debug, PartialEq)]
pub struct Balanced<T> {
    pub weights: Vec<T>,
    pub iterations: usize,
    /// `‖L(t) 𝟙‖∞` for `t = 0..=iterations`.
    pub residual_history: Vec<T>,
}

pub fn default_balance_tolerance<T: Real>() -> T {
    T::lit(1e-12)
}

/// `10 · n · diameter`.
pub fn default_max_iter(g: &Digraph) -> Result<usize> {
    Ok(10 * g.n() * diameter(g)?)
}

/// Iterates [`weight_update_step`] until `‖P w − w‖∞ ≤ tol`.
///
/// The returned weights are the last iterate `w(t)` whose image moved by at
/// most `tol`, so `‖P w∞ − w∞‖∞ ≤ tol` holds exactly as computed.
pub fn balance_weights<T: Real>(
    g: &Digraph,
    w0: &[T],
    tol: T,
    max_iter: usize,
) -> Result<Balanced<T>> {
    check_len(g, w0)?;
    if !(tol > T::zero()) {
        return Err(Error::Config(format!(
            "balance tolerance must be positive, got {tol}"
        )));
    }
    if let Some(i) = w0.iter().position(|&v| !(v > T::zero())) {
        return Err(Error::Config(format!(
            "initial weight {i} is not strictly positive"
        )));
    }
    g.require_positive_degrees()?;

    let mut w = w0.to_vec();
    let mut history = vec![balance_residual(g, &w)];
    let mut last_step = T::infinity();
    for t in 0..max_iter {
        let next = weight_update_step(g, &w)?;
        last_step = w
            .iter()
            .zip(&next)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        if last_step <= tol {
            return Ok(Balanced {
                weights: w,
                iterations: t,
                residual_history: history,
            });
        }
        w = next;
        history.push(balance_residual(g, &w));
    }
    Err(Error::BalanceNotConverged {
        iterations: max_iter,
        last_step: last_step.as_f64(),
        residual_history: history.into_iter().map(Real::as_f64).collect(),
    })
}

/// Scales so that the largest entry is 1.
pub fn normalize_max<T: Real>(w: &[T]) -> Vec<T> {
    let m = w.iter().copied().fold(T::zero(), T::max);
    w.iter().map(|&v| v / m).collect()
}

/// Empirical constants with `r_t ≤ c · ηᵗ` for a residual series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricEnvelope {
    pub c: f64,
    pub eta: f64,
}

/// Residuals at or below this are treated as round-off and skipped.
pub const ENVELOPE_FLOOR: f64 = 1e-13;

/// Fits `η` by least squares on `ln r_t` over the points above
/// [`ENVELOPE_FLOOR`], then takes the smallest `c` that covers every one of
/// them. `None` with fewer than two usable points or a non-decaying fit.
pub fn fit_geometric_envelope<T: Real>(residuals: &[T]) -> Option<GeometricEnvelope> {
    let pts: Vec<(f64, f64)> = residuals
        .iter()
        .enumerate()
        .map(|(t, r)| (t as f64, r.as_f64()))
        .filter(|&(_, r)| r > ENVELOPE_FLOOR && r.is_finite())
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let eta = (sxy / sxx).exp();
    if !(eta > 0.0 && eta < 1.0) {
        return None;
    }
    let c = pts
        .iter()
        .map(|&(t, r)| r / eta.powf(t))
        .fold(0.0, f64::max);
    Some(GeometricEnvelope { c, eta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    #[test]
    fn envelope_of_exact_geometric_series() {
        let r: Vec<f64> = (0..40).map(|t| 3.0 * 0.5f64.powi(t)).collect();
        let e = fit_geometric_envelope(&r).unwrap();
        assert!((e.eta - 0.5).abs() < 1e-12);
        assert!((e.c - 3.0).abs() < 1e-9);
        assert!(fit_geometric_envelope(&[1.0, 2.0, 4.0]).is_none());
        assert!(fit_geometric_envelope(&[1.0, 0.0]).is_none());
    }

    #[test]
    fn envelope_covers_balancing_residuals() {
        let g = Digraph::unbalanced_triangle();
        let b = balance_weights(&g, &[0.1f64; 3], 1e-15, 1000).unwrap();
        let e = fit_geometric_envelope(&b.residual_history).unwrap();
        for (t, r) in b.residual_history.iter().enumerate() {
            assert!(*r <= e.c * e.eta.powi(t as i32) * (1.0 + 1e-9));
        }
    }

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    #[test]
    fn uniform_weights_fixed_on_cycle() {
        let g = Digraph::cycle(3).unwrap();
        assert_eq!(
            weight_update_step(&g, &[1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn triangle_step_exact() {
        let g = Digraph::unbalanced_triangle();
        // vertex 1 has out-degree 1 and hears from 0 and 2: ½ + (½ + ½)/1
        let w = weight_update_step(&g, &[q(1, 1), q(1, 1), q(1, 1)]).unwrap();
        assert_eq!(w, vec![q(3, 4), q(3, 2), q(1, 1)]);
        let fixed = [q(1, 2), q(3, 2), q(1, 1)];
        assert_eq!(weight_update_step(&g, &fixed).unwrap(), fixed.to_vec());
    }

    #[test]
    fn triangle_laplacian_exact() {
        let g = Digraph::unbalanced_triangle();
        let ones = vec![q(1, 1); 3];
        let l = laplacian(&g, &[q(1, 2), q(3, 2), q(1, 1)]).unwrap();
        assert!(l.row_sums().iter().all(|v| *v == q(0, 1)));
        assert!(l.col_sums().iter().all(|v| *v == q(0, 1)));
        let unit = laplacian(&g, &ones).unwrap();
        assert!(unit.col_sums().iter().all(|v| *v == q(0, 1)));
        assert_eq!(unit.row_sums(), vec![q(1, 1), q(-1, 1), q(0, 1)]);
    }

    #[test]
    fn cycle_laplacian_shape() {
        let g = Digraph::cycle(3).unwrap();
        let l = laplacian(&g, &[1.0, 1.0, 1.0]).unwrap();
        for i in 0..3 {
            assert_eq!(l[(i, i)], 1.0);
            assert_eq!(l.row(i).iter().filter(|&&v| v == -1.0).count(), 1);
        }
        assert!(l.row_sums().iter().all(|&v| v == 0.0));
        assert!(l.col_sums().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn balanced_cycle_stays_put() {
        let g = Digraph::cycle(3).unwrap();
        let b = balance_weights(&g, &[0.2, 0.2, 0.2], 1e-12, 60).unwrap();
        assert_eq!(b.weights, vec![0.2, 0.2, 0.2]);
        assert_eq!(b.iterations, 0);
    }

    #[test]
    fn triangle_converges_to_known_vector() {
        let g = Digraph::unbalanced_triangle();
        let max_iter = default_max_iter(&g).unwrap();
        let b = balance_weights::<f64>(&g, &[0.1, 0.1, 0.1], 1e-12, max_iter).unwrap();
        let w = normalize_max(&b.weights);
        for (a, e) in w.iter().zip([1.0 / 3.0, 1.0, 2.0 / 3.0]) {
            assert!((a - e).abs() < 1e-10);
        }
        let p = weight_update_step(&g, &b.weights).unwrap();
        let step = p
            .iter()
            .zip(&b.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(step <= 1e-12);
    }

    #[test]
    fn exhausted_budget_reports_history() {
        let g = Digraph::unbalanced_triangle();
        match balance_weights(&g, &[1.0, 1.0, 1.0], 1e-15, 3) {
            Err(Error::BalanceNotConverged {
                residual_history,
                iterations,
                ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(residual_history.len(), 4);
                assert_eq!(residual_history[0], 1.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Digraph::cycle(3).unwrap();
        assert!(balance_weights(&g, &[1.0, 1.0], 1e-12, 10).is_err());
        assert!(balance_weights(&g, &[1.0, 0.0, 1.0], 1e-12, 10).is_err());
        assert!(balance_weights(&g, &[1.0, 1.0, 1.0], 0.0, 10).is_err());
        assert!(laplacian(&g, &[1.0]).is_err());
    }
}
