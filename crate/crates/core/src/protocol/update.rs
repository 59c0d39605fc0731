use rayon::prelude::*;

use super::ProtocolParams;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::scalar::Real;

/// Agent estimates: `n` rows of length `dim`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentStates<T> {
    n: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> AgentStates<T> {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self::filled(n, dim, T::zero())
    }

    pub fn filled(n: usize, dim: usize, value: T) -> Self {
        Self {
            n,
            dim,
            data: vec![value; n * dim],
        }
    }

    pub fn from_vec(n: usize, dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * dim {
            return Err(Error::Dimension {
                what: "agent states",
                expected: n * dim,
                got: data.len(),
            });
        }
        Ok(Self { n, dim, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Network average `x̄`.
    pub fn mean(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.dim];
        for i in 0..self.n {
            for (acc, &v) in m.iter_mut().zip(self.row(i)) {
                *acc = *acc + v;
            }
        }
        let nf = T::from_count(self.n);
        m.iter_mut().for_each(|v| *v = *v / nf);
        m
    }
}

/// Runs per-agent updates either inline or on a dedicated rayon pool.
/// Results do not depend on the choice.
#[derive(Debug, Default)]
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn serial() -> Self {
        Self { pool: None }
    }

    pub fn with_threads(threads: usize) -> Result<Self> {
        if threads <= 1 {
            return Ok(Self::serial());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool: Some(pool) })
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }
}

/// Saturating gain: 1 inside the ball `‖y − x‖ ≤ γ`, `γ/‖y − x‖` outside.
/// `‖k·(y − x)‖ ≤ γ` always; `y = x` takes the first branch even for `γ = 0`.
pub fn innovation_gain<T: Real>(y: &[T], x: &[T], gamma: T) -> T {
    let dist = y
        .iter()
        .zip(x)
        .fold(T::zero(), |s, (&a, &b)| s + (a - b) * (a - b))
        .sqrt();
    if dist <= gamma {
        T::one()
    } else {
        gamma / dist
    }
}

/// Reads only row `i`, the rows of `i`'s in-neighbours and `y_i`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn update_agent<T: Real>(
    g: &Digraph,
    x: &AgentStates<T>,
    w: &[T],
    y: &[T],
    gamma: T,
    alpha: T,
    beta: T,
    i: usize,
    out: &mut [T],
) -> T {
    let dim = x.dim();
    let xi = x.row(i);
    let yi = &y[i * dim..(i + 1) * dim];
    let k = innovation_gain(yi, xi, gamma);
    let self_weight = T::from_count(g.out_degree(i)) * w[i];
    let nbrs = g.in_neighbors(i);
    for c in 0..dim {
        let inflow = nbrs.iter().fold(T::zero(), |s, &j| s + w[j] * x.row(j)[c]);
        let consensus = inflow - self_weight * xi[c];
        out[c] = xi[c] + beta * consensus + alpha * k * (yi[c] - xi[c]);
    }
    k
}

/// One synchronous round into caller-provided buffers:
///
/// `x_i⁺ = (1 − β w_i d_i^out) x_i + β Σ_{j∈N_i} w_j x_j + α k_i (y_i − x_i)`
///
/// All reads come from the step-`t` snapshot `x`; `gains` receives `k_i(t)`.
#[allow(clippy::too_many_arguments)]
pub fn rewb_step_into<T: Real>(
    g: &Digraph,
    x: &AgentStates<T>,
    w: &[T],
    y: &[T],
    gamma: T,
    params: &ProtocolParams<T>,
    t: u64,
    exec: &Executor,
    out: &mut AgentStates<T>,
    gains: &mut [T],
) -> Result<()> {
    let n = g.n();
    let dim = x.dim();
    let checks = [
        ("agent states", n, x.n()),
        ("weight vector", n, w.len()),
        ("measurements", n * dim, y.len()),
        ("output states", n * dim, out.as_slice().len()),
        ("gain buffer", n, gains.len()),
    ];
    for (what, expected, got) in checks {
        if expected != got {
            return Err(Error::Dimension {
                what,
                expected,
                got,
            });
        }
    }
    if !x.is_finite() {
        return Err(Error::NonFinite { step: t });
    }
    let alpha = params.alpha(t);
    let beta = params.beta(t);

    let rows = out.as_mut_slice();
    match &exec.pool {
        None => {
            for (i, (row, k)) in rows.chunks_mut(dim).zip(gains.iter_mut()).enumerate() {
                *k = update_agent(g, x, w, y, gamma, alpha, beta, i, row);
            }
        }
        Some(pool) => pool.install(|| {
            rows.par_chunks_mut(dim)
                .zip(gains.par_iter_mut())
                .enumerate()
                .for_each(|(i, (row, k))| {
                    *k = update_agent(g, x, w, y, gamma, alpha, beta, i, row);
                })
        }),
    }
    Ok(())
}

/// Allocating form of [`rewb_step_into`] on the calling thread.
pub fn rewb_step<T: Real>(
    x: &AgentStates<T>,
    w: &[T],
    y: &[T],
    gamma: T,
    params: &ProtocolParams<T>,
    g: &Digraph,
    t: u64,
) -> Result<AgentStates<T>> {
    let mut out = AgentStates::zeros(x.n(), x.dim());
    let mut gains = vec![T::zero(); x.n()];
    rewb_step_into(
        g,
        x,
        w,
        y,
        gamma,
        params,
        t,
        &Executor::serial(),
        &mut out,
        &mut gains,
    )?;
    Ok(out)
}
