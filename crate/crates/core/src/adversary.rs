//! Parameter trajectories, bad-set selection and spoofed measurements.
//!
//! Every function here is a pure function of `(seed, t, agent)`; nothing is
//! cached between steps, so measurements can be evaluated in any order or on
//! any number of threads.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rng::{purpose, KeyedRng};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum TrajectoryKind<T> {
    /// `base + amplitude / (t + 1)` on every component.
    Decaying {
        base: T,
        amplitude: T,
    },
    Constant(T),
    /// Scalar value per step, broadcast to every component. The last entry is
    /// held past the end of the table.
    Table(Vec<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterTrajectory<T> {
    pub dim: usize,
    /// Known bound `Θ ≥ ‖θ*(t)‖`.
    pub theta_bound: T,
    /// Decay exponent of the allowed variation `1/(1+t)^θ₁`.
    pub theta1: T,
    pub kind: TrajectoryKind<T>,
}

impl<T: Real> ParameterTrajectory<T> {
    /// Scalar `25 + 1/(t+1)` with `Θ = 50`, `θ₁ = 1`.
    pub fn reference_default() -> Self {
        Self {
            dim: 1,
            theta_bound: T::lit(50.0),
            theta1: T::one(),
            kind: TrajectoryKind::Decaying {
                base: T::lit(25.0),
                amplitude: T::one(),
            },
        }
    }

    pub fn constant(value: T, theta_bound: T) -> Self {
        Self {
            dim: 1,
            theta_bound,
            theta1: T::one(),
            kind: TrajectoryKind::Constant(value),
        }
    }

    /// Per-component value at step `t`.
    pub fn component(&self, t: u64) -> T {
        match &self.kind {
            TrajectoryKind::Decaying { base, amplitude } => {
                *base + *amplitude / (T::from_u64(t).expect("step as float") + T::one())
            }
            TrajectoryKind::Constant(v) => *v,
            TrajectoryKind::Table(vals) => {
                let idx = usize::try_from(t)
                    .unwrap_or(usize::MAX)
                    .min(vals.len().saturating_sub(1));
                vals.get(idx).copied().unwrap_or_else(T::zero)
            }
        }
    }

    pub fn theta_star(&self, t: u64) -> Vec<T> {
        vec![self.component(t); self.dim]
    }

    pub fn norm(&self, t: u64) -> T {
        self.component(t).abs() * T::from_count(self.dim).sqrt()
    }

    /// Limit value as `t → ∞` (last table entry for tables).
    pub fn limit(&self) -> Vec<T> {
        let v = match &self.kind {
            TrajectoryKind::Decaying { base, .. } => *base,
            TrajectoryKind::Constant(v) => *v,
            TrajectoryKind::Table(vals) => vals.last().copied().unwrap_or_else(T::zero),
        };
        vec![v; self.dim]
    }

    /// Checks `‖θ*(t)‖ ≤ Θ` for `t ≤ horizon` and
    /// `‖θ*(t+1) − θ*(t)‖ ≤ 1/(1+t)^θ₁` for `t < horizon`.
    pub fn validate(&self, horizon: u64) -> Vec<TrajectoryViolation<T>> {
        let mut out = Vec::new();
        let sqrt_dim = T::from_count(self.dim).sqrt();
        for t in 0..=horizon {
            let norm = self.norm(t);
            if norm > self.theta_bound {
                out.push(TrajectoryViolation {
                    t,
                    kind: ViolationKind::Norm {
                        norm,
                        bound: self.theta_bound,
                    },
                });
            }
            if t < horizon {
                let delta = (self.component(t + 1) - self.component(t)).abs() * sqrt_dim;
                let tf = T::from_u64(t).expect("step as float");
                let bound = T::one() / (T::one() + tf).powf(self.theta1);
                if delta > bound {
                    out.push(TrajectoryViolation {
                        t,
                        kind: ViolationKind::Variation { delta, bound },
                    });
                }
            }
        }
        out
    }
}

/// Free-function form of [`ParameterTrajectory::component`] broadcast to a vector.
pub fn theta_star<T: Real>(traj: &ParameterTrajectory<T>, t: u64) -> Vec<T> {
    traj.theta_star(t)
}

pub fn validate_trajectory<T: Real>(
    traj: &ParameterTrajectory<T>,
    horizon: u64,
) -> Vec<TrajectoryViolation<T>> {
    traj.validate(horizon)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryViolation<T> {
    pub t: u64,
    pub kind: ViolationKind<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind<T> {
    Norm { norm: T, bound: T },
    Variation { delta: T, bound: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// One seed-drawn subset for the whole run.
    Fixed,
    /// A fresh uniform subset of the same size at every step.
    Resample,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpoofModel<T> {
    /// Each component of `ζ_i(t)` uniform on `[−Θ, 0]`, independent per agent and step.
    UniformNegative,
    /// Every component of `ζ_i(t)` equal to the given value.
    Constant(T),
    Table(SpoofTable<T>),
}

/// Scripted spoof values keyed by step and optionally agent. Values hold
/// until the next entry: `ζ_i(t)` is the most recent entry at or before `t`
/// that is either blank-agent or names `i`, with the agent-specific one
/// winning a tie. Before the first such entry `ζ = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpoofTable<T> {
    entries: BTreeMap<Option<usize>, BTreeMap<u64, T>>,
}

impl<T: Real> SpoofTable<T> {
    pub fn from_entries(entries: impl IntoIterator<Item = TableEntry>) -> Self {
        let mut map: BTreeMap<Option<usize>, BTreeMap<u64, T>> = BTreeMap::new();
        for e in entries {
            map.entry(e.agent).or_default().insert(e.t, T::lit(e.value));
        }
        Self { entries: map }
    }

    fn latest(&self, agent: Option<usize>, t: u64) -> Option<(u64, T)> {
        self.entries
            .get(&agent)?
            .range(..=t)
            .next_back()
            .map(|(&s, &v)| (s, v))
    }

    pub fn get(&self, t: u64, agent: usize) -> T {
        match (self.latest(Some(agent), t), self.latest(None, t)) {
            (Some((ta, va)), Some((tb, _))) if ta >= tb => va,
            (_, Some((_, vb))) => vb,
            (Some((_, va)), None) => va,
            (None, None) => T::zero(),
        }
    }
}

/// One row of a custom table CSV: `t, agent-or-blank, value`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct TableEntry {
    pub t: u64,
    pub agent: Option<usize>,
    pub value: f64,
}

pub fn read_table_csv(path: impl AsRef<Path>) -> Result<Vec<TableEntry>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_table_csv(file)
}

/// Parses `t,agent,value` rows with a header line. `#` lines are comments.
pub fn parse_table_csv(reader: impl std::io::Read) -> Result<Vec<TableEntry>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Builds a per-step trajectory table from blank-agent rows. Steps missing
/// from the table hold the previous value.
pub fn trajectory_table<T: Real>(entries: &[TableEntry]) -> Result<Vec<T>> {
    let mut by_t = BTreeMap::new();
    for e in entries {
        if e.agent.is_some() {
            return Err(Error::Config(format!(
                "trajectory table row at t = {} names an agent",
                e.t
            )));
        }
        by_t.insert(e.t, e.value);
    }
    let Some((&last_t, _)) = by_t.iter().next_back() else {
        return Err(Error::Config("trajectory table is empty".into()));
    };
    let first = *by_t.values().next().expect("non-empty");
    let mut vals = Vec::with_capacity(last_t as usize + 1);
    let mut cur = first;
    for t in 0..=last_t {
        if let Some(&v) = by_t.get(&t) {
            cur = v;
        }
        vals.push(T::lit(cur));
    }
    Ok(vals)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackPolicy<T> {
    /// Resilience index: at most `⌊s·N⌋` agents are bad at any step.
    pub s: T,
    pub membership: Membership,
    pub spoof: SpoofModel<T>,
    pub seed: u64,
}

impl<T: Real> AttackPolicy<T> {
    pub fn none() -> Self {
        Self {
            s: T::zero(),
            membership: Membership::Fixed,
            spoof: SpoofModel::UniformNegative,
            seed: 0,
        }
    }

    /// `⌊s·N⌋`. A relative slack of 1e-9 absorbs binary roundoff such as
    /// `0.29 · 100 = 28.999…`.
    pub fn bad_count(&self, n: usize) -> Result<usize> {
        if !(self.s >= T::zero() && self.s < T::lit(0.5)) {
            return Err(Error::Config(format!(
                "resilience index must be in [0, 0.5), got {}",
                self.s
            )));
        }
        let sn = self.s.as_f64() * n as f64;
        let b = (sn * (1.0 + 1e-9)).floor() as usize;
        if b > n {
            return Err(Error::Config(format!(
                "bad set of size {b} exceeds N = {n}"
            )));
        }
        Ok(b)
    }

    /// Bad set `B(t)`, sorted ascending.
    pub fn select_bad_set(&self, t: u64, n: usize) -> Result<Vec<usize>> {
        let b = self.bad_count(n)?;
        if b == 0 {
            return Ok(Vec::new());
        }
        let mut rng = match self.membership {
            Membership::Fixed => KeyedRng::new(self.seed, purpose::BAD_SET_FIXED, 0, 0),
            Membership::Resample => KeyedRng::new(self.seed, purpose::BAD_SET_STEP, 0, t),
        };
        let mut set = index::sample(&mut rng, n, b).into_vec();
        set.sort_unstable();
        Ok(set)
    }

    /// `ζ_i(t)` for a bad agent.
    pub fn spoof(&self, traj: &ParameterTrajectory<T>, t: u64, agent: usize) -> Vec<T> {
        match &self.spoof {
            SpoofModel::UniformNegative => {
                let mut rng = KeyedRng::new(self.seed, purpose::SPOOF, agent as u64, t);
                let theta = traj.theta_bound.as_f64();
                (0..traj.dim)
                    .map(|_| T::lit(rng.gen_range(-theta..=0.0)))
                    .collect()
            }
            SpoofModel::Constant(v) => vec![*v; traj.dim],
            SpoofModel::Table(table) => vec![table.get(t, agent); traj.dim],
        }
    }
}

pub fn select_bad_set<T: Real>(policy: &AttackPolicy<T>, t: u64, n: usize) -> Result<Vec<usize>> {
    policy.select_bad_set(t, n)
}

/// `y_i(t)`: the true parameter for good agents, plus `ζ_i(t)` for bad ones.
pub fn measure<T: Real>(
    traj: &ParameterTrajectory<T>,
    policy: &AttackPolicy<T>,
    t: u64,
    agent: usize,
    n: usize,
) -> Result<Vec<T>> {
    let bad = policy.select_bad_set(t, n)?;
    let mut y = traj.theta_star(t);
    if bad.binary_search(&agent).is_ok() {
        for (yk, zk) in y.iter_mut().zip(policy.spoof(traj, t, agent)) {
            *yk = *yk + zk;
        }
    }
    Ok(y)
}

/// All measurements at step `t`, written row-major into `out` (`n × dim`).
/// Returns the bad set.
pub fn measure_all<T: Real>(
    traj: &ParameterTrajectory<T>,
    policy: &AttackPolicy<T>,
    t: u64,
    n: usize,
    out: &mut [T],
) -> Result<Vec<usize>> {
    let dim = traj.dim;
    if out.len() != n * dim {
        return Err(Error::Dimension {
            what: "measurement buffer",
            expected: n * dim,
            got: out.len(),
        });
    }
    let theta = traj.component(t);
    out.iter_mut().for_each(|v| *v = theta);
    let bad = policy.select_bad_set(t, n)?;
    for &i in &bad {
        for (yk, zk) in out[i * dim..(i + 1) * dim]
            .iter_mut()
            .zip(policy.spoof(traj, t, i))
        {
            *yk = *yk + zk;
        }
    }
    Ok(bad)
}
