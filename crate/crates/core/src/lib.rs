//! Resilient distributed estimation of a slowly varying parameter over
//! directed graphs.
//!
//! Agents run a consensus+innovations update whose consensus part uses
//! node weights that are balanced on the fly, and whose innovation part is
//! saturated by a scalar envelope `γ(t)` produced by a two-state bound
//! system. A subset of agents may have spoofed sensors at every step.
//!
//! The numeric core is generic over the scalar type. Routines that only need
//! field arithmetic (weight balancing steps, Laplacian assembly) accept any
//! [`Field`], including exact rationals; everything that needs square roots
//! or powers is bounded by [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the simulator and CLI
//! use.
//!
//! ```
//! use rewb_core::{engine, graph, Experiment};
//!
//! # fn main() -> rewb_core::Result<()> {
//! let g = graph::generate_random_digraph(30, 0.5, 42)?;
//! let mut cfg = Experiment::new(g, 42);
//! cfg.horizon = 1_000;
//! let record = engine::run(&cfg)?;
//! assert_eq!(record.summary.envelope_violations, 0);
//! # Ok(())
//! # }
//! ```

// `!(x > 0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod config;
pub mod engine;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod protocol;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::Digraph;
pub use scalar::{Field, Real};

/// Protocol parameters in double precision.
pub type Params = protocol::ProtocolParams<f64>;
/// Bound system state in double precision.
pub type Gamma = protocol::GammaSystem<f64>;
/// Agent estimates in double precision.
pub type States = protocol::AgentStates<f64>;
/// Trajectory of the unknown parameter in double precision.
pub type Trajectory = adversary::ParameterTrajectory<f64>;
/// Attack policy in double precision.
pub type Attack = adversary::AttackPolicy<f64>;
/// Fully resolved experiment in double precision.
pub type Experiment = engine::ExperimentConfig<f64>;
/// Output of one simulation run in double precision.
pub type Record = engine::RunRecord<f64>;
/// Spectral diagnostics in double precision.
pub type Spectral = graph::SpectralReport<f64>;
