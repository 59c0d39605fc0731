//! JSON run configuration.
//!
//! Every section and field is optional; the defaults reproduce the N = 100,
//! p = 0.5 study with |B| = 40 uniformly spoofed agents. Unknown keys are
//! rejected. Relative paths (graph file, tables) resolve against the
//! directory containing the config file.
//!
//! ```json
//! {
//!   "graph":      {"n": 100, "p": 0.5, "seed": null, "file": null, "edges": null},
//!   "protocol":   {"alpha0": 0.01, "alpha1": 0.075, "beta0": 0.01, "beta1": 0.01,
//!                  "mu0": 0.025, "mu1": 0.025, "c1": 75, "c2": 75, "eta": 0.5,
//!                  "initial_weight": 0.1, "weight_mode": "dynamic", "s": null,
//!                  "pre_balance_rounds": 0},
//!   "trajectory": {"kind": "decaying", "base": 25, "amplitude": 1, "dimension": 1,
//!                  "theta_bound": 50, "theta1": 1, "table": null},
//!   "attack":     {"s": 0.405, "membership": "fixed", "spoof": "uniform_negative",
//!                  "constant": null, "table": null, "seed": null},
//!   "run":        {"horizon": 100000, "seed": 42, "stride": 10, "strict": false,
//!                  "workers": null, "initial_value": null,
//!                  "outputs": {"csv": "results.csv", "summary": "summary.json", "svg": null}}
//! }
//! ```
//!
//! `graph.seed` and `attack.seed` default to `run.seed`. `protocol.s`
//! defaults to `attack.s`. `attack.constant` defaults to `5·Θ`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversary::{
    read_table_csv, trajectory_table, AttackPolicy, Membership, ParameterTrajectory, SpoofModel,
    SpoofTable, TrajectoryKind,
};
use crate::engine::ExperimentConfig;
use crate::error::{Error, Result};
use crate::graph::{generate_random_digraph, Digraph, GraphFile};
use crate::protocol::{AgentStates, ProtocolParams, WeightMode};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub graph: GraphSection,
    pub protocol: ProtocolSection,
    pub trajectory: TrajectorySection,
    pub attack: AttackSection,
    pub run: RunSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphSection {
    pub n: usize,
    pub p: f64,
    pub seed: Option<u64>,
    /// Graph JSON file; takes precedence over generation.
    pub file: Option<PathBuf>,
    /// Inline edge list on `n` vertices; takes precedence over generation.
    pub edges: Option<Vec<[usize; 2]>>,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self {
            n: 100,
            p: 0.5,
            seed: None,
            file: None,
            edges: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightModeName {
    #[default]
    Dynamic,
    Frozen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub c1: f64,
    pub c2: f64,
    pub eta: f64,
    pub initial_weight: f64,
    pub weight_mode: WeightModeName,
    pub s: Option<f64>,
    pub pre_balance_rounds: usize,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = ProtocolParams::<f64>::reference_defaults();
        Self {
            alpha0: p.alpha0,
            alpha1: p.alpha1,
            beta0: p.beta0,
            beta1: p.beta1,
            mu0: p.mu0,
            mu1: p.mu1,
            c1: p.c1,
            c2: p.c2,
            eta: p.eta,
            initial_weight: p.initial_weight,
            weight_mode: WeightModeName::Dynamic,
            s: None,
            pre_balance_rounds: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKindName {
    /// `base + amplitude/(t+1)`.
    #[default]
    Decaying,
    Constant,
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    pub kind: TrajectoryKindName,
    pub base: f64,
    pub amplitude: f64,
    pub dimension: usize,
    pub theta_bound: f64,
    pub theta1: f64,
    pub table: Option<PathBuf>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            kind: TrajectoryKindName::Decaying,
            base: 25.0,
            amplitude: 1.0,
            dimension: 1,
            theta_bound: 50.0,
            theta1: 1.0,
            table: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipName {
    #[default]
    Fixed,
    Resample,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpoofName {
    #[default]
    UniformNegative,
    Constant,
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSection {
    pub s: f64,
    pub membership: MembershipName,
    pub spoof: SpoofName,
    pub constant: Option<f64>,
    pub table: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Default for AttackSection {
    fn default() -> Self {
        Self {
            s: 0.405,
            membership: MembershipName::Fixed,
            spoof: SpoofName::UniformNegative,
            constant: None,
            table: None,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub svg: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            csv: "results.csv".into(),
            summary: "summary.json".into(),
            svg: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub horizon: u64,
    pub seed: u64,
    pub stride: u64,
    pub strict: bool,
    pub workers: Option<usize>,
    /// Every agent starts at this value instead of 0.
    pub initial_value: Option<f64>,
    pub outputs: OutputSection,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            horizon: 100_000,
            seed: 42,
            stride: 10,
            strict: false,
            workers: None,
            initial_value: None,
            outputs: OutputSection::default(),
        }
    }
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_graph(&self, base: &Path) -> Result<Digraph> {
        let g = &self.graph;
        if let Some(file) = &g.file {
            let (graph, _) = Digraph::load(resolve_path(base, file))?;
            return Ok(graph);
        }
        if let Some(edges) = &g.edges {
            return Digraph::from_file(&GraphFile {
                n: g.n,
                edges: edges.clone(),
            });
        }
        generate_random_digraph(g.n, g.p, g.seed.unwrap_or(self.run.seed))
    }

    /// Resolves into a runnable experiment. `base` is the directory that
    /// relative paths are taken from.
    pub fn resolve(&self, base: &Path) -> Result<ExperimentConfig<f64>> {
        let graph = self.build_graph(base)?;
        let n = graph.n();
        let tr = &self.trajectory;
        if tr.dimension < 1 {
            return Err(Error::Config(
                "trajectory.dimension must be at least 1".into(),
            ));
        }
        let kind = match tr.kind {
            TrajectoryKindName::Decaying => TrajectoryKind::Decaying {
                base: tr.base,
                amplitude: tr.amplitude,
            },
            TrajectoryKindName::Constant => TrajectoryKind::Constant(tr.base),
            TrajectoryKindName::Table => {
                let path = tr.table.as_ref().ok_or_else(|| {
                    Error::Config("trajectory.kind = table needs trajectory.table".into())
                })?;
                TrajectoryKind::Table(trajectory_table(&read_table_csv(resolve_path(
                    base, path,
                ))?)?)
            }
        };
        let trajectory = ParameterTrajectory {
            dim: tr.dimension,
            theta_bound: tr.theta_bound,
            theta1: tr.theta1,
            kind,
        };

        let at = &self.attack;
        let spoof = match at.spoof {
            SpoofName::UniformNegative => SpoofModel::UniformNegative,
            SpoofName::Constant => {
                SpoofModel::Constant(at.constant.unwrap_or(5.0 * tr.theta_bound))
            }
            SpoofName::Table => {
                let path = at.table.as_ref().ok_or_else(|| {
                    Error::Config("attack.spoof = table needs attack.table".into())
                })?;
                SpoofModel::Table(SpoofTable::from_entries(read_table_csv(resolve_path(
                    base, path,
                ))?))
            }
        };
        let attack = AttackPolicy {
            s: at.s,
            membership: match at.membership {
                MembershipName::Fixed => Membership::Fixed,
                MembershipName::Resample => Membership::Resample,
            },
            spoof,
            seed: at.seed.unwrap_or(self.run.seed),
        };

        let pr = &self.protocol;
        let params = ProtocolParams {
            alpha0: pr.alpha0,
            alpha1: pr.alpha1,
            beta0: pr.beta0,
            beta1: pr.beta1,
            mu0: pr.mu0,
            mu1: pr.mu1,
            c1: pr.c1,
            c2: pr.c2,
            eta: pr.eta,
            s: pr.s.unwrap_or(at.s),
            theta_bound: tr.theta_bound,
            theta1: tr.theta1,
            initial_weight: pr.initial_weight,
            weight_mode: match pr.weight_mode {
                WeightModeName::Dynamic => WeightMode::Dynamic,
                WeightModeName::Frozen => WeightMode::Frozen,
            },
        };

        let rn = &self.run;
        Ok(ExperimentConfig {
            graph,
            params,
            trajectory,
            attack,
            horizon: rn.horizon,
            stride: rn.stride,
            strict: rn.strict,
            workers: rn.workers.unwrap_or(1),
            pre_balance_rounds: pr.pre_balance_rounds,
            initial_state: rn
                .initial_value
                .map(|v| AgentStates::filled(n, tr.dimension, v)),
            initial_gamma: None,
        })
    }
}
