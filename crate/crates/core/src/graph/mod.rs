//! Directed communication graphs.
//!
//! An edge `(from, to)` means `from` sends its estimate to `to`. Row `i` of
//! the adjacency matrix therefore lists the in-neighbours of `i`:
//! `A[i][j] = 1` iff `j → i`.

mod balance;
mod connectivity;
mod generate;
mod spectral;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{count, Field};

pub use balance::{
    balance_residual, balance_weights, default_balance_tolerance, default_max_iter,
    fit_geometric_envelope, laplacian, normalize_max, weight_update_step, Balanced,
    GeometricEnvelope, ENVELOPE_FLOOR,
};
pub use connectivity::{
    bfs_distances, diameter, is_strongly_connected, strongly_connected_components,
};
pub use generate::{generate_random_digraph, MAX_GENERATION_ATTEMPTS};
pub use spectral::{psi, spectral_report, SpectralReport};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Digraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    in_nbrs: Vec<Vec<usize>>,
    out_nbrs: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds a digraph on `n ≥ 2` vertices. Self-loops, duplicate edges and
    /// out-of-range endpoints are rejected. Vertices with zero degree are
    /// allowed here (so that non-strongly-connected graphs can be analysed);
    /// see [`Digraph::require_positive_degrees`].
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!(
                "need at least 2 vertices, got {n}"
            )));
        }
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            if from >= n || to >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({from}, {to}) out of range for n = {n}"
                )));
            }
            if from == to {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {from}")));
            }
            if !set.insert((from, to)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({from}, {to})"
                )));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut in_nbrs = vec![Vec::new(); n];
        let mut out_nbrs = vec![Vec::new(); n];
        for &(from, to) in &edges {
            in_nbrs[to].push(from);
            out_nbrs[from].push(to);
        }
        Ok(Self {
            n,
            edges,
            in_nbrs,
            out_nbrs,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(
            n,
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))),
        )
    }

    /// Directed cycle `0 → 1 → … → n-1 → 0`.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Cycle with both directions present. Symmetric, hence balanced with unit weights.
    pub fn bidirectional_ring(n: usize) -> Result<Self> {
        let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for i in 0..n {
            let j = (i + 1) % n;
            edges.insert((i, j));
            edges.insert((j, i));
        }
        Self::new(n, edges)
    }

    /// Three-vertex digraph `{0→1, 0→2, 1→2, 2→0, 2→1}`.
    ///
    /// Its balancing weights are proportional to `(0.5, 1.5, 1)`; with unit
    /// weights it is unbalanced. Used as a small worked fixture.
    pub fn unbalanced_triangle() -> Self {
        Self::new(3, [(0, 1), (0, 2), (1, 2), (2, 0), (2, 1)]).expect("valid fixture")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices that send to `i`.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_nbrs[i]
    }

    /// Vertices that `i` sends to.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_nbrs[i]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_nbrs[i].len()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_nbrs[i].len()
    }

    pub fn max_in_degree(&self) -> usize {
        self.in_nbrs.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_out_degree(&self) -> usize {
        self.out_nbrs.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.binary_search(&(from, to)).is_ok()
    }

    /// Every edge has its reverse.
    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|&(a, b)| self.has_edge(b, a))
    }

    /// Fails if any vertex has zero in- or out-degree; the weight update
    /// divides by out-degrees.
    pub fn require_positive_degrees(&self) -> Result<()> {
        for i in 0..self.n {
            if self.out_degree(i) == 0 {
                return Err(Error::InvalidGraph(format!("vertex {i} has out-degree 0")));
            }
            if self.in_degree(i) == 0 {
                return Err(Error::InvalidGraph(format!("vertex {i} has in-degree 0")));
            }
        }
        Ok(())
    }

    /// Dense `A` with `A[i][j] = 1` iff `j → i`.
    pub fn adjacency<T: Field>(&self) -> Matrix<T> {
        let mut a = Matrix::zeros(self.n);
        for &(from, to) in &self.edges {
            a[(to, from)] = T::one();
        }
        a
    }

    /// Dense `D^out`.
    pub fn out_degree_matrix<T: Field>(&self) -> Matrix<T> {
        let mut d = Matrix::zeros(self.n);
        for i in 0..self.n {
            d[(i, i)] = count(self.out_degree(i));
        }
        d
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Self::new(file.n, file.edges.iter().map(|e| (e[0], e[1])))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("graph serializes")
    }

    /// Hex SHA-256 of [`Digraph::to_json`].
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s)?;
        Self::from_file(&file)
    }

    /// Reads a graph file. Returns the graph and whether it is strongly connected.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, bool)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let g = Self::from_json(&text)?;
        let sc = is_strongly_connected(&g);
        Ok((g, sc))
    }
}

/// On-disk graph: `{"n": <int>, "edges": [[from, to], ...]}`, 0-based ids,
/// `(from, to)` = `(sender, receiver)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}
