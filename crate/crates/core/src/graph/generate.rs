use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_strongly_connected, Digraph};
use crate::error::{Error, Result};

pub const MAX_GENERATION_ATTEMPTS: usize = 1000;

/// Samples `G(n, p)` over ordered pairs and rejects samples that are not
/// strongly connected. Deterministic in `(n, p, seed)`.
pub fn generate_random_digraph(n: usize, p: f64, seed: u64) -> Result<Digraph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!(
            "need at least 2 vertices, got {n}"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidGraph(format!(
            "edge probability must be in (0, 1], got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let mut edges = Vec::new();
        for from in 0..n {
            for to in 0..n {
                if from != to && rng.gen_bool(p) {
                    edges.push((from, to));
                }
            }
        }
        let g = Digraph::new(n, edges)?;
        if is_strongly_connected(&g) {
            return Ok(g);
        }
    }
    Err(Error::RejectionBudget {
        n,
        p,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}
