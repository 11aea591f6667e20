//! Seeded synthetic graphs for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{validate_walkable, Graph};

/// G(n, p), optionally with weights drawn uniformly from `[0.5, 2)`.
pub fn erdos_renyi<R: Rng>(n: usize, p: f64, weighted: bool, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                let w = if weighted { rng.random_range(0.5..2.0) } else { 1.0 };
                edges.push((i, j, w));
            }
        }
    }
    Graph::weighted(n, &edges)
}

/// G(n, p) resampled until connected and non-bipartite. Attempt `k` draws
/// from ChaCha stream `k` of `seed`.
pub fn random_walkable(n: usize, p: f64, weighted: bool, seed: u64) -> Result<Graph> {
    for attempt in 0..10_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let g = erdos_renyi(n, p, weighted, &mut rng)?;
        if validate_walkable(&g).is_ok() {
            return Ok(g);
        }
    }
    Err(Error::invalid(format!("no walkable G({n}, {p}) found")))
}

/// Stochastic block model with the given block sizes. Returns the graph and
/// each node's block index; nodes are numbered block by block.
pub fn stochastic_block_model(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<(Graph, Vec<usize>)> {
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
        }
    }
    let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let n = block.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if block[i] == block[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok((Graph::unweighted(n, &edges)?, block))
}
