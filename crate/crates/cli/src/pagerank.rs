//! PageRank over transition counts: an entity gains score from the
//! entities whose workers move to it.

use rankset::{ranks_from_merits, Merits, Ranking};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::transitions::TransitionTable;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub ranking: Ranking,
    pub iterations: usize,
}

/// Power iteration on the column-stochastic matrix of outgoing shares.
/// Entities without outgoing moves spread their score uniformly.
pub fn pagerank(t: &TransitionTable, damping: f64, tol: f64, max_iter: usize) -> Result<PageRank> {
    let n = t.entities();
    if n == 0 {
        return Err(CliError::Data("transition table is empty".into()));
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(CliError::Usage(format!("damping must lie in (0, 1), got {damping}")));
    }
    let mut out_total = vec![0u64; n];
    for (&(a, _), &c) in &t.counts {
        out_total[a] += c;
    }
    let links: Vec<(usize, usize, f64)> =
        t.counts.iter().map(|(&(a, b), &c)| (a, b, c as f64 / out_total[a] as f64)).collect();
    let uniform = 1.0 / n as f64;
    let mut score = vec![uniform; n];
    for iter in 1..=max_iter {
        let dangling: f64 = (0..n).filter(|&i| out_total[i] == 0).map(|i| score[i]).sum();
        let base = (1.0 - damping) * uniform + damping * dangling * uniform;
        let mut next = vec![base; n];
        for &(a, b, share) in &links {
            next[b] += damping * share * score[a];
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = next.iter().zip(&score).map(|(x, y)| (x - y).abs()).sum();
        score = next;
        if delta < tol {
            let negated = Merits::new(score.iter().map(|s| -s).collect()).map_err(CliError::data)?;
            return Ok(PageRank { ranking: ranks_from_merits(&negated), scores: score, iterations: iter });
        }
    }
    Err(CliError::Compute(rankset::Error::NoConvergence("pagerank power iteration")))
}
