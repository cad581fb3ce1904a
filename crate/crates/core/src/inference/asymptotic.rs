//! Asymptotic p-values from the least favorable null: every edge at 1/2.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ident::ConstraintSystem;
use crate::inference::exact::Tail;
use crate::inference::mle::{restricted_mle, test_statistic};

pub const DEFAULT_REPLICATIONS: usize = 20_000;

/// Random generator for replication `index` under a master `seed`.
/// Streams are independent, so results do not depend on scheduling.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulated null distribution of the statistic for one design and one
/// constraint system. Reusable across observed statistics.
#[derive(Debug, Clone)]
pub struct SimulatedNull {
    sorted: Vec<f64>,
    seed: u64,
}

impl SimulatedNull {
    pub fn new(games: &[u64], c: &ConstraintSystem, replications: usize, seed: u64) -> Result<Self> {
        if replications == 0 {
            return Err(Error::InvalidArgument("at least one replication is required".into()));
        }
        if games.len() != c.edge_count() {
            return Err(Error::LengthMismatch { expected: c.edge_count(), got: games.len() });
        }
        let dists = games
            .iter()
            .map(|&n| Binomial::new(n, 0.5).map_err(|e| Error::InvalidArgument(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let weights: Vec<f64> = games.iter().map(|&n| n as f64).collect();
        let mut sorted = (0..replications)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                let p_hat: Vec<f64> =
                    dists.iter().zip(games).map(|(b, &n)| b.sample(&mut rng) as f64 / n as f64).collect();
                let fit = restricted_mle(&p_hat, &weights, c)?;
                Ok(test_statistic(&p_hat, &fit.p_star, &weights))
            })
            .collect::<Result<Vec<f64>>>()?;
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted, seed })
    }

    pub fn replications(&self) -> usize {
        self.sorted.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fraction of simulated statistics in the tail of `t`.
    pub fn pvalue(&self, t: f64, tail: Tail) -> f64 {
        let below = self.sorted.partition_point(|&s| !tail.contains(s, t));
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }
}

/// One-shot asymptotic p-value.
pub fn pvalue_asymptotic(
    games: &[u64],
    c: &ConstraintSystem,
    t: f64,
    tail: Tail,
    replications: usize,
    seed: u64,
) -> Result<f64> {
    Ok(SimulatedNull::new(games, c, replications, seed)?.pvalue(t, tail))
}
