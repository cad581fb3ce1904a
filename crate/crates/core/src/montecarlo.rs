//! Simulation harness: synthetic tournaments, coverage of confidence sets,
//! and rejection rates.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ident::IdentifiedSet;
use crate::inference::{stream_rng, ExactOptions, Method, PreparedConfidenceSet, PreparedTest, TestOptions};
use crate::inference::exact::Tail;
use crate::ranking::{Ranking, DEFAULT_ENUMERATION_CAP};
use crate::tournament::{OutcomeData, ProbabilityAssignment};

/// Offsets the master seed for null simulations so they never share a
/// stream with the simulated datasets.
const NULL_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Draws outcomes with `games[e]` games on edge `e`, using `rng`.
pub fn simulate_with<R: Rng + ?Sized>(
    p: &ProbabilityAssignment<f64>,
    games: &[u64],
    rng: &mut R,
) -> Result<OutcomeData> {
    let g = p.graph();
    if games.len() != g.edge_count() {
        return Err(Error::LengthMismatch { expected: g.edge_count(), got: games.len() });
    }
    let wins = games
        .iter()
        .zip(p.values())
        .map(|(&n, &pe)| {
            Binomial::new(n, pe)
                .map(|b| b.sample(rng))
                .map_err(|e| Error::InvalidArgument(e.to_string()))
        })
        .collect::<Result<Vec<u64>>>()?;
    OutcomeData::new(g.clone(), games.to_vec(), wins)
}

/// Independent binomial outcomes per edge; deterministic in `seed`.
pub fn simulate_tournament(p: &ProbabilityAssignment<f64>, games: &[u64], seed: u64) -> Result<OutcomeData> {
    simulate_with(p, games, &mut stream_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgp: ProbabilityAssignment<f64>,
    pub games_per_edge: u64,
    pub replications: usize,
    pub alpha: f64,
    pub method: Method,
    pub seed: u64,
    pub allow_ties: bool,
    /// Simulated null datasets per ranking for the asymptotic method.
    #[serde(default = "default_null_replications")]
    pub null_replications: usize,
    #[serde(default)]
    pub tail: Tail,
    #[serde(default)]
    pub exact: ExactOptions,
}

fn default_null_replications() -> usize {
    crate::inference::DEFAULT_REPLICATIONS
}

impl ExperimentConfig {
    pub fn new(dgp: ProbabilityAssignment<f64>, games_per_edge: u64, method: Method) -> Self {
        Self {
            dgp,
            games_per_edge,
            replications: 1000,
            alpha: 0.1,
            method,
            seed: 0,
            allow_ties: false,
            null_replications: default_null_replications(),
            tail: Tail::default(),
            exact: ExactOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.games_per_edge == 0 {
            return Err(Error::InvalidArgument("games per edge must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("at least one replication is required".into()));
        }
        Ok(())
    }

    pub fn test_options(&self) -> TestOptions {
        TestOptions {
            alpha: self.alpha,
            method: self.method,
            replications: self.null_replications,
            seed: self.seed.wrapping_add(NULL_SEED_OFFSET),
            tail: self.tail,
            prune: true,
            exact: self.exact.clone(),
        }
    }
}

/// How often each rank of each team appears in the projected confidence
/// set. Rows are teams, columns ranks `1..=q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankFrequencyTable {
    pub teams: usize,
    pub replications: usize,
    pub counts: Vec<Vec<usize>>,
}

impl RankFrequencyTable {
    pub fn new(teams: usize) -> Self {
        Self { teams, replications: 0, counts: vec![vec![0; teams]; teams] }
    }

    pub fn record(&mut self, set: &IdentifiedSet) {
        self.replications += 1;
        for (team, ranks) in set.per_team().iter().enumerate() {
            for &r in ranks {
                self.counts[team][r as usize - 1] += 1;
            }
        }
    }

    /// Pools two tables over the same teams.
    pub fn merge(mut self, other: Self) -> Self {
        self.replications += other.replications;
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }

    /// Frequency of `rank` (1-based) in team `team`'s projected set.
    pub fn frequency(&self, team: usize, rank: u32) -> f64 {
        if self.replications == 0 {
            return 0.0;
        }
        self.counts[team][rank as usize - 1] as f64 / self.replications as f64
    }

    /// Monte Carlo standard error of [`RankFrequencyTable::frequency`].
    pub fn standard_error(&self, team: usize, rank: u32) -> f64 {
        if self.replications == 0 {
            return 0.0;
        }
        let f = self.frequency(team, rank);
        (f * (1.0 - f) / self.replications as f64).sqrt()
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        (0..self.teams)
            .map(|t| (1..=self.teams as u32).map(|r| self.frequency(t, r)).collect())
            .collect()
    }

    /// CSV with one row per team and one column per rank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("team");
        for r in 1..=self.teams {
            out.push_str(&format!(",rank_{r}"));
        }
        out.push('\n');
        for t in 0..self.teams {
            out.push_str(&t.to_string());
            for r in 1..=self.teams as u32 {
                out.push_str(&format!(",{}", self.frequency(t, r)));
            }
            out.push('\n');
        }
        out
    }
}

/// Count of one distinct projected rank set of a team.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedSetCount {
    pub ranks: Vec<u32>,
    pub count: usize,
}

/// Count of confidence sets containing a ranking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingCount {
    pub ranking: Ranking,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub table: RankFrequencyTable,
    /// Inclusion counts of every ranking that appeared in some set.
    pub ranking_counts: Vec<RankingCount>,
    /// Per team, the distinct projected sets and how often each occurred.
    pub projected_sets: Vec<Vec<ProjectedSetCount>>,
    pub mean_set_size: f64,
}

impl ExperimentOutcome {
    /// Fraction of replications whose confidence set contains `r`.
    pub fn coverage(&self, r: &Ranking) -> f64 {
        let hits = self.ranking_counts.iter().find(|c| &c.ranking == r).map_or(0, |c| c.count);
        hits as f64 / self.table.replications as f64
    }

    /// Fraction of replications in which `team`'s projected set is `ranks`.
    pub fn projected_set_frequency(&self, team: usize, ranks: &[u32]) -> f64 {
        let hits = self.projected_sets[team].iter().find(|c| c.ranks == ranks).map_or(0, |c| c.count);
        hits as f64 / self.table.replications as f64
    }
}

#[derive(Default)]
struct Tally {
    rankings: BTreeMap<Ranking, usize>,
    projected: Vec<BTreeMap<Vec<u32>, usize>>,
    size: usize,
}

/// Repeats simulate → confidence set → per-team projection.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let g = cfg.dgp.graph();
    let games = vec![cfg.games_per_edge; g.edge_count()];
    let prepared = PreparedConfidenceSet::new(g, &games, &cfg.test_options(), cfg.allow_ties, DEFAULT_ENUMERATION_CAP)?;
    let teams = g.teams();
    let sets = (0..cfg.replications)
        .into_par_iter()
        .map(|i| {
            let d = simulate_with(&cfg.dgp, &games, &mut stream_rng(cfg.seed, i as u64))?;
            prepared.build(&d)
        })
        .collect::<Result<Vec<IdentifiedSet>>>()?;

    let mut table = RankFrequencyTable::new(teams);
    let mut tally = Tally { projected: vec![BTreeMap::new(); teams], ..Tally::default() };
    for set in &sets {
        table.record(set);
        tally.size += set.len();
        for r in set.rankings() {
            *tally.rankings.entry(r.clone()).or_default() += 1;
        }
        for (team, ranks) in set.per_team().iter().enumerate() {
            *tally.projected[team].entry(ranks.iter().copied().collect()).or_default() += 1;
        }
    }
    Ok(ExperimentOutcome {
        table,
        ranking_counts: tally.rankings.into_iter().map(|(ranking, count)| RankingCount { ranking, count }).collect(),
        projected_sets: tally
            .projected
            .into_iter()
            .map(|m| m.into_iter().map(|(ranks, count)| ProjectedSetCount { ranks, count }).collect())
            .collect(),
        mean_set_size: tally.size as f64 / cfg.replications as f64,
    })
}

/// Fraction of simulated datasets on which `r` is rejected.
pub fn rejection_rate(
    p: &ProbabilityAssignment<f64>,
    games: &[u64],
    r: &Ranking,
    options: &TestOptions,
    replications: usize,
    seed: u64,
) -> Result<f64> {
    if replications == 0 {
        return Err(Error::InvalidArgument("at least one replication is required".into()));
    }
    let test = PreparedTest::new(p.graph(), games, r, options)?;
    let rejected = (0..replications)
        .into_par_iter()
        .map(|i| {
            let d = simulate_with(p, games, &mut stream_rng(seed, i as u64))?;
            test.rejects(&d).map(usize::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(rejected as f64 / replications as f64)
}
