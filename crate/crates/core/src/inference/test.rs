//! The two ranking tests and confidence sets by test inversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ident::{ConstraintSystem, IdentifiedSet};
use crate::inference::asymptotic::{SimulatedNull, DEFAULT_REPLICATIONS};
use crate::inference::exact::{ExactNullDistribution, ExactOptions, Tail};
use crate::inference::mle::{restricted_mle, test_statistic, unrestricted_mle};
use crate::ranking::{enumerate_rankings, Ranking};
use crate::tournament::{OutcomeData, TournamentGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Supremum of the exact tail probability over the null polytope.
    FiniteSample,
    /// Tail probability simulated at the least favorable point (all 1/2).
    Asymptotic,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fs" | "finite_sample" => Ok(Method::FiniteSample),
            "as" | "asymptotic" => Ok(Method::Asymptotic),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub alpha: f64,
    pub method: Method,
    /// Simulated datasets for the asymptotic method.
    pub replications: usize,
    pub seed: u64,
    pub tail: Tail,
    /// Drop order constraints implied by transitivity before projecting.
    pub prune: bool,
    pub exact: ExactOptions,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            method: Method::FiniteSample,
            replications: DEFAULT_REPLICATIONS,
            seed: 0,
            tail: Tail::Inclusive,
            prune: true,
            exact: ExactOptions::default(),
        }
    }
}

impl TestOptions {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.method == Method::Asymptotic && self.replications == 0 {
            return Err(Error::InvalidArgument("at least one replication is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Maximizing null probabilities (finite-sample method), canonical order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub ranking: Ranking,
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub alpha: f64,
    pub reject: bool,
    /// Restricted estimate, canonical order.
    pub p_star: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug)]
enum Null {
    Exact(Box<ExactNullDistribution>),
    Simulated(SimulatedNull),
}

/// A test of one ranking on one design (graph and game counts), with the
/// null distribution computed once and reusable across datasets.
#[derive(Debug)]
pub struct PreparedTest {
    graph: TournamentGraph,
    games: Vec<u64>,
    ranking: Ranking,
    constraints: ConstraintSystem,
    options: TestOptions,
    null: Null,
}

impl PreparedTest {
    pub fn new(graph: &TournamentGraph, games: &[u64], ranking: &Ranking, options: &TestOptions) -> Result<Self> {
        options.validate()?;
        if games.len() != graph.edge_count() {
            return Err(Error::LengthMismatch { expected: graph.edge_count(), got: games.len() });
        }
        let full = ConstraintSystem::build(graph, ranking)?;
        let constraints = if options.prune { full.pruned() } else { full };
        let null = match options.method {
            Method::FiniteSample => {
                Null::Exact(Box::new(ExactNullDistribution::new(games, &constraints, options.exact.clone())?))
            }
            Method::Asymptotic => {
                Null::Simulated(SimulatedNull::new(games, &constraints, options.replications, options.seed)?)
            }
        };
        Ok(Self {
            graph: graph.clone(),
            games: games.to_vec(),
            ranking: ranking.clone(),
            constraints,
            options: options.clone(),
            null,
        })
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn constraints(&self) -> &ConstraintSystem {
        &self.constraints
    }

    pub fn options(&self) -> &TestOptions {
        &self.options
    }

    /// The exact null distribution, when the finite-sample method is used.
    pub fn exact(&self) -> Option<&ExactNullDistribution> {
        match &self.null {
            Null::Exact(e) => Some(e),
            Null::Simulated(_) => None,
        }
    }

    fn check_design(&self, d: &OutcomeData) -> Result<()> {
        if d.graph() != &self.graph || d.games() != self.games.as_slice() {
            return Err(Error::InvalidArgument("data do not match the prepared design".into()));
        }
        Ok(())
    }

    fn statistic(&self, d: &OutcomeData) -> Result<(f64, Vec<f64>)> {
        let p_hat = unrestricted_mle(d);
        let weights: Vec<f64> = self.games.iter().map(|&n| n as f64).collect();
        let fit = restricted_mle(p_hat.values(), &weights, &self.constraints)?;
        Ok((test_statistic(p_hat.values(), &fit.p_star, &weights), fit.p_star))
    }

    /// Full test with p-value and diagnostics.
    pub fn run(&self, d: &OutcomeData) -> Result<TestOutcome> {
        self.check_design(d)?;
        let (statistic, p_star) = self.statistic(d)?;
        let tail = self.options.tail;
        let (p_value, diagnostics) = match &self.null {
            Null::Exact(e) => {
                let fs = e.pvalue(statistic, tail);
                let diag = Diagnostics {
                    argmax: Some(fs.argmax),
                    converged: Some(fs.converged),
                    region_size: Some(fs.region_size),
                    tuples: Some(fs.tuples),
                    ..Diagnostics::default()
                };
                (fs.p_value, diag)
            }
            Null::Simulated(s) => (
                s.pvalue(statistic, tail),
                Diagnostics {
                    replications: Some(s.replications()),
                    seed: Some(s.seed()),
                    ..Diagnostics::default()
                },
            ),
        };
        Ok(TestOutcome {
            ranking: self.ranking.clone(),
            statistic,
            p_value,
            method: self.options.method,
            alpha: self.options.alpha,
            reject: p_value <= self.options.alpha,
            p_star,
            diagnostics,
        })
    }

    /// Test decision only. For the finite-sample method this compares the
    /// observed tail with a cached critical region instead of recomputing
    /// the supremum, and agrees with [`PreparedTest::run`] because tail
    /// probabilities grow with the region.
    pub fn rejects(&self, d: &OutcomeData) -> Result<bool> {
        self.check_design(d)?;
        let tail = self.options.tail;
        let alpha = self.options.alpha;
        match &self.null {
            Null::Exact(e) => {
                let t = e.statistic_of(d.wins())?;
                Ok(e.rejects(t, tail, alpha))
            }
            Null::Simulated(s) => {
                let (t, _) = self.statistic(d)?;
                Ok(s.pvalue(t, tail) <= alpha)
            }
        }
    }
}

/// Test whether `r` is consistent with the outcomes `d`.
pub fn test_ranking(d: &OutcomeData, r: &Ranking, options: &TestOptions) -> Result<TestOutcome> {
    PreparedTest::new(d.graph(), d.games(), r, options)?.run(d)
}

/// Prepared tests for every candidate ranking of one design.
#[derive(Debug)]
pub struct PreparedConfidenceSet {
    teams: usize,
    tests: Vec<PreparedTest>,
}

impl PreparedConfidenceSet {
    pub fn new(
        graph: &TournamentGraph,
        games: &[u64],
        options: &TestOptions,
        allow_ties: bool,
        cap: usize,
    ) -> Result<Self> {
        let tests = enumerate_rankings(graph.teams(), allow_ties, cap)?
            .iter()
            .map(|r| PreparedTest::new(graph, games, r, options))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { teams: graph.teams(), tests })
    }

    pub fn tests(&self) -> &[PreparedTest] {
        &self.tests
    }

    /// Rankings not rejected on `d`.
    pub fn build(&self, d: &OutcomeData) -> Result<IdentifiedSet> {
        let mut kept = Vec::new();
        for t in &self.tests {
            if !t.rejects(d)? {
                kept.push(t.ranking().clone());
            }
        }
        IdentifiedSet::new(self.teams, kept)
    }
}

/// All rankings not rejected at level `alpha`, with the per-ranking outcomes.
pub fn confidence_set_detailed(
    d: &OutcomeData,
    options: &TestOptions,
    allow_ties: bool,
    cap: usize,
) -> Result<(IdentifiedSet, Vec<TestOutcome>)> {
    let rankings = enumerate_rankings(d.graph().teams(), allow_ties, cap)?;
    let outcomes = rankings.iter().map(|r| test_ranking(d, r, options)).collect::<Result<Vec<_>>>()?;
    let kept = outcomes.iter().filter(|o| !o.reject).map(|o| o.ranking.clone()).collect();
    Ok((IdentifiedSet::new(d.graph().teams(), kept)?, outcomes))
}

/// Confidence set for the ranking by inverting the test.
pub fn confidence_set(d: &OutcomeData, options: &TestOptions, allow_ties: bool, cap: usize) -> Result<IdentifiedSet> {
    PreparedConfidenceSet::new(d.graph(), d.games(), options, allow_ties, cap)?.build(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::DEFAULT_ENUMERATION_CAP;

    fn lopsided() -> OutcomeData {
        let g = TournamentGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        OutcomeData::new(g, vec![9, 2], vec![8, 2]).unwrap()
    }

    #[test]
    fn lopsided_data_rejected() {
        let d = lopsided();
        let r = Ranking::new(vec![2, 1, 3]).unwrap();
        let opts = TestOptions { alpha: 0.05, ..TestOptions::default() };
        let out = test_ranking(&d, &r, &opts).unwrap();
        assert!(out.reject, "{out:?}");
        assert!((out.statistic - 6.1977).abs() < 1e-4);
        let prepared = PreparedTest::new(d.graph(), d.games(), &r, &opts).unwrap();
        assert!(prepared.rejects(&d).unwrap());
    }

    #[test]
    fn feasible_estimate_has_unit_pvalue() {
        let d = lopsided();
        // A beat B 8/9 and B beat C: consistent with A < B < C.
        let r = Ranking::new(vec![1, 2, 3]).unwrap();
        for method in [Method::FiniteSample, Method::Asymptotic] {
            let opts = TestOptions { method, replications: 500, ..TestOptions::default() };
            let out = test_ranking(&d, &r, &opts).unwrap();
            assert_eq!(out.statistic, 0.0);
            assert_eq!(out.p_value, 1.0);
            assert!(!out.reject);
        }
    }

    #[test]
    fn single_edge_sweep_excludes_loser_first() {
        let g = TournamentGraph::new(2, [(0, 1)]).unwrap();
        let d = OutcomeData::new(g, vec![50], vec![50]).unwrap();
        let opts = TestOptions { alpha: 0.1, ..TestOptions::default() };
        let set = confidence_set(&d, &opts, false, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(set.rankings(), [Ranking::new(vec![1, 2]).unwrap()]);
        let (_, outcomes) = confidence_set_detailed(&d, &opts, false, DEFAULT_ENUMERATION_CAP).unwrap();
        let loser = outcomes.iter().find(|o| o.ranking.ranks() == [2, 1]).unwrap();
        assert!(loser.p_value <= 0.5f64.powi(50) * (1.0 + 1e-9));
    }

    #[test]
    fn even_split_keeps_both_orders() {
        let g = TournamentGraph::chain(3).unwrap();
        let d = OutcomeData::new(g, vec![40, 40], vec![20, 20]).unwrap();
        let opts = TestOptions { alpha: 0.1, method: Method::Asymptotic, replications: 2000, ..TestOptions::default() };
        let set = confidence_set(&d, &opts, false, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(set.len(), 6);
    }

    #[test]
    fn method_parsing_and_validation() {
        assert_eq!("fs".parse::<Method>().unwrap(), Method::FiniteSample);
        assert_eq!("asymptotic".parse::<Method>().unwrap(), Method::Asymptotic);
        assert!("bayes".parse::<Method>().is_err());
        let d = lopsided();
        let r = Ranking::new(vec![1, 2, 3]).unwrap();
        let bad = TestOptions { alpha: 1.5, ..TestOptions::default() };
        assert!(test_ranking(&d, &r, &bad).is_err());
    }
}
