//! Identified sets and hypothesis tests for rankings inferred from
//! pairwise interaction data.
//!
//! Teams are indexed from 0. A [`Ranking`] stores ranks from 1, with ties
//! sharing the lower rank. Probabilities on an edge `(a, b)` with `a < b`
//! are the chance that `a` wins.
//!
//! The core types are generic over the scalar (`f32`, `f64`, or exact
//! rationals for membership checks); the aliases below fix `f64`.

pub mod error;
pub mod ident;
pub mod inference;
pub mod montecarlo;
pub mod projection;
pub mod ranking;
pub mod scalar;
pub mod tournament;

pub use error::{Error, Result};
pub use ident::{
    check_membership, check_membership_matrix, check_membership_semiparametric, identified_set, project_rank,
    solve_linear_parametric, ConstraintSystem, IdentifiedSet, LinkFunction,
};
pub use inference::{
    confidence_set, pvalue_asymptotic, pvalue_finite_sample, restricted_mle, test_ranking, test_statistic,
    unrestricted_mle, Method, RestrictedFit, Tail, TestOptions, TestOutcome,
};
pub use montecarlo::{rejection_rate, run_experiment, simulate_tournament, ExperimentConfig, RankFrequencyTable};
pub use ranking::{enumerate_rankings, ranks_from_merits, Ranking};
pub use scalar::{Real, Scalar};
pub use tournament::{Edge, MeritVector, OutcomeData, ProbabilityAssignment, TournamentGraph};

/// Double-precision probability assignment.
pub type Probabilities = ProbabilityAssignment<f64>;
/// Double-precision merit vector.
pub type Merits = MeritVector<f64>;
/// Double-precision link function.
pub type Link = LinkFunction<f64>;
/// Double-precision restricted fit.
pub type Fit = RestrictedFit<f64>;
