//! Estimation and testing of a hypothesized ranking from outcome data.

pub mod asymptotic;
pub mod exact;
pub mod mle;
pub mod test;

pub use asymptotic::{pvalue_asymptotic, stream_rng, SimulatedNull, DEFAULT_REPLICATIONS};
pub use exact::{pvalue_finite_sample, ExactNullDistribution, ExactOptions, FiniteSamplePValue, Tail};
pub use mle::{restricted_mle, test_statistic, unrestricted_mle, RestrictedFit};
pub use test::{
    confidence_set, confidence_set_detailed, test_ranking, Diagnostics, Method, PreparedConfidenceSet,
    PreparedTest, TestOptions, TestOutcome,
};
