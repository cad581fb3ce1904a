use thiserror::Error;

/// Errors raised by the ranking library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("team index {team} out of range for {teams} teams")]
    TeamOutOfRange { team: usize, teams: usize },
    #[error("self-loop on team {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("teams {0} and {1} do not interact")]
    NotAnEdge(usize, usize),
    #[error("tournament needs at least one team")]
    NoTeams,
    #[error("invalid ranking {0:?}")]
    InvalidRanking(Vec<i64>),
    #[error("ranking has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probability {value} on edge ({a}, {b}) outside {range}")]
    ProbabilityOutOfRange {
        a: usize,
        b: usize,
        value: f64,
        range: &'static str,
    },
    #[error("merit vector contains a non-finite value at team {0}")]
    NonFiniteMerit(usize),
    #[error("edge ({a}, {b}): {wins} wins out of {games} games is invalid")]
    InvalidCounts {
        a: usize,
        b: usize,
        wins: u64,
        games: u64,
    },
    #[error("enumeration of {what} exceeds the cap ({size} > {cap})")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("ranking has ties; merge tied teams first")]
    TiesPresent,
    #[error("tournament graph is not connected")]
    Disconnected,
    #[error("edge ({a}, {b}) inconsistent with the linear model: residual {residual:e} exceeds {tol:e}")]
    Inconsistent {
        a: usize,
        b: usize,
        residual: f64,
        tol: f64,
    },
    #[error("constraint system is infeasible")]
    Infeasible,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
