//! Data ingestion, PageRank, and the `rankset` command line.

pub mod commands;
pub mod error;
pub mod io;
pub mod pagerank;
pub mod report;
pub mod transitions;

pub use commands::{run_cli, run_cli_with, McConfig};
pub use error::CliError;
pub use io::{read_edges_csv, read_probabilities_csv, write_edges_csv, NamedOutcomes, NamedProbabilities};
pub use pagerank::{pagerank, PageRank};
pub use report::Report;
pub use transitions::{read_transitions_csv, transitions_to_outcomes, TransitionTable};
