//! Subcommands and the process entry point.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rankset::ident::{identified_set_tol, DEFAULT_LINEAR_TOL};
use rankset::inference::{confidence_set_detailed, ExactOptions, Method, Tail};
use rankset::montecarlo::{run_experiment, ExperimentConfig};
use rankset::ranking::DEFAULT_ENUMERATION_CAP;
use rankset::{solve_linear_parametric, test_ranking, IdentifiedSet, Link, Ranking, TestOptions};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::io::{read_edges_csv, read_probabilities_csv, NamedOutcomes};
use crate::pagerank::{pagerank, DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::report::Report;
use crate::transitions::{read_transitions_csv, transitions_to_outcomes, DEFAULT_MIN_GAMES};

#[derive(Debug, Parser)]
#[command(name = "rankset", version, about = "Identified sets and tests for rankings from pairwise data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Identified set of rankings for population win probabilities.
    Ident(IdentArgs),
    /// Test one ranking against observed outcomes.
    Test(TestArgs),
    /// Confidence set of rankings by inverting the test.
    Confset(ConfsetArgs),
    /// Monte Carlo coverage experiment from a JSON config.
    Mc(McArgs),
    /// Merits under the logistic (or Cauchy) link.
    Btl(BtlArgs),
    /// PageRank ranking of a transition table, optionally tested.
    Pagerank(PagerankArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Inference {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// fs (finite sample) or as (asymptotic).
    #[arg(long, default_value = "fs", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulated datasets for the asymptotic method.
    #[arg(long, default_value_t = rankset::inference::DEFAULT_REPLICATIONS)]
    reps: usize,
    /// Largest number of outcome tuples enumerated by the finite-sample method.
    #[arg(long, default_value_t = ExactOptions::default().budget)]
    budget: u64,
    /// Use the strict tail {T > t} instead of {T >= t}.
    #[arg(long)]
    strict_tail: bool,
}

impl Inference {
    fn options(&self) -> TestOptions {
        TestOptions {
            alpha: self.alpha,
            method: self.method,
            replications: self.reps,
            seed: self.seed,
            tail: if self.strict_tail { Tail::Strict } else { Tail::Inclusive },
            prune: true,
            exact: ExactOptions { budget: self.budget, ..ExactOptions::default() },
        }
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: rankset::Error| e.to_string())
}

#[derive(Debug, Args, Serialize)]
struct IdentArgs {
    /// CSV with header team_i,team_j,prob_i_beats_j.
    #[arg(long)]
    probs: PathBuf,
    /// Include weak orderings.
    #[arg(long)]
    ties: bool,
    /// Probability differences within this tolerance count as equal.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Debug, Args, Serialize)]
struct TestArgs {
    /// CSV with header team_i,team_j,wins_i,wins_j.
    #[arg(long)]
    edges: PathBuf,
    /// Ranks in the order teams first appear in the file, e.g. "2,1,3".
    #[arg(long)]
    ranking: String,
    #[command(flatten)]
    inference: Inference,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Debug, Args, Serialize)]
struct ConfsetArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    ties: bool,
    #[command(flatten)]
    inference: Inference,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Debug, Args, Serialize)]
struct McArgs {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Also write the rank frequency table as CSV.
    #[arg(long)]
    table_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Debug, Args, Serialize)]
struct BtlArgs {
    #[arg(long)]
    probs: PathBuf,
    /// Pin one merit, e.g. A=1.
    #[arg(long)]
    normalize: String,
    /// logistic or cauchy.
    #[arg(long, default_value = "logistic")]
    link: String,
    #[arg(long, default_value_t = DEFAULT_LINEAR_TOL)]
    tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Debug, Args, Serialize)]
struct PagerankArgs {
    /// CSV with header from,to,count.
    #[arg(long)]
    transitions: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DAMPING)]
    damping: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Pairs with fewer transitions are dropped before ranking.
    #[arg(long, default_value_t = DEFAULT_MIN_GAMES)]
    min_games: u64,
    /// Test the PageRank ranking against the retained pairs.
    #[arg(long)]
    test: bool,
    #[command(flatten)]
    inference: Inference,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

/// Experiment file for `mc`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    /// `[team_i, team_j, P(team_i beats team_j)]` per edge.
    pub edges: Vec<(String, String, f64)>,
    pub games_per_edge: u64,
    #[serde(default = "default_mc_replications")]
    pub replications: usize,
    #[serde(default = "default_mc_alpha")]
    pub alpha: f64,
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub allow_ties: bool,
    #[serde(default = "default_null_replications")]
    pub null_replications: usize,
}

fn default_mc_replications() -> usize {
    1000
}

fn default_mc_alpha() -> f64 {
    0.1
}

fn default_null_replications() -> usize {
    rankset::inference::DEFAULT_REPLICATIONS
}

fn team_ranks(names: &[String], set: &IdentifiedSet) -> Value {
    let per_team: serde_json::Map<String, Value> =
        names.iter().zip(set.per_team()).map(|(n, ranks)| (n.clone(), json!(ranks))).collect();
    json!({
        "teams": names,
        "rankings": set.rankings(),
        "size": set.len(),
        "per_team": per_team,
    })
}

fn parse_ranking(text: &str, teams: usize) -> Result<Ranking> {
    let ranks = text
        .split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("bad rank `{s}` in `{text}`"))))
        .collect::<Result<Vec<_>>>()?;
    if ranks.len() != teams {
        return Err(CliError::Usage(format!("ranking has {} entries but the data have {teams} teams", ranks.len())));
    }
    Ranking::new(ranks).map_err(|e| CliError::Usage(e.to_string()))
}

fn config<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn ident(a: &IdentArgs) -> Result<Value> {
    let named = read_probabilities_csv(&a.probs)?;
    let set = identified_set_tol(&named.probabilities, a.ties, DEFAULT_ENUMERATION_CAP, a.tol)?;
    Ok(team_ranks(&named.names, &set))
}

fn outcome_json(named: &NamedOutcomes) -> Value {
    let d = &named.data;
    let edges: Vec<Value> = d
        .graph()
        .edges()
        .iter()
        .zip(d.games())
        .zip(d.wins())
        .map(|((e, &n), &w)| json!([named.names[e.0], named.names[e.1], w, n - w]))
        .collect();
    json!({ "teams": named.names, "edges": edges })
}

fn test(a: &TestArgs) -> Result<Value> {
    let named = read_edges_csv(&a.edges)?;
    let r = parse_ranking(&a.ranking, named.names.len())?;
    let outcome = test_ranking(&named.data, &r, &a.inference.options())?;
    Ok(json!({ "teams": named.names, "outcome": outcome }))
}

fn confset(a: &ConfsetArgs) -> Result<Value> {
    let named = read_edges_csv(&a.edges)?;
    let (set, outcomes) =
        confidence_set_detailed(&named.data, &a.inference.options(), a.ties, DEFAULT_ENUMERATION_CAP)?;
    Ok(json!({ "set": team_ranks(&named.names, &set), "outcomes": outcomes }))
}

fn mc(a: &McArgs) -> Result<(Value, Value)> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| CliError::Data(format!("{}: {e}", a.config.display())))?;
    let cfg: McConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", a.config.display())))?;
    let mut csv = String::from("team_i,team_j,prob_i_beats_j\n");
    for (i, j, p) in &cfg.edges {
        csv.push_str(&format!("{i},{j},{p}\n"));
    }
    let named = crate::io::read_probabilities("config edges", csv.as_bytes())?;
    let experiment = ExperimentConfig {
        dgp: named.probabilities,
        games_per_edge: cfg.games_per_edge,
        replications: cfg.replications,
        alpha: cfg.alpha,
        method: cfg.method,
        seed: cfg.seed,
        allow_ties: cfg.allow_ties,
        null_replications: cfg.null_replications,
        tail: Tail::default(),
        exact: ExactOptions::default(),
    };
    let out = run_experiment(&experiment)?;
    if let Some(path) = &a.table_csv {
        std::fs::write(path, out.table.to_csv())?;
    }
    let config = json!({ "args": config(a), "experiment": cfg });
    let results = json!({
        "teams": named.names,
        "frequencies": out.table.frequencies(),
        "standard_errors": (0..out.table.teams)
            .map(|t| (1..=out.table.teams as u32).map(|r| out.table.standard_error(t, r)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "replications": out.table.replications,
        "mean_set_size": out.mean_set_size,
        "ranking_counts": out.ranking_counts,
        "projected_sets": out.projected_sets,
    });
    Ok((config, results))
}

fn btl(a: &BtlArgs) -> Result<Value> {
    let named = read_probabilities_csv(&a.probs)?;
    let (team, value) = a
        .normalize
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--normalize expects TEAM=VALUE, got `{}`", a.normalize)))?;
    let value: f64 = value.trim().parse().map_err(|_| CliError::Usage(format!("bad value `{value}`")))?;
    let idx = named
        .names
        .iter()
        .position(|n| n == team.trim())
        .ok_or_else(|| CliError::Usage(format!("unknown team `{team}`")))?;
    let link = match a.link.as_str() {
        "logistic" => Link::logistic(),
        "cauchy" => Link::cauchy(),
        other => return Err(CliError::Usage(format!("unknown link `{other}`"))),
    };
    let merits = solve_linear_parametric(&named.probabilities, &link, idx, value, a.tol)?;
    let by_team: serde_json::Map<String, Value> =
        named.names.iter().zip(merits.as_slice()).map(|(n, m)| (n.clone(), json!(m))).collect();
    Ok(json!({ "teams": named.names, "merits": merits.as_slice(), "by_team": by_team }))
}

fn pagerank_cmd(a: &PagerankArgs) -> Result<Value> {
    let table = read_transitions_csv(&a.transitions)?;
    let outcomes = transitions_to_outcomes(&table, a.min_games)?;
    let keep: Vec<usize> =
        outcomes.names.iter().map(|n| table.names.iter().position(|m| m == n).expect("kept name")).collect();
    let pr = pagerank(&table.restrict(&keep), a.damping, a.tol, a.max_iter)?;
    let mut results = json!({
        "teams": outcomes.names,
        "scores": pr.scores,
        "ranking": pr.ranking,
        "iterations": pr.iterations,
        "dropped_self_transitions": table.dropped_self,
        "outcomes": outcome_json(&outcomes),
    });
    if a.test {
        let outcome = test_ranking(&outcomes.data, &pr.ranking, &a.inference.options())?;
        results["test"] = json!(outcome);
    }
    Ok(results)
}

fn execute(cli: &Cli) -> Result<(Option<PathBuf>, Report)> {
    let (name, out, config, results) = match &cli.command {
        Command::Ident(a) => ("ident", &a.output, config(a), ident(a)?),
        Command::Test(a) => ("test", &a.output, config(a), test(a)?),
        Command::Confset(a) => ("confset", &a.output, config(a), confset(a)?),
        Command::Mc(a) => {
            let (c, r) = mc(a)?;
            ("mc", &a.output, c, r)
        }
        Command::Btl(a) => ("btl", &a.output, config(a), btl(a)?),
        Command::Pagerank(a) => ("pagerank", &a.output, config(a), pagerank_cmd(a)?),
    };
    Ok((out.out.clone(), Report::new(name, config, results)))
}

/// Runs the command line and returns the process exit code: 0 success,
/// 1 usage error, 2 data error, 3 computation error.
pub fn run_cli_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    1
                }
            };
        }
    };
    let result = execute(&cli).and_then(|(out, report)| {
        let text = report.to_json();
        match out {
            Some(path) => std::fs::write(path, text + "\n")?,
            None => writeln!(stdout, "{text}")?,
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

