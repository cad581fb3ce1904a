//! Directed transition counts between entities and their conversion to
//! pairwise outcomes.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rankset::{OutcomeData, TournamentGraph};

use crate::error::{CliError, Result};
use crate::io::{Names, NamedOutcomes};

pub const TRANSITIONS_HEADER: [&str; 3] = ["from", "to", "count"];
pub const DEFAULT_MIN_GAMES: u64 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransitionTable {
    pub names: Vec<String>,
    /// `(from, to) -> count`, never with `from == to`.
    pub counts: BTreeMap<(usize, usize), u64>,
    /// Self-transitions dropped while reading.
    pub dropped_self: u64,
}

impl TransitionTable {
    pub fn entities(&self) -> usize {
        self.names.len()
    }

    pub fn count(&self, from: usize, to: usize) -> u64 {
        self.counts.get(&(from, to)).copied().unwrap_or(0)
    }

    /// Adds `n` moves from `from` to `to`, ignoring self-moves.
    pub fn add(&mut self, from: usize, to: usize, n: u64) {
        if from != to && n > 0 {
            *self.counts.entry((from, to)).or_default() += n;
        }
    }

    /// Table restricted to `keep` (old IDs), renumbered in that order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut new_id = vec![None; self.names.len()];
        for (i, &k) in keep.iter().enumerate() {
            new_id[k] = Some(i);
        }
        let mut out = Self { names: keep.iter().map(|&k| self.names[k].clone()).collect(), ..Self::default() };
        for (&(a, b), &n) in &self.counts {
            if let (Some(x), Some(y)) = (new_id[a], new_id[b]) {
                out.add(x, y, n);
            }
        }
        out
    }
}

/// Reads `from,to,count` rows, summing repeated pairs.
pub fn read_transitions<R: Read>(label: &str, input: R) -> Result<TransitionTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| CliError::Line { path: label.into(), line: 1, message: e.to_string() })?
        .clone();
    if header.iter().ne(TRANSITIONS_HEADER.iter().copied()) {
        return Err(CliError::Line {
            path: label.into(),
            line: 1,
            message: format!("expected header `{}`", TRANSITIONS_HEADER.join(",")),
        });
    }
    let mut names = Names::default();
    let mut table = TransitionTable::default();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| CliError::Line {
            path: label.into(),
            line: e.position().map_or(line, |p| p.line()),
            message: e.to_string(),
        })?;
        let bad = |message: String| CliError::Line { path: label.into(), line, message };
        let n: i64 = rec[2].parse().map_err(|_| bad(format!("`{}` is not an integer", &rec[2])))?;
        let n = u64::try_from(n).map_err(|_| bad(format!("negative count {n}")))?;
        let (a, b) = (names.id(&rec[0]), names.id(&rec[1]));
        if a == b {
            table.dropped_self += 1;
            continue;
        }
        table.add(a, b, n);
    }
    table.names = names.list;
    Ok(table)
}

pub fn read_transitions_csv(path: &Path) -> Result<TransitionTable> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    read_transitions(&path.display().to_string(), file)
}

/// Pairs with at least `min_games` moves in total become edges; a move to
/// an entity is a win for that entity. Entities left without edges are
/// dropped and the rest renumbered in their original order.
pub fn transitions_to_outcomes(t: &TransitionTable, min_games: u64) -> Result<NamedOutcomes> {
    if min_games == 0 {
        return Err(CliError::Usage("min games must be at least 1".into()));
    }
    let mut pairs: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
    for (&(a, b), &n) in &t.counts {
        let entry = pairs.entry((a.min(b), a.max(b))).or_default();
        // entry.0 counts wins of the lower ID, i.e. moves into it.
        if a < b {
            entry.1 += n;
        } else {
            entry.0 += n;
        }
    }
    pairs.retain(|_, (lo, hi)| *lo + *hi >= min_games);
    if pairs.is_empty() {
        return Err(CliError::Data(format!("no pair has at least {min_games} transitions")));
    }
    let mut used = vec![false; t.entities()];
    for &(a, b) in pairs.keys() {
        used[a] = true;
        used[b] = true;
    }
    let keep: Vec<usize> = (0..t.entities()).filter(|&i| used[i]).collect();
    let mut new_id = vec![usize::MAX; t.entities()];
    for (i, &k) in keep.iter().enumerate() {
        new_id[k] = i;
    }
    let graph = TournamentGraph::new(keep.len(), pairs.keys().map(|&(a, b)| (new_id[a], new_id[b])))
        .map_err(CliError::data)?;
    let mut games = vec![0; graph.edge_count()];
    let mut wins = vec![0; graph.edge_count()];
    for (&(a, b), &(lo, hi)) in &pairs {
        // Renumbering preserves order, so `a` stays the lower ID.
        let idx = graph.edge_index(new_id[a], new_id[b]).expect("edge just inserted");
        games[idx] = lo + hi;
        wins[idx] = lo;
    }
    let data = OutcomeData::new(graph, games, wins).map_err(CliError::data)?;
    Ok(NamedOutcomes { names: keep.iter().map(|&k| t.names[k].clone()).collect(), data })
}
