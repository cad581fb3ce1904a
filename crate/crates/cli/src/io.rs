//! CSV readers and writers for edge results and probability fixtures.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rankset::{OutcomeData, Probabilities, TournamentGraph};

use crate::error::{CliError, Result};

pub const EDGES_HEADER: [&str; 4] = ["team_i", "team_j", "wins_i", "wins_j"];
pub const PROBS_HEADER: [&str; 3] = ["team_i", "team_j", "prob_i_beats_j"];

/// Outcome data with the team names behind the dense IDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedOutcomes {
    pub names: Vec<String>,
    pub data: OutcomeData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedProbabilities {
    pub names: Vec<String>,
    pub probabilities: Probabilities,
}

/// Dense IDs in order of first appearance.
#[derive(Debug, Default)]
pub(crate) struct Names {
    pub list: Vec<String>,
    index: HashMap<String, usize>,
}

impl Names {
    pub fn id(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.list.push(name.to_owned());
        self.index.insert(name.to_owned(), self.list.len() - 1);
        self.list.len() - 1
    }
}

struct Rows<R> {
    label: String,
    reader: csv::Reader<R>,
}

impl<R: Read> Rows<R> {
    fn new(label: &str, input: R, header: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let found = reader.headers().map_err(|e| line_error(label, 1, e))?.clone();
        if found.iter().ne(header.iter().copied()) {
            return Err(CliError::Line {
                path: label.to_owned(),
                line: 1,
                message: format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
            });
        }
        Ok(Self { label: label.to_owned(), reader })
    }

    fn for_each(mut self, mut f: impl FnMut(u64, &csv::StringRecord) -> Result<(), String>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            let line = self.reader.position().line();
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {
                    let line = record.position().map_or(line, |p| p.line());
                    f(line, &record).map_err(|m| CliError::Line { path: self.label.clone(), line, message: m })?;
                }
                Err(e) => return Err(line_error(&self.label, line, e)),
            }
        }
    }
}

fn line_error(label: &str, line: u64, e: csv::Error) -> CliError {
    let line = e.position().map_or(line, |p| p.line());
    CliError::Line { path: label.to_owned(), line, message: e.to_string() }
}

fn count(field: &str) -> Result<u64, String> {
    let v: i64 = field.parse().map_err(|_| format!("`{field}` is not an integer"))?;
    u64::try_from(v).map_err(|_| format!("negative count {v}"))
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads `team_i,team_j,wins_i,wins_j` rows, one per unordered pair.
pub fn read_edges<R: Read>(label: &str, input: R) -> Result<NamedOutcomes> {
    let mut names = Names::default();
    let mut rows: Vec<(usize, usize, u64, u64)> = Vec::new();
    let mut seen: HashMap<(usize, usize), u64> = HashMap::new();
    Rows::new(label, input, &EDGES_HEADER)?.for_each(|line, rec| {
        let (a, b) = (names.id(&rec[0]), names.id(&rec[1]));
        if a == b {
            return Err(format!("team `{}` paired with itself", &rec[0]));
        }
        let (wa, wb) = (count(&rec[2])?, count(&rec[3])?);
        if wa + wb == 0 {
            return Err("pair has no games".into());
        }
        let key = (a.min(b), a.max(b));
        if let Some(first) = seen.insert(key, line) {
            return Err(format!("duplicate pair {},{} (first on line {first})", &rec[0], &rec[1]));
        }
        rows.push(if a < b { (a, b, wa, wb) } else { (b, a, wb, wa) });
        Ok(())
    })?;
    if rows.is_empty() {
        return Err(CliError::Data(format!("{label}: no edges")));
    }
    let graph = TournamentGraph::new(names.list.len(), rows.iter().map(|r| (r.0, r.1))).map_err(CliError::data)?;
    let mut games = vec![0; graph.edge_count()];
    let mut wins = vec![0; graph.edge_count()];
    for (a, b, wa, wb) in rows {
        let idx = graph.edge_index(a, b).expect("edge just inserted");
        games[idx] = wa + wb;
        wins[idx] = wa;
    }
    let data = OutcomeData::new(graph, games, wins).map_err(CliError::data)?;
    Ok(NamedOutcomes { names: names.list, data })
}

pub fn read_edges_csv(path: &Path) -> Result<NamedOutcomes> {
    read_edges(&path.display().to_string(), open(path)?)
}

/// Writes one row per edge in canonical (lower ID first) orientation.
pub fn write_edges<W: Write>(out: W, named: &NamedOutcomes) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| CliError::Io(e.into());
    w.write_record(EDGES_HEADER).map_err(to_io)?;
    let d = &named.data;
    for ((e, &n), &wins) in d.graph().edges().iter().zip(d.games()).zip(d.wins()) {
        w.write_record([
            named.names[e.0].as_str(),
            named.names[e.1].as_str(),
            &wins.to_string(),
            &(n - wins).to_string(),
        ])
        .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edges_csv(path: &Path, named: &NamedOutcomes) -> Result<()> {
    write_edges(std::fs::File::create(path)?, named)
}

/// Reads `team_i,team_j,prob_i_beats_j` rows into a population assignment.
pub fn read_probabilities<R: Read>(label: &str, input: R) -> Result<NamedProbabilities> {
    let mut names = Names::default();
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen: HashMap<(usize, usize), u64> = HashMap::new();
    Rows::new(label, input, &PROBS_HEADER)?.for_each(|line, rec| {
        let (a, b) = (names.id(&rec[0]), names.id(&rec[1]));
        if a == b {
            return Err(format!("team `{}` paired with itself", &rec[0]));
        }
        let p: f64 = rec[2].parse().map_err(|_| format!("`{}` is not a number", &rec[2]))?;
        if !(p > 0.0 && p < 1.0) {
            return Err(format!("probability {p} outside (0, 1)"));
        }
        if let Some(first) = seen.insert((a.min(b), a.max(b)), line) {
            return Err(format!("duplicate pair {},{} (first on line {first})", &rec[0], &rec[1]));
        }
        rows.push(if a < b { (a, b, p) } else { (b, a, 1.0 - p) });
        Ok(())
    })?;
    if rows.is_empty() {
        return Err(CliError::Data(format!("{label}: no edges")));
    }
    let graph = TournamentGraph::new(names.list.len(), rows.iter().map(|r| (r.0, r.1))).map_err(CliError::data)?;
    let mut values = vec![0.5; graph.edge_count()];
    for (a, b, p) in rows {
        values[graph.edge_index(a, b).expect("edge just inserted")] = p;
    }
    let probabilities = Probabilities::new(graph, values).map_err(CliError::data)?;
    Ok(NamedProbabilities { names: names.list, probabilities })
}

pub fn read_probabilities_csv(path: &Path) -> Result<NamedProbabilities> {
    read_probabilities(&path.display().to_string(), open(path)?)
}
