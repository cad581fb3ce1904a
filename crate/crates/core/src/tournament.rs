//! Tournament graphs, merits, probability assignments and outcome counts.
//!
//! Teams are dense `usize` indices `0..q`. Every undirected edge is stored
//! once as `(lo, hi)` with `lo < hi`; per-edge quantities (probabilities,
//! game counts, wins) are vectors aligned with [`TournamentGraph::edges`]
//! and always refer to the lower-indexed team.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{half, Scalar};

/// Undirected edge in canonical `(lo, hi)` orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn other(&self, team: usize) -> usize {
        if team == self.0 {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TournamentGraph {
    teams: usize,
    edges: Vec<Edge>,
}

impl TournamentGraph {
    /// Builds a graph from unordered pairs. Pairs are canonicalized and
    /// sorted; self-loops, duplicates and out-of-range teams are rejected.
    pub fn new<I>(teams: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if teams == 0 {
            return Err(Error::NoTeams);
        }
        let mut edges = Vec::new();
        for (a, b) in pairs {
            for t in [a, b] {
                if t >= teams {
                    return Err(Error::TeamOutOfRange { team: t, teams });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            edges.push(Edge::new(a, b));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }
        Ok(Self { teams, edges })
    }

    pub fn complete(teams: usize) -> Result<Self> {
        let pairs = (0..teams).flat_map(|a| (a + 1..teams).map(move |b| (a, b)));
        Self::new(teams, pairs)
    }

    /// Path `0 - 1 - ... - (q-1)`.
    pub fn chain(teams: usize) -> Result<Self> {
        Self::new(teams, (1..teams).map(|b| (b - 1, b)))
    }

    /// Star centered on `hub`.
    pub fn star(teams: usize, hub: usize) -> Result<Self> {
        Self::new(teams, (0..teams).filter(|&t| t != hub).map(|t| (hub, t)))
    }

    pub fn teams(&self) -> usize {
        self.teams
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Position of the undirected edge `{a, b}` in [`Self::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        if a == b {
            return None;
        }
        self.edges.binary_search(&Edge::new(a, b)).ok()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.teams];
        for e in &self.edges {
            adj[e.0].push(e.1);
            adj[e.1].push(e.0);
        }
        adj
    }

    /// True iff a single connected component spans all teams.
    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = vec![false; self.teams];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(t) = queue.pop_front() {
            for &n in &adj[t] {
                if !seen[n] {
                    seen[n] = true;
                    reached += 1;
                    queue.push_back(n);
                }
            }
        }
        reached == self.teams
    }

    /// True iff every pair of distinct teams is adjacent or has a common
    /// neighbor.
    pub fn diameter_at_most_two(&self) -> bool {
        let q = self.teams;
        let mut adj = vec![vec![false; q]; q];
        for e in &self.edges {
            adj[e.0][e.1] = true;
            adj[e.1][e.0] = true;
        }
        (0..q).all(|a| {
            (a + 1..q).all(|b| adj[a][b] || (0..q).any(|c| adj[a][c] && adj[c][b]))
        })
    }

    /// Applies a team relabeling `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        Self::new(self.teams, self.edges.iter().map(|e| (perm[e.0], perm[e.1])))
    }
}

/// Latent merits, smaller is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritVector<T>(Vec<T>);

impl<T: Scalar> MeritVector<T> {
    pub fn new(theta: Vec<T>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::NoTeams);
        }
        // `x == x` fails only for NaN; infinities are caught below for floats.
        for (i, &x) in theta.iter().enumerate() {
            #[allow(clippy::eq_op)]
            let finite = x == x && x - x == T::zero();
            if !finite {
                return Err(Error::NonFiniteMerit(i));
            }
        }
        Ok(Self(theta))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

/// Win probabilities of the lower-indexed team on each edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityAssignment<T> {
    graph: TournamentGraph,
    values: Vec<T>,
}

impl<T: Scalar> ProbabilityAssignment<T> {
    /// Population assignment: every value strictly inside `(0, 1)`.
    pub fn new(graph: TournamentGraph, values: Vec<T>) -> Result<Self> {
        Self::checked(graph, values, false)
    }

    /// Estimated assignment: values in the closed interval `[0, 1]`.
    pub fn estimate(graph: TournamentGraph, values: Vec<T>) -> Result<Self> {
        Self::checked(graph, values, true)
    }

    fn checked(graph: TournamentGraph, values: Vec<T>, closed: bool) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::LengthMismatch {
                expected: graph.edge_count(),
                got: values.len(),
            });
        }
        for (e, &p) in graph.edges().iter().zip(&values) {
            let ok = if closed {
                p >= T::zero() && p <= T::one()
            } else {
                p > T::zero() && p < T::one()
            };
            if !ok {
                return Err(Error::ProbabilityOutOfRange {
                    a: e.0,
                    b: e.1,
                    value: p.to_f64().unwrap_or(f64::NAN),
                    range: if closed { "[0, 1]" } else { "(0, 1)" },
                });
            }
        }
        Ok(Self { graph, values })
    }

    /// Builds an assignment by evaluating `win(lo, hi)` on each edge.
    pub fn from_fn<F>(graph: TournamentGraph, mut win: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> T,
    {
        let values = graph.edges().iter().map(|e| win(e.0, e.1)).collect();
        Self::new(graph, values)
    }

    pub fn graph(&self) -> &TournamentGraph {
        &self.graph
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `P(a beats b)`; the reverse orientation is `1 - p`.
    pub fn oriented(&self, a: usize, b: usize) -> Result<T> {
        let idx = self.graph.edge_index(a, b).ok_or(Error::NotAnEdge(a, b))?;
        Ok(self.oriented_at(idx, a))
    }

    /// Probability that `from` wins on edge `idx`.
    pub fn oriented_at(&self, idx: usize, from: usize) -> T {
        let p = self.values[idx];
        if self.graph.edges()[idx].0 == from {
            p
        } else {
            T::one() - p
        }
    }

    /// Relabels teams with `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let graph = self.graph.relabel(perm)?;
        let mut values = vec![half::<T>(); graph.edge_count()];
        for (e, &p) in self.graph.edges().iter().zip(&self.values) {
            let (a, b) = (perm[e.0], perm[e.1]);
            let idx = graph.edge_index(a, b).expect("relabeled edge");
            values[idx] = if a < b { p } else { T::one() - p };
        }
        Ok(Self { graph, values })
    }
}

/// Per-edge game counts and wins of the lower-indexed team.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeData {
    graph: TournamentGraph,
    games: Vec<u64>,
    wins: Vec<u64>,
}

impl OutcomeData {
    pub fn new(graph: TournamentGraph, games: Vec<u64>, wins: Vec<u64>) -> Result<Self> {
        for len in [games.len(), wins.len()] {
            if len != graph.edge_count() {
                return Err(Error::LengthMismatch {
                    expected: graph.edge_count(),
                    got: len,
                });
            }
        }
        for ((e, &n), &w) in graph.edges().iter().zip(&games).zip(&wins) {
            if n == 0 || w > n {
                return Err(Error::InvalidCounts {
                    a: e.0,
                    b: e.1,
                    wins: w,
                    games: n,
                });
            }
        }
        Ok(Self { graph, games, wins })
    }

    pub fn graph(&self) -> &TournamentGraph {
        &self.graph
    }

    pub fn games(&self) -> &[u64] {
        &self.games
    }

    pub fn wins(&self) -> &[u64] {
        &self.wins
    }

    pub fn total_games(&self) -> u64 {
        self.games.iter().sum()
    }
}
