//! Null-hypothesis inequality systems for a tested ranking.
//!
//! For ranking `r` the boundary set holds every directed edge `(j, l)` with
//! `r_l <= r_j` (the weaker side of each game, both sides when tied), each
//! carrying `P(j beats l) <= 1/2`. The order set holds every pair of distinct
//! boundary edges `((j, l), (i, k))` with `r_l <= r_k <= r_i <= r_j`, meaning
//! `P(j beats l) <= P(i beats k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::scalar::{half, Scalar};
use crate::tournament::TournamentGraph;

/// A directed edge `from -> to` read as "`from` beats `to`", mapped onto the
/// canonical storage slot. `forward` is true when `from` is the lower index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
    pub slot: usize,
    pub forward: bool,
}

impl DirectedEdge {
    /// Directed probability given canonical per-slot values.
    #[inline]
    pub fn value<T: Scalar>(&self, canonical: &[T]) -> T {
        let p = canonical[self.slot];
        if self.forward {
            p
        } else {
            T::one() - p
        }
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        if self.forward {
            1
        } else {
            -1
        }
    }
}

/// One linear inequality `sum coef * x[slot] <= rhs_halves / 2` over the
/// canonical per-edge probabilities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearRow {
    pub terms: Vec<(usize, i8)>,
    pub rhs_halves: i8,
}

impl LinearRow {
    pub fn lhs<T: Scalar>(&self, x: &[T]) -> T {
        self.terms.iter().fold(T::zero(), |acc, &(s, c)| {
            acc + T::from_i8(c).expect("small integer") * x[s]
        })
    }

    pub fn rhs<T: Scalar>(&self) -> T {
        T::from_i8(self.rhs_halves).expect("small integer") * half::<T>()
    }
}

/// Which inequality of a [`ConstraintSystem`] a row or multiplier refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintRef {
    Boundary(usize),
    Order(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    teams: usize,
    edge_count: usize,
    ranks: Vec<u32>,
    boundary: Vec<DirectedEdge>,
    order: Vec<(usize, usize)>,
}

impl ConstraintSystem {
    /// Builds the full (unpruned) boundary and order sets.
    pub fn build(graph: &TournamentGraph, ranking: &Ranking) -> Result<Self> {
        if ranking.len() != graph.teams() {
            return Err(Error::LengthMismatch {
                expected: graph.teams(),
                got: ranking.len(),
            });
        }
        let r = ranking.ranks();
        let mut boundary = Vec::new();
        for (slot, e) in graph.edges().iter().enumerate() {
            let (lo, hi) = (e.0, e.1);
            // (lo beats hi) is constrained when hi ranks no worse than lo.
            if r[hi] <= r[lo] {
                boundary.push(DirectedEdge { from: lo, to: hi, slot, forward: true });
            }
            if r[lo] <= r[hi] {
                boundary.push(DirectedEdge { from: hi, to: lo, slot, forward: false });
            }
        }
        let mut order = Vec::new();
        for (a, ea) in boundary.iter().enumerate() {
            for (b, eb) in boundary.iter().enumerate() {
                if a != b && nests(r, ea, eb) {
                    order.push((a, b));
                }
            }
        }
        Ok(Self {
            teams: graph.teams(),
            edge_count: graph.edge_count(),
            ranks: r.to_vec(),
            boundary,
            order,
        })
    }

    /// Drops order pairs implied by transitivity: `(a, c)` goes when some
    /// boundary edge `b` has a rank interval strictly between those of `a`
    /// and `c`. Pairs with identical intervals (ties) are kept.
    pub fn pruned(&self) -> Self {
        let r = &self.ranks;
        let interval = |e: &DirectedEdge| (r[e.to], r[e.from]);
        let order = self
            .order
            .iter()
            .copied()
            .filter(|&(a, c)| {
                let (ia, ic) = (interval(&self.boundary[a]), interval(&self.boundary[c]));
                !self.boundary.iter().any(|b| {
                    let ib = interval(b);
                    ib != ia && ib != ic && contains(ia, ib) && contains(ib, ic)
                })
            })
            .collect();
        Self { order, ..self.clone() }
    }

    pub fn teams(&self) -> usize {
        self.teams
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn boundary(&self) -> &[DirectedEdge] {
        &self.boundary
    }

    pub fn order(&self) -> &[(usize, usize)] {
        &self.order
    }

    /// `(from, to)` pairs of the boundary edges.
    pub fn boundary_pairs(&self) -> Vec<(usize, usize)> {
        self.boundary.iter().map(|e| (e.from, e.to)).collect()
    }

    /// Order constraints as `((j, l), (i, k))` team pairs.
    pub fn order_pairs(&self) -> Vec<((usize, usize), (usize, usize))> {
        self.order
            .iter()
            .map(|&(a, b)| {
                let (ea, eb) = (self.boundary[a], self.boundary[b]);
                ((ea.from, ea.to), (eb.from, eb.to))
            })
            .collect()
    }

    /// Canonical slots that appear in at least one boundary constraint.
    /// With a valid ranking this is every edge.
    pub fn constrained_slots(&self) -> Vec<usize> {
        let mut slots: Vec<usize> = self.boundary.iter().map(|e| e.slot).collect();
        slots.dedup();
        slots
    }

    /// The system as linear rows over canonical probabilities, boundary
    /// rows first, then order rows.
    pub fn linear_rows(&self) -> Vec<(ConstraintRef, LinearRow)> {
        let mut rows = Vec::with_capacity(self.boundary.len() + self.order.len());
        for (i, e) in self.boundary.iter().enumerate() {
            // sigma * x + (1 - sigma) / 2 <= 1/2  <=>  sigma * x <= sigma / 2
            rows.push((
                ConstraintRef::Boundary(i),
                LinearRow { terms: vec![(e.slot, e.sign())], rhs_halves: e.sign() },
            ));
        }
        for (i, &(a, b)) in self.order.iter().enumerate() {
            let (ea, eb) = (self.boundary[a], self.boundary[b]);
            let (sa, sb) = (ea.sign(), eb.sign());
            let terms = if ea.slot == eb.slot {
                vec![(ea.slot, sa - sb)]
            } else {
                vec![(ea.slot, sa), (eb.slot, -sb)]
            };
            rows.push((ConstraintRef::Order(i), LinearRow { terms, rhs_halves: sa - sb }));
        }
        rows
    }

    /// Whether canonical values `x` satisfy every inequality up to `tol`.
    pub fn is_satisfied<T: Scalar>(&self, x: &[T], tol: T) -> bool {
        self.max_violation(x) <= tol
    }

    /// Largest positive constraint violation (zero when feasible).
    pub fn max_violation<T: Scalar>(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for e in &self.boundary {
            let v = e.value(x) - half::<T>();
            if v > worst {
                worst = v;
            }
        }
        for &(a, b) in &self.order {
            let v = self.boundary[a].value(x) - self.boundary[b].value(x);
            if v > worst {
                worst = v;
            }
        }
        worst
    }
}

fn nests(r: &[u32], outer: &DirectedEdge, inner: &DirectedEdge) -> bool {
    contains((r[outer.to], r[outer.from]), (r[inner.to], r[inner.from]))
}

fn contains(outer: (u32, u32), inner: (u32, u32)) -> bool {
    outer.0 <= inner.0 && inner.0 <= inner.1 && inner.1 <= outer.1
}
