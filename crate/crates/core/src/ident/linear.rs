//! Known linear link functions and the merit solver they allow on a
//! connected tournament.

use std::collections::VecDeque;
use std::fmt;


use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tournament::{MeritVector, ProbabilityAssignment};

/// `P(l beats k) = f(theta_k - theta_l)` with `f` strictly increasing and
/// `f(-x) = 1 - f(x)`.
#[derive(Clone, Copy)]
pub struct LinkFunction<T> {
    name: &'static str,
    forward: fn(T) -> T,
    inverse: fn(T) -> T,
}

impl<T: Real> LinkFunction<T> {
    pub fn new(name: &'static str, forward: fn(T) -> T, inverse: fn(T) -> T) -> Self {
        Self { name, forward, inverse }
    }

    /// Bradley-Terry-Luce: `f(x) = e^x / (1 + e^x)`.
    pub fn logistic() -> Self {
        Self::new(
            "logistic",
            |x| T::one() / (T::one() + (-x).exp()),
            |p| (p / (T::one() - p)).ln(),
        )
    }

    /// Cauchy CDF: `f(x) = 1/2 + atan(x) / pi`.
    pub fn cauchy() -> Self {
        Self::new(
            "cauchy",
            |x| {
                let pi = T::from_f64(std::f64::consts::PI).unwrap();
                T::from_f64(0.5).unwrap() + x.atan() / pi
            },
            |p| {
                let pi = T::from_f64(std::f64::consts::PI).unwrap();
                (pi * (p - T::from_f64(0.5).unwrap())).tan()
            },
        )
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn forward(&self, x: T) -> T {
        (self.forward)(x)
    }

    pub fn inverse(&self, p: T) -> T {
        (self.inverse)(p)
    }
}

impl<T> fmt::Debug for LinkFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinkFunction").field("name", &self.name).finish()
    }
}

/// Default residual tolerance for population inputs.
pub const DEFAULT_LINEAR_TOL: f64 = 1e-8;

/// Recovers merits under a known linear link.
///
/// Walks a BFS spanning tree from `norm_team` (pinned to `norm_value`),
/// setting `theta_k = theta_l + f^-1(P(l beats k))` on tree edges, then
/// checks every remaining edge against its implied difference.
pub fn solve_linear_parametric<T: Real>(
    p: &ProbabilityAssignment<T>,
    link: &LinkFunction<T>,
    norm_team: usize,
    norm_value: T,
    tol: T,
) -> Result<MeritVector<T>> {
    let g = p.graph();
    let q = g.teams();
    if norm_team >= q {
        return Err(Error::TeamOutOfRange { team: norm_team, teams: q });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut incident = vec![Vec::new(); q];
    for (idx, e) in g.edges().iter().enumerate() {
        incident[e.0].push(idx);
        incident[e.1].push(idx);
    }
    let mut theta: Vec<Option<T>> = vec![None; q];
    let mut tree = vec![false; g.edge_count()];
    theta[norm_team] = Some(norm_value);
    let mut queue = VecDeque::from([norm_team]);
    while let Some(l) = queue.pop_front() {
        let tl = theta[l].expect("visited");
        for &idx in &incident[l] {
            let k = g.edges()[idx].other(l);
            if theta[k].is_none() {
                theta[k] = Some(tl + link.inverse(p.oriented_at(idx, l)));
                tree[idx] = true;
                queue.push_back(k);
            }
        }
    }
    let theta: Vec<T> = theta.into_iter().map(|t| t.expect("connected")).collect();

    let mut worst: Option<(usize, T)> = None;
    for (idx, e) in g.edges().iter().enumerate() {
        if tree[idx] {
            continue;
        }
        let implied = link.inverse(p.values()[idx]);
        let residual = (theta[e.1] - theta[e.0] - implied).abs();
        if worst.is_none_or(|(_, w)| residual > w) {
            worst = Some((idx, residual));
        }
    }
    if let Some((idx, residual)) = worst {
        if residual > tol {
            let e = g.edges()[idx];
            return Err(Error::Inconsistent {
                a: e.0,
                b: e.1,
                residual: residual.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    MeritVector::new(theta)
}
