//! Unrestricted and order-restricted maximum likelihood, and the
//! likelihood-ratio statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ident::{ConstraintRef, ConstraintSystem, DirectedEdge};
use crate::projection::{project, Inequality};
use crate::scalar::{half, Real};
use crate::tournament::{OutcomeData, ProbabilityAssignment};

/// Per-edge sample means `w / n`. Values may sit at 0 or 1.
pub fn unrestricted_mle(d: &OutcomeData) -> ProbabilityAssignment<f64> {
    let values = d.wins().iter().zip(d.games()).map(|(&w, &n)| w as f64 / n as f64).collect();
    ProbabilityAssignment::estimate(d.graph().clone(), values).expect("counts validated by OutcomeData")
}

/// Constrained estimate under the null of a tested ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedFit<T> {
    /// Canonical per-edge probabilities.
    pub p_star: Vec<T>,
    pub active_constraints: Vec<ConstraintRef>,
    /// `sum n_e (p_hat_e - p_star_e)^2`.
    pub objective: T,
}

impl<T: Real> RestrictedFit<T> {
    /// `p_star` read along each boundary edge of `c`.
    pub fn directed(&self, c: &ConstraintSystem) -> Vec<(DirectedEdge, T)> {
        c.boundary().iter().map(|e| (*e, e.value(&self.p_star))).collect()
    }
}

pub(crate) fn inequalities<T: Real>(c: &ConstraintSystem) -> Vec<(ConstraintRef, Inequality<T>)> {
    c.linear_rows()
        .into_iter()
        .map(|(which, row)| {
            let terms = row
                .terms
                .iter()
                .map(|&(s, k)| (s, T::from_i8(k).expect("small integer")))
                .collect();
            (which, Inequality { terms, rhs: row.rhs() })
        })
        .collect()
}

fn weighted_sq<T: Real>(a: &[T], b: &[T], w: &[T]) -> T {
    a.iter()
        .zip(b)
        .zip(w)
        .fold(T::zero(), |acc, ((&x, &y), &wi)| acc + wi * (x - y) * (x - y))
}

/// Weighted least-squares projection of `p_hat` onto the null polytope of
/// `c`, which coincides with the constrained likelihood maximizer.
pub fn restricted_mle<T: Real>(p_hat: &[T], weights: &[T], c: &ConstraintSystem) -> Result<RestrictedFit<T>> {
    if p_hat.len() != c.edge_count() {
        return Err(Error::LengthMismatch { expected: c.edge_count(), got: p_hat.len() });
    }
    let rows = inequalities::<T>(c);
    let plain: Vec<Inequality<T>> = rows.iter().map(|(_, r)| r.clone()).collect();
    let sol = project(p_hat, weights, &plain)?;
    let active: Vec<ConstraintRef> = sol.active.iter().map(|&i| rows[i].0).collect();

    let raw: Vec<T> = sol.x.iter().map(|&x| x.max(T::zero()).min(T::one())).collect();
    let raw_obj = weighted_sq(p_hat, &raw, weights);
    let tol = T::epsilon() * T::from_f64(1e4).unwrap();
    let polished = polish(p_hat, weights, c, &active);
    let p_star = match polished {
        Some(x)
            if c.max_violation(&x) <= tol
                && weighted_sq(p_hat, &x, weights) <= raw_obj + tol * (T::one() + raw_obj) =>
        {
            x
        }
        _ => raw,
    };
    let objective = weighted_sq(p_hat, &p_star, weights);
    Ok(RestrictedFit { p_star, active_constraints: active, objective })
}

/// Recomputes the solution in closed form from the active set: slots tied
/// together by active order constraints share one directed value, which is
/// 1/2 when the block touches an active boundary constraint and the
/// weighted mean of the block otherwise.
fn polish<T: Real>(p_hat: &[T], weights: &[T], c: &ConstraintSystem, active: &[ConstraintRef]) -> Option<Vec<T>> {
    let n = p_hat.len();
    // Union-find with parity: parity 1 means x_slot = 1 - x_root.
    let mut parent: Vec<usize> = (0..n).collect();
    let mut parity = vec![0u8; n];
    let mut at_half = vec![false; n];
    fn find(parent: &mut [usize], parity: &mut [u8], i: usize) -> (usize, u8) {
        if parent[i] == i {
            return (i, 0);
        }
        let (root, p) = find(parent, parity, parent[i]);
        parent[i] = root;
        parity[i] ^= p;
        (root, parity[i])
    }
    for which in active {
        match *which {
            ConstraintRef::Boundary(i) => at_half[c.boundary()[i].slot] = true,
            ConstraintRef::Order(i) => {
                let (a, b) = c.order()[i];
                let (ea, eb) = (c.boundary()[a], c.boundary()[b]);
                let rel = u8::from(ea.forward != eb.forward);
                let (ra, pa) = find(&mut parent, &mut parity, ea.slot);
                let (rb, pb) = find(&mut parent, &mut parity, eb.slot);
                if ra == rb {
                    if pa ^ pb != rel {
                        at_half[ra] = true;
                    }
                } else {
                    parent[rb] = ra;
                    parity[rb] = pa ^ pb ^ rel;
                    at_half[ra] |= at_half[rb];
                }
            }
        }
    }
    let mut num = vec![T::zero(); n];
    let mut den = vec![T::zero(); n];
    let mut half_root = vec![false; n];
    for s in 0..n {
        let (root, par) = find(&mut parent, &mut parity, s);
        half_root[root] |= at_half[s];
        let v = if par == 0 { p_hat[s] } else { T::one() - p_hat[s] };
        num[root] = num[root] + weights[s] * v;
        den[root] = den[root] + weights[s];
    }
    let out = (0..n)
        .map(|s| {
            let (root, par) = find(&mut parent, &mut parity, s);
            let m = if half_root[root] { half() } else { num[root] / den[root] };
            if par == 0 {
                m
            } else {
                T::one() - m
            }
        })
        .collect();
    Some(out)
}

/// `a ln(a / b)` with `0 ln(0 / x) = 0` and `a / 0 = 0`, `ln 0 = 0`.
fn xlogx_ratio<T: Real>(a: T, b: T) -> T {
    if a == T::zero() || b == T::zero() {
        T::zero()
    } else {
        a * (a / b).ln()
    }
}

/// Likelihood-ratio statistic
/// `T = 2 sum_e n_e [p ln(p / p*) + (1 - p) ln((1 - p) / (1 - p*))]`,
/// natural logarithms, one term per game pair.
pub fn test_statistic<T: Real>(p_hat: &[T], p_star: &[T], games: &[T]) -> T {
    let two = T::one() + T::one();
    let total = p_hat
        .iter()
        .zip(p_star)
        .zip(games)
        .fold(T::zero(), |acc, ((&p, &q), &n)| {
            if p == q {
                return acc;
            }
            acc + n * (xlogx_ratio(p, q) + xlogx_ratio(T::one() - p, T::one() - q))
        });
    (two * total).max(T::zero())
}
