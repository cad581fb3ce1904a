//! Membership under the linear semiparametric model: the link depends on
//! merit differences only, its shape is unknown.
//!
//! A ranking is admissible iff some `nu` orders teams like the ranking and
//! orders every pair of directed games like their probabilities:
//! `sign(nu_k - nu_i - nu_u + nu_v) = sign(p_ik - p_vu)`. Strict signs are
//! relaxed to a common slack `s`, maximized by a linear program over the
//! unit box; the ranking is accepted when the optimal slack reaches the
//! margin.

use std::collections::BTreeMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::ident::membership::directed_values;
use crate::ranking::Ranking;
use crate::scalar::{sign, Scalar};
use crate::tournament::ProbabilityAssignment;

pub const DEFAULT_MARGIN: f64 = 1e-6;

/// A sign condition `sign(sum coef * nu) = target`.
#[derive(Debug, Clone, PartialEq)]
struct SignCondition {
    coefs: Vec<(usize, f64)>,
    target: i8,
}

fn conditions<T: Scalar>(p: &ProbabilityAssignment<T>, r: &Ranking) -> Result<Vec<SignCondition>> {
    let q = p.graph().teams();
    if r.len() != q {
        return Err(Error::LengthMismatch { expected: q, got: r.len() });
    }
    let mut out = Vec::new();
    let push = |out: &mut Vec<SignCondition>, terms: &[(usize, f64)], target: i8| {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(v, c) in terms {
            *acc.entry(v).or_insert(0.0) += c;
        }
        let coefs: Vec<(usize, f64)> = acc.into_iter().filter(|&(_, c)| c != 0.0).collect();
        out.push(SignCondition { coefs, target });
    };
    for l in 0..q {
        for k in l + 1..q {
            let target = sign(r.rank(k) as i64 - r.rank(l) as i64);
            push(&mut out, &[(k, 1.0), (l, -1.0)], target);
        }
    }
    let directed = directed_values(p);
    for (x, &(i, k, pik)) in directed.iter().enumerate() {
        for &(v, u, pvu) in &directed[x + 1..] {
            push(&mut out, &[(k, 1.0), (i, -1.0), (u, -1.0), (v, 1.0)], sign(pik - pvu));
        }
    }
    Ok(out)
}

/// Smallest slack of `nu` across all sign conditions: the strict ones
/// contribute `target * expr`, the equalities `-|expr|`. Positive means
/// `nu` is a witness.
pub fn semiparametric_slack<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    r: &Ranking,
    nu: &[f64],
) -> Result<f64> {
    let conds = conditions(p, r)?;
    let mut worst = f64::INFINITY;
    for c in conds {
        let expr: f64 = c.coefs.iter().map(|&(v, a)| a * nu[v]).sum();
        let slack = if c.target == 0 { -expr.abs() } else { c.target as f64 * expr };
        if c.target == 0 && slack == 0.0 {
            continue;
        }
        worst = worst.min(slack);
    }
    Ok(worst)
}

/// Solution of the slack-maximizing program.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiparametricFit {
    pub nu: Vec<f64>,
    pub slack: f64,
}

/// Maximizes the common slack; `None` when the equality conditions alone
/// are inconsistent.
pub fn semiparametric_fit<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    r: &Ranking,
) -> Result<Option<SemiparametricFit>> {
    let q = p.graph().teams();
    let conds = conditions(p, r)?;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let nu: Vec<_> = (0..q).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let slack = lp.add_var(1.0, (-4.0, 1.0));
    for c in &conds {
        if c.coefs.is_empty() {
            if c.target != 0 {
                // 0 must have a nonzero sign: only satisfiable with s <= 0.
                lp.add_constraint([(slack, 1.0)], ComparisonOp::Le, 0.0);
            }
            continue;
        }
        let mut terms: Vec<_> = c.coefs.iter().map(|&(v, a)| (nu[v], a)).collect();
        match c.target {
            0 => lp.add_constraint(&terms, ComparisonOp::Eq, 0.0),
            t => {
                // t * expr >= s  <=>  t * expr - s >= 0
                for term in &mut terms {
                    term.1 *= t as f64;
                }
                terms.push((slack, -1.0));
                lp.add_constraint(&terms, ComparisonOp::Ge, 0.0);
            }
        }
    }
    match lp.solve() {
        Ok(sol) => Ok(Some(SemiparametricFit {
            nu: nu.iter().map(|&v| sol[v]).collect(),
            slack: sol[slack],
        })),
        Err(minilp::Error::Infeasible) => Ok(None),
        Err(minilp::Error::Unbounded) => unreachable!("all variables are boxed"),
    }
}

/// Membership in the linear semiparametric identified set.
pub fn check_membership_semiparametric<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    r: &Ranking,
    margin: f64,
) -> Result<bool> {
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::InvalidArgument(format!("margin must be positive, got {margin}")));
    }
    Ok(semiparametric_fit(p, r)?.is_some_and(|fit| fit.slack >= margin))
}
