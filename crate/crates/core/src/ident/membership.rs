//! Population-level membership of a ranking in the nonparametric
//! identified set, in sign-condition and matrix form.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::scalar::{half, sign, sign_tol, Scalar};
use crate::tournament::{ProbabilityAssignment, TournamentGraph};

/// Directed edges `(from, to, P(from beats to))`, both orientations.
pub(crate) fn directed_values<T: Scalar>(p: &ProbabilityAssignment<T>) -> Vec<(usize, usize, T)> {
    let mut out = Vec::with_capacity(2 * p.graph().edge_count());
    for (e, &v) in p.graph().edges().iter().zip(p.values()) {
        out.push((e.0, e.1, v));
        out.push((e.1, e.0, T::one() - v));
    }
    out
}

fn check_len<T: Scalar>(p: &ProbabilityAssignment<T>, r: &Ranking) -> Result<()> {
    if r.len() != p.graph().teams() {
        return Err(Error::LengthMismatch {
            expected: p.graph().teams(),
            got: r.len(),
        });
    }
    Ok(())
}

/// Exact membership test (zero tolerance).
pub fn check_membership<T: Scalar>(p: &ProbabilityAssignment<T>, r: &Ranking) -> Result<bool> {
    check_membership_tol(p, r, T::zero())
}

/// Membership test where probability differences within `tol` count as
/// equal.
///
/// A ranking belongs to the identified set iff for all directed edges:
/// * `sign(r_l - r_k) + sign(p_lk - 1/2) = 0`;
/// * `sign(r_l - r_k) + sign(p_ik - p_jl) = 0` whenever `r_i = r_j`;
/// * `min(sign(r_l - r_k), sign(p_ik - p_jl)) = -1` whenever `r_i > r_j`.
pub fn check_membership_tol<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    r: &Ranking,
    tol: T,
) -> Result<bool> {
    check_len(p, r)?;
    let r = r.ranks();
    let rank_sign = |a: usize, b: usize| sign(r[a] as i64 - r[b] as i64);
    let directed = directed_values(p);

    for &(l, k, plk) in &directed {
        if rank_sign(l, k) + sign_tol(plk - half::<T>(), tol) != 0 {
            return Ok(false);
        }
    }
    for &(i, k, pik) in &directed {
        for &(j, l, pjl) in &directed {
            let diff = sign_tol(pik - pjl, tol);
            let ok = if r[i] == r[j] {
                rank_sign(l, k) + diff == 0
            } else if r[i] > r[j] {
                rank_sign(l, k).min(diff) == -1
            } else {
                true
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Matrix form for tie-free rankings. Entry `(r_l, r_k)` holds
/// `P(l beats k)`, the diagonal holds 1/2, and the ranking is a member iff
/// each filled entry is strictly smaller than every distinct filled entry
/// weakly north-east of it.
pub fn check_membership_matrix<T: Scalar>(p: &ProbabilityAssignment<T>, r: &Ranking) -> Result<bool> {
    check_len(p, r)?;
    if r.has_ties() {
        return Err(Error::TiesPresent);
    }
    let q = r.len();
    let mut m: Vec<Vec<Option<T>>> = vec![vec![None; q]; q];
    for (d, row) in m.iter_mut().enumerate() {
        row[d] = Some(half());
    }
    for (l, k, v) in directed_values(p) {
        m[r.rank(l) as usize - 1][r.rank(k) as usize - 1] = Some(v);
    }
    let filled: Vec<(usize, usize, T)> = (0..q)
        .flat_map(|i| (0..q).map(move |j| (i, j)))
        .filter_map(|(i, j)| m[i][j].map(|v| (i, j, v)))
        .collect();
    for &(i, j, a) in &filled {
        for &(i2, j2, b) in &filled {
            if (i, j) != (i2, j2) && i >= i2 && j <= j2 && a >= b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Merges teams sharing a rank into single nodes. Returns `None` when the
/// tied teams cannot be merged consistently: a game inside a tied group not
/// at 1/2, or parallel games between two groups with different
/// probabilities. Such rankings are never in the identified set.
pub fn contract_ties<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    r: &Ranking,
) -> Result<Option<(ProbabilityAssignment<T>, Ranking)>> {
    check_len(p, r)?;
    let mut distinct: Vec<u32> = r.ranks().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let group = |team: usize| distinct.binary_search(&r.rank(team)).expect("rank present");

    let mut merged: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for (l, k, v) in directed_values(p) {
        let (gl, gk) = (group(l), group(k));
        if gl == gk {
            if v != half() {
                return Ok(None);
            }
            continue;
        }
        if gl > gk {
            continue;
        }
        match merged.get(&(gl, gk)) {
            Some(&existing) if existing != v => return Ok(None),
            Some(_) => {}
            None => {
                merged.insert((gl, gk), v);
            }
        }
    }
    let graph = TournamentGraph::new(distinct.len(), merged.keys().copied())?;
    let values = merged.into_values().collect();
    let contracted = ProbabilityAssignment::new(graph, values)?;
    let ranks = (1..=distinct.len() as u32).collect();
    Ok(Some((contracted, Ranking::new(ranks)?)))
}

/// Matrix-form membership that first merges tied teams.
pub fn check_membership_matrix_merged<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    r: &Ranking,
) -> Result<bool> {
    match contract_ties(p, r)? {
        Some((pc, rc)) => check_membership_matrix(&pc, &rc),
        None => Ok(false),
    }
}
