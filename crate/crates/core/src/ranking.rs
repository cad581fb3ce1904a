//! Rank vectors under the lower-rank convention and their enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tournament::MeritVector;

/// Default largest team count accepted by [`enumerate_rankings`].
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// A weak ordering: `r[l] = 1 + #{k : r[k] < r[l]}` for every team.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Ranking(Vec<u32>);

impl Ranking {
    pub fn new(ranks: Vec<u32>) -> Result<Self> {
        let as_i64: Vec<i64> = ranks.iter().map(|&r| r as i64).collect();
        if ranks.is_empty() || !is_valid_ranking(&as_i64) {
            return Err(Error::InvalidRanking(as_i64));
        }
        Ok(Self(ranks))
    }

    pub fn ranks(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rank(&self, team: usize) -> u32 {
        self.0[team]
    }

    pub fn has_ties(&self) -> bool {
        let mut seen = vec![false; self.0.len() + 1];
        self.0.iter().any(|&r| std::mem::replace(&mut seen[r as usize], true))
    }

    /// Rank vector after relabeling teams with `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut out = vec![0; self.0.len()];
        for (old, &r) in self.0.iter().enumerate() {
            out[perm[old]] = r;
        }
        Self(out)
    }
}

impl TryFrom<Vec<u32>> for Ranking {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Ranking> for Vec<u32> {
    fn from(r: Ranking) -> Self {
        r.0
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// `r_l = 1 + #{i : theta_l > theta_i}`; equal merits share a rank.
pub fn ranks_from_merits<T: Scalar>(theta: &MeritVector<T>) -> Ranking {
    let t = theta.as_slice();
    let ranks = t
        .iter()
        .map(|&x| 1 + t.iter().filter(|&&y| x > y).count() as u32)
        .collect();
    Ranking(ranks)
}

pub fn is_valid_ranking(r: &[i64]) -> bool {
    r.iter()
        .all(|&rl| rl == 1 + r.iter().filter(|&&rk| rk < rl).count() as i64)
}

/// All rankings of `teams` teams in lexicographic order: permutations when
/// `allow_ties` is false, every weak ordering otherwise. Fails when `teams`
/// exceeds `cap`.
pub fn enumerate_rankings(teams: usize, allow_ties: bool, cap: usize) -> Result<Vec<Ranking>> {
    if teams == 0 {
        return Err(Error::NoTeams);
    }
    if teams > cap {
        return Err(Error::CapExceeded {
            what: "teams",
            size: teams as u128,
            cap: cap as u128,
        });
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; teams];
    if allow_ties {
        weak_orders(&mut current, 0, 1, &mut out);
    } else {
        permutations(&mut current, &mut vec![false; teams], 0, &mut out);
    }
    out.sort_unstable();
    Ok(out)
}

fn permutations(current: &mut [u32], used: &mut [bool], pos: usize, out: &mut Vec<Ranking>) {
    let q = current.len();
    if pos == q {
        out.push(Ranking(current.to_vec()));
        return;
    }
    for r in 0..q {
        if !used[r] {
            used[r] = true;
            current[pos] = r as u32 + 1;
            permutations(current, used, pos + 1, out);
            used[r] = false;
        }
    }
}

// Ordered set partitions: choose the next block (a nonempty subset of the
// unassigned teams); its members all get rank `next_rank`.
fn weak_orders(current: &mut [u32], assigned: usize, next_rank: u32, out: &mut Vec<Ranking>) {
    let q = current.len();
    if assigned == q {
        out.push(Ranking(current.to_vec()));
        return;
    }
    let free: Vec<usize> = (0..q).filter(|&t| current[t] == 0).collect();
    for mask in 1u32..(1 << free.len()) {
        let block: Vec<usize> = free
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &t)| t)
            .collect();
        for &t in &block {
            current[t] = next_rank;
        }
        weak_orders(
            current,
            assigned + block.len(),
            next_rank + block.len() as u32,
            out,
        );
        for &t in &block {
            current[t] = 0;
        }
    }
}
