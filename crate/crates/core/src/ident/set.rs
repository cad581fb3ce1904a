use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ident::membership::check_membership_tol;
use crate::ranking::{enumerate_rankings, Ranking};
use crate::scalar::Scalar;
use crate::tournament::ProbabilityAssignment;

/// A set of rankings together with its per-team rank projections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifiedSet {
    teams: usize,
    rankings: Vec<Ranking>,
    per_team: Vec<BTreeSet<u32>>,
}

impl IdentifiedSet {
    /// Sorts and deduplicates `rankings` and fills the projections.
    pub fn new(teams: usize, mut rankings: Vec<Ranking>) -> Result<Self> {
        if let Some(bad) = rankings.iter().find(|r| r.len() != teams) {
            return Err(Error::LengthMismatch { expected: teams, got: bad.len() });
        }
        rankings.sort_unstable();
        rankings.dedup();
        let mut per_team = vec![BTreeSet::new(); teams];
        for r in &rankings {
            for (t, &rank) in r.ranks().iter().enumerate() {
                per_team[t].insert(rank);
            }
        }
        Ok(Self { teams, rankings, per_team })
    }

    pub fn teams(&self) -> usize {
        self.teams
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn per_team(&self) -> &[BTreeSet<u32>] {
        &self.per_team
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn contains(&self, r: &Ranking) -> bool {
        self.rankings.binary_search(r).is_ok()
    }
}

/// Every candidate ranking that passes the population membership test.
pub fn identified_set<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    allow_ties: bool,
    cap: usize,
) -> Result<IdentifiedSet> {
    identified_set_tol(p, allow_ties, cap, T::zero())
}

pub fn identified_set_tol<T: Scalar>(
    p: &ProbabilityAssignment<T>,
    allow_ties: bool,
    cap: usize,
    tol: T,
) -> Result<IdentifiedSet> {
    let q = p.graph().teams();
    let candidates = enumerate_rankings(q, allow_ties, cap)?;
    let members = candidates
        .into_par_iter()
        .map(|r| check_membership_tol(p, &r, tol).map(|ok| ok.then_some(r)))
        .collect::<Result<Vec<_>>>()?;
    IdentifiedSet::new(q, members.into_iter().flatten().collect())
}

/// Ranks team `team` takes across the set.
pub fn project_rank(set: &IdentifiedSet, team: usize) -> Result<BTreeSet<u32>> {
    set.per_team
        .get(team)
        .cloned()
        .ok_or(Error::TeamOutOfRange { team, teams: set.teams })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tournament::TournamentGraph;

    #[test]
    fn chain_set_and_projection() {
        let p = ProbabilityAssignment::new(TournamentGraph::chain(4).unwrap(), vec![0.75, 0.7, 0.2])
            .unwrap();
        let set = identified_set(&p, false, 8).unwrap();
        let got: Vec<&[u32]> = set.rankings().iter().map(|r| r.ranks()).collect();
        assert_eq!(got, vec![&[1, 3, 4, 2][..], &[2, 3, 4, 1][..]]);
        assert_eq!(project_rank(&set, 0).unwrap(), BTreeSet::from([1, 2]));
        assert_eq!(project_rank(&set, 1).unwrap(), BTreeSet::from([3]));
        assert_eq!(project_rank(&set, 2).unwrap(), BTreeSet::from([4]));
        assert!(project_rank(&set, 4).is_err());
        // A and D never meet, so with ties allowed they may share rank 1.
        let tied = identified_set(&p, true, 8).unwrap();
        let got: Vec<&[u32]> = tied.rankings().iter().map(|r| r.ranks()).collect();
        assert_eq!(got, vec![&[1, 3, 4, 1][..], &[1, 3, 4, 2][..], &[2, 3, 4, 1][..]]);
    }

    #[test]
    fn intransitive_cycle_is_empty() {
        let g = TournamentGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        // P(A>B) = P(B>C) = P(C>A) = 0.7
        let p = ProbabilityAssignment::new(g, vec![0.7, 0.3, 0.7]).unwrap();
        assert!(identified_set(&p, true, 8).unwrap().is_empty());
    }

    #[test]
    fn singleton_projection() {
        let r = Ranking::new(vec![2, 1, 3]).unwrap();
        let set = IdentifiedSet::new(3, vec![r]).unwrap();
        for (t, want) in [2, 1, 3].into_iter().enumerate() {
            assert_eq!(project_rank(&set, t).unwrap(), BTreeSet::from([want]));
        }
    }
}
