//! Perfect matchings, deferred acceptance and the brute-force oracle.

use std::collections::{BTreeSet, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::instances::PreferenceProfile;
use crate::{Error, Result};

/// Brute force scans all `n!` perfect matchings; this is the oracle boundary.
pub const DEFAULT_BRUTEFORCE_CAP: usize = 9;

/// A perfect matching stored as job -> applicant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching {
    assignment: Vec<usize>,
}

impl Matching {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let n = assignment.len();
        let mut seen = vec![false; n];
        for (u, &v) in assignment.iter().enumerate() {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidMatching(format!(
                    "job {u} -> applicant {v} breaks the bijection on 0..{n}"
                )));
            }
        }
        Ok(Matching { assignment })
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<usize>) -> Self {
        debug_assert!(Matching::new(assignment.clone()).is_ok());
        Matching { assignment }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn partner_of_job(&self, u: usize) -> usize {
        self.assignment[u]
    }

    /// applicant -> job.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.assignment.len()];
        for (u, &v) in self.assignment.iter().enumerate() {
            inv[v] = u;
        }
        inv
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Jobs,
    Applicants,
}

/// Deferred acceptance. With `Side::Jobs` the result is the job-optimal
/// stable matching.
pub fn gale_shapley(profile: &PreferenceProfile, proposing: Side) -> Matching {
    match proposing {
        Side::Jobs => Matching::from_vec_unchecked(deferred_acceptance(profile)),
        Side::Applicants => {
            // applicant -> job from the transposed market, inverted.
            let by_applicant = deferred_acceptance(&profile.transposed());
            let mut assignment = vec![0; profile.n()];
            for (v, &u) in by_applicant.iter().enumerate() {
                assignment[u] = v;
            }
            Matching::from_vec_unchecked(assignment)
        }
    }
}

fn deferred_acceptance(profile: &PreferenceProfile) -> Vec<usize> {
    let n = profile.n();
    let mut next = vec![0usize; n];
    let mut holder: Vec<Option<usize>> = vec![None; n];
    let mut free: VecDeque<usize> = (0..n).collect();
    while let Some(u) = free.pop_front() {
        let v = profile.job_prefs()[u][next[u]];
        next[u] += 1;
        match holder[v] {
            None => holder[v] = Some(u),
            Some(w) if profile.applicant_prefers(v, u, w) => {
                holder[v] = Some(u);
                free.push_back(w);
            }
            Some(_) => free.push_back(u),
        }
    }
    let mut assignment = vec![0; n];
    for (v, u) in holder.into_iter().enumerate() {
        assignment[u.expect("every applicant is proposed to")] = v;
    }
    assignment
}

/// All blocking pairs `(job, applicant)`, in lexicographic order.
pub fn unstable_pairs(profile: &PreferenceProfile, matching: &Matching) -> Vec<(usize, usize)> {
    let n = profile.n();
    let inv = matching.inverse();
    (0..n)
        .cartesian_product(0..n)
        .filter(|&(u, v)| {
            profile.job_prefers(u, v, matching.partner_of_job(u)) && profile.applicant_prefers(v, u, inv[v])
        })
        .collect()
}

pub fn is_stable(profile: &PreferenceProfile, matching: &Matching) -> bool {
    unstable_pairs(profile, matching).is_empty()
}

/// Every stable matching, found by filtering all `n!` perfect matchings.
/// Output is in lexicographic order of the assignment vectors.
pub fn enumerate_stable_bruteforce(profile: &PreferenceProfile) -> Result<Vec<Matching>> {
    enumerate_stable_bruteforce_capped(profile, DEFAULT_BRUTEFORCE_CAP)
}

pub fn enumerate_stable_bruteforce_capped(profile: &PreferenceProfile, cap: usize) -> Result<Vec<Matching>> {
    let n = profile.n();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "brute-force instance size",
            cap,
            actual: n,
        });
    }
    let found: BTreeSet<Matching> = (0..n)
        .permutations(n)
        .map(Matching::from_vec_unchecked)
        .filter(|m| is_stable(profile, m))
        .collect();
    Ok(found.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{instance_i2, random_instance};

    #[test]
    fn matching_validation() {
        assert!(Matching::new(vec![1, 0]).is_ok());
        assert!(Matching::new(vec![0, 0]).is_err());
        assert!(Matching::new(vec![0, 2]).is_err());
        assert_eq!(Matching::new(vec![2, 0, 1]).unwrap().inverse(), vec![1, 2, 0]);
    }

    #[test]
    fn single_pair() {
        let p = random_instance(1, 0).unwrap();
        assert_eq!(gale_shapley(&p, Side::Jobs).assignment(), &[0]);
        assert!(unstable_pairs(&p, &Matching::new(vec![0]).unwrap()).is_empty());
        assert_eq!(
            enumerate_stable_bruteforce(&p).unwrap(),
            vec![Matching::new(vec![0]).unwrap()]
        );
    }

    #[test]
    fn i2_deferred_acceptance() {
        let p = instance_i2();
        assert_eq!(gale_shapley(&p, Side::Jobs).assignment(), &[0, 1]);
        assert_eq!(gale_shapley(&p, Side::Applicants).assignment(), &[1, 0]);
        assert!(unstable_pairs(&p, &Matching::new(vec![0, 1]).unwrap()).is_empty());
        let all = enumerate_stable_bruteforce(&p).unwrap();
        assert_eq!(
            all,
            vec![Matching::new(vec![0, 1]).unwrap(), Matching::new(vec![1, 0]).unwrap()]
        );
    }

    #[test]
    fn blocking_pair_detected() {
        let p = PreferenceProfile::new(vec![vec![0, 1], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]).unwrap();
        let bad = Matching::new(vec![1, 0]).unwrap();
        assert!(unstable_pairs(&p, &bad).contains(&(0, 0)));
    }

    #[test]
    fn gale_shapley_is_stable_seed_3() {
        let p = random_instance(6, 3).unwrap();
        assert!(unstable_pairs(&p, &gale_shapley(&p, Side::Jobs)).is_empty());
    }

    #[test]
    fn optimal_matchings_are_enumerated_seed_11() {
        let p = random_instance(5, 11).unwrap();
        let all = enumerate_stable_bruteforce(&p).unwrap();
        assert!(all.contains(&gale_shapley(&p, Side::Jobs)));
        assert!(all.contains(&gale_shapley(&p, Side::Applicants)));
    }

    #[test]
    fn cap_enforced() {
        let p = random_instance(4, 1).unwrap();
        assert!(matches!(
            enumerate_stable_bruteforce_capped(&p, 3),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn stability_and_optimality_over_seeds() {
        for seed in 0..200u64 {
            let n = 1 + (seed as usize % 8);
            let p = random_instance(n, seed).unwrap();
            let jobs = gale_shapley(&p, Side::Jobs);
            let apps = gale_shapley(&p, Side::Applicants);
            assert!(is_stable(&p, &jobs) && is_stable(&p, &apps), "seed {seed}");
            if n <= 7 {
                let all = enumerate_stable_bruteforce(&p).unwrap();
                assert!(all.contains(&jobs) && all.contains(&apps));
                for m in &all {
                    for u in 0..n {
                        // Job-optimal: weakly better than in any stable matching;
                        // applicant-optimal is job-pessimal.
                        assert!(p.job_rank(u, jobs.partner_of_job(u)) <= p.job_rank(u, m.partner_of_job(u)));
                        assert!(p.job_rank(u, apps.partner_of_job(u)) >= p.job_rank(u, m.partner_of_job(u)));
                    }
                }
            }
        }
    }
}
