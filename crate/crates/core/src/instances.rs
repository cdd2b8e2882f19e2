//! Stable matching instances: `n` jobs and `n` applicants, each with a strict
//! preference order over the other side.
//!
//! Instance files are UTF-8 JSON with 0-based indices:
//!
//! ```json
//! {"n": 2, "job_prefs": [[0, 1], [1, 0]], "applicant_prefs": [[1, 0], [0, 1]]}
//! ```

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ProfileFile", into = "ProfileFile")]
pub struct PreferenceProfile {
    n: usize,
    job_prefs: Vec<Vec<usize>>,
    applicant_prefs: Vec<Vec<usize>>,
    // job_rank[u][v] = position of applicant v on job u's list.
    job_rank: Vec<Vec<usize>>,
    applicant_rank: Vec<Vec<usize>>,
}

/// On-disk shape of a profile, keys exactly as in the file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    n: usize,
    job_prefs: Vec<Vec<usize>>,
    applicant_prefs: Vec<Vec<usize>>,
}

impl TryFrom<ProfileFile> for PreferenceProfile {
    type Error = Error;

    fn try_from(f: ProfileFile) -> Result<Self> {
        if f.job_prefs.len() != f.n {
            return Err(Error::InvalidInstance(format!(
                "job_prefs has {} rows but n = {}",
                f.job_prefs.len(),
                f.n
            )));
        }
        if f.applicant_prefs.len() != f.n {
            return Err(Error::InvalidInstance(format!(
                "applicant_prefs has {} rows but n = {}",
                f.applicant_prefs.len(),
                f.n
            )));
        }
        PreferenceProfile::new(f.job_prefs, f.applicant_prefs)
    }
}

impl From<PreferenceProfile> for ProfileFile {
    fn from(p: PreferenceProfile) -> Self {
        ProfileFile {
            n: p.n,
            job_prefs: p.job_prefs,
            applicant_prefs: p.applicant_prefs,
        }
    }
}

fn ranks(side: &str, rows: &[Vec<usize>], n: usize) -> Result<Vec<Vec<usize>>> {
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            if row.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "{side} row {r} has length {} but n = {n}",
                    row.len()
                )));
            }
            let mut rank = vec![usize::MAX; n];
            for (pos, &x) in row.iter().enumerate() {
                if x >= n || rank[x] != usize::MAX {
                    return Err(Error::InvalidInstance(format!(
                        "{side} row {r} not a permutation of 0..{n}"
                    )));
                }
                rank[x] = pos;
            }
            Ok(rank)
        })
        .collect()
}

impl PreferenceProfile {
    /// Builds a profile from preference rows, most preferred first.
    pub fn new(job_prefs: Vec<Vec<usize>>, applicant_prefs: Vec<Vec<usize>>) -> Result<Self> {
        let n = job_prefs.len();
        if n == 0 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        if applicant_prefs.len() != n {
            return Err(Error::InvalidInstance(format!(
                "{} job rows but {} applicant rows",
                n,
                applicant_prefs.len()
            )));
        }
        let job_rank = ranks("job_prefs", &job_prefs, n)?;
        let applicant_rank = ranks("applicant_prefs", &applicant_prefs, n)?;
        Ok(PreferenceProfile {
            n,
            job_prefs,
            applicant_prefs,
            job_rank,
            applicant_rank,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn job_prefs(&self) -> &[Vec<usize>] {
        &self.job_prefs
    }

    pub fn applicant_prefs(&self) -> &[Vec<usize>] {
        &self.applicant_prefs
    }

    /// Position of applicant `v` on job `u`'s list (0 = favourite).
    pub fn job_rank(&self, u: usize, v: usize) -> usize {
        self.job_rank[u][v]
    }

    /// Position of job `u` on applicant `v`'s list (0 = favourite).
    pub fn applicant_rank(&self, v: usize, u: usize) -> usize {
        self.applicant_rank[v][u]
    }

    /// Does job `u` strictly prefer applicant `a` to applicant `b`?
    pub fn job_prefers(&self, u: usize, a: usize, b: usize) -> bool {
        self.job_rank[u][a] < self.job_rank[u][b]
    }

    /// Does applicant `v` strictly prefer job `a` to job `b`?
    pub fn applicant_prefers(&self, v: usize, a: usize, b: usize) -> bool {
        self.applicant_rank[v][a] < self.applicant_rank[v][b]
    }

    /// The same market with the roles of jobs and applicants exchanged.
    pub fn transposed(&self) -> PreferenceProfile {
        PreferenceProfile {
            n: self.n,
            job_prefs: self.applicant_prefs.clone(),
            applicant_prefs: self.job_prefs.clone(),
            job_rank: self.applicant_rank.clone(),
            applicant_rank: self.job_rank.clone(),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<PreferenceProfile> {
    let raw: ProfileFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    PreferenceProfile::try_from(raw)
}

pub fn serialize_instance(profile: &PreferenceProfile) -> String {
    serde_json::to_string(profile).expect("profile serialization is infallible")
}

/// Every preference row an independent uniform permutation, drawn in the
/// order job rows then applicant rows from the seeded generator.
pub fn random_instance(n: usize, seed: u64) -> Result<PreferenceProfile> {
    if n == 0 {
        return Err(Error::arg("random_instance needs n >= 1"));
    }
    let mut rng = rng::seeded(seed);
    let mut row = || {
        let mut r: Vec<usize> = (0..n).collect();
        r.shuffle(&mut rng);
        r
    };
    let job_prefs: Vec<_> = (0..n).map(|_| row()).collect();
    let applicant_prefs: Vec<_> = (0..n).map(|_| row()).collect();
    PreferenceProfile::new(job_prefs, applicant_prefs)
}

/// Two jobs, two applicants, two stable matchings.
pub fn instance_i2() -> PreferenceProfile {
    PreferenceProfile::new(vec![vec![0, 1], vec![1, 0]], vec![vec![1, 0], vec![0, 1]]).expect("fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smallest_instance() {
        let p = parse_instance(r#"{"n": 1, "job_prefs": [[0]], "applicant_prefs": [[0]]}"#).unwrap();
        assert_eq!(p.n(), 1);
        assert_eq!(random_instance(1, 99).unwrap(), p);
    }

    #[test]
    fn rejects_ties() {
        let err =
            parse_instance(r#"{"n": 2, "job_prefs": [[0,0],[0,1]], "applicant_prefs": [[0,1],[0,1]]}"#).unwrap_err();
        assert!(err.to_string().contains("row 0 not a permutation"), "{err}");
    }

    #[test]
    fn rejects_inconsistent_n() {
        let err =
            parse_instance(r#"{"n": 3, "job_prefs": [[0,1],[0,1]], "applicant_prefs": [[0,1],[0,1]]}"#).unwrap_err();
        assert!(err.to_string().contains("n = 3"), "{err}");
        let err =
            parse_instance(r#"{"n": 2, "job_prefs": [[0,1],[0,1,2]], "applicant_prefs": [[0,1],[0,1]]}"#).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
        let err =
            parse_instance(r#"{"n": 2, "job_prefs": [[0,1],[0,5]], "applicant_prefs": [[0,1],[0,1]]}"#).unwrap_err();
        assert!(err.to_string().contains("row 1 not a permutation"), "{err}");
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse_instance("{\"n\": 2"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_instance(r#"{"n": 1, "jobs": [[0]], "applicant_prefs": [[0]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(parse_instance(r#"{"n": 0, "job_prefs": [], "applicant_prefs": []}"#).is_err());
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random_instance(4, 7).unwrap(), random_instance(4, 7).unwrap());
        assert!(random_instance(0, 1).is_err());
    }

    #[test]
    fn round_trip_seed_7() {
        let p = random_instance(4, 7).unwrap();
        assert_eq!(parse_instance(&serialize_instance(&p)).unwrap(), p);
    }

    #[test]
    fn i2_fixture() {
        let p = instance_i2();
        assert_eq!(p.job_prefs(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(p.applicant_prefs(), &[vec![1, 0], vec![0, 1]]);
        assert!(p.job_prefers(0, 0, 1));
        assert!(p.applicant_prefers(0, 1, 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn random_profiles_are_valid_and_round_trip(n in 1usize..=10, seed in any::<u64>()) {
            let p = random_instance(n, seed).unwrap();
            for rows in [p.job_prefs(), p.applicant_prefs()] {
                prop_assert_eq!(rows.len(), n);
                for row in rows {
                    let mut s = row.clone();
                    s.sort_unstable();
                    prop_assert_eq!(s, (0..n).collect::<Vec<_>>());
                }
            }
            prop_assert_eq!(parse_instance(&serialize_instance(&p)).unwrap(), p);
        }
    }
}
