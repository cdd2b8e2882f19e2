//! Rotations, their elimination, and the rotation poset.
//!
//! The poset is read off the lattice of stable matchings directly: starting
//! at the job-optimal matching, every exposed rotation is eliminated in
//! breadth-first order and each reached matching records the set of
//! rotations eliminated on the way. Then `a ≼ b` iff every reached set
//! containing `b` also contains `a`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::bitset::BitSet;
use crate::instances::PreferenceProfile;
use crate::matchings::{gale_shapley, unstable_pairs, Matching, Side};
use crate::posets::FinitePoset;
use crate::{Error, Result};

/// Default limit on the number of lattice states explored.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Cyclic list of matched edges `(job, applicant)`, rotated so the smallest
/// job comes first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Rotation {
    edges: Vec<(usize, usize)>,
}

impl Rotation {
    pub fn new(edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::arg("a rotation has at least two edges"));
        }
        let mut jobs: Vec<_> = edges.iter().map(|e| e.0).collect();
        let mut apps: Vec<_> = edges.iter().map(|e| e.1).collect();
        jobs.sort_unstable();
        apps.sort_unstable();
        if jobs.windows(2).any(|w| w[0] == w[1]) || apps.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("rotation repeats a job or an applicant"));
        }
        let start = (0..edges.len()).min_by_key(|&i| edges[i].0).unwrap();
        let mut edges = edges;
        edges.rotate_left(start);
        Ok(Rotation { edges })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn jobs(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|e| e.0)
    }

    pub fn applicants(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|e| e.1)
    }

    pub fn involves_job(&self, u: usize) -> bool {
        self.jobs().any(|x| x == u)
    }

    pub fn involves_applicant(&self, v: usize) -> bool {
        self.applicants().any(|x| x == v)
    }

    pub fn contains_edge(&self, edge: (usize, usize)) -> bool {
        self.edges.contains(&edge)
    }

    /// Edges `(u_i, v_{i+1})` formed by eliminating this rotation.
    pub fn shifted_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.edges.len();
        (0..k).map(move |i| (self.edges[i].0, self.edges[(i + 1) % k].1))
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (u, v)) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({u},{v})")?;
        }
        write!(f, ")")
    }
}

/// The rotations exposed in a stable matching, sorted.
///
/// For each job `u` matched to `v`, `succ(u)` is the partner of the first
/// applicant `w` below `v` on `u`'s list who prefers `u` to her partner. The
/// cycles of `succ` are exactly the exposed rotations.
pub fn exposed_rotations(profile: &PreferenceProfile, matching: &Matching) -> Result<Vec<Rotation>> {
    let blocking = unstable_pairs(profile, matching);
    if !blocking.is_empty() {
        return Err(Error::Unstable(blocking.len()));
    }
    let n = profile.n();
    let inv = matching.inverse();
    let succ: Vec<Option<usize>> = (0..n)
        .map(|u| {
            let v = matching.partner_of_job(u);
            let start = profile.job_rank(u, v) + 1;
            profile.job_prefs()[u][start..]
                .iter()
                .find(|&&w| profile.applicant_prefers(w, u, inv[w]))
                .map(|&w| inv[w])
        })
        .collect();

    // 0 = unvisited, 1 = on current path, 2 = done.
    let mut state = vec![0u8; n];
    let mut out = Vec::new();
    for start in 0..n {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(u) = cur {
            match state[u] {
                0 => {
                    state[u] = 1;
                    path.push(u);
                    cur = succ[u];
                }
                1 => {
                    let pos = path.iter().position(|&x| x == u).unwrap();
                    let cycle = &path[pos..];
                    let edges = cycle.iter().map(|&x| (x, matching.partner_of_job(x))).collect();
                    out.push(Rotation::new(edges)?);
                    break;
                }
                _ => break,
            }
        }
        for u in path {
            state[u] = 2;
        }
    }
    out.sort();
    Ok(out)
}

fn apply(matching: &Matching, rotation: &Rotation) -> Matching {
    let mut a = matching.assignment().to_vec();
    for (u, v) in rotation.shifted_edges() {
        a[u] = v;
    }
    Matching::from_vec_unchecked(a)
}

/// Eliminates an exposed rotation: `u_i` is re-matched to `v_{i+1}`.
pub fn eliminate(profile: &PreferenceProfile, matching: &Matching, rotation: &Rotation) -> Result<Matching> {
    if !exposed_rotations(profile, matching)?.contains(rotation) {
        return Err(Error::NotExposed(rotation.to_string()));
    }
    let next = apply(matching, rotation);
    debug_assert!(
        unstable_pairs(profile, &next).is_empty(),
        "eliminating {rotation} produced an unstable matching"
    );
    Ok(next)
}

/// Every stable matching reachable from the job-optimal one, with the set of
/// rotations eliminated to reach it.
#[derive(Clone, Debug)]
pub struct LatticeExploration {
    /// Rotations in discovery order; indices are used in `states`.
    pub rotations: Vec<Rotation>,
    pub states: Vec<(Matching, BitSet)>,
}

pub fn explore_lattice(profile: &PreferenceProfile, state_cap: usize) -> Result<LatticeExploration> {
    let start = gale_shapley(profile, Side::Jobs);
    let mut ids: HashMap<Rotation, usize> = HashMap::new();
    let mut rotations = Vec::new();
    let mut index: HashMap<Matching, usize> = HashMap::new();
    let mut states = vec![(start.clone(), BitSet::new())];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let (matching, eliminated) = states[s].clone();
        for rot in exposed_rotations(profile, &matching)? {
            let id = *ids.entry(rot.clone()).or_insert_with(|| {
                rotations.push(rot.clone());
                rotations.len() - 1
            });
            if eliminated.contains(id) {
                return Err(Error::Inconsistent(format!("rotation {rot} exposed twice on one path")));
            }
            let next = apply(&matching, &rot);
            debug_assert!(unstable_pairs(profile, &next).is_empty());
            let mut set = eliminated.clone();
            set.insert(id);
            match index.get(&next) {
                Some(&t) => {
                    if !states[t].1.same_elements(&set) {
                        return Err(Error::Inconsistent(format!(
                            "matching {:?} reached with two different rotation sets",
                            next.assignment()
                        )));
                    }
                }
                None => {
                    if states.len() >= state_cap {
                        return Err(Error::CapExceeded {
                            what: "stable matching lattice states",
                            cap: state_cap,
                            actual: states.len() + 1,
                        });
                    }
                    index.insert(next.clone(), states.len());
                    queue.push_back(states.len());
                    states.push((next, set));
                }
            }
        }
    }
    Ok(LatticeExploration { rotations, states })
}

/// Rotations with their order and the chains of rotations through each job
/// (m-chains) and each applicant (w-chains).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationPoset {
    n: usize,
    elements: Vec<Rotation>,
    /// `down[b]` = all `a` with `a ≼ b`, including `b`.
    down: Vec<BitSet>,
    m_chains: Vec<Vec<usize>>,
    w_chains: Vec<Vec<usize>>,
}

impl RotationPoset {
    /// Assembles a poset from elements and the relation `leq[a][b] = a ≼ b`.
    /// Only shapes are validated; claim checks live in [`check_structure`].
    pub fn from_relation(n: usize, elements: Vec<Rotation>, leq: &[Vec<bool>]) -> Result<Self> {
        let r = elements.len();
        if leq.len() != r || leq.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidPoset(format!("relation must be {r} x {r}")));
        }
        if let Some(bad) = elements
            .iter()
            .find(|rot| rot.edges().iter().any(|&(u, v)| u >= n || v >= n))
        {
            return Err(Error::InvalidPoset(format!(
                "rotation {bad} uses a vertex outside 0..{n}"
            )));
        }
        let down: Vec<BitSet> = (0..r)
            .map(|b| (0..r).filter(|&a| a == b || leq[a][b]).collect())
            .collect();
        let by_height = |ids: &mut Vec<usize>| ids.sort_by_key(|&i| (down[i].len(), i));
        let mut m_chains = vec![Vec::new(); n];
        let mut w_chains = vec![Vec::new(); n];
        for (id, rot) in elements.iter().enumerate() {
            for (u, v) in rot.edges() {
                m_chains[*u].push(id);
                w_chains[*v].push(id);
            }
        }
        m_chains.iter_mut().chain(w_chains.iter_mut()).for_each(by_height);
        Ok(RotationPoset {
            n,
            elements,
            down,
            m_chains,
            w_chains,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Rotation] {
        &self.elements
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.down[b].contains(a)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// Chain of rotations involving job `u`, bottom first.
    pub fn m_chain(&self, u: usize) -> &[usize] {
        &self.m_chains[u]
    }

    /// Chain of rotations involving applicant `v`, bottom first.
    pub fn w_chain(&self, v: usize) -> &[usize] {
        &self.w_chains[v]
    }

    pub fn m_chains(&self) -> &[Vec<usize>] {
        &self.m_chains
    }

    pub fn w_chains(&self) -> &[Vec<usize>] {
        &self.w_chains
    }

    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.down[i].len(), i));
        order
    }

    /// The strict order as a [`FinitePoset`]; fails if `≼` is not antisymmetric.
    pub fn to_finite_poset(&self) -> Result<FinitePoset> {
        let r = self.len();
        let pairs = (0..r)
            .flat_map(|a| (0..r).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && self.leq(a, b));
        FinitePoset::from_relations(r, pairs)
    }

    /// Elements with canonical edge lists, cover pairs and chain memberships.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let fp = self.to_finite_poset()?;
        Ok(serde_json::json!({
            "n": self.n,
            "elements": self.elements,
            "covers": fp.covers(),
            "m_chains": self.m_chains,
            "w_chains": self.w_chains,
        }))
    }
}

pub fn build_rotation_poset(profile: &PreferenceProfile) -> Result<RotationPoset> {
    build_rotation_poset_capped(profile, DEFAULT_STATE_CAP)
}

pub fn build_rotation_poset_capped(profile: &PreferenceProfile, state_cap: usize) -> Result<RotationPoset> {
    let lattice = explore_lattice(profile, state_cap)?;
    poset_from_lattice(profile.n(), &lattice)
}

/// Derives `≼` from the reached rotation sets and re-indexes elements by
/// (down-set size, edges) so the numbering is canonical.
pub fn poset_from_lattice(n: usize, lattice: &LatticeExploration) -> Result<RotationPoset> {
    let r = lattice.rotations.len();
    let mut below: Vec<Option<BitSet>> = vec![None; r];
    for (_, set) in &lattice.states {
        for b in set.iter() {
            match &mut below[b] {
                Some(acc) => acc.intersect_with(set),
                slot @ None => *slot = Some(set.clone()),
            }
        }
    }
    let below: Vec<BitSet> = below
        .into_iter()
        .enumerate()
        .map(|(b, s)| s.ok_or_else(|| Error::Inconsistent(format!("rotation {b} never eliminated"))))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| (below[a].len(), &lattice.rotations[a]).cmp(&(below[b].len(), &lattice.rotations[b])));
    let mut new_id = vec![0; r];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new;
    }
    let elements = order.iter().map(|&old| lattice.rotations[old].clone()).collect();
    let mut leq = vec![vec![false; r]; r];
    for old_b in 0..r {
        for old_a in below[old_b].iter() {
            leq[new_id[old_a]][new_id[old_b]] = true;
        }
    }
    RotationPoset::from_relation(n, elements, &leq)
}

/// Outcome of one structural claim.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimCheck {
    pub id: &'static str,
    pub description: &'static str,
    pub pass: bool,
    /// A few concrete counterexamples when `pass` is false.
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub checks: Vec<ClaimCheck>,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&ClaimCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

const MAX_WITNESSES: usize = 5;

struct Collector {
    id: &'static str,
    description: &'static str,
    witnesses: Vec<String>,
    failures: usize,
}

impl Collector {
    fn new(id: &'static str, description: &'static str) -> Self {
        Collector {
            id,
            description,
            witnesses: Vec::new(),
            failures: 0,
        }
    }

    fn fail(&mut self, msg: impl FnOnce() -> String) {
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(msg());
        }
    }

    fn finish(self) -> ClaimCheck {
        ClaimCheck {
            id: self.id,
            description: self.description,
            pass: self.failures == 0,
            witnesses: self.witnesses,
        }
    }
}

/// A chain pairing: m-chain of a job with w-chain of an applicant.
type Pair = (usize, usize);

/// Both pairings at rotation `rot`: `(u_i, v_i)` and `(u_i, v_{i+1})`.
fn pairings(rot: &Rotation) -> Vec<Pair> {
    rot.edges().iter().copied().chain(rot.shifted_edges()).collect()
}

/// Checks the chain structure of a rotation poset.
///
/// * `partial_order`: `≼` is reflexive, antisymmetric and transitive.
/// * `chains`: rotations through one vertex are pairwise comparable.
/// * `edge_unique`: each job-applicant edge lies in at most one rotation.
/// * `chain_count`: each rotation lies on as many m-chains as w-chains, at least two.
/// * `pairing`: a paired (m-chain, w-chain) is paired at exactly one other
///   rotation, adjacent to this one on both chains, or this rotation is the
///   bottom of both chains or the top of both.
/// * `pairing_moreover`: when a pair is paired at two rotations, neither
///   chain is paired to one common other chain at both.
/// * `chain_length`: every chain has at most `n - 1` rotations.
pub fn check_structure(poset: &RotationPoset) -> StructureReport {
    let r = poset.len();
    let n = poset.n();
    let rots = poset.elements();

    let mut order = Collector::new("partial_order", "rotation order is a partial order");
    for a in 0..r {
        if !poset.leq(a, a) {
            order.fail(|| format!("{a} not ≼ itself"));
        }
        for b in 0..r {
            if a != b && poset.leq(a, b) && poset.leq(b, a) {
                order.fail(|| format!("{a} and {b} mutually below each other"));
            }
            for c in 0..r {
                if poset.leq(a, b) && poset.leq(b, c) && !poset.leq(a, c) {
                    order.fail(|| format!("{a} ≼ {b} ≼ {c} but not {a} ≼ {c}"));
                }
            }
        }
    }

    let mut chains = Collector::new("chains", "rotations involving one vertex form a chain");
    for (label, list) in [("job", poset.m_chains()), ("applicant", poset.w_chains())] {
        for (x, chain) in list.iter().enumerate() {
            for (i, &a) in chain.iter().enumerate() {
                for &b in &chain[i + 1..] {
                    if !poset.leq(a, b) {
                        chains.fail(|| format!("{label} {x}: rotations {a} and {b} out of order or incomparable"));
                    }
                }
            }
        }
    }

    let mut unique = Collector::new("edge_unique", "each edge appears in at most one rotation");
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (id, rot) in rots.iter().enumerate() {
        for &e in rot.edges() {
            if let Some(prev) = edge_owner.insert(e, id) {
                unique.fail(|| format!("edge {e:?} in rotations {prev} and {id}"));
            }
        }
    }

    let mut count = Collector::new("chain_count", "m-chain count equals w-chain count and is at least 2");
    for (id, _) in rots.iter().enumerate() {
        let m = poset.m_chains().iter().filter(|c| c.contains(&id)).count();
        let w = poset.w_chains().iter().filter(|c| c.contains(&id)).count();
        if m != w || m < 2 {
            count.fail(|| format!("rotation {id}: {m} m-chains, {w} w-chains"));
        }
    }

    let position = |chain: &[usize], id: usize| chain.iter().position(|&x| x == id);
    let mut paired_at: HashMap<Pair, Vec<usize>> = HashMap::new();
    for (id, rot) in rots.iter().enumerate() {
        for p in pairings(rot) {
            paired_at.entry(p).or_default().push(id);
        }
    }
    let mut pairing = Collector::new(
        "pairing",
        "paired chains meet at one other adjacent rotation, or at an end of both",
    );
    let mut moreover = Collector::new(
        "pairing_moreover",
        "no chain is paired to one other chain at both rotations",
    );
    let mut keys: Vec<&Pair> = paired_at.keys().collect();
    keys.sort();
    for &(u, v) in keys {
        let at = &paired_at[&(u, v)];
        let (mc, wc) = (poset.m_chain(u), poset.w_chain(v));
        match at.as_slice() {
            [rho] => {
                let (pm, pw) = (position(mc, *rho), position(wc, *rho));
                let bottom = pm == Some(0) && pw == Some(0);
                let top = pm == Some(mc.len().wrapping_sub(1)) && pw == Some(wc.len().wrapping_sub(1));
                if !(bottom || top) {
                    pairing.fail(|| {
                        format!("job {u}/applicant {v} paired only at {rho}, which is not an end of both chains")
                    });
                }
            }
            [a, b] => {
                let adjacent = |chain: &[usize]| match (position(chain, *a), position(chain, *b)) {
                    (Some(x), Some(y)) => x.abs_diff(y) == 1,
                    _ => false,
                };
                if !(adjacent(mc) && adjacent(wc)) {
                    pairing.fail(|| {
                        format!("job {u}/applicant {v} paired at {a} and {b}, not consecutive on both chains")
                    });
                }
                let partners_of_job = |rho: usize| -> Vec<usize> {
                    pairings(&rots[rho])
                        .into_iter()
                        .filter(|p| p.0 == u && p.1 != v)
                        .map(|p| p.1)
                        .collect()
                };
                let partners_of_app = |rho: usize| -> Vec<usize> {
                    pairings(&rots[rho])
                        .into_iter()
                        .filter(|p| p.1 == v && p.0 != u)
                        .map(|p| p.0)
                        .collect()
                };
                let (ja, jb) = (partners_of_job(*a), partners_of_job(*b));
                if let Some(w) = ja.iter().find(|w| jb.contains(w)) {
                    moreover.fail(|| format!("job {u} paired with applicant {w} at both {a} and {b}"));
                }
                let (aa, ab) = (partners_of_app(*a), partners_of_app(*b));
                if let Some(m) = aa.iter().find(|m| ab.contains(m)) {
                    moreover.fail(|| format!("applicant {v} paired with job {m} at both {a} and {b}"));
                }
            }
            more => pairing.fail(|| format!("job {u}/applicant {v} paired at {} rotations", more.len())),
        }
    }

    let mut length = Collector::new("chain_length", "every chain has at most n-1 rotations");
    for (label, list) in [("job", poset.m_chains()), ("applicant", poset.w_chains())] {
        for (x, chain) in list.iter().enumerate() {
            if chain.len() + 1 > n.max(1) {
                length.fail(|| format!("{label} {x} chain has {} rotations with n = {n}", chain.len()));
            }
        }
    }

    StructureReport {
        checks: vec![
            order.finish(),
            chains.finish(),
            unique.finish(),
            count.finish(),
            pairing.finish(),
            moreover.finish(),
            length.finish(),
        ],
    }
}

/// Stable matchings obtained from the downsets of the rotation poset by
/// eliminating each downset's rotations from the job-optimal matching in a
/// linear-extension order. Fails unless the map downset -> matching is
/// injective.
pub fn enumerate_stable_via_rotations(profile: &PreferenceProfile) -> Result<Vec<Matching>> {
    let poset = build_rotation_poset(profile)?;
    matchings_from_downsets(profile, &poset)
}

pub fn matchings_from_downsets(profile: &PreferenceProfile, poset: &RotationPoset) -> Result<Vec<Matching>> {
    let fp = poset.to_finite_poset()?;
    let order = poset.linear_extension();
    let start = gale_shapley(profile, Side::Jobs);
    let mut out = Vec::new();
    let mut failure = None;
    fp.for_each_downset(|members| {
        if failure.is_some() {
            return;
        }
        let mut m = start.clone();
        for &id in order.iter().filter(|&&id| members[id]) {
            match eliminate(profile, &m, &poset.elements()[id]) {
                Ok(next) => m = next,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
        out.push(m);
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let downsets = out.len();
    out.sort();
    out.dedup();
    if out.len() != downsets {
        return Err(Error::Inconsistent(format!(
            "{downsets} downsets map to only {} distinct matchings",
            out.len()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{instance_i2, random_instance};
    use crate::matchings::enumerate_stable_bruteforce;
    use crate::posets::count_downsets;

    fn m(v: &[usize]) -> Matching {
        Matching::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rotation_canonical_form() {
        let r = Rotation::new(vec![(2, 1), (0, 2), (1, 0)]).unwrap();
        assert_eq!(r.edges(), &[(0, 2), (1, 0), (2, 1)]);
        assert!(Rotation::new(vec![(0, 0)]).is_err());
        assert!(Rotation::new(vec![(0, 0), (0, 1)]).is_err());
        assert_eq!(r.shifted_edges().collect::<Vec<_>>(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn i2_rotations() {
        let p = instance_i2();
        let rho = Rotation::new(vec![(0, 0), (1, 1)]).unwrap();
        assert_eq!(exposed_rotations(&p, &m(&[0, 1])).unwrap(), vec![rho.clone()]);
        assert!(exposed_rotations(&p, &m(&[1, 0])).unwrap().is_empty());
        assert_eq!(eliminate(&p, &m(&[0, 1]), &rho).unwrap(), m(&[1, 0]));
        assert!(matches!(eliminate(&p, &m(&[1, 0]), &rho), Err(Error::NotExposed(_))));
    }

    #[test]
    fn unstable_input_rejected() {
        let p = PreferenceProfile::new(vec![vec![0, 1], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert!(matches!(exposed_rotations(&p, &m(&[1, 0])), Err(Error::Unstable(_))));
    }

    #[test]
    fn single_vertex() {
        let p = random_instance(1, 3).unwrap();
        assert!(exposed_rotations(&p, &m(&[0])).unwrap().is_empty());
        let poset = build_rotation_poset(&p).unwrap();
        assert!(poset.is_empty());
        assert_eq!(enumerate_stable_via_rotations(&p).unwrap(), vec![m(&[0])]);
    }

    #[test]
    fn i2_poset() {
        let p = instance_i2();
        let poset = build_rotation_poset(&p).unwrap();
        assert_eq!(poset.len(), 1);
        assert_eq!(count_downsets(&poset.to_finite_poset().unwrap()).unwrap(), 2);
        assert!(check_structure(&poset).all_pass());
        assert_eq!(
            enumerate_stable_via_rotations(&p).unwrap(),
            vec![m(&[0, 1]), m(&[1, 0])]
        );
        let json = poset.to_json().unwrap();
        assert_eq!(json["elements"][0], serde_json::json!([[0, 0], [1, 1]]));
    }

    #[test]
    fn bijection_seed_5() {
        let p = random_instance(6, 5).unwrap();
        let poset = build_rotation_poset(&p).unwrap();
        let brute = enumerate_stable_bruteforce(&p).unwrap();
        assert_eq!(
            count_downsets(&poset.to_finite_poset().unwrap()).unwrap(),
            brute.len() as u128
        );
    }

    #[test]
    fn elimination_keeps_stability() {
        for seed in 0..60u64 {
            let p = random_instance(2 + seed as usize % 5, seed).unwrap();
            let lattice = explore_lattice(&p, DEFAULT_STATE_CAP).unwrap();
            for (matching, _) in &lattice.states {
                for rot in exposed_rotations(&p, matching).unwrap() {
                    let next = eliminate(&p, matching, &rot).unwrap();
                    assert!(unstable_pairs(&p, &next).is_empty());
                }
            }
        }
    }

    #[test]
    fn reached_sets_are_exactly_the_downsets() {
        for seed in 0..50u64 {
            let p = random_instance(2 + seed as usize % 6, seed + 1000).unwrap();
            let lattice = explore_lattice(&p, DEFAULT_STATE_CAP).unwrap();
            let poset = poset_from_lattice(p.n(), &lattice).unwrap();
            let fp = poset.to_finite_poset().unwrap();
            // Map lattice ids to poset ids through the rotations themselves.
            let id_of: HashMap<&Rotation, usize> = poset.elements().iter().enumerate().map(|(i, r)| (r, i)).collect();
            let mut reached: Vec<Vec<usize>> = lattice
                .states
                .iter()
                .map(|(_, set)| {
                    let mut v: Vec<usize> = set.iter().map(|old| id_of[&lattice.rotations[old]]).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            reached.sort();
            let mut downsets = fp.downsets();
            downsets.sort();
            assert_eq!(reached, downsets, "seed {seed}");
        }
    }

    #[test]
    fn structure_and_bijection_over_seeds() {
        for seed in 0..100u64 {
            let n = 2 + seed as usize % 6;
            let p = random_instance(n, seed).unwrap();
            let poset = build_rotation_poset(&p).unwrap();
            let report = check_structure(&poset);
            assert!(report.all_pass(), "seed {seed}: {report:?}");
            assert_eq!(
                enumerate_stable_via_rotations(&p).unwrap(),
                enumerate_stable_bruteforce(&p).unwrap()
            );
        }
    }

    #[test]
    fn hand_built_violation_is_flagged() {
        let a = Rotation::new(vec![(0, 0), (1, 1)]).unwrap();
        let b = Rotation::new(vec![(0, 0), (2, 2)]).unwrap();
        let leq = vec![vec![true, true], vec![false, true]];
        let poset = RotationPoset::from_relation(3, vec![a, b], &leq).unwrap();
        let report = check_structure(&poset);
        assert!(!report.get("edge_unique").unwrap().pass);
        assert!(!report.get("edge_unique").unwrap().witnesses.is_empty());
    }

    #[test]
    fn state_cap() {
        let p = random_instance(6, 5).unwrap();
        let total = enumerate_stable_bruteforce(&p).unwrap().len();
        if total > 1 {
            assert!(matches!(
                build_rotation_poset_capped(&p, 1),
                Err(Error::CapExceeded { .. })
            ));
        }
    }
}
