//! Finite posets, exact downset counting and tangled grids.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::instances::random_instance;
use crate::rotations::{build_rotation_poset, RotationPoset};
use crate::{Error, Result};

/// Largest poset [`count_downsets`] accepts without an explicit cap.
pub const DEFAULT_DOWNSET_CAP: usize = 40;
/// Hard limit of the bitmask counter.
pub const MAX_DOWNSET_CAP: usize = 64;

/// A finite poset on `0..size` given by its cover relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PosetFile", into = "PosetFile")]
pub struct FinitePoset {
    size: usize,
    covers: Vec<(usize, usize)>,
    below: Vec<BitSet>,
    above: Vec<BitSet>,
}

#[derive(Clone, Serialize, Deserialize)]
struct PosetFile {
    size: usize,
    covers: Vec<(usize, usize)>,
}

impl TryFrom<PosetFile> for FinitePoset {
    type Error = Error;
    fn try_from(f: PosetFile) -> Result<Self> {
        FinitePoset::from_covers(f.size, f.covers)
    }
}

impl From<FinitePoset> for PosetFile {
    fn from(p: FinitePoset) -> Self {
        PosetFile {
            size: p.size,
            covers: p.covers,
        }
    }
}

impl FinitePoset {
    /// The order generated by `pairs` (each `(lower, upper)`), which need not
    /// be covers. Fails on cycles.
    pub fn from_relations(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut succ = vec![Vec::new(); size];
        let mut indeg = vec![0usize; size];
        for (a, b) in pairs {
            if a >= size || b >= size {
                return Err(Error::InvalidPoset(format!("pair ({a}, {b}) out of range 0..{size}")));
            }
            if a == b {
                return Err(Error::InvalidPoset(format!("element {a} below itself")));
            }
            succ[a].push(b);
            indeg[b] += 1;
        }
        let mut queue: VecDeque<usize> = (0..size).filter(|&x| indeg[x] == 0).collect();
        let mut topo = Vec::with_capacity(size);
        while let Some(x) = queue.pop_front() {
            topo.push(x);
            for &y in &succ[x] {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    queue.push_back(y);
                }
            }
        }
        if topo.len() != size {
            return Err(Error::InvalidPoset("relation has a cycle".into()));
        }
        let mut below = vec![BitSet::with_capacity(size); size];
        for &x in &topo {
            let bx = below[x].clone();
            for &y in &succ[x] {
                below[y].union_with(&bx);
                below[y].insert(x);
            }
        }
        let mut above = vec![BitSet::with_capacity(size); size];
        let mut covers = Vec::new();
        for y in 0..size {
            let mut implied = BitSet::with_capacity(size);
            for c in below[y].iter() {
                implied.union_with(&below[c]);
            }
            for x in below[y].iter() {
                above[x].insert(y);
                if !implied.contains(x) {
                    covers.push((x, y));
                }
            }
        }
        covers.sort_unstable();
        Ok(FinitePoset {
            size,
            covers,
            below,
            above,
        })
    }

    /// Builds from an exact cover relation; rejects cycles, duplicates and
    /// transitive edges.
    pub fn from_covers(size: usize, covers: Vec<(usize, usize)>) -> Result<Self> {
        let p = FinitePoset::from_relations(size, covers.iter().copied())?;
        let mut given = covers;
        given.sort_unstable();
        if given.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPoset("duplicate cover pair".into()));
        }
        if let Some(&(a, b)) = given.iter().find(|e| p.covers.binary_search(e).is_err()) {
            return Err(Error::InvalidPoset(format!(
                "({a}, {b}) is a transitive edge, not a cover"
            )));
        }
        Ok(p)
    }

    pub fn chain(k: usize) -> Self {
        FinitePoset::from_relations(k, (1..k).map(|i| (i - 1, i))).expect("chain")
    }

    pub fn antichain(k: usize) -> Self {
        FinitePoset::from_relations(k, []).expect("antichain")
    }

    /// Product order on `rows × cols`, element `(i, j)` at index `i * cols + j`.
    pub fn product(rows: usize, cols: usize) -> Self {
        let mut pairs = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if i + 1 < rows {
                    pairs.push((i * cols + j, (i + 1) * cols + j));
                }
                if j + 1 < cols {
                    pairs.push((i * cols + j, i * cols + j + 1));
                }
            }
        }
        FinitePoset::from_relations(rows * cols, pairs).expect("grid")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    /// Strict `a < b`.
    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.below[b].contains(a)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        a == b || self.lt(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// Strictly smaller elements.
    pub fn strict_down(&self, x: usize) -> &BitSet {
        &self.below[x]
    }

    /// Strictly larger elements.
    pub fn strict_up(&self, x: usize) -> &BitSet {
        &self.above[x]
    }

    /// Elements sorted by the size of their down-set, a linear extension.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        order.sort_by_key(|&x| (self.below[x].len(), x));
        order
    }

    pub fn is_downset(&self, members: &[bool]) -> bool {
        (0..self.size)
            .filter(|&x| members[x])
            .all(|x| self.below[x].iter().all(|y| members[y]))
    }

    /// The sub-poset induced on `keep` (re-indexed in the given order).
    pub fn induced(&self, keep: &[usize]) -> FinitePoset {
        let pairs: Vec<(usize, usize)> = keep
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| {
                keep.iter()
                    .enumerate()
                    .filter(move |&(_, &b)| self.lt(a, b))
                    .map(move |(j, _)| (i, j))
            })
            .collect();
        FinitePoset::from_relations(keep.len(), pairs).expect("induced order is acyclic")
    }

    /// Calls `visit` with the membership vector of every downset, streaming
    /// them without storing. Order: depth-first over a linear extension,
    /// excluding an element before including it, so the empty set comes
    /// first and the full set last.
    pub fn for_each_downset(&self, mut visit: impl FnMut(&[bool])) {
        let order = self.linear_extension();
        let lower_covers: Vec<Vec<usize>> = (0..self.size)
            .map(|y| self.covers.iter().filter(|c| c.1 == y).map(|c| c.0).collect())
            .collect();
        let mut members = vec![false; self.size];
        // Explicit stack of (depth, included?) frames.
        let mut stack: Vec<(usize, bool)> = vec![(0, false)];
        while let Some((depth, include)) = stack.pop() {
            if depth == self.size {
                visit(&members);
                continue;
            }
            let x = order[depth];
            // Reset every position at or past `depth` before deciding x.
            for &y in &order[depth..] {
                members[y] = false;
            }
            if include {
                members[x] = true;
                stack.push((depth + 1, false));
            } else {
                if lower_covers[x].iter().all(|&c| members[c]) {
                    stack.push((depth, true));
                }
                stack.push((depth + 1, false));
            }
        }
    }

    pub fn downsets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_downset(|m| out.push((0..m.len()).filter(|&i| m[i]).collect()));
        out
    }
}

/// Number of downsets, with the default element cap.
pub fn count_downsets(poset: &FinitePoset) -> Result<u128> {
    count_downsets_capped(poset, DEFAULT_DOWNSET_CAP)
}

/// Counts downsets with `ideals(P) = ideals(P - up(x)) + ideals(P - down(x))`,
/// memoized on the remaining element subset.
pub fn count_downsets_capped(poset: &FinitePoset, cap: usize) -> Result<u128> {
    let cap = cap.min(MAX_DOWNSET_CAP);
    if poset.size() > cap {
        return Err(Error::CapExceeded {
            what: "poset size for downset counting",
            cap,
            actual: poset.size(),
        });
    }
    let bit = |x: usize| 1u64 << x;
    let mask = |s: &BitSet| s.to_u64().expect("size <= 64");
    let down: Vec<u64> = (0..poset.size()).map(|x| mask(poset.strict_down(x)) | bit(x)).collect();
    let up: Vec<u64> = (0..poset.size()).map(|x| mask(poset.strict_up(x)) | bit(x)).collect();
    let full = if poset.size() == 64 {
        u64::MAX
    } else {
        (1u64 << poset.size()) - 1
    };
    let mut counter = IdealCounter {
        down,
        up,
        memo: HashMap::new(),
    };
    Ok(counter.count(full))
}

struct IdealCounter {
    down: Vec<u64>,
    up: Vec<u64>,
    memo: HashMap<u64, u128>,
}

impl IdealCounter {
    fn count(&mut self, s: u64) -> u128 {
        if s == 0 {
            return 1;
        }
        if let Some(&c) = self.memo.get(&s) {
            return c;
        }
        let mut best = (0u64, usize::MAX);
        let mut antichain = true;
        let mut rest = s;
        while rest != 0 {
            let x = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (self.down[x] & s).count_ones() as u64;
            let u = (self.up[x] & s).count_ones() as u64;
            if d > 1 || u > 1 {
                antichain = false;
            }
            if best.1 == usize::MAX || d * u > best.0 {
                best = (d * u, x);
            }
        }
        let c = if antichain {
            1u128 << s.count_ones()
        } else {
            let x = best.1;
            self.count(s & !self.up[x]) + self.count(s & !self.down[x])
        };
        self.memo.insert(s, c);
        c
    }
}

/// A poset with two chain decompositions of `n` chains each where every
/// m-chain meets every w-chain in exactly one element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TangledGrid {
    n: usize,
    poset: FinitePoset,
    /// Each chain listed bottom to top.
    m_chains: Vec<Vec<usize>>,
    w_chains: Vec<Vec<usize>>,
}

impl TangledGrid {
    pub fn new(poset: FinitePoset, m_chains: Vec<Vec<usize>>, w_chains: Vec<Vec<usize>>) -> Result<Self> {
        let grid = TangledGrid {
            n: m_chains.len(),
            poset,
            m_chains,
            w_chains,
        };
        match grid.violations().first() {
            Some(v) => Err(Error::InvalidPoset(v.clone())),
            None => Ok(grid),
        }
    }

    /// Human-readable list of every violated invariant; empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.n;
        let size = self.poset.size();
        if n == 0 {
            out.push("grid has no chains".into());
            return out;
        }
        if self.w_chains.len() != n {
            out.push(format!("{} m-chains but {} w-chains", n, self.w_chains.len()));
            return out;
        }
        if size != n * n {
            out.push(format!("{size} elements, expected n^2 = {}", n * n));
        }
        let mut owner = [vec![None; size], vec![None; size]];
        for (side, chains) in [&self.m_chains, &self.w_chains].into_iter().enumerate() {
            let label = ["m", "w"][side];
            for (c, chain) in chains.iter().enumerate() {
                for &e in chain {
                    if e >= size {
                        out.push(format!("{label}-chain {c} lists unknown element {e}"));
                    } else if let Some(prev) = owner[side][e].replace(c) {
                        out.push(format!("element {e} on {label}-chains {prev} and {c}"));
                    }
                }
                for w in chain.windows(2) {
                    if w[0] < size && w[1] < size && !self.poset.lt(w[0], w[1]) {
                        out.push(format!("{label}-chain {c} not increasing at {} -> {}", w[0], w[1]));
                    }
                }
            }
            for (e, o) in owner[side].iter().enumerate() {
                if o.is_none() {
                    out.push(format!("element {e} on no {label}-chain"));
                }
            }
        }
        let mut meets = vec![vec![0usize; n]; n];
        for (&m, &w) in owner[0].iter().zip(&owner[1]) {
            if let (Some(m), Some(w)) = (m, w) {
                meets[m][w] += 1;
            }
        }
        for (m, row) in meets.iter().enumerate() {
            for (w, &k) in row.iter().enumerate() {
                if k != 1 {
                    out.push(format!("m-chain {m} and w-chain {w} meet in {k} elements"));
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn poset(&self) -> &FinitePoset {
        &self.poset
    }

    pub fn m_chains(&self) -> &[Vec<usize>] {
        &self.m_chains
    }

    pub fn w_chains(&self) -> &[Vec<usize>] {
        &self.w_chains
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "size": self.poset.size(),
            "covers": self.poset.covers(),
            "m_chains": self.m_chains,
            "w_chains": self.w_chains,
        })
    }
}

/// Pads a rotation poset into an `n × n` tangled grid.
///
/// Each rotation keeps only the chains of its first job and first applicant.
/// Then, scanning `(m-chain, w-chain)` pairs in lexicographic order, every
/// pair that does not meet gets a fresh element placed above all rotations
/// and above the current tops of its two chains. Padded elements are
/// otherwise incomparable, so the rotation poset is an induced subposet and
/// the only order among padded elements is what the chains force.
pub fn embed_in_tangled_grid(poset: &RotationPoset) -> Result<TangledGrid> {
    let n = poset.n();
    let r = poset.len();
    let mut seen = HashMap::new();
    for (id, rot) in poset.elements().iter().enumerate() {
        let (u0, v0) = rot.edges()[0];
        if let Some(other) = seen.insert((u0, v0), id) {
            return Err(Error::InvalidPoset(format!(
                "rotations {other} and {id} share the leading edge ({u0}, {v0})"
            )));
        }
    }
    let order = poset.linear_extension();
    let mut m_chains = vec![Vec::new(); n];
    let mut w_chains = vec![Vec::new(); n];
    for &id in &order {
        let (u0, v0) = poset.elements()[id].edges()[0];
        m_chains[u0].push(id);
        w_chains[v0].push(id);
    }
    let mut pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|a| (0..r).filter(move |&b| a != b).map(move |b| (a, b)))
        .filter(|&(a, b)| poset.leq(a, b))
        .collect();
    let mut next = r;
    #[allow(clippy::needless_range_loop)]
    for u in 0..n {
        for v in 0..n {
            if seen.contains_key(&(u, v)) {
                continue;
            }
            let e = next;
            next += 1;
            pairs.extend((0..r).map(|a| (a, e)));
            for top in [m_chains[u].last(), w_chains[v].last()].into_iter().flatten() {
                if *top >= r {
                    pairs.push((*top, e));
                }
            }
            m_chains[u].push(e);
            w_chains[v].push(e);
        }
    }
    let full = FinitePoset::from_relations(next, pairs)?;
    TangledGrid::new(full, m_chains, w_chains)
}

/// The untangled `n × n` grid in product order; m-chains are rows and
/// w-chains are columns.
pub fn grid_diamond(n: usize) -> Result<TangledGrid> {
    if n == 0 {
        return Err(Error::arg("grid_diamond needs n >= 1"));
    }
    let poset = FinitePoset::product(n, n);
    let rows = (0..n).map(|i| (0..n).map(|j| i * n + j).collect()).collect();
    let cols = (0..n).map(|j| (0..n).map(|i| i * n + j).collect()).collect();
    TangledGrid::new(poset, rows, cols)
}

/// Tangled grid from the rotation poset of `random_instance(n, seed)`.
pub fn random_tangled_grid(n: usize, seed: u64) -> Result<TangledGrid> {
    let profile = random_instance(n, seed)?;
    embed_in_tangled_grid(&build_rotation_poset(&profile)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::binomial;
    use crate::instances::instance_i2;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn naive_count(p: &FinitePoset) -> u128 {
        let n = p.size();
        (0u64..1 << n)
            .filter(|&m| {
                let members: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
                p.is_downset(&members)
            })
            .count() as u128
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_downsets(&FinitePoset::chain(3)).unwrap(), 4);
        assert_eq!(count_downsets(&FinitePoset::antichain(3)).unwrap(), 8);
        assert_eq!(count_downsets(&FinitePoset::product(2, 2)).unwrap(), 6);
        assert_eq!(count_downsets(&FinitePoset::antichain(0)).unwrap(), 1);
    }

    #[test]
    fn cover_validation() {
        assert!(FinitePoset::from_covers(3, vec![(0, 1), (1, 2), (0, 2)]).is_err());
        assert!(FinitePoset::from_covers(2, vec![(0, 1), (1, 0)]).is_err());
        assert!(FinitePoset::from_covers(2, vec![(0, 5)]).is_err());
        let p = FinitePoset::from_covers(3, vec![(0, 1), (1, 2)]).unwrap();
        assert!(p.lt(0, 2) && !p.lt(2, 0));
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<FinitePoset>(&json).unwrap(), p);
    }

    #[test]
    fn cap_is_enforced() {
        let p = FinitePoset::antichain(41);
        assert!(matches!(count_downsets(&p), Err(Error::CapExceeded { .. })));
        assert_eq!(count_downsets_capped(&p, 64).unwrap(), 1u128 << 41);
        assert_eq!(
            count_downsets_capped(&FinitePoset::antichain(64), 64).unwrap(),
            1u128 << 64
        );
    }

    #[test]
    fn enumeration_is_canonical() {
        let p = FinitePoset::product(2, 2);
        let all = p.downsets();
        assert_eq!(all.len(), 6);
        assert_eq!(all.first().unwrap(), &Vec::<usize>::new());
        assert_eq!(all.last().unwrap(), &vec![0, 1, 2, 3]);
    }

    #[test]
    fn diamonds_match_central_binomial() {
        assert_eq!(count_downsets(grid_diamond(1).unwrap().poset()).unwrap(), 2);
        assert_eq!(count_downsets(grid_diamond(2).unwrap().poset()).unwrap(), 6);
        assert_eq!(count_downsets(grid_diamond(5).unwrap().poset()).unwrap(), 252);
        for n in 1..=8u64 {
            let g = grid_diamond(n as usize).unwrap();
            let expected = binomial(2 * n, n).to_u128().unwrap();
            assert_eq!(count_downsets_capped(g.poset(), 64).unwrap(), expected, "n = {n}");
        }
        assert!(grid_diamond(0).is_err());
    }

    #[test]
    fn grid_validation_flags_bad_chains() {
        let p = FinitePoset::product(2, 2);
        // Rows listed as w-chains too: row 0 meets row 0 twice.
        let rows = vec![vec![0, 1], vec![2, 3]];
        assert!(TangledGrid::new(p.clone(), rows.clone(), rows).is_err());
        let bad_order = vec![vec![1, 0], vec![2, 3]];
        let cols = vec![vec![0, 2], vec![1, 3]];
        assert!(TangledGrid::new(p, bad_order, cols).is_err());
    }

    #[test]
    fn embedding_small_cases() {
        let g1 = random_tangled_grid(1, 5).unwrap();
        assert_eq!(g1.poset().size(), 1);
        assert_eq!(count_downsets(g1.poset()).unwrap(), 2);
        let rp = build_rotation_poset(&instance_i2()).unwrap();
        let g2 = embed_in_tangled_grid(&rp).unwrap();
        assert_eq!(g2.poset().size(), 4);
        assert!(g2.violations().is_empty());
        assert!(count_downsets(g2.poset()).unwrap() >= 2);
    }

    #[test]
    fn embedding_random_instances() {
        for seed in 0..40u64 {
            let profile = random_instance(5, seed).unwrap();
            let rp = build_rotation_poset(&profile).unwrap();
            let g = embed_in_tangled_grid(&rp).unwrap();
            assert!(g.violations().is_empty());
            assert_eq!(g.poset().size(), 25);
            // Original rotations keep their order.
            for a in 0..rp.len() {
                for b in 0..rp.len() {
                    assert_eq!(rp.leq(a, b), g.poset().leq(a, b));
                }
            }
            let fp = rp.to_finite_poset().unwrap();
            assert!(count_downsets(g.poset()).unwrap() >= count_downsets(&fp).unwrap());
        }
    }

    #[test]
    fn random_grid_is_deterministic() {
        assert_eq!(random_tangled_grid(4, 9).unwrap(), random_tangled_grid(4, 9).unwrap());
        assert!(random_tangled_grid(4, 9).unwrap().violations().is_empty());
    }

    fn arb_poset() -> impl Strategy<Value = FinitePoset> {
        (1usize..=12).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..2 * n).prop_map(move |pairs| {
                // Orient every pair low -> high index so the relation is acyclic.
                let rel = pairs
                    .into_iter()
                    .filter(|(a, b)| a != b)
                    .map(|(a, b)| (a.min(b), a.max(b)));
                FinitePoset::from_relations(n, rel).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn counting_matches_subset_filter(p in arb_poset()) {
            let c = count_downsets(&p).unwrap();
            prop_assert_eq!(c, naive_count(&p));
            let mut streamed = 0u128;
            p.for_each_downset(|m| { assert!(p.is_downset(m)); streamed += 1; });
            prop_assert_eq!(streamed, c);
        }
    }

    #[test]
    fn counting_matches_subset_filter_at_16() {
        let p = FinitePoset::product(4, 4);
        assert_eq!(count_downsets(&p).unwrap(), naive_count(&p));
        let g = random_tangled_grid(4, 3).unwrap();
        assert_eq!(count_downsets(g.poset()).unwrap(), naive_count(g.poset()));
    }
}
