//! Counting by revealing tuple components.
//!
//! A family `S ⊆ A_1 × … × A_n` is bounded by revealing the components of a
//! member `s` in the order of a permutation `π` and counting, for each
//! component `i`, how many values `X_i(s, π)` remain possible given the
//! components revealed before it. Then
//!
//! ```text
//! log |S| ≤ E_s[Σ_i log X_i(s, π)]                  for any fixed π
//!         ≤ Σ_i max_s E_π[log X_i(s, π)]           for any law of π
//! |S|     ≤ Π_i max_s E_π[X_i(s, π)]
//! ```
//!
//! `X_i(s, π)` depends on `π` only through the set `R` of components revealed
//! before `i`. Under a uniform `π`, `R` is a given set of size `r` with
//! probability `r!(n-1-r)!/n!`, which makes exact evaluation a sum over
//! subsets instead of over permutations.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::{factorial, int, rational_string};
use crate::posets::TangledGrid;
use crate::rng;
use crate::{Error, Result};

/// Largest component count evaluated exactly under a uniform permutation.
pub const MAX_EXACT_UNIFORM: usize = 12;
/// Sample count used when a uniform permutation is too large for exact evaluation.
pub const DEFAULT_MC_SAMPLES: usize = 20_000;
/// Default cap on the number of downsets turned into tuples.
pub const DEFAULT_FAMILY_CAP: usize = 1_000_000;

/// A family of tuples over labelled component sets. Entries are indices into
/// the corresponding component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleFamily {
    components: Vec<Vec<String>>,
    members: Vec<Vec<u32>>,
}

impl TupleFamily {
    pub fn new(components: Vec<Vec<String>>, members: Vec<Vec<u32>>) -> Result<Self> {
        let n = components.len();
        let mut seen = HashSet::with_capacity(members.len());
        for (idx, m) in members.iter().enumerate() {
            if m.len() != n {
                return Err(Error::arg(format!(
                    "member {idx} has {} entries, expected {n}",
                    m.len()
                )));
            }
            if let Some(i) = (0..n).find(|&i| m[i] as usize >= components[i].len()) {
                return Err(Error::arg(format!("member {idx} entry {i} outside its component")));
            }
            if !seen.insert(m.as_slice()) {
                return Err(Error::arg(format!("member {idx} is a duplicate")));
            }
        }
        Ok(TupleFamily { components, members })
    }

    /// Number of components.
    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn components(&self) -> &[Vec<String>] {
        &self.components
    }

    pub fn members(&self) -> &[Vec<u32>] {
        &self.members
    }

    pub fn position(&self, member: &[u32]) -> Option<usize> {
        self.members.iter().position(|m| m == member)
    }

    /// `X_i` for every member at once, given the revealed set `mask`.
    pub(crate) fn x_all(&self, mask: u64, i: usize) -> Vec<u32> {
        let revealed: Vec<usize> = (0..self.n()).filter(|&j| mask >> j & 1 == 1).collect();
        let key = |m: &Vec<u32>| revealed.iter().map(|&j| m[j]).collect::<Vec<u32>>();
        let mut values: HashMap<Vec<u32>, HashSet<u32>> = HashMap::new();
        for m in &self.members {
            values.entry(key(m)).or_default().insert(m[i]);
        }
        self.members.iter().map(|m| values[&key(m)].len() as u32).collect()
    }
}

fn check_perm(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::arg(format!("{perm:?} is not a permutation of 0..{n}")));
    }
    Ok(())
}

/// Components revealed before `i` when revealing in the order `perm`.
fn revealed_before(perm: &[usize], i: usize) -> u64 {
    perm.iter().take_while(|&&c| c != i).fold(0u64, |m, &c| m | 1 << c)
}

/// Number of values component `i` can take among members agreeing with `s`
/// on every component revealed before `i`. `perm[t]` is the component
/// revealed at step `t`.
pub fn x_count(family: &TupleFamily, s: &[u32], perm: &[usize], i: usize) -> Result<usize> {
    let n = family.n();
    check_perm(perm, n)?;
    if i >= n {
        return Err(Error::arg(format!("component {i} out of range")));
    }
    if family.position(s).is_none() {
        return Err(Error::arg(format!("{s:?} is not a member")));
    }
    let before: Vec<usize> = perm.iter().copied().take_while(|&c| c != i).collect();
    let options: BTreeSet<u32> = family
        .members
        .iter()
        .filter(|m| before.iter().all(|&j| m[j] == s[j]))
        .map(|m| m[i])
        .collect();
    Ok(options.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `E_s[Σ_i log X_i(s, π)]` for one fixed permutation.
    FixedPermExpectS,
    /// `E_{s,π}[Σ_i log X_i(s, π)]`.
    ExpectBoth,
    /// `Σ_i max_s E_π[log X_i(s, π)]`.
    MaxSExpectPiLog,
    /// `log Π_i max_s E_π[X_i(s, π)]`.
    CorollaryProduct,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 4] = [
        BoundVariant::FixedPermExpectS,
        BoundVariant::ExpectBoth,
        BoundVariant::MaxSExpectPiLog,
        BoundVariant::CorollaryProduct,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub enum PermutationDistribution {
    /// Uniform; exact up to [`MAX_EXACT_UNIFORM`] components, sampled beyond.
    Uniform,
    /// Uniform, always estimated from this many Fisher–Yates samples.
    Sampled {
        samples: usize,
    },
    /// Finite support with exact weights summing to 1.
    Explicit(Vec<(Vec<usize>, BigRational)>),
    Single(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundMode {
    pub variant: BoundVariant,
    pub permutations: PermutationDistribution,
}

impl BoundMode {
    pub fn new(variant: BoundVariant, permutations: PermutationDistribution) -> Self {
        BoundMode { variant, permutations }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub variant: BoundVariant,
    /// Upper bound on `log |S|`.
    pub value: f64,
    /// Contribution of each component to `value`.
    pub per_component: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `Π_i max_s E_π[X_i]` as `"p/q"` when it is exactly computable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_product: Option<String>,
    pub log_size: f64,
    #[serde(skip)]
    pub exact_product_value: Option<BigRational>,
    #[serde(skip)]
    pub size: usize,
}

impl BoundResult {
    pub fn is_exact(&self) -> bool {
        self.stderr.is_none()
    }

    /// `value ≥ log|S|`: without slack beyond float rounding for exact
    /// results, within 4 standard errors for sampled ones.
    pub fn holds(&self) -> bool {
        if let Some(p) = &self.exact_product_value {
            return *p >= int(self.size as u64);
        }
        let slack = match self.stderr {
            Some(se) => 4.0 * se,
            None => 1e-12 * self.log_size.abs().max(1.0),
        };
        self.value >= self.log_size - slack
    }
}

/// Per-member, per-component statistics accumulated over permutations.
struct Accumulated {
    /// `E_π[log X_i(s, π)]`, indexed `[i][s]`.
    log_mean: Vec<Vec<f64>>,
    /// `E_π[X_i(s, π)]`, indexed `[i][s]`.
    mean: Vec<Vec<f64>>,
    exact_mean: Option<Vec<Vec<BigRational>>>,
    /// Standard errors of the two means when sampled.
    log_se: Option<Vec<Vec<f64>>>,
    se: Option<Vec<Vec<f64>>>,
    /// Standard error of `E_{s,π} Σ log X` when sampled.
    both_se: Option<f64>,
    samples: Option<usize>,
}

fn accumulate_weighted(
    family: &TupleFamily,
    weighted_masks: impl Fn(usize) -> Vec<(u64, BigRational)> + Sync,
) -> Accumulated {
    let n = family.n();
    let per_i: Vec<(Vec<f64>, Vec<f64>, Vec<BigRational>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = family.len();
            let mut log_mean = vec![0.0; s];
            let mut exact = vec![BigRational::zero(); s];
            for (mask, w) in weighted_masks(i) {
                let wf = crate::exact::to_f64(&w);
                for (idx, x) in family.x_all(mask, i).into_iter().enumerate() {
                    log_mean[idx] += wf * f64::from(x).ln();
                    exact[idx] += &w * int(x);
                }
            }
            let mean = exact.iter().map(crate::exact::to_f64).collect();
            (log_mean, mean, exact)
        })
        .collect();
    let mut acc = Accumulated {
        log_mean: Vec::with_capacity(n),
        mean: Vec::with_capacity(n),
        exact_mean: Some(Vec::with_capacity(n)),
        log_se: None,
        se: None,
        both_se: None,
        samples: None,
    };
    for (l, m, e) in per_i {
        acc.log_mean.push(l);
        acc.mean.push(m);
        acc.exact_mean.as_mut().unwrap().push(e);
    }
    acc
}

/// Exact law of the revealed set under a uniform permutation.
fn uniform_masks(n: usize, i: usize) -> Vec<(u64, BigRational)> {
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let nf = factorial(n as u64);
    let weight: Vec<BigRational> = (0..n)
        .map(|r| BigRational::new(factorial(r as u64) * factorial((n - 1 - r) as u64), nf.clone()))
        .collect();
    (0u64..1 << others.len())
        .map(|bits| {
            let mask = others
                .iter()
                .enumerate()
                .filter(|(b, _)| bits >> b & 1 == 1)
                .fold(0u64, |m, (_, &j)| m | 1 << j);
            (mask, weight[bits.count_ones() as usize].clone())
        })
        .collect()
}

fn explicit_masks(perms: &[(Vec<usize>, BigRational)], i: usize) -> Vec<(u64, BigRational)> {
    let mut merged: HashMap<u64, BigRational> = HashMap::new();
    for (p, w) in perms {
        *merged.entry(revealed_before(p, i)).or_insert_with(BigRational::zero) += w;
    }
    let mut v: Vec<_> = merged.into_iter().collect();
    v.sort_by_key(|e| e.0);
    v
}

fn accumulate_sampled(family: &TupleFamily, samples: usize, seed: u64) -> Accumulated {
    let n = family.n();
    let s = family.len();
    let mut rng = rng::stream(seed, 0x6c65_6e73);
    let perms: Vec<Vec<usize>> = (0..samples)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let mut memo: HashMap<(u64, usize), Vec<u32>> = HashMap::new();
    let mut log_sum = vec![vec![0.0; s]; n];
    let mut log_sq = vec![vec![0.0; s]; n];
    let mut sum = vec![vec![0.0; s]; n];
    let mut sq = vec![vec![0.0; s]; n];
    let (mut z_sum, mut z_sq) = (0.0, 0.0);
    for p in &perms {
        let mut z = 0.0;
        for i in 0..n {
            let mask = revealed_before(p, i);
            let xs = memo.entry((mask, i)).or_insert_with(|| family.x_all(mask, i));
            for (idx, &x) in xs.iter().enumerate() {
                let (xf, lx) = (f64::from(x), f64::from(x).ln());
                log_sum[i][idx] += lx;
                log_sq[i][idx] += lx * lx;
                sum[i][idx] += xf;
                sq[i][idx] += xf * xf;
                z += lx;
            }
        }
        z /= s as f64;
        z_sum += z;
        z_sq += z * z;
    }
    let t = samples as f64;
    let se_of = |total: f64, squares: f64| {
        let mean = total / t;
        let var = (squares / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
        (var / t).sqrt()
    };
    let grid = |f: &dyn Fn(usize, usize) -> f64| (0..n).map(|i| (0..s).map(|k| f(i, k)).collect()).collect();
    Accumulated {
        log_mean: grid(&|i, k| log_sum[i][k] / t),
        mean: grid(&|i, k| sum[i][k] / t),
        exact_mean: None,
        log_se: Some(grid(&|i, k| se_of(log_sum[i][k], log_sq[i][k]))),
        se: Some(grid(&|i, k| se_of(sum[i][k], sq[i][k]))),
        both_se: Some(se_of(z_sum, z_sq)),
        samples: Some(samples),
    }
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, k| if v[k] > v[best] { k } else { best })
}

/// Evaluates one form of the counting bound.
pub fn bound(family: &TupleFamily, mode: &BoundMode, seed: u64) -> Result<BoundResult> {
    if family.is_empty() {
        return Err(Error::arg("empty family"));
    }
    let n = family.n();
    if n > 64 {
        return Err(Error::arg("at most 64 components are supported"));
    }
    let dist = &mode.permutations;
    let acc = match dist {
        PermutationDistribution::Single(p) => {
            check_perm(p, n)?;
            let support = vec![(p.clone(), BigRational::one())];
            accumulate_weighted(family, |i| explicit_masks(&support, i))
        }
        PermutationDistribution::Explicit(support) => {
            if support.is_empty() {
                return Err(Error::arg("explicit permutation distribution is empty"));
            }
            for (p, w) in support {
                check_perm(p, n)?;
                if *w < BigRational::zero() {
                    return Err(Error::arg("negative permutation weight"));
                }
            }
            let total: BigRational = support.iter().map(|e| &e.1).sum();
            if !total.is_one() {
                return Err(Error::arg(format!(
                    "permutation weights sum to {}",
                    rational_string(&total)
                )));
            }
            accumulate_weighted(family, |i| explicit_masks(support, i))
        }
        PermutationDistribution::Uniform if n <= MAX_EXACT_UNIFORM => {
            accumulate_weighted(family, |i| uniform_masks(n, i))
        }
        PermutationDistribution::Uniform => accumulate_sampled(family, DEFAULT_MC_SAMPLES, seed),
        PermutationDistribution::Sampled { samples } => {
            if *samples < 2 {
                return Err(Error::arg("at least two samples are needed"));
            }
            accumulate_sampled(family, *samples, seed)
        }
    };
    let s = family.len() as f64;
    let mut result = BoundResult {
        variant: mode.variant,
        value: 0.0,
        per_component: Vec::with_capacity(n),
        stderr: None,
        samples: acc.samples,
        seed: acc.samples.map(|_| seed),
        exact_product: None,
        log_size: s.ln(),
        exact_product_value: None,
        size: family.len(),
    };
    match mode.variant {
        BoundVariant::FixedPermExpectS => {
            if !matches!(dist, PermutationDistribution::Single(_)) {
                return Err(Error::arg("fixed_perm_expect_s needs a single permutation"));
            }
            result.per_component = acc.log_mean.iter().map(|row| row.iter().sum::<f64>() / s).collect();
        }
        BoundVariant::ExpectBoth => {
            result.per_component = acc.log_mean.iter().map(|row| row.iter().sum::<f64>() / s).collect();
            result.stderr = acc.both_se;
        }
        BoundVariant::MaxSExpectPiLog => {
            let picks: Vec<usize> = acc.log_mean.iter().map(|row| argmax(row)).collect();
            result.per_component = picks.iter().enumerate().map(|(i, &k)| acc.log_mean[i][k]).collect();
            result.stderr = acc.log_se.as_ref().map(|se| {
                picks
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| se[i][k].powi(2))
                    .sum::<f64>()
                    .sqrt()
            });
        }
        BoundVariant::CorollaryProduct => {
            if let Some(exact) = &acc.exact_mean {
                let maxima: Vec<&BigRational> = exact.iter().map(|row| row.iter().max().unwrap()).collect();
                let product = maxima.iter().fold(BigRational::one(), |p, m| p * *m);
                result.per_component = maxima.iter().map(|m| crate::exact::to_f64(m).ln()).collect();
                result.exact_product = Some(rational_string(&product));
                result.exact_product_value = Some(product);
            } else {
                let picks: Vec<usize> = acc.mean.iter().map(|row| argmax(row)).collect();
                result.per_component = picks.iter().enumerate().map(|(i, &k)| acc.mean[i][k].ln()).collect();
                result.stderr = acc.se.as_ref().map(|se| {
                    picks
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| (se[i][k] / acc.mean[i][k]).powi(2))
                        .sum::<f64>()
                        .sqrt()
                });
            }
        }
    }
    result.value = result.per_component.iter().sum();
    Ok(result)
}

/// `{(i,i,0)} ∪ {(i,0,i)} ∪ {(0,i,i)}` for `1 ≤ i ≤ N`, over `{0..N}^3`.
pub fn example1_family(big_n: u32) -> Result<TupleFamily> {
    if big_n == 0 {
        return Err(Error::arg("N must be positive"));
    }
    let labels: Vec<String> = (0..=big_n).map(|v| v.to_string()).collect();
    let mut members = Vec::with_capacity(3 * big_n as usize);
    for shape in [[1, 1, 0], [1, 0, 1], [0, 1, 1]] {
        for i in 1..=big_n {
            members.push(shape.iter().map(|&b| b * i).collect());
        }
    }
    TupleFamily::new(vec![labels; 3], members)
}

/// Simple bipartite graph with `left` vertices `U` and `right` vertices `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteGraph {
    left_size: usize,
    right_size: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(left_size: usize, right_size: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if left_size == 0 || right_size == 0 {
            return Err(Error::arg("both sides must be non-empty"));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= left_size || v >= right_size {
                return Err(Error::arg(format!("edge ({u},{v}) out of range")));
            }
            if !set.insert((u, v)) {
                return Err(Error::arg(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(BipartiteGraph {
            left_size,
            right_size,
            edges: set,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, n, (0..n).flat_map(|u| (0..n).map(move |v| (u, v))))
    }

    /// Each edge present independently with probability `p`.
    pub fn random(left_size: usize, right_size: usize, p: f64, seed: u64) -> Result<Self> {
        let mut rng = rng::seeded(seed);
        let mut edges = Vec::new();
        for u in 0..left_size {
            for v in 0..right_size {
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Self::new(left_size, right_size, edges)
    }

    pub fn left_size(&self) -> usize {
        self.left_size
    }

    pub fn right_size(&self) -> usize {
        self.right_size
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    /// Left neighbours of right vertex `v`, ascending.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.1 == v).map(|e| e.0).collect()
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        (0..self.right_size).map(|v| self.neighbours(v).len()).collect()
    }

    /// All perfect matchings, each as the left partner of every right vertex.
    pub fn perfect_matchings(&self) -> Result<Vec<Vec<usize>>> {
        if self.left_size != self.right_size {
            return Err(Error::arg("perfect matchings need equal sides"));
        }
        let adj: Vec<Vec<usize>> = (0..self.right_size).map(|v| self.neighbours(v)).collect();
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(self.right_size);
        let mut used = vec![false; self.left_size];
        fn go(adj: &[Vec<usize>], current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            let v = current.len();
            if v == adj.len() {
                out.push(current.clone());
                return;
            }
            for &u in &adj[v] {
                if !used[u] {
                    used[u] = true;
                    current.push(u);
                    go(adj, current, used, out);
                    current.pop();
                    used[u] = false;
                }
            }
        }
        go(&adj, &mut current, &mut used, &mut out);
        Ok(out)
    }

    /// Number of perfect matchings, by dynamic programming over
    /// subsets of used left vertices.
    pub fn permanent(&self) -> Result<u128> {
        let n = self.left_size;
        if n != self.right_size {
            return Err(Error::arg("permanent needs equal sides"));
        }
        if n > 24 {
            return Err(Error::CapExceeded {
                what: "permanent side size",
                cap: 24,
                actual: n,
            });
        }
        let adj: Vec<u32> = (0..n)
            .map(|v| self.neighbours(v).iter().fold(0u32, |m, &u| m | 1 << u))
            .collect();
        let mut ways = vec![0u128; 1 << n];
        ways[0] = 1;
        for mask in 0u32..(1 << n) {
            let w = ways[mask as usize];
            if w == 0 {
                continue;
            }
            let v = mask.count_ones() as usize;
            if v == n {
                continue;
            }
            let mut free = adj[v] & !mask;
            while free != 0 {
                let bit = free & free.wrapping_neg();
                ways[(mask | bit) as usize] += w;
                free ^= bit;
            }
        }
        Ok(ways[(1 << n) - 1])
    }

    /// `Σ_v log((d_v!)^{1/d_v})` over right vertices, or `None` when some
    /// right vertex is isolated (then there is no perfect matching).
    pub fn bregman_log_bound(&self) -> Option<f64> {
        let degrees = self.right_degrees();
        if degrees.contains(&0) {
            return None;
        }
        Some(
            degrees
                .iter()
                .map(|&d| (1..=d).map(|k| (k as f64).ln()).sum::<f64>() / d as f64)
                .sum(),
        )
    }
}

/// Perfect matchings as tuples: component `v` is the set of edges at right
/// vertex `v`, and a matching picks one of them.
pub fn matchings_family(graph: &BipartiteGraph) -> Result<TupleFamily> {
    let neighbours: Vec<Vec<usize>> = (0..graph.right_size()).map(|v| graph.neighbours(v)).collect();
    let components = neighbours
        .iter()
        .enumerate()
        .map(|(v, ns)| ns.iter().map(|u| format!("{u}-{v}")).collect())
        .collect();
    let members = graph
        .perfect_matchings()?
        .into_iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .map(|(v, u)| neighbours[v].binary_search(u).unwrap() as u32)
                .collect()
        })
        .collect();
    TupleFamily::new(components, members)
}

/// Downsets of a tangled grid encoded by their tops.
///
/// Each chain gets a sentinel bottom (`a0` on m-chains, `b0` on w-chains), so
/// chain `c` has values `0..=n` and the entry for a downset `D` is
/// `|D ∩ c|`: 0 when only the sentinel is in `D`. Components are the m-chains
/// followed by the w-chains.
pub fn downsets_family(grid: &TangledGrid, cap: usize) -> Result<TupleFamily> {
    let n = grid.n();
    let chains: Vec<&Vec<usize>> = grid.m_chains().iter().chain(grid.w_chains()).collect();
    let components = chains
        .iter()
        .enumerate()
        .map(|(c, chain)| {
            let sentinel = if c < n { "a0" } else { "b0" };
            std::iter::once(sentinel.to_string())
                .chain(chain.iter().map(|e| e.to_string()))
                .collect()
        })
        .collect();
    let mut members = Vec::new();
    let mut overflow = false;
    grid.poset().for_each_downset(|d| {
        if members.len() >= cap {
            overflow = true;
            return;
        }
        members.push(
            chains
                .iter()
                .map(|chain| chain.iter().filter(|&&e| d[e]).count() as u32)
                .collect(),
        );
    });
    if overflow {
        return Err(Error::CapExceeded {
            what: "downset family size",
            cap,
            actual: cap + 1,
        });
    }
    TupleFamily::new(components, members)
}
