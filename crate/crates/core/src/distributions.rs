//! Interval-length random variables and their exact laws.
//!
//! * `N_l`: `n + 1` points on a cycle, one of them `t`; `l` of them are
//!   picked uniformly and `N_l` is the length of the gap `[a_j, a_{j+1})`
//!   containing `t`.
//! * `N_x` (line form): every integer is in `A` with probability `x`, and
//!   `N_x` is the length of the gap of `A` containing 0.
//! * `N_x` (extended form): as above but the points `-1, 0, 1, 2` are also
//!   hit by an extra random set `B`, and with probability `x` the value is 1
//!   outright.
//!
//! Exact laws use [`BigRational`]; samplers draw from [`crate::rng::Rng`]
//! with integer-exact comparisons, so streams are identical on every
//! platform.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng as _;
use serde::Serialize;

use crate::counting_lens::{downsets_family, DEFAULT_FAMILY_CAP};
use crate::exact::{binomial, factorial, int, pow, ratio, rational_string, to_f64};
use crate::posets::TangledGrid;
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Probability mass function over positive integers.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf<P> {
    support: Vec<(u64, P)>,
}

pub type ExactPmf = Pmf<BigRational>;

impl<P> Pmf<P> {
    pub fn support(&self) -> &[(u64, P)] {
        &self.support
    }
}

impl ExactPmf {
    pub fn new(support: Vec<(u64, BigRational)>) -> Result<Self> {
        if support.iter().any(|(_, p)| p.is_negative()) {
            return Err(Error::arg("negative probability"));
        }
        Ok(Pmf { support })
    }

    pub fn total(&self) -> BigRational {
        self.support.iter().map(|e| &e.1).sum()
    }

    pub fn prob(&self, k: u64) -> BigRational {
        self.support.iter().filter(|e| e.0 == k).map(|e| &e.1).sum()
    }

    pub fn cdf(&self, k: u64) -> BigRational {
        self.support.iter().filter(|e| e.0 <= k).map(|e| &e.1).sum()
    }

    pub fn expectation(&self) -> BigRational {
        self.support.iter().map(|(k, p)| p * int(*k)).sum()
    }

    pub fn to_f64(&self) -> Pmf<f64> {
        Pmf {
            support: self.support.iter().map(|(k, p)| (*k, to_f64(p))).collect(),
        }
    }
}

impl Pmf<f64> {
    pub fn prob(&self, k: u64) -> f64 {
        self.support.iter().filter(|e| e.0 == k).map(|e| e.1).sum()
    }
}

fn check_l(n: u64, l: u64) -> Result<()> {
    if l < 2 || l > n {
        return Err(Error::arg(format!("l = {l} outside [2, {n}]")));
    }
    Ok(())
}

/// `Pr[N_l = k] = k C(n-k, l-2) / C(n+1, l)` for `1 ≤ k ≤ n`.
pub fn nl_pmf(n: u64, l: u64) -> Result<ExactPmf> {
    check_l(n, l)?;
    let den = binomial(n + 1, l);
    let support = (1..=n)
        .map(|k| {
            (
                k,
                BigRational::new(BigInt::from(k) * binomial(n - k, l - 2), den.clone()),
            )
        })
        .collect();
    ExactPmf::new(support)
}

/// Law of `N_l` given that `t` is one of the picked points:
/// `C(n-k, l-2) / C(n, l-1)`.
pub fn nl_pmf_given_picked(n: u64, l: u64) -> Result<ExactPmf> {
    check_l(n, l)?;
    let den = binomial(n, l - 1);
    ExactPmf::new(
        (1..=n)
            .map(|k| (k, BigRational::new(binomial(n - k, l - 2), den.clone())))
            .collect(),
    )
}

/// Law of `N_l` given that `t` is not picked: `(k-1) C(n-k, l-2) / C(n, l)`.
pub fn nl_pmf_given_not_picked(n: u64, l: u64) -> Result<ExactPmf> {
    check_l(n, l)?;
    let den = binomial(n + 1, l) - binomial(n, l - 1);
    ExactPmf::new(
        (1..=n)
            .map(|k| {
                (
                    k,
                    BigRational::new(BigInt::from(k - 1) * binomial(n - k, l - 2), den.clone()),
                )
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct NlExpectations {
    pub total: BigRational,
    pub given_picked: BigRational,
    pub given_not_picked: BigRational,
    /// `2(n+1)/(l+1)`.
    pub bound: BigRational,
}

impl NlExpectations {
    pub fn bound_holds(&self) -> bool {
        self.total <= self.bound
    }
}

pub fn nl_expectation(n: u64, l: u64) -> Result<NlExpectations> {
    Ok(NlExpectations {
        total: nl_pmf(n, l)?.expectation(),
        given_picked: nl_pmf_given_picked(n, l)?.expectation(),
        given_not_picked: nl_pmf_given_not_picked(n, l)?.expectation(),
        bound: ratio(2 * (n + 1), l + 1),
    })
}

/// Counts of `N_l` values over every `l`-subset of the cycle, split by
/// whether `t` is picked. Entry `[k]` counts subsets giving length `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NlCensus {
    pub picked: Vec<u64>,
    pub not_picked: Vec<u64>,
}

impl NlCensus {
    pub fn pmf(&self) -> ExactPmf {
        let total: u64 = self.picked.iter().chain(&self.not_picked).sum();
        let support = (1..self.picked.len())
            .map(|k| (k as u64, ratio(self.picked[k] + self.not_picked[k], total)))
            .collect();
        Pmf { support }
    }

    fn conditional(counts: &[u64]) -> ExactPmf {
        let total: u64 = counts.iter().sum();
        Pmf {
            support: (1..counts.len()).map(|k| (k as u64, ratio(counts[k], total))).collect(),
        }
    }

    pub fn pmf_given_picked(&self) -> ExactPmf {
        Self::conditional(&self.picked)
    }

    pub fn pmf_given_not_picked(&self) -> ExactPmf {
        Self::conditional(&self.not_picked)
    }
}

/// Brute force over every subset of the `n + 1` cycle points with `t = 0`,
/// returning the census for each `l` in `0..=n+1` (only `l ≥ 2` is filled).
pub fn nl_census(n: u64) -> Result<Vec<NlCensus>> {
    if n == 0 || n > 24 {
        return Err(Error::arg("census needs 1 ≤ n ≤ 24"));
    }
    let size = n + 1;
    let mut out = vec![
        NlCensus {
            picked: vec![0; size as usize],
            not_picked: vec![0; size as usize],
        };
        size as usize + 1
    ];
    for mask in 0u64..1 << size {
        let l = mask.count_ones() as usize;
        if l < 2 {
            continue;
        }
        let census = &mut out[l];
        if mask & 1 == 1 {
            let len = (mask >> 1).trailing_zeros() as usize + 1;
            census.picked[len] += 1;
        } else {
            let lo = mask.trailing_zeros() as u64;
            let hi = 63 - mask.leading_zeros() as u64;
            census.not_picked[(lo + size - hi) as usize] += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NxVariant {
    /// Gap of a Bernoulli set on the integers.
    Line,
    /// Gap with the extra set on `{-1, 0, 1, 2}` and the value-1 branch.
    Extended,
}

fn check_x(x: &BigRational) -> Result<()> {
    if !x.is_positive() || *x >= BigRational::one() {
        return Err(Error::arg(format!("x = {} outside (0, 1)", rational_string(x))));
    }
    Ok(())
}

/// `Pr[N_x = k]`, exactly.
///
/// With `q = 1 - x` and `c = 1 - q^2` (the chance that one of `-1..=2` is hit
/// by `A ∪ B`), the extended law is
///
/// ```text
/// k = 1:  x + q c^2
/// k = 2:  2 q^3 c^2
/// k = 3:  q^5 c^2 + 2 q^5 c x
/// k ≥ 4:  2 q^(k+2) c x + 2 q^(k+3) c x + (k-4) q^(k+4) x^2
/// ```
pub fn nx_pmf(x: &BigRational, k: u64, variant: NxVariant) -> Result<BigRational> {
    check_x(x)?;
    if k == 0 {
        return Err(Error::arg("k must be positive"));
    }
    let one = BigRational::one();
    let q = &one - x;
    let qp = |e: u64| pow(&q, e as u32);
    Ok(match variant {
        NxVariant::Line => int(k) * x * x * qp(k - 1),
        NxVariant::Extended => {
            let c = &one - &q * &q;
            match k {
                1 => x + &q * &c * &c,
                2 => int(2) * qp(3) * &c * &c,
                3 => qp(5) * &c * &c + int(2) * qp(5) * &c * x,
                _ => int(2) * qp(k + 2) * &c * x + int(2) * qp(k + 3) * &c * x + int(k - 4) * qp(k + 4) * x * x,
            }
        }
    })
}

/// `Pr[N_x > K]`, exactly.
///
/// Line: `q^K (K x + 1)`. Extended (`K ≥ 3`):
/// `2 c q^(K+3) + 2 c q^(K+4) + q^(K+5) ((K-3) x + q)`.
pub fn nx_tail(x: &BigRational, big_k: u64, variant: NxVariant) -> Result<BigRational> {
    check_x(x)?;
    let one = BigRational::one();
    let q = &one - x;
    let qp = |e: u64| pow(&q, e as u32);
    Ok(match variant {
        NxVariant::Line => qp(big_k) * (int(big_k) * x + &one),
        NxVariant::Extended => {
            if big_k < 3 {
                let head: BigRational = (1..=big_k).map(|k| nx_pmf(x, k, variant).unwrap()).sum();
                return Ok(one - head);
            }
            let c = &one - &q * &q;
            int(2) * &c * qp(big_k + 3) + int(2) * &c * qp(big_k + 4) + qp(big_k + 5) * (int(big_k - 3) * x + &q)
        }
    })
}

pub fn nx_pmf_f64(x: f64, k: u64, variant: NxVariant) -> f64 {
    let q = 1.0 - x;
    let k_f = k as f64;
    match variant {
        NxVariant::Line => k_f * x * x * q.powf(k_f - 1.0),
        NxVariant::Extended => {
            let c = 1.0 - q * q;
            match k {
                0 => 0.0,
                1 => x + q * c * c,
                2 => 2.0 * q.powi(3) * c * c,
                3 => q.powi(5) * c * c + 2.0 * q.powi(5) * c * x,
                _ => {
                    2.0 * q.powf(k_f + 2.0) * c * x
                        + 2.0 * q.powf(k_f + 3.0) * c * x
                        + (k_f - 4.0) * q.powf(k_f + 4.0) * x * x
                }
            }
        }
    }
}

fn bernoulli(rng: &mut Rng, p: f64) -> bool {
    rng.gen::<f64>() < p
}

/// Samples `N_l` on a cycle of `n + 1` points with `t = 0`.
pub struct NlSampler {
    n: u64,
    l: u64,
    rng: Rng,
}

impl NlSampler {
    pub fn new(n: u64, l: u64, seed: u64) -> Result<Self> {
        check_l(n, l)?;
        Ok(NlSampler {
            n,
            l,
            rng: rng::seeded(seed),
        })
    }

    pub fn sample(&mut self) -> u64 {
        let size = self.n + 1;
        // Floyd's algorithm: a uniform l-subset with exactly l draws.
        let mut picked = Vec::with_capacity(self.l as usize);
        for j in size - self.l..size {
            let r = self.rng.gen_range(0..=j);
            picked.push(if picked.contains(&r) { j } else { r });
        }
        let lo = *picked.iter().min().unwrap();
        let hi = *picked.iter().max().unwrap();
        if lo == 0 {
            *picked.iter().filter(|&&p| p > 0).min().unwrap()
        } else {
            lo + size - hi
        }
    }
}

impl Iterator for NlSampler {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        Some(self.sample())
    }
}

pub fn sample_nl(n: u64, l: u64, seed: u64, count: usize) -> Result<Vec<u64>> {
    Ok(NlSampler::new(n, l, seed)?.take(count).collect())
}

/// Which of the four points `-1, 0, 1, 2` share one coin in the extra set.
/// Only non-adjacent points may be identified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DependencyPattern {
    pairs: Vec<(i8, i8)>,
    /// `class[h + 1]` is the coin used by point `h`.
    #[serde(skip)]
    class: [usize; 4],
}

impl DependencyPattern {
    pub fn independent() -> Self {
        DependencyPattern {
            pairs: Vec::new(),
            class: [0, 1, 2, 3],
        }
    }

    pub fn new(pairs: &[(i8, i8)]) -> Result<Self> {
        let mut class = [0usize, 1, 2, 3];
        for &(a, b) in pairs {
            if !(-1..=2).contains(&a) || !(-1..=2).contains(&b) || a == b {
                return Err(Error::arg(format!(
                    "pair {a}<->{b} is not two distinct points of -1..=2"
                )));
            }
            let (ca, cb) = (class[(a + 1) as usize], class[(b + 1) as usize]);
            for c in class.iter_mut() {
                if *c == cb {
                    *c = ca;
                }
            }
        }
        if (0..3).any(|h| class[h] == class[h + 1]) {
            return Err(Error::arg(format!("pattern {pairs:?} ties two adjacent points")));
        }
        let mut pairs = pairs.to_vec();
        pairs.iter_mut().for_each(|p| *p = (p.0.min(p.1), p.0.max(p.1)));
        pairs.sort_unstable();
        pairs.dedup();
        Ok(DependencyPattern { pairs, class })
    }

    /// Every legal pattern: none, one of the three non-adjacent pairs, or
    /// `{-1<->1, 0<->2}`.
    pub fn all_legal() -> Vec<DependencyPattern> {
        [&[][..], &[(-1, 1)], &[(-1, 2)], &[(0, 2)], &[(-1, 1), (0, 2)]]
            .iter()
            .map(|p| DependencyPattern::new(p).unwrap())
            .collect()
    }

    pub fn label(&self) -> String {
        if self.pairs.is_empty() {
            return "independent".into();
        }
        self.pairs
            .iter()
            .map(|(a, b)| format!("{a}<->{b}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Samples `N_x`; the integer line is scanned up to `⌈40/x⌉` on each side.
pub struct NxSampler {
    x: f64,
    variant: NxVariant,
    pattern: DependencyPattern,
    window: u64,
    truncated: u64,
    rng: Rng,
}

impl NxSampler {
    pub fn new(x: f64, variant: NxVariant, seed: u64) -> Result<Self> {
        Self::with_pattern(x, variant, DependencyPattern::independent(), seed)
    }

    /// Extended variant whose extra set follows `pattern`.
    pub fn with_pattern(x: f64, variant: NxVariant, pattern: DependencyPattern, seed: u64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::arg(format!("x = {x} outside (0, 1)")));
        }
        Ok(NxSampler {
            x,
            variant,
            pattern,
            window: (40.0 / x).ceil() as u64,
            truncated: 0,
            rng: rng::seeded(seed),
        })
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    /// Samples where no point was found inside the window.
    pub fn truncated(&self) -> u64 {
        self.truncated
    }

    pub fn sample(&mut self) -> u64 {
        let mut extra = [false; 4];
        if self.variant == NxVariant::Extended {
            if bernoulli(&mut self.rng, self.x) {
                return 1;
            }
            let mut coins = [false; 4];
            for c in coins.iter_mut() {
                *c = bernoulli(&mut self.rng, self.x);
            }
            for (h, e) in extra.iter_mut().enumerate() {
                *e = coins[self.pattern.class[h]];
            }
        }
        let w = self.window as i64;
        let hit = |h: i64, rng: &mut Rng, x: f64| -> bool {
            let a = bernoulli(rng, x);
            a || ((-1..=2).contains(&h) && extra[(h + 1) as usize])
        };
        let right = (1..=w).find(|&h| hit(h, &mut self.rng, self.x));
        let left = (0..=w).find(|&d| hit(-d, &mut self.rng, self.x)).map(|d| -d);
        if right.is_none() || left.is_none() {
            self.truncated += 1;
        }
        (right.unwrap_or(w + 1) - left.unwrap_or(-w - 1)) as u64
    }
}

impl Iterator for NxSampler {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        Some(self.sample())
    }
}

pub fn sample_nx(x: f64, variant: NxVariant, seed: u64, count: usize) -> Result<Vec<u64>> {
    Ok(NxSampler::new(x, variant, seed)?.take(count).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub samples: usize,
    /// Values tested individually; the rest are pooled into one bin.
    pub bins: usize,
    pub max_abs_z: f64,
    pub pass: bool,
}

/// Per-bin z-test of empirical frequencies against `pmf`. Bins with fewer
/// than 5 expected hits are pooled; passes when every `|z| ≤ sigmas`.
pub fn goodness_of_fit(samples: &[u64], pmf: impl Fn(u64) -> f64, sigmas: f64) -> FitReport {
    let total = samples.len() as f64;
    let max_k = samples.iter().copied().max().unwrap_or(1);
    let mut counts = vec![0u64; max_k as usize + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let z = |observed: f64, p: f64| (observed - total * p) / (total * p * (1.0 - p)).sqrt().max(f64::MIN_POSITIVE);
    let (mut bins, mut worst) = (0, 0.0f64);
    let (mut rest_p, mut rest_obs) = (1.0, total);
    for k in 1..=max_k.max(1) {
        let p = pmf(k);
        if total * p >= 5.0 && p < 1.0 {
            let obs = counts.get(k as usize).copied().unwrap_or(0) as f64;
            worst = worst.max(z(obs, p).abs());
            rest_p -= p;
            rest_obs -= obs;
            bins += 1;
        }
    }
    if total * rest_p >= 5.0 && rest_p < 1.0 {
        worst = worst.max(z(rest_obs, rest_p.max(0.0)).abs());
    }
    FitReport {
        samples: samples.len(),
        bins,
        max_abs_z: worst,
        pass: worst <= sigmas,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub chain: usize,
    pub l: u64,
    pub members: usize,
    /// `min over s, k of Pr[X ≤ k] - Pr[N_l ≤ k]`, as `"p/q"`.
    pub min_gap: String,
    pub pass: bool,
}

/// Exact check that, for every downset `s` of the grid, the number of
/// options `X` for chain `chain` given that exactly `l` chains of the other
/// kind come before it is at most `N_l` in the stochastic order:
/// `Pr[X ≤ k] ≥ Pr[N_l ≤ k]` for every `k`.
///
/// Chains `0..n` are m-chains and `n..2n` w-chains. Under a uniform
/// permutation of the `2n` chains, the set `R` of chains before `chain` is
/// a given set of size `r` with weight `r!(2n-1-r)!`; conditioning on
/// `|R ∩ other kind| = l` just renormalises those weights.
pub fn dominance_check(grid: &TangledGrid, chain: usize, l: u64) -> Result<DominanceReport> {
    let n = grid.n();
    if chain >= 2 * n {
        return Err(Error::arg(format!("chain {chain} out of range for n = {n}")));
    }
    if n > 5 {
        return Err(Error::CapExceeded {
            what: "grid side for exhaustive dominance",
            cap: 5,
            actual: n,
        });
    }
    let family = downsets_family(grid, DEFAULT_FAMILY_CAP)?;
    dominance_on_family(&family, n, chain, l)
}

fn dominance_on_family(
    family: &crate::counting_lens::TupleFamily,
    n: usize,
    chain: usize,
    l: u64,
) -> Result<DominanceReport> {
    let nl = nl_pmf(n as u64, l)?;
    let opposite = if chain < n {
        (n..2 * n).collect::<Vec<_>>()
    } else {
        (0..n).collect()
    };
    let others: Vec<usize> = (0..2 * n).filter(|&c| c != chain).collect();
    let mut law = vec![vec![BigRational::zero(); n + 2]; family.len()];
    let mut total = BigRational::zero();
    for bits in 0u64..1 << others.len() {
        let mask = others
            .iter()
            .enumerate()
            .filter(|(b, _)| bits >> b & 1 == 1)
            .fold(0u64, |m, (_, &c)| m | 1 << c);
        if opposite.iter().filter(|&&c| mask >> c & 1 == 1).count() as u64 != l {
            continue;
        }
        let r = bits.count_ones() as u64;
        let w = int(factorial(r) * factorial(2 * n as u64 - 1 - r));
        total += &w;
        for (s, x) in family.x_all(mask, chain).into_iter().enumerate() {
            law[s][x as usize] += &w;
        }
    }
    let nl_cdf: Vec<BigRational> = (0..=n as u64 + 1).map(|k| nl.cdf(k)).collect();
    let mut min_gap: Option<BigRational> = None;
    for row in &law {
        let mut cdf = BigRational::zero();
        for (k, p) in row.iter().enumerate().skip(1) {
            cdf += p;
            let gap = &cdf / &total - &nl_cdf[k.min(n + 1)];
            if min_gap.as_ref().is_none_or(|g| gap < *g) {
                min_gap = Some(gap);
            }
        }
    }
    let min_gap = min_gap.unwrap_or_else(BigRational::zero);
    Ok(DominanceReport {
        chain,
        l,
        members: family.len(),
        pass: !min_gap.is_negative(),
        min_gap: rational_string(&min_gap),
    })
}

/// [`dominance_check`] for every chain and every `l` in `2..=n`.
pub fn dominance_all(grid: &TangledGrid) -> Result<Vec<DominanceReport>> {
    let n = grid.n();
    if n > 5 {
        return Err(Error::CapExceeded {
            what: "grid side for exhaustive dominance",
            cap: 5,
            actual: n,
        });
    }
    let family = downsets_family(grid, DEFAULT_FAMILY_CAP)?;
    let mut out = Vec::new();
    for chain in 0..2 * n {
        for l in 2..=n as u64 {
            out.push(dominance_on_family(&family, n, chain, l)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct JensenCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Compares `E[log(a0 + X1 + X2)]` for independent two-point `X1, X2` with
/// the fully coupled version:
///
/// ```text
/// lhs = x² log a0 + x(1-x)(log(a0+a1) + log(a0+a2)) + (1-x)² log(a0+a1+a2)
/// rhs = x log a0 + (1-x) log(a0+a1+a2)
/// ```
pub fn jensen_pair_check(a0: &BigRational, a1: &BigRational, a2: &BigRational, x: &BigRational) -> Result<JensenCheck> {
    if !(a0.is_positive() && a1.is_positive() && a2.is_positive()) {
        return Err(Error::arg("a0, a1, a2 must be positive"));
    }
    if x.is_negative() || *x > BigRational::one() {
        return Err(Error::arg("x must lie in [0, 1]"));
    }
    let ln = |r: BigRational| to_f64(&r).ln();
    let xf = to_f64(x);
    let yf = 1.0 - xf;
    let (l0, l01, l02, l012) = (ln(a0.clone()), ln(a0 + a1), ln(a0 + a2), ln(a0 + a1 + a2));
    let lhs = xf * xf * l0 + xf * yf * (l01 + l02) + yf * yf * l012;
    let rhs = xf * l0 + yf * l012;
    Ok(JensenCheck {
        lhs,
        rhs,
        pass: lhs >= rhs - 1e-12,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NxPrimeCheck {
    pub x: f64,
    pub pattern: String,
    pub samples: usize,
    pub mean_log_dependent: f64,
    pub se_dependent: f64,
    pub mean_log_independent: f64,
    pub se_independent: f64,
    pub pass: bool,
}

fn mean_log(sampler: &mut NxSampler, samples: usize) -> (f64, f64) {
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let v = (sampler.sample() as f64).ln();
        sum += v;
        sq += v * v;
    }
    let t = samples as f64;
    let mean = sum / t;
    let var = (sq / t - mean * mean).max(0.0) * t / (t - 1.0);
    (mean, (var / t).sqrt())
}

/// Monte Carlo comparison of `E[log N_x']` (extra set tied by `pattern`)
/// against `E[log N_x]`, from independent streams. Passes when the
/// dependent mean exceeds the independent one by at most 4 combined
/// standard errors.
pub fn nx_prime_check(x: f64, pattern: &DependencyPattern, samples: usize, seed: u64) -> Result<NxPrimeCheck> {
    if samples < 2 {
        return Err(Error::arg("at least two samples are needed"));
    }
    let stream_seed = |k| rng::splitmix64(seed ^ rng::splitmix64(k));
    let mut dep = NxSampler::with_pattern(x, NxVariant::Extended, pattern.clone(), stream_seed(1))?;
    let mut ind = NxSampler::new(x, NxVariant::Extended, stream_seed(2))?;
    let (md, sd) = mean_log(&mut dep, samples);
    let (mi, si) = mean_log(&mut ind, samples);
    Ok(NxPrimeCheck {
        x,
        pattern: pattern.label(),
        samples,
        mean_log_dependent: md,
        se_dependent: sd,
        mean_log_independent: mi,
        se_independent: si,
        pass: md <= mi + 4.0 * (sd * sd + si * si).sqrt(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainModelReport {
    pub n: usize,
    pub l: usize,
    /// `l / n`, the parameter of the comparison law.
    pub x: f64,
    pub samples: usize,
    /// `max over k of Pr[N_x ≤ k] - Pr[Z ≤ k]`.
    pub max_cdf_excess: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Simulates the reveal process on one chain of `n - 1` rotations with the
/// chain structure of a rotation poset, and compares the law of the option
/// count bound `Z` with the extended `N_x` at `x = l/n`.
///
/// The chain `M` has elements `ρ_1 < … < ρ_{n-1}` and top `ρ_j` for a
/// uniform `j` in `2..=n-3`. Chain `W_h` is paired with `M` at `ρ_h` and
/// `ρ_{h+1}`; two further w-chains meet `M` nowhere. Four distinct m-chains
/// pass through `ρ_{j-1}, …, ρ_{j+2}`. The permutation is drawn conditioned
/// on exactly `l` w-chains other than `W_j` preceding `M`, by inserting the
/// remaining chains one at a time into uniform slots.
pub fn chain_model_simulation(n: usize, l: usize, samples: usize, seed: u64, slack: f64) -> Result<ChainModelReport> {
    if n < 6 {
        return Err(Error::arg("the chain model needs n ≥ 6"));
    }
    if l == 0 || l >= n {
        return Err(Error::arg(format!("l = {l} outside [1, {}]", n - 1)));
    }
    if samples == 0 {
        return Err(Error::arg("samples must be positive"));
    }
    let x = l as f64 / n as f64;
    let mut rng = rng::seeded(seed);
    // Each w-chain other than W_j, identified by the index h of W_h; two
    // unpaired chains use index 0.
    let mut counts: Vec<u64> = Vec::new();
    for _ in 0..samples {
        let j = rng.gen_range(2..=n - 3) as i64;
        let mut others: Vec<i64> = (1..=n as i64 - 2).filter(|&h| h != j).collect();
        others.extend([0, 0]);
        // A uniform l-subset of the other w-chains precedes M.
        for t in 0..l {
            let k = rng.gen_range(t..others.len());
            others.swap(t, k);
        }
        let before = &others[..l];
        // M sits at slot l among M and the other w-chains; insert W_j.
        let mut size = n as u64;
        let mut pos = l as u64;
        let w_slot = rng.gen_range(0..=size);
        let w_first = w_slot <= pos;
        if w_first {
            pos += 1;
        }
        size += 1;
        let mut m_first = [false; 4];
        for f in m_first.iter_mut() {
            let slot = rng.gen_range(0..=size);
            if slot <= pos {
                *f = true;
                pos += 1;
            }
            size += 1;
        }
        if w_first {
            counts.push(1);
            continue;
        }
        let top = n as i64 - 1;
        let (mut lo, mut hi) = (-j, top + 1 - j);
        let mut cut = |c: i64| {
            if c <= 0 {
                lo = lo.max(c);
            } else {
                hi = hi.min(c);
            }
        };
        for &h in before.iter().filter(|&&h| h > 0) {
            let d = h - j;
            cut(if d >= 1 { d } else { d + 1 });
        }
        for (b, &f) in m_first.iter().enumerate() {
            if f {
                cut(b as i64 - 1);
            }
        }
        counts.push((hi - lo) as u64);
    }
    let max_k = counts.iter().copied().max().unwrap_or(1);
    let mut freq = vec![0u64; max_k as usize + 1];
    for &c in &counts {
        freq[c as usize] += 1;
    }
    let t = samples as f64;
    let (mut emp, mut theo, mut worst) = (0.0, 0.0, f64::NEG_INFINITY);
    for k in 1..=max_k {
        emp += freq[k as usize] as f64 / t;
        theo += nx_pmf_f64(x, k, NxVariant::Extended);
        worst = worst.max(theo - emp);
    }
    Ok(ChainModelReport {
        n,
        l,
        x,
        samples,
        max_cdf_excess: worst,
        slack,
        pass: worst <= slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posets::{grid_diamond, random_tangled_grid};
    use itertools::Itertools;

    #[test]
    fn nl_small_case() {
        let pmf = nl_pmf(3, 2).unwrap();
        assert_eq!(
            pmf.support().iter().map(|e| e.1.clone()).collect::<Vec<_>>(),
            vec![ratio(1, 6), ratio(2, 6), ratio(3, 6)]
        );
        let e = nl_expectation(3, 2).unwrap();
        assert_eq!(e.total, ratio(7, 3));
        assert!(e.bound_holds());
        assert!(nl_pmf(3, 1).is_err() && nl_pmf(3, 4).is_err());
    }

    /// Independent oracle: combinations of cycle positions, lengths from
    /// sorted picks.
    fn combos_pmf(n: u64, l: u64) -> ExactPmf {
        let mut counts = vec![0u64; n as usize + 2];
        let mut total = 0;
        for picks in (0..=n).combinations(l as usize) {
            let len = match picks.iter().position(|&p| p == 0) {
                Some(_) => picks[1],
                None => picks[0] + (n + 1 - picks[l as usize - 1]),
            };
            counts[len as usize] += 1;
            total += 1;
        }
        Pmf {
            support: (1..=n).map(|k| (k, ratio(counts[k as usize], total))).collect(),
        }
    }

    #[test]
    fn nl_matches_enumeration() {
        for n in 2..=9u64 {
            let census = nl_census(n).unwrap();
            for l in 2..=n {
                let pmf = nl_pmf(n, l).unwrap();
                assert_eq!(pmf.total(), BigRational::one());
                assert_eq!(pmf, combos_pmf(n, l), "n={n} l={l}");
                assert_eq!(census[l as usize].pmf(), pmf);
                assert_eq!(
                    census[l as usize].pmf_given_picked(),
                    nl_pmf_given_picked(n, l).unwrap()
                );
                assert_eq!(
                    census[l as usize].pmf_given_not_picked(),
                    nl_pmf_given_not_picked(n, l).unwrap()
                );
            }
        }
    }

    #[test]
    fn conditional_expectations() {
        for n in 2..=20u64 {
            for l in 2..=n {
                let e = nl_expectation(n, l).unwrap();
                assert_eq!(e.given_not_picked, ratio(2 * (n + 1), l + 1));
                assert_eq!(e.given_picked, ratio(n + 1, l));
                assert!(e.bound_holds());
            }
        }
    }

    #[test]
    fn nx_values() {
        let half = ratio(1, 2);
        assert_eq!(nx_pmf(&half, 1, NxVariant::Line).unwrap(), ratio(1, 4));
        assert_eq!(nx_pmf(&half, 2, NxVariant::Extended).unwrap(), ratio(9, 64));
        assert!(nx_pmf(&int(0), 1, NxVariant::Line).is_err());
        assert!(nx_pmf(&int(1), 1, NxVariant::Line).is_err());
    }

    /// The extended law straight from its definition: with probability
    /// `1 - x`, sum over gaps `[j, j+k)` containing 0 of the chance that
    /// both ends are hit and the inside is not.
    fn extended_from_definition(x: &BigRational, k: u64) -> BigRational {
        let one = BigRational::one();
        let q = &one - x;
        let hit = |h: i64| {
            if (-1..=2).contains(&h) {
                &one - &q * &q
            } else {
                x.clone()
            }
        };
        let k = k as i64;
        let mut total = BigRational::zero();
        for j in (1 - k)..=0 {
            let mut p = hit(j) * hit(j + k);
            for h in j + 1..j + k {
                p *= &one - hit(h);
            }
            total += p;
        }
        let gap = &q * total;
        if k == 1 {
            gap + x
        } else {
            gap
        }
    }

    #[test]
    fn extended_law_matches_definition() {
        for x in [ratio(1, 2), ratio(1, 3), ratio(7, 10), ratio(1, 17)] {
            for k in 1..=30 {
                assert_eq!(
                    nx_pmf(&x, k, NxVariant::Extended).unwrap(),
                    extended_from_definition(&x, k),
                    "k={k}"
                );
            }
        }
    }

    #[test]
    fn tails_telescope_and_normalise() {
        for x in [ratio(1, 2), ratio(2, 7), ratio(9, 10)] {
            for v in [NxVariant::Line, NxVariant::Extended] {
                let one = BigRational::one();
                assert_eq!(nx_tail(&x, 0, v).unwrap(), one);
                for big_k in 0..40 {
                    let a = nx_tail(&x, big_k, v).unwrap();
                    let b = nx_tail(&x, big_k + 1, v).unwrap();
                    assert_eq!(a - b, nx_pmf(&x, big_k + 1, v).unwrap(), "K={big_k}");
                }
            }
        }
    }

    #[test]
    fn samplers_fit() {
        let s = sample_nl(3, 2, 1, 100_000).unwrap();
        let pmf = nl_pmf(3, 2).unwrap().to_f64();
        assert!(goodness_of_fit(&s, |k| pmf.prob(k), 4.0).pass);
        let s = sample_nx(0.5, NxVariant::Line, 2, 100_000).unwrap();
        assert!(goodness_of_fit(&s, |k| nx_pmf_f64(0.5, k, NxVariant::Line), 4.0).pass);
        let s = sample_nx(0.3, NxVariant::Extended, 3, 100_000).unwrap();
        assert!(goodness_of_fit(&s, |k| nx_pmf_f64(0.3, k, NxVariant::Extended), 4.0).pass);
        assert_eq!(
            sample_nx(0.3, NxVariant::Extended, 3, 1000).unwrap(),
            s[..1000].to_vec()
        );
    }

    #[test]
    fn fit_rejects_wrong_law() {
        let s = sample_nx(0.5, NxVariant::Line, 2, 100_000).unwrap();
        assert!(!goodness_of_fit(&s, |k| nx_pmf_f64(0.4, k, NxVariant::Line), 4.0).pass);
    }

    #[test]
    fn patterns() {
        assert_eq!(DependencyPattern::all_legal().len(), 5);
        assert!(DependencyPattern::new(&[(0, 1)]).is_err());
        assert!(DependencyPattern::new(&[(-1, 1), (-1, 2)]).is_err());
        assert!(DependencyPattern::new(&[(0, 3)]).is_err());
        assert_eq!(DependencyPattern::new(&[(2, 0)]).unwrap().label(), "0<->2");
    }

    #[test]
    fn nx_prime_small() {
        let p = DependencyPattern::new(&[(0, 2)]).unwrap();
        let r = nx_prime_check(0.3, &p, 100_000, 4).unwrap();
        assert!(r.pass, "{r:?}");
        let r = nx_prime_check(0.3, &DependencyPattern::independent(), 100_000, 4).unwrap();
        let se = (r.se_dependent.powi(2) + r.se_independent.powi(2)).sqrt();
        assert!((r.mean_log_dependent - r.mean_log_independent).abs() < 4.0 * se);
    }

    #[test]
    fn jensen_examples() {
        let one = int(1);
        let r = jensen_pair_check(&one, &one, &one, &ratio(1, 2)).unwrap();
        assert!((r.lhs - (0.5 * 2f64.ln() + 0.25 * 3f64.ln())).abs() < 1e-12);
        assert!((r.rhs - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!(r.pass);
        let (a0, a1, a2) = (int(2), int(3), int(5));
        let r = jensen_pair_check(&a0, &a1, &a2, &int(0)).unwrap();
        assert!((r.lhs - 10f64.ln()).abs() < 1e-12 && (r.rhs - 10f64.ln()).abs() < 1e-12);
        let r = jensen_pair_check(&a0, &a1, &a2, &int(1)).unwrap();
        assert!((r.lhs - 2f64.ln()).abs() < 1e-12 && (r.rhs - 2f64.ln()).abs() < 1e-12);
        assert!(jensen_pair_check(&int(0), &a1, &a2, &int(0)).is_err());
    }

    #[test]
    fn dominance_on_small_grids() {
        assert!(dominance_all(&grid_diamond(1).unwrap()).unwrap().is_empty());
        for r in dominance_all(&grid_diamond(3).unwrap()).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        for seed in 0..4 {
            for r in dominance_all(&random_tangled_grid(3, seed).unwrap()).unwrap() {
                assert!(r.pass, "seed {seed}: {r:?}");
            }
        }
    }

    #[test]
    fn chain_model_close_to_limit() {
        let r = chain_model_simulation(100, 30, 50_000, 5, 0.02).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(chain_model_simulation(5, 2, 10, 0, 0.02).is_err());
    }
}
