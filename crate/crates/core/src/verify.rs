//! The acceptance suite: fourteen criteria, each producing one report record.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bounds::{
    bound_report, extended_normalization, finite_n_sweep, high_precision_partial_sum, integral_check, series_constant,
    whitworth, SeriesKind,
};
use crate::counting_lens::{
    bound, downsets_family, example1_family, matchings_family, x_count, BipartiteGraph, BoundMode, BoundVariant,
    PermutationDistribution, TupleFamily, DEFAULT_FAMILY_CAP,
};
use crate::distributions::{
    dominance_all, goodness_of_fit, jensen_pair_check, nl_census, nl_expectation, nl_pmf, nx_pmf_f64, nx_prime_check,
    sample_nl, sample_nx, DependencyPattern, NxVariant,
};
use crate::exact::{binomial, int, parse_rational, pow, ratio, rational_string};
use crate::posets::{
    count_downsets, count_downsets_capped, embed_in_tangled_grid, grid_diamond, random_tangled_grid, MAX_DOWNSET_CAP,
};
use crate::report::{Mode, Record, Report};
use crate::rotations::{build_rotation_poset, check_structure, enumerate_stable_via_rotations};
use crate::{enumerate_stable_bruteforce, instance_i2, random_instance, rng, PreferenceProfile, Result};

pub const CRITERIA: [u8; 14] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14];

pub const DEFAULT_MAX_N: usize = 7;
pub const DEFAULT_TRUNCATION: u64 = 10_000_000;
pub const DEFAULT_FINITE_N: u64 = 1_000_000;
pub const DEFAULT_NX_PRIME_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SAMPLER_SAMPLES: usize = 100_000;
const RANDOM_INSTANCES: u64 = 200;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Largest instance size; grid sizes are capped by it too.
    pub max_n: usize,
    /// Overrides the Monte Carlo sample counts.
    pub samples: Option<usize>,
    /// Overrides the series truncation.
    pub truncate: Option<u64>,
    /// Drops one matching from the rotation-based enumeration, so the
    /// bijection criterion must fail.
    pub inject_fault: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            max_n: DEFAULT_MAX_N,
            samples: None,
            truncate: None,
            inject_fault: false,
        }
    }
}

/// Runs every criterion, in parallel; the report order is canonical.
pub fn run_verify_suite(config: &SuiteConfig) -> Report {
    let records: Vec<Record> = CRITERIA.par_iter().map(|&c| run_criterion(c, config)).collect();
    let mut report = Report::new();
    report.extend(records);
    report
}

/// Runs one criterion. Errors become failing records.
pub fn run_criterion(criterion: u8, config: &SuiteConfig) -> Record {
    let id = format!("c{criterion:02}");
    let outcome = match criterion {
        1 => bijection(config),
        2 => structure(config),
        3 => embedding(config),
        4 => diamond(),
        5 => option_table(),
        6 => lens_inequality(config),
        7 => bregman(config),
        8 => distribution_exactness(),
        9 => dominance(config),
        10 => identities(),
        11 => constants(config),
        12 => jensen_and_dependence(config),
        13 => samplers(config),
        14 => global_sanity(config),
        _ => {
            return Record::new(id, "unknown criterion", Mode::Exact).pass(false);
        }
    };
    match outcome {
        Ok(mut r) => {
            r.id = id;
            r
        }
        Err(e) => Record::new(id, "criterion raised an error", Mode::Exact)
            .values(json!({ "error": e.to_string() }))
            .pass(false),
    }
}

/// The instance corpus: `I2`, one `n = 1` instance and 200 random ones with
/// `n` cycling through `2..=7`, all restricted to `n ≤ max_n`.
pub fn instance_corpus(config: &SuiteConfig) -> Result<Vec<(String, PreferenceProfile)>> {
    let mut out = Vec::new();
    if config.max_n >= 2 {
        out.push(("i2".to_string(), instance_i2()));
    }
    if config.max_n >= 1 {
        out.push(("n1".to_string(), random_instance(1, config.seed)?));
    }
    for i in 0..RANDOM_INSTANCES {
        let n = 2 + (i % 6) as usize;
        if n > config.max_n {
            continue;
        }
        let seed = rng::splitmix64(config.seed.wrapping_add(i));
        out.push((format!("random:{i}:n{n}:seed{seed}"), random_instance(n, seed)?));
    }
    Ok(out)
}

fn first_failures(labels: impl IntoIterator<Item = String>) -> Vec<String> {
    labels.into_iter().take(5).collect()
}

fn bijection(config: &SuiteConfig) -> Result<Record> {
    let corpus = instance_corpus(config)?;
    let rows: Vec<(String, usize, u128, usize, bool)> = corpus
        .par_iter()
        .map(|(label, p)| -> Result<_> {
            let mut brute: Vec<Vec<usize>> = enumerate_stable_bruteforce(p)?
                .iter()
                .map(|m| m.assignment().to_vec())
                .collect();
            let poset = build_rotation_poset(p)?;
            let downsets = count_downsets(&poset.to_finite_poset()?)?;
            let mut via: Vec<Vec<usize>> = enumerate_stable_via_rotations(p)?
                .iter()
                .map(|m| m.assignment().to_vec())
                .collect();
            if config.inject_fault {
                via.pop();
            }
            brute.sort();
            via.sort();
            let ok = brute.len() as u128 == downsets && brute == via;
            Ok((label.clone(), brute.len(), downsets, via.len(), ok))
        })
        .collect::<Result<_>>()?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.4)
        .map(|r| format!("{}: brute {} downsets {} rotations {}", r.0, r.1, r.2, r.3))
        .collect();
    let i2 = rows.iter().find(|r| r.0 == "i2").map(|r| r.1);
    Ok(Record::new(
        "",
        "stable matchings biject with downsets of the rotation poset",
        Mode::Exact,
    )
    .parameters(json!({ "seed": config.seed, "max_n": config.max_n, "inject_fault": config.inject_fault }))
    .values(json!({
        "instances": rows.len(),
        "total_matchings": rows.iter().map(|r| r.1).sum::<usize>(),
        "i2_count": i2,
        "failures": first_failures(bad.clone()),
    }))
    .pass(bad.is_empty() && !rows.is_empty()))
}

fn structure(config: &SuiteConfig) -> Result<Record> {
    let corpus = instance_corpus(config)?;
    let rows: Vec<(String, Vec<String>)> = corpus
        .par_iter()
        .map(|(label, p)| -> Result<_> {
            let report = check_structure(&build_rotation_poset(p)?);
            let failed = report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.id.to_string())
                .collect();
            Ok((label.clone(), failed))
        })
        .collect::<Result<_>>()?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.1.is_empty())
        .map(|r| format!("{}: {}", r.0, r.1.join(",")))
        .collect();
    Ok(Record::new(
        "",
        "rotation poset structure: chains, edge uniqueness, pairings, chain lengths",
        Mode::Exact,
    )
    .parameters(json!({ "seed": config.seed, "max_n": config.max_n }))
    .values(json!({ "instances": rows.len(), "failures": first_failures(bad.clone()) }))
    .pass(bad.is_empty()))
}

fn embedding(config: &SuiteConfig) -> Result<Record> {
    let corpus = instance_corpus(config)?;
    let rows: Vec<(String, bool, u128, u128)> = corpus
        .par_iter()
        .map(|(label, p)| -> Result<_> {
            let poset = build_rotation_poset(p)?;
            let grid = embed_in_tangled_grid(&poset)?;
            let valid = grid.violations().is_empty() && grid.poset().size() == p.n() * p.n();
            let inner = count_downsets(&poset.to_finite_poset()?)?;
            let outer = count_downsets_capped(grid.poset(), MAX_DOWNSET_CAP)?;
            Ok((label.clone(), valid, inner, outer))
        })
        .collect::<Result<_>>()?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.1 || r.3 < r.2)
        .map(|r| format!("{}: valid {} poset {} grid {}", r.0, r.1, r.2, r.3))
        .collect();
    Ok(Record::new(
        "",
        "rotation posets embed in tangled grids with at least as many downsets",
        Mode::Exact,
    )
    .parameters(json!({ "seed": config.seed, "max_n": config.max_n }))
    .values(json!({ "instances": rows.len(), "failures": first_failures(bad.clone()) }))
    .pass(bad.is_empty()))
}

/// Diamonds are cheap, so this criterion ignores `max_n`.
fn diamond() -> Result<Record> {
    let top = 8;
    let mut counts = Vec::new();
    let mut pass = true;
    for n in 1..=top {
        let c = count_downsets_capped(grid_diamond(n)?.poset(), MAX_DOWNSET_CAP)?;
        let expected = binomial(2 * n as u64, n as u64).to_u128().unwrap_or(0);
        pass &= c == expected;
        counts.push(json!({ "n": n, "downsets": c.to_string(), "binomial": expected.to_string() }));
    }
    Ok(Record::new("", "diamond grid downsets equal C(2n, n)", Mode::Exact)
        .parameters(json!({ "n_max": top }))
        .values(json!({ "counts": counts }))
        .pass(pass))
}

/// Expected `X_0` for each member shape of the three-shape family, over reveal orders
/// 123 132 213 231 312 321.
fn option_table_row(shape: [u32; 3], big_n: usize) -> [usize; 6] {
    let n1 = big_n + 1;
    match shape {
        [1, 1, 0] => [n1, n1, 2, 1, big_n, 1],
        [1, 0, 1] => [n1, n1, big_n, 1, 2, 1],
        _ => [n1, n1, 2, 1, 2, 1],
    }
}

const REVEAL_ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn option_table() -> Result<Record> {
    let mut cells = 0usize;
    let mut bad = Vec::new();
    let mut bounds = Vec::new();
    for big_n in [2u32, 5, 10] {
        let f = example1_family(big_n)?;
        for shape in [[1, 1, 0], [1, 0, 1], [0, 1, 1]] {
            for i in 1..=big_n {
                let s: Vec<u32> = shape.iter().map(|&b| b * i).collect();
                let expected = option_table_row(shape, big_n as usize);
                for (order, want) in REVEAL_ORDERS.iter().zip(expected) {
                    cells += 1;
                    let got = x_count(&f, &s, order, 0)?;
                    if got != want {
                        bad.push(format!("N={big_n} s={s:?} order={order:?}: {got} vs {want}"));
                    }
                }
            }
        }
        let nf = big_n as f64;
        let log_size = (3.0 * nf).ln();
        let fixed = bound(
            &f,
            &BoundMode::new(
                BoundVariant::FixedPermExpectS,
                PermutationDistribution::Single(vec![0, 1, 2]),
            ),
            0,
        )?;
        let closed = (2f64.powf(2.0 / 3.0) * (nf + 1.0) * nf.powf(1.0 / 3.0)).ln();
        let corollary = bound(
            &f,
            &BoundMode::new(BoundVariant::CorollaryProduct, PermutationDistribution::Uniform),
            0,
        )?;
        let expected_product = pow(&ratio(3 * big_n + 6, 6), 3);
        let product_ok = corollary.exact_product_value.as_ref() == Some(&expected_product);
        let ok =
            fixed.value <= closed + 1e-9 && fixed.value >= log_size && product_ok && expected_product >= int(3 * big_n);
        if !ok {
            bad.push(format!("N={big_n}: bounds"));
        }
        bounds.push(json!({
            "N": big_n,
            "fixed_order_bound": fixed.value,
            "closed_form": closed,
            "corollary_product": corollary.exact_product,
            "expected_product": rational_string(&expected_product),
            "log_size": log_size,
        }));
    }
    Ok(Record::new(
        "",
        "option-count table and bounds for the three-shape family",
        Mode::Exact,
    )
    .parameters(json!({ "N": [2, 5, 10] }))
    .values(json!({ "cells": cells, "bounds": bounds, "failures": first_failures(bad.clone()) }))
    .pass(bad.is_empty()))
}

/// Every bound variant on `family`; returns failing descriptions.
fn all_variants(label: &str, family: &TupleFamily, seed: u64) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let identity: Vec<usize> = (0..family.n()).collect();
    for variant in BoundVariant::ALL {
        let perms = match variant {
            BoundVariant::FixedPermExpectS => PermutationDistribution::Single(identity.clone()),
            _ => PermutationDistribution::Uniform,
        };
        let r = bound(family, &BoundMode::new(variant, perms), seed)?;
        if !r.holds() {
            bad.push(format!("{label}: {variant:?} {} < {}", r.value, r.log_size));
        }
    }
    Ok(bad)
}

fn lens_inequality(config: &SuiteConfig) -> Result<Record> {
    let mut jobs: Vec<(String, TupleFamily)> = Vec::new();
    for big_n in [2u32, 5, 10] {
        jobs.push((format!("example1:N{big_n}"), example1_family(big_n)?));
    }
    let mut graphs = 0u64;
    let mut attempt = 0u64;
    while graphs < 50 {
        let n = 2 + (attempt % 5) as usize;
        let seed = rng::splitmix64(config.seed ^ 0x6772_6170_6800_0000 ^ attempt);
        attempt += 1;
        let g = BipartiteGraph::random(n, n, 0.6, seed)?;
        if g.permanent()? == 0 {
            continue;
        }
        graphs += 1;
        jobs.push((format!("matchings:n{n}:seed{seed}"), matchings_family(&g)?));
    }
    let grid_top = config.max_n.clamp(1, 4);
    for n in 1..=grid_top {
        for s in 0..20u64 {
            let seed = config.seed.wrapping_add(s);
            let grid = random_tangled_grid(n, seed)?;
            jobs.push((
                format!("downsets:n{n}:seed{seed}"),
                downsets_family(&grid, DEFAULT_FAMILY_CAP)?,
            ));
        }
    }
    let bad: Vec<String> = jobs
        .par_iter()
        .map(|(label, f)| all_variants(label, f, config.seed))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    // One sampled run, checked within four standard errors.
    let f = example1_family(5)?;
    let mc = bound(
        &f,
        &BoundMode::new(
            BoundVariant::MaxSExpectPiLog,
            PermutationDistribution::Sampled { samples: 4000 },
        ),
        config.seed,
    )?;
    Ok(Record::new("", "entropy lens bounds dominate log |S|", Mode::Exact)
        .parameters(json!({ "seed": config.seed, "graphs": 50, "grid_n_max": grid_top }))
        .values(json!({
            "families": jobs.len(),
            "sampled": { "value": mc.value, "stderr": mc.stderr, "log_size": mc.log_size },
            "failures": first_failures(bad.clone()),
        }))
        .pass(bad.is_empty() && mc.holds()))
}

fn bregman(config: &SuiteConfig) -> Result<Record> {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let n = 1 + (i % 7) as usize;
        let seed = rng::splitmix64(config.seed ^ 0x6272_6567 ^ i);
        let g = BipartiteGraph::random(n, n, 0.55, seed)?;
        let perm = g.permanent()?;
        match g.bregman_log_bound() {
            Some(log_bound) => {
                let b = log_bound.exp();
                worst = worst.max(perm as f64 / b);
                if perm as f64 > b * (1.0 + 1e-9) {
                    bad.push(format!("n={n} seed={seed}: {perm} > {b}"));
                }
            }
            None if perm != 0 => bad.push(format!("n={n} seed={seed}: isolated vertex but permanent {perm}")),
            None => {}
        }
    }
    let mut complete = Vec::new();
    for n in 1..=4 {
        let g = BipartiteGraph::complete(n)?;
        let perm = g.permanent()? as f64;
        let b = g.bregman_log_bound().map(f64::exp).unwrap_or(0.0);
        if (perm - b).abs() > 1e-9 * b {
            bad.push(format!("K_{n},{n}: {perm} vs {b}"));
        }
        complete.push(json!({ "n": n, "permanent": perm, "bound": b }));
    }
    Ok(Record::new(
        "",
        "permanent at most the Bregman product, equality on complete graphs",
        Mode::Exact,
    )
    .parameters(json!({ "seed": config.seed, "graphs": 200, "tolerance": 1e-9 }))
    .values(json!({ "max_ratio": worst, "complete": complete, "failures": first_failures(bad.clone()) }))
    .pass(bad.is_empty()))
}

fn distribution_exactness() -> Result<Record> {
    let mut bad = Vec::new();
    let mut checked = 0;
    for n in 2..=12u64 {
        let census = nl_census(n)?;
        for l in 2..=n {
            let pmf = nl_pmf(n, l)?;
            checked += 1;
            if pmf != census[l as usize].pmf() || !pmf.total().is_one() {
                bad.push(format!("pmf n={n} l={l}"));
            }
        }
    }
    for n in 2..=20u64 {
        for l in 2..=n {
            let e = nl_expectation(n, l)?;
            if !e.bound_holds() || e.given_not_picked != ratio(2 * (n + 1), l + 1) || e.given_picked != ratio(n + 1, l)
            {
                bad.push(format!("expectations n={n} l={l}"));
            }
        }
    }
    Ok(Record::new(
        "",
        "cyclic gap law matches enumeration; expectations exact",
        Mode::Exact,
    )
    .parameters(json!({ "pmf_n_max": 12, "expectation_n_max": 20 }))
    .values(json!({ "pmfs_checked": checked, "failures": first_failures(bad.clone()) }))
    .pass(bad.is_empty()))
}

fn dominance(config: &SuiteConfig) -> Result<Record> {
    let top = config.max_n.clamp(1, 4);
    let grids: Vec<(usize, u64)> = (1..=top).flat_map(|n| (0..20u64).map(move |s| (n, s))).collect();
    let rows: Vec<(String, usize, Vec<String>)> = grids
        .par_iter()
        .map(|&(n, s)| -> Result<_> {
            let seed = config.seed.wrapping_add(s);
            let reports = dominance_all(&random_tangled_grid(n, seed)?)?;
            let failed = reports
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("chain {} l {} gap {}", r.chain, r.l, r.min_gap))
                .collect();
            Ok((format!("n{n}:seed{seed}"), reports.len(), failed))
        })
        .collect::<Result<_>>()?;
    let bad: Vec<String> = rows
        .iter()
        .flat_map(|(label, _, f)| f.iter().map(move |m| format!("{label}: {m}")))
        .collect();
    Ok(
        Record::new("", "option counts are stochastically at most N_l", Mode::Exact)
            .parameters(json!({ "seed": config.seed, "grid_n_max": top, "seeds": 20 }))
            .values(json!({
                "grids": rows.len(),
                "checks": rows.iter().map(|r| r.1).sum::<usize>(),
                "failures": first_failures(bad.clone()),
            }))
            .pass(bad.is_empty()),
    )
}

fn identities() -> Result<Record> {
    let triples: Vec<(u64, u64, u64)> = (0..=40u64)
        .flat_map(|n| (0..=n).flat_map(move |m| (0..=n - m).map(move |a| (m, a, n))))
        .collect();
    let whitworth_bad: Vec<String> = triples
        .par_iter()
        .map(|&(m, a, n)| whitworth(m, a, n).map(|w| (!w.equal).then(|| format!("whitworth {m} {a} {n}"))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut jobs: Vec<(u64, NxVariant)> = (1..=200).map(|k| (k, NxVariant::Line)).collect();
    jobs.extend((2..=200).map(|k| (k, NxVariant::Extended)));
    let integral_bad: Vec<String> = jobs
        .par_iter()
        .map(|&(k, v)| integral_check(k, v).map(|c| (!c.equal).then(|| format!("integral {v:?} k={k}"))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut norm_bad = Vec::new();
    for j in 1..=20u64 {
        let x = ratio(j, 21);
        if !extended_normalization(&x, 40)?.pass {
            norm_bad.push(format!("normalization x={j}/21"));
        }
    }
    let bad: Vec<String> = whitworth_bad.into_iter().chain(integral_bad).chain(norm_bad).collect();
    Ok(Record::new(
        "",
        "Whitworth identity, coefficient integrals, extended law normalization",
        Mode::Exact,
    )
    .parameters(json!({ "whitworth_n_max": 40, "integral_k_max": 200, "normalization_x": "j/21, j=1..20" }))
    .values(
        json!({ "whitworth_triples": triples.len(), "integrals": jobs.len(), "failures": first_failures(bad.clone()) }),
    )
    .pass(bad.is_empty()))
}

fn constants(config: &SuiteConfig) -> Result<Record> {
    let k = config.truncate.unwrap_or(DEFAULT_TRUNCATION);
    let sweep = finite_n_sweep(DEFAULT_FINITE_N)?;
    let tg = series_constant(SeriesKind::Tg, k)?;
    let sm = series_constant(SeriesKind::Sm, k)?;
    let cross_k = k.min(10_000);
    let mut cross = Vec::new();
    let mut cross_ok = true;
    for series in [SeriesKind::Tg, SeriesKind::Sm] {
        let (digits, hp) = high_precision_partial_sum(series, cross_k)?;
        let f = series_constant(series, cross_k)?;
        cross_ok &= (f.partial_sum - hp).abs() <= f.rounding_budget;
        cross.push(json!({ "series": series, "truncation": cross_k, "partial_sum": digits }));
    }
    let exps = bound_report(1)?;
    let (tg_lo, tg_hi) = crate::bounds::exp_bounds_f64("2.4076").unwrap_or((f64::NAN, f64::NAN));
    let (sm_lo, sm_hi) = crate::bounds::exp_bounds_f64("1.2663").unwrap_or((f64::NAN, f64::NAN));
    let pass = sweep.pass && tg.pass && sm.pass && cross_ok && exps.tg_base_ok && exps.sm_base_rounded_ok;
    Ok(Record::new(
        "",
        "numerical constants 1.2038 and 0.6331 and the exponential bases",
        Mode::Exact,
    )
    .parameters(json!({ "truncation": k, "finite_n_max": DEFAULT_FINITE_N }))
    .values(json!({
        "finite_n": sweep,
        "tg_series": tg,
        "sm_series": sm,
        "high_precision": cross,
        "exp_2_4076": [tg_lo, tg_hi],
        "exp_1_2663": [sm_lo, sm_hi],
        "exp_1_2662_le_3_55": exps.sm_base_ok,
    }))
    .pass(pass))
}

fn jensen_and_dependence(config: &SuiteConfig) -> Result<Record> {
    let samples = config.samples.unwrap_or(DEFAULT_NX_PRIME_SAMPLES);
    let mut jensen_bad = Vec::new();
    let mut jensen_count = 0;
    for i0 in 1..=10u64 {
        for i1 in 1..=10u64 {
            for i2 in 1..=10u64 {
                for j in 0..=10u64 {
                    jensen_count += 1;
                    let (a0, a1, a2) = (ratio(i0, 2), ratio(i1, 2), ratio(i2, 2));
                    let c = jensen_pair_check(&a0, &a1, &a2, &ratio(j, 10))?;
                    if !c.pass {
                        jensen_bad.push(format!("jensen a=({i0},{i1},{i2})/2 x={j}/10"));
                    }
                }
            }
        }
    }
    let jobs: Vec<(f64, DependencyPattern)> = [0.1, 0.3, 0.5, 0.7, 0.9]
        .into_iter()
        .flat_map(|x| DependencyPattern::all_legal().into_iter().map(move |p| (x, p)))
        .collect();
    let checks = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (x, p))| nx_prime_check(*x, p, samples, rng::splitmix64(config.seed ^ i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let bad: Vec<String> = jensen_bad
        .into_iter()
        .chain(
            checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("nx' x={} pattern {}", c.x, c.pattern)),
        )
        .collect();
    let worst = checks
        .iter()
        .map(|c| (c.mean_log_dependent - c.mean_log_independent) / (c.se_dependent.hypot(c.se_independent)))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Record::new(
        "",
        "Jensen pair inequality and dependent extra sets do not raise E[log N]",
        Mode::Mc,
    )
    .parameters(json!({ "seed": config.seed, "samples": samples }))
    .values(json!({
        "jensen_points": jensen_count,
        "dependence_checks": checks.len(),
        "max_z": worst,
        "failures": first_failures(bad.clone()),
    }))
    .pass(bad.is_empty()))
}

fn samplers(config: &SuiteConfig) -> Result<Record> {
    let samples = config.samples.unwrap_or(DEFAULT_SAMPLER_SAMPLES);
    let mut fits = Vec::new();
    let mut bad = Vec::new();
    for (i, (n, l)) in [(5u64, 2u64), (10, 3), (20, 5), (50, 10)].into_iter().enumerate() {
        let seed = rng::splitmix64(config.seed ^ (0x6e6c << 8) ^ i as u64);
        let pmf = nl_pmf(n, l)?.to_f64();
        let draws = sample_nl(n, l, seed, samples)?;
        let fit = goodness_of_fit(&draws, |k| pmf.prob(k), 4.0);
        let repeat = sample_nl(n, l, seed, samples.min(1000))? == draws[..samples.min(1000)];
        if !fit.pass || !repeat {
            bad.push(format!("N_l n={n} l={l}"));
        }
        fits.push(json!({ "law": "N_l", "n": n, "l": l, "max_abs_z": fit.max_abs_z, "bins": fit.bins }));
    }
    for (i, (x, v)) in [0.2, 0.5, 0.8]
        .into_iter()
        .flat_map(|x| [NxVariant::Line, NxVariant::Extended].map(|v| (x, v)))
        .enumerate()
    {
        let seed = rng::splitmix64(config.seed ^ (0x6e78 << 8) ^ i as u64);
        let draws = sample_nx(x, v, seed, samples)?;
        let fit = goodness_of_fit(&draws, |k| nx_pmf_f64(x, k, v), 4.0);
        let repeat = sample_nx(x, v, seed, samples.min(1000))? == draws[..samples.min(1000)];
        if !fit.pass || !repeat {
            bad.push(format!("N_x x={x} {v:?}"));
        }
        fits.push(json!({ "law": "N_x", "x": x, "variant": v, "max_abs_z": fit.max_abs_z, "bins": fit.bins }));
    }
    Ok(
        Record::new("", "samplers match closed forms and are reproducible", Mode::Mc)
            .parameters(json!({ "seed": config.seed, "samples": samples, "sigmas": 4.0 }))
            .values(json!({ "fits": fits, "failures": first_failures(bad.clone()) }))
            .pass(bad.is_empty()),
    )
}

fn global_sanity(config: &SuiteConfig) -> Result<Record> {
    let base_sm = parse_rational("3.55").unwrap_or_else(BigRational::one);
    let base_tg = parse_rational("11.11").unwrap_or_else(BigRational::one);
    let corpus = instance_corpus(config)?;
    let counts: Vec<(String, usize, usize)> = corpus
        .par_iter()
        .map(|(label, p)| Ok((label.clone(), p.n(), enumerate_stable_via_rotations(p)?.len())))
        .collect::<Result<_>>()?;
    let mut bad: Vec<String> = counts
        .iter()
        .filter(|(_, n, c)| int(*c as u64) > pow(&base_sm, *n as u32))
        .map(|(l, n, c)| format!("{l}: {c} > 3.55^{n}"))
        .collect();
    let top = config.max_n.clamp(1, 6);
    let mut grids = 0;
    for n in 1..=top {
        let mut posets = vec![grid_diamond(n)?];
        for s in 0..20u64 {
            posets.push(random_tangled_grid(n, config.seed.wrapping_add(s))?);
        }
        for g in posets {
            grids += 1;
            let c = count_downsets_capped(g.poset(), MAX_DOWNSET_CAP)?;
            if int(c.to_u64().unwrap_or(u64::MAX)) > pow(&base_tg, n as u32) {
                bad.push(format!("grid n={n}: {c} > 11.11^{n}"));
            }
        }
    }
    Ok(Record::new(
        "",
        "stable matchings at most 3.55^n and grid downsets at most 11.11^n",
        Mode::Exact,
    )
    .parameters(json!({ "seed": config.seed, "max_n": config.max_n, "grid_n_max": top }))
    .values(json!({
        "instances": counts.len(),
        "max_matchings": counts.iter().map(|c| c.2).max(),
        "grids": grids,
        "failures": first_failures(bad.clone()),
    }))
    .pass(bad.is_empty()))
}

/// Compact summary line for one record.
pub fn summary_line(record: &Record) -> String {
    format!(
        "{} {} {}",
        record.id,
        if record.pass { "PASS" } else { "FAIL" },
        record.claim
    )
}

/// Parameters of a suite run, for the report header.
pub fn config_json(config: &SuiteConfig) -> Value {
    json!({
        "seed": config.seed,
        "max_n": config.max_n,
        "samples": config.samples,
        "truncate": config.truncate,
        "inject_fault": config.inject_fault,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            max_n: 4,
            samples: Some(20_000),
            truncate: Some(100_000),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn corpus_respects_max_n() {
        let c = instance_corpus(&SuiteConfig {
            max_n: 3,
            ..SuiteConfig::default()
        })
        .unwrap();
        assert!(c.iter().all(|(_, p)| p.n() <= 3));
        assert_eq!(c.len(), 2 + 2 * 34);
        let one = instance_corpus(&SuiteConfig {
            max_n: 1,
            ..SuiteConfig::default()
        })
        .unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn fault_breaks_bijection() {
        let cfg = small();
        assert!(run_criterion(1, &cfg).pass);
        let faulty = SuiteConfig {
            inject_fault: true,
            ..cfg
        };
        let r = run_criterion(1, &faulty);
        assert!(!r.pass);
        assert_eq!(r.id, "c01");
    }

    #[test]
    fn cheap_criteria_pass_small() {
        let cfg = small();
        for c in [2, 3, 4, 5, 8, 14] {
            let r = run_criterion(c, &cfg);
            assert!(r.pass, "{}", serde_json::to_string(&r).unwrap());
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(99, &SuiteConfig::default()).pass);
    }
}
