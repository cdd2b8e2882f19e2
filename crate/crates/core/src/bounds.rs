//! Exact identities and rigorous enclosures of the numerical constants.
//!
//! Series are summed in `f64` with Neumaier compensation. Every term is
//! within a few ulps of its true value (one `ln` plus a handful of correctly
//! rounded operations), so `16 ε Σ|t|` bounds the accumulated error; the
//! enclosure adds that budget on both sides and a tail majorant on top.
//! [`high_precision_partial_sum`] recomputes partial sums in 256-bit fixed
//! point to confirm the budget.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{nx_pmf, nx_tail, NxVariant};
use crate::exact::{binomial, decimal_sig, int, parse_rational, pow, ratio, rational_string};
use crate::{Error, Result};

/// Threshold for the per-chain constant of the tangled grid bound.
pub const TG_THRESHOLD: f64 = 1.2038;
/// Threshold for the per-chain constant of the rotation poset bound.
pub const SM_THRESHOLD: f64 = 0.6331;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhitworthCheck {
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
}

/// `Σ_{j=0}^m C(m,j)/C(n,j+a)` against `(n+1)/((a+1) C(n-m+1, a+1))`.
pub fn whitworth(m: u64, a: u64, n: u64) -> Result<WhitworthCheck> {
    if n < m + a {
        return Err(Error::arg(format!("need n ≥ m + a, got m={m} a={a} n={n}")));
    }
    let lhs: BigRational = (0..=m)
        .map(|j| BigRational::new(binomial(m, j), binomial(n, j + a)))
        .sum();
    let rhs = BigRational::new(BigInt::from(n + 1), BigInt::from(a + 1) * binomial(n - m + 1, a + 1));
    Ok(WhitworthCheck {
        equal: lhs == rhs,
        lhs: rational_string(&lhs),
        rhs: rational_string(&rhs),
    })
}

/// Compensated sum that also tracks `Σ|t|` for the error budget.
#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl Neumaier {
    fn add(&mut self, t: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
        self.abs += t.abs();
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn budget(&self) -> f64 {
        16.0 * f64::EPSILON * self.abs
    }

    fn merge(mut self, other: Neumaier) -> Neumaier {
        self.add(other.sum);
        self.add(other.comp);
        self.abs += other.abs - other.sum.abs() - other.comp.abs();
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteNSweep {
    pub max_n: u64,
    pub argmax: u64,
    pub max_value: f64,
    /// Upper end of the enclosure of the maximum.
    pub max_hi: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `(2/(n+1)) log(n+1) + 2 (n+2)/(n+1) Σ_{k=2}^n log k / ((k+1)(k+2))`.
pub fn finite_n_tg_term(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::arg("n must be positive"));
    }
    let mut acc = Neumaier::default();
    for k in 2..=n {
        acc.add(inner_term(k));
    }
    Ok(finite_n_value(n, acc.value()))
}

fn inner_term(k: u64) -> f64 {
    let kf = k as f64;
    kf.ln() / ((kf + 1.0) * (kf + 2.0))
}

fn finite_n_value(n: u64, inner: f64) -> f64 {
    let nf = n as f64;
    2.0 / (nf + 1.0) * (nf + 1.0).ln() + 2.0 * (nf + 2.0) / (nf + 1.0) * inner
}

/// [`finite_n_tg_term`] for every `n ≤ max_n`, sharing the running sum.
pub fn finite_n_sweep(max_n: u64) -> Result<FiniteNSweep> {
    if max_n == 0 {
        return Err(Error::arg("max_n must be positive"));
    }
    let mut acc = Neumaier::default();
    let (mut best, mut argmax, mut best_hi) = (f64::NEG_INFINITY, 0, f64::NEG_INFINITY);
    for n in 1..=max_n {
        if n >= 2 {
            acc.add(inner_term(n));
        }
        let v = finite_n_value(n, acc.value());
        let nf = n as f64;
        // Budget: the inner sum's, scaled by its factor, plus a few ulps on
        // each of the two products.
        let hi = v + 2.0 * (nf + 2.0) / (nf + 1.0) * acc.budget() + 8.0 * f64::EPSILON * v.abs();
        if v > best {
            best = v;
            argmax = n;
        }
        best_hi = best_hi.max(hi);
    }
    Ok(FiniteNSweep {
        max_n,
        argmax,
        max_value: best,
        max_hi: best_hi,
        threshold: TG_THRESHOLD,
        pass: best_hi <= TG_THRESHOLD,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// `Σ_{k≥2} 2 log k / ((k+1)(k+2))`.
    Tg,
    /// `Σ_{k≥2} c_k log k` with `c_2 = 1/12`, `c_3 = 23/630` and
    /// `c_k = (2k(k+7)+72)/((k+3)(k+5)(k+6)(k+7))` for `k ≥ 4`.
    Sm,
}

impl SeriesKind {
    pub fn threshold(self) -> f64 {
        match self {
            SeriesKind::Tg => TG_THRESHOLD,
            SeriesKind::Sm => SM_THRESHOLD,
        }
    }

    /// Exact coefficient of `log k`.
    pub fn coefficient(self, k: u64) -> BigRational {
        match (self, k) {
            (_, 0 | 1) => BigRational::zero(),
            (SeriesKind::Tg, _) => ratio(2, (k + 1) * (k + 2)),
            (SeriesKind::Sm, 2) => ratio(1, 12),
            (SeriesKind::Sm, 3) => ratio(23, 630),
            (SeriesKind::Sm, _) => {
                let k = BigInt::from(k);
                let num = BigInt::from(2) * &k * (&k + 7) + 72;
                let den = (&k + 3) * (&k + 5) * (&k + 6) * (&k + 7);
                BigRational::new(num, den)
            }
        }
    }

    fn term(self, k: u64) -> f64 {
        let kf = k as f64;
        let c = match (self, k) {
            (SeriesKind::Tg, _) => 2.0 / ((kf + 1.0) * (kf + 2.0)),
            (SeriesKind::Sm, 2) => 1.0 / 12.0,
            (SeriesKind::Sm, 3) => 23.0 / 630.0,
            (SeriesKind::Sm, _) => {
                (2.0 * kf * (kf + 7.0) + 72.0) / ((kf + 3.0) * (kf + 5.0)) / ((kf + 6.0) * (kf + 7.0))
            }
        };
        c * kf.ln()
    }

    /// `M` with `c_k ≤ M / k²` for every `k > K ≥ 4`, making
    /// `M (log K + 1) / K` (the integral of `M log t / t²` from `K`) a tail
    /// bound, since `log t / t²` decreases for `t ≥ 2`.
    ///
    /// Tg: `2 k² ≤ 2 (k+1)(k+2)`. Sm: `4 (k+3)(k+5)(k+6)(k+7) - (2k(k+7)+72) k²`
    /// is `2k⁴ + 70k³ + 572k² + 2124k + 2520` (every coefficient positive),
    /// so `c_k ≤ 4/k²` for all `k ≥ 1`.
    pub fn majorant(self) -> u64 {
        match self {
            SeriesKind::Tg => 2,
            SeriesKind::Sm => 4,
        }
    }

    /// Checks `c_k k² ≤ M` exactly for one `k`.
    fn majorant_holds(self, k: u64) -> bool {
        let k = k as u128;
        let m = self.majorant() as u128;
        match self {
            SeriesKind::Tg => 2 * k * k <= m * (k + 1) * (k + 2),
            SeriesKind::Sm if k < 4 => true,
            SeriesKind::Sm => (2 * k * (k + 7) + 72) * k * k <= m * (k + 3) * (k + 5) * (k + 6) * (k + 7),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesEnclosure {
    pub series: SeriesKind,
    pub truncation: u64,
    pub partial_sum: f64,
    pub rounding_budget: f64,
    pub tail_bound: f64,
    pub enclosure: Interval,
    /// Terms whose majorant inequality was checked exactly.
    pub majorant_checked: u64,
    pub threshold: f64,
    pub pass: bool,
}

const BLOCK: u64 = 1 << 16;

/// Encloses the full series: partial sum to `K` plus `[0, M (log K + 1)/K]`.
pub fn series_constant(series: SeriesKind, truncation: u64) -> Result<SeriesEnclosure> {
    let min_k = match series {
        SeriesKind::Tg => 10,
        SeriesKind::Sm => 8,
    };
    if truncation < min_k {
        return Err(Error::arg(format!("truncation must be at least {min_k}")));
    }
    // Fixed blocks reduced in order, so the result does not depend on the
    // thread count.
    let blocks: Vec<(Neumaier, bool)> = (0..truncation.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = Neumaier::default();
            let mut ok = true;
            for k in (b * BLOCK).max(2)..=((b + 1) * BLOCK - 1).min(truncation) {
                acc.add(series.term(k));
                ok &= series.majorant_holds(k);
            }
            (acc, ok)
        })
        .collect();
    let majorant_ok = blocks.iter().all(|b| b.1);
    if !majorant_ok {
        return Err(Error::Inconsistent(format!("{series:?} majorant fails below K")));
    }
    let acc = blocks
        .into_iter()
        .map(|b| b.0)
        .fold(Neumaier::default(), Neumaier::merge);
    let kf = truncation as f64;
    let tail = series.majorant() as f64 * (kf.ln() + 1.0) / kf * (1.0 + 8.0 * f64::EPSILON);
    let partial = acc.value();
    let budget = acc.budget();
    let hi = partial + budget + tail;
    Ok(SeriesEnclosure {
        series,
        truncation,
        partial_sum: partial,
        rounding_budget: budget,
        tail_bound: tail,
        enclosure: Interval {
            lo: partial - budget,
            hi,
        },
        majorant_checked: truncation - 1,
        threshold: series.threshold(),
        pass: hi <= series.threshold(),
    })
}

pub fn series_tg_constant(truncation: u64) -> Result<SeriesEnclosure> {
    series_constant(SeriesKind::Tg, truncation)
}

pub fn series_sm_constant(truncation: u64) -> Result<SeriesEnclosure> {
    series_constant(SeriesKind::Sm, truncation)
}

/// Fixed-point numbers with `FRAC_BITS` fractional bits.
const FRAC_BITS: usize = 256;

/// `atanh(p/q)` scaled by `2^FRAC_BITS`, for `0 ≤ p/q ≤ 1/3`.
fn atanh_fixed(p: &BigInt, q: &BigInt) -> BigInt {
    let y = (p << FRAC_BITS) / q;
    let y2 = (&y * &y) >> FRAC_BITS;
    let mut power = y.clone();
    let mut sum = BigInt::zero();
    let mut j = 0u64;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * j + 1);
        power = (&power * &y2) >> FRAC_BITS;
        j += 1;
    }
    sum
}

/// `log k` scaled by `2^FRAC_BITS`: `k = 2^e m` with `1 ≤ m < 2` and
/// `log m = 2 atanh((m-1)/(m+1))`.
fn ln_fixed(k: u64, ln2: &BigInt) -> BigInt {
    let e = 63 - k.leading_zeros() as u64;
    let base = BigInt::from(1u64) << e;
    let kb = BigInt::from(k);
    let frac = atanh_fixed(&(&kb - &base), &(&kb + &base)) * 2;
    ln2 * BigInt::from(e) + frac
}

/// Partial sum `Σ_{k=2}^K c_k log k` to about 70 correct digits, as a
/// 50-digit decimal string and as the nearest `f64`.
pub fn high_precision_partial_sum(series: SeriesKind, truncation: u64) -> Result<(String, f64)> {
    if truncation > 1_000_000 {
        return Err(Error::CapExceeded {
            what: "high-precision truncation",
            cap: 1_000_000,
            actual: truncation as usize,
        });
    }
    let ln2 = atanh_fixed(&BigInt::one(), &BigInt::from(3)) * 2;
    let total: BigInt = (2..=truncation)
        .into_par_iter()
        .map(|k| {
            let c = series.coefficient(k);
            ln_fixed(k, &ln2) * c.numer() / c.denom()
        })
        .reduce(BigInt::zero, |a, b| a + b);
    let value = BigRational::new(total, BigInt::one() << FRAC_BITS);
    let f = value.to_f64().unwrap_or(f64::NAN);
    Ok((decimal_sig(&value, 50), f))
}

/// Dense polynomial in `x` with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    pub fn constant(c: BigRational) -> Self {
        Poly(vec![c])
    }

    pub fn x() -> Self {
        Poly(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn one_minus_x() -> Self {
        Poly(vec![BigRational::one(), -BigRational::one()])
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        Poly(
            (0..len)
                .map(|i| {
                    self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
                        + other.0.get(i).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly(self.0.iter().map(|a| a * c).collect())
    }

    /// `(1 - x)^e` by the binomial theorem.
    pub fn one_minus_x_pow(e: u64) -> Poly {
        Poly(
            (0..=e)
                .map(|i| {
                    let b = BigRational::from_integer(binomial(e, i));
                    if i % 2 == 1 {
                        -b
                    } else {
                        b
                    }
                })
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// `∫_0^1 p(x) dx`.
    pub fn integral_unit(&self) -> BigRational {
        self.0.iter().enumerate().map(|(i, c)| c / int(i as u64 + 1)).sum()
    }
}

/// `Pr[N_x = k]` as a polynomial in `x` (line form for `k ≥ 1`, extended
/// form for `k ≥ 2`).
pub fn pmf_polynomial(k: u64, variant: NxVariant) -> Result<Poly> {
    let x = Poly::x();
    let q = Poly::one_minus_x_pow;
    match variant {
        NxVariant::Line => {
            if k == 0 {
                return Err(Error::arg("k must be at least 1"));
            }
            Ok(x.mul(&x).mul(&q(k - 1)).scale(&int(k)))
        }
        NxVariant::Extended => {
            // c = 1 - (1-x)^2
            let c = Poly::constant(BigRational::one()).add(&q(2).scale(&-BigRational::one()));
            match k {
                0 | 1 => Err(Error::arg("k must be at least 2")),
                2 => Ok(q(3).mul(&c).mul(&c).scale(&int(2))),
                3 => Ok(q(5).mul(&c).mul(&c).add(&q(5).mul(&c).mul(&x).scale(&int(2)))),
                _ => {
                    let a = q(k + 2).mul(&c).mul(&x).scale(&int(2));
                    let b = q(k + 3).mul(&c).mul(&x).scale(&int(2));
                    let d = q(k + 4).mul(&x).mul(&x).scale(&int(k - 4));
                    Ok(a.add(&b).add(&d))
                }
            }
        }
    }
}

/// Closed form of `∫_0^1 Pr[N_x = k] dx`.
pub fn integral_closed_form(k: u64, variant: NxVariant) -> Result<BigRational> {
    match variant {
        NxVariant::Line if k >= 1 => Ok(ratio(2, (k + 1) * (k + 2))),
        NxVariant::Extended if k >= 2 => Ok(SeriesKind::Sm.coefficient(k)),
        _ => Err(Error::arg(format!("k = {k} out of range"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralCheck {
    pub k: u64,
    pub variant: NxVariant,
    pub integral: String,
    pub closed_form: String,
    pub equal: bool,
}

pub fn integral_check(k: u64, variant: NxVariant) -> Result<IntegralCheck> {
    let integral = pmf_polynomial(k, variant)?.integral_unit();
    let closed = integral_closed_form(k, variant)?;
    Ok(IntegralCheck {
        k,
        variant,
        equal: integral == closed,
        integral: rational_string(&integral),
        closed_form: rational_string(&closed),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizationCheck {
    pub x: String,
    pub truncation: u64,
    /// `Pr[N_x = 1]` from its own formula.
    pub p1_direct: String,
    /// `1 - Pr[N_x ≥ 2]`, with the exact tail.
    pub p1_complement: String,
    pub pass: bool,
}

/// Exact normalization of the extended law at rational `x`: the direct
/// `Pr[N_x = 1]` equals the complement of `Σ_{2≤k≤K} Pr[N_x = k]` plus the
/// closed-form tail beyond `K`, and the tail telescopes at `K`.
pub fn extended_normalization(x: &BigRational, truncation: u64) -> Result<NormalizationCheck> {
    if truncation < 3 {
        return Err(Error::arg("truncation must be at least 3"));
    }
    let v = NxVariant::Extended;
    let p1 = nx_pmf(x, 1, v)?;
    let mut rest = nx_tail(x, truncation, v)?;
    for k in 2..=truncation {
        rest += nx_pmf(x, k, v)?;
    }
    let complement = BigRational::one() - rest;
    let telescopes = nx_tail(x, truncation, v)? - nx_tail(x, truncation + 1, v)? == nx_pmf(x, truncation + 1, v)?;
    Ok(NormalizationCheck {
        x: rational_string(x),
        truncation,
        pass: complement == p1 && telescopes,
        p1_direct: rational_string(&p1),
        p1_complement: rational_string(&complement),
    })
}

/// Rigorous enclosure of `e^r` for rational `0 ≤ r ≤ 4`, as dyadic rationals
/// with `FRAC_BITS` fractional bits.
fn exp_enclosure(r: &BigRational) -> (BigRational, BigRational) {
    const TERMS: u64 = 80;
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for j in 0..TERMS {
        sum += &term;
        term = term * r / int(j + 1);
    }
    // Remaining terms are at most `term / (1 - r/(TERMS+1))`.
    let rest = &term / (BigRational::one() - r / int(TERMS + 1));
    let scale = BigInt::one() << FRAC_BITS;
    let down = |v: &BigRational| {
        BigRational::new(
            (v * BigRational::from_integer(scale.clone())).floor().to_integer(),
            scale.clone(),
        )
    };
    let up = |v: &BigRational| {
        BigRational::new(
            (v * BigRational::from_integer(scale.clone())).ceil().to_integer(),
            scale.clone(),
        )
    };
    (down(&sum), up(&(sum + rest)))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub exp_2_4076_n: String,
    pub pow_11_11_n: String,
    pub exp_1_2662_n: String,
    pub exp_1_2663_n: String,
    pub pow_3_55_n: String,
    /// `e^2.4076 ≤ 11.11`.
    pub tg_base_ok: bool,
    /// `e^1.2662 ≤ 3.55`.
    pub sm_base_ok: bool,
    /// `e^1.2663 ≤ 3.55`.
    pub sm_base_rounded_ok: bool,
}

fn dec(s: &str) -> BigRational {
    parse_rational(s).expect("valid decimal literal")
}

/// The exponential bounds at `n`, to 12 significant digits (truncated), with
/// the base comparisons decided on exact enclosures.
pub fn bound_report(n: u64) -> Result<BoundReport> {
    if n == 0 || n > 10_000 {
        return Err(Error::arg("n must lie in 1..=10000"));
    }
    let e = n as u32;
    let show = |r: &BigRational| decimal_sig(r, 12);
    let pow_lo = |exponent: &str| pow(&exp_enclosure(&dec(exponent)).0, e);
    let (_, tg_hi) = exp_enclosure(&dec("2.4076"));
    let (_, sm_hi) = exp_enclosure(&dec("1.2662"));
    let (_, sm2_hi) = exp_enclosure(&dec("1.2663"));
    Ok(BoundReport {
        n,
        exp_2_4076_n: show(&pow_lo("2.4076")),
        pow_11_11_n: show(&pow(&dec("11.11"), e)),
        exp_1_2662_n: show(&pow_lo("1.2662")),
        exp_1_2663_n: show(&pow_lo("1.2663")),
        pow_3_55_n: show(&pow(&dec("3.55"), e)),
        tg_base_ok: tg_hi <= dec("11.11"),
        sm_base_ok: sm_hi <= dec("3.55"),
        sm_base_rounded_ok: sm2_hi <= dec("3.55"),
    })
}

/// `e^r` enclosure as `f64` bounds, for reporting.
pub fn exp_bounds_f64(r: &str) -> Option<(f64, f64)> {
    let r = parse_rational(r)?;
    if r.is_negative() || r > int(4) {
        return None;
    }
    let (lo, hi) = exp_enclosure(&r);
    Some((lo.to_f64()?, hi.to_f64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitworth_cases() {
        let w = whitworth(1, 1, 2).unwrap();
        assert_eq!((w.lhs.as_str(), w.equal), ("3/2", true));
        for a in 0..5 {
            for n in a..12 {
                let w = whitworth(0, a, n).unwrap();
                assert!(w.equal);
                assert_eq!(
                    parse_rational(&w.lhs).unwrap(),
                    BigRational::new(BigInt::one(), binomial(n, a))
                );
            }
        }
        assert!(whitworth(3, 3, 5).is_err());
    }

    #[test]
    fn whitworth_sweep() {
        for n in 0..=40u64 {
            for m in 0..=n {
                for a in 0..=n - m {
                    assert!(whitworth(m, a, n).unwrap().equal, "m={m} a={a} n={n}");
                }
            }
        }
    }

    #[test]
    fn finite_n_small() {
        assert!((finite_n_tg_term(1).unwrap() - 2f64.ln()).abs() < 1e-15);
        let two = 2.0 / 3.0 * 3f64.ln() + 8.0 / 3.0 * (2f64.ln() / 12.0);
        assert!((finite_n_tg_term(2).unwrap() - two).abs() < 1e-15);
        let sweep = finite_n_sweep(1000).unwrap();
        assert!(sweep.pass);
        assert_eq!(sweep.argmax, 1000);
    }

    #[test]
    fn small_truncations() {
        let e = series_tg_constant(10).unwrap();
        let direct: f64 = (2..=10)
            .map(|k| 2.0 * (k as f64).ln() / ((k + 1) * (k + 2)) as f64)
            .sum();
        assert!((e.partial_sum - direct).abs() < 1e-15);
        assert!((e.partial_sum - 0.63354).abs() < 1e-4);
        assert!(series_tg_constant(9).is_err());
        let s = series_sm_constant(8).unwrap();
        let head = 2f64.ln() / 12.0 + 3f64.ln() * 23.0 / 630.0;
        assert!((head - 0.0978).abs() < 1e-4);
        assert!(s.partial_sum > head);
    }

    #[test]
    fn enclosures_nest() {
        for series in [SeriesKind::Tg, SeriesKind::Sm] {
            let mut prev: Option<SeriesEnclosure> = None;
            for k in [100u64, 1_000, 10_000, 100_000] {
                let e = series_constant(series, k).unwrap();
                if let Some(p) = prev {
                    assert!(e.enclosure.lo >= p.enclosure.lo);
                    assert!(e.enclosure.hi <= p.enclosure.hi);
                }
                prev = Some(e);
            }
        }
    }

    #[test]
    fn high_precision_agrees() {
        for series in [SeriesKind::Tg, SeriesKind::Sm] {
            let e = series_constant(series, 5_000).unwrap();
            let (digits, hp) = high_precision_partial_sum(series, 5_000).unwrap();
            assert!((e.partial_sum - hp).abs() <= e.rounding_budget, "{digits}");
            assert!(digits.len() > 50);
        }
    }

    #[test]
    fn ln_fixed_matches_f64() {
        let ln2 = atanh_fixed(&BigInt::one(), &BigInt::from(3)) * 2;
        for k in [2u64, 3, 10, 12345, 9_999_991] {
            let v = BigRational::new(ln_fixed(k, &ln2), BigInt::one() << FRAC_BITS);
            assert!((v.to_f64().unwrap() - (k as f64).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn majorant_identity() {
        // 4(k+3)(k+5)(k+6)(k+7) - (2k(k+7)+72)k² = 2k⁴ + 70k³ + 572k² + 2124k + 2520.
        for k in 1u128..200 {
            let lhs = 4 * (k + 3) * (k + 5) * (k + 6) * (k + 7) - (2 * k * (k + 7) + 72) * k * k;
            assert_eq!(lhs, 2 * k.pow(4) + 70 * k.pow(3) + 572 * k * k + 2124 * k + 2520);
        }
    }

    #[test]
    fn integrals() {
        let c = integral_check(1, NxVariant::Line).unwrap();
        assert_eq!((c.integral.as_str(), c.equal), ("1/3", true));
        assert_eq!(integral_check(2, NxVariant::Extended).unwrap().integral, "1/12");
        assert_eq!(integral_check(3, NxVariant::Extended).unwrap().integral, "23/630");
        assert_eq!(SeriesKind::Sm.coefficient(4), ratio(160, 6930));
        for k in 1..=40 {
            assert!(integral_check(k, NxVariant::Line).unwrap().equal);
        }
        for k in 2..=40 {
            assert!(integral_check(k, NxVariant::Extended).unwrap().equal, "k={k}");
        }
        assert!(integral_check(1, NxVariant::Extended).is_err());
    }

    #[test]
    fn polynomial_agrees_with_pmf() {
        let x = ratio(2, 7);
        for k in 2..=12 {
            for v in [NxVariant::Line, NxVariant::Extended] {
                assert_eq!(pmf_polynomial(k, v).unwrap().eval(&x), nx_pmf(&x, k, v).unwrap());
            }
        }
    }

    #[test]
    fn normalization() {
        for x in [ratio(1, 2), ratio(1, 20), ratio(19, 20)] {
            let c = extended_normalization(&x, 25).unwrap();
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn exp_bases() {
        let r = bound_report(3).unwrap();
        assert!(r.tg_base_ok && r.sm_base_ok && r.sm_base_rounded_ok);
        assert_eq!(r.pow_11_11_n, "1.37133063100e3");
        assert_eq!(r.pow_3_55_n, "4.47388750000e1");
        let (lo, hi) = exp_bounds_f64("2.4076").unwrap();
        assert!(lo <= 11.10727 + 1e-5);
        assert!((11.10727 - 1e-5..11.11).contains(&hi));
        let (_, hi) = exp_bounds_f64("1.2663").unwrap();
        assert!(hi < 3.55);
    }
}
