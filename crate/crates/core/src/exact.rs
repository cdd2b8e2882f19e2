//! Exact integer and rational helpers shared by the distribution and bound
//! modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Binomial coefficient with a signed upper index; zero outside `0 <= k <= n`.
pub fn binomial_i(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        BigInt::zero()
    } else {
        binomial(n as u64, k as u64)
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `"p/q"` in lowest terms (`"p"` when the denominator is one).
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let mut num: BigInt = digits.parse().ok()?;
        if neg {
            num = -num;
        }
        return Some(BigRational::new(num, BigInt::from(10).pow(frac.len() as u32)));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Scale down huge numerators/denominators before converting.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = r.numer() >> shift;
        let d = r.denom() >> shift;
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

pub fn pow(base: &BigRational, exp: u32) -> BigRational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Decimal expansion of a nonnegative rational with `sig` significant digits,
/// truncated toward zero, in scientific notation `d.ddd…e±x`.
pub fn decimal_sig(r: &BigRational, sig: usize) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let r = r.abs();
    let ten = BigInt::from(10);
    // Find exponent e with 10^e <= r < 10^(e+1).
    let mut e: i64 = r.numer().to_string().len() as i64 - r.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(ten.pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), ten.pow((-k) as u32))
        }
    };
    while r < pow10(e) {
        e -= 1;
    }
    while r >= pow10(e + 1) {
        e += 1;
    }
    let scaled = r / pow10(e - (sig as i64 - 1));
    let digits = scaled.numer().div_floor(scaled.denom()).to_string();
    let (head, tail) = digits.split_at(1);
    format!("{}{}.{}e{}", if neg { "-" } else { "" }, head, tail, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 5), BigInt::from(252));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
        assert_eq!(binomial_i(-1, 0), BigInt::zero());
        assert_eq!(factorial(5), BigInt::from(120));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("0.3"), Some(ratio(3, 10)));
        assert_eq!(parse_rational("-1.25"), Some(ratio(-5, 4)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(rational_string(&ratio(4, 6)), "2/3");
        assert_eq!(rational_string(&int(5)), "5");
        assert_eq!(
            decimal_sig(&ratio(137133063100i64, 100000000i64), 12),
            "1.37133063100e3"
        );
        assert_eq!(decimal_sig(&ratio(1, 3), 5), "3.3333e-1");
        assert_eq!(decimal_sig(&int(1), 3), "1.00e0");
    }
}
