//! Exact rational helpers.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number used throughout the engine.
pub type Q = BigRational;

pub fn int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Falling factorial `x (x-1) ... (x-k+1)` at an integer point.
pub fn falling(x: i64, k: u32) -> BigInt {
    (0..k as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x - i))
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

pub fn floor_q(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

pub fn to_i64(x: &BigInt) -> Option<i64> {
    i64::try_from(x).ok()
}

/// Parses `"a"` or `"a/b"` with integer `a`, nonzero integer `b`.
///
/// Decimal points and exponents are rejected.
pub fn parse(s: &str) -> Option<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let ok = |t: &str| {
        let digits = t
            .strip_prefix('-')
            .or_else(|| t.strip_prefix('+'))
            .unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !ok(num) || !ok(den) {
        return None;
    }
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

/// Canonical text: `a` for integers, `a/b` otherwise.
pub fn show(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn sign_power(k: u64) -> Q {
    if k.is_multiple_of(2) {
        Q::one()
    } else {
        -Q::one()
    }
}

pub fn abs_i(x: &BigInt) -> BigInt {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_accepts_fractions_only() {
        assert_eq!(parse("3/2"), Some(frac(3, 2)));
        assert_eq!(parse("-4"), Some(int(-4)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("1.5"), None);
        assert_eq!(parse("1e3"), None);
        assert_eq!(parse(""), None);
    }

    #[test]
    fn binomials_and_falling() {
        assert_eq!(binomial(7, 3), BigInt::from(35));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(falling(-1, 3), BigInt::from(-6));
        assert_eq!(factorial(5), BigInt::from(120));
    }
}
