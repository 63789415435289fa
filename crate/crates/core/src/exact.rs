//! Exact rational helpers for the rational modes.

use alloc::string::String;
use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::math;

pub type Rational = BigRational;

pub fn from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

pub fn from_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `2^-k` exactly.
pub fn dyadic(k: u32) -> Rational {
    BigRational::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.to_f64() {
        Some(v) if v.is_finite() && v != 0.0 => v,
        _ => {
            let s = if x.is_negative() { -1.0 } else { 1.0 };
            s * math::exp(ln_abs(x))
        }
    }
}

fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return math::ln(n.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (n >> shift as usize).to_f64().unwrap_or(0.0);
    math::ln(top) + shift as f64 * math::LN2
}

/// Natural log of `|x|`, accurate for magnitudes far outside the f64 range.
pub fn ln_abs(x: &Rational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

pub fn is_positive(x: &Rational) -> bool {
    x.numer().sign() == Sign::Plus
}

/// Parses `"p/q"`, an integer, or a decimal string into an exact rational.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut digits = String::from(int);
    digits.push_str(frac);
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10u32), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_of_tiny_dyadic() {
        let x = dyadic(3072);
        let expect = -3072.0 * math::LN2;
        assert!((ln_abs(&x) - expect).abs() < 1e-9);
        assert_eq!(x.to_f64().unwrap_or(0.0), 0.0);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/8").unwrap(), ratio(3, 8));
        assert_eq!(parse("0.375").unwrap(), ratio(3, 8));
        assert_eq!(parse("-2").unwrap(), from_int(-2));
        assert!(parse("1/0").is_none());
        assert!(parse("abc").is_none());
    }

    #[test]
    fn float_roundtrip_is_exact() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, 0.75] {
            assert_eq!(to_f64(&from_f64(x).unwrap()), x);
        }
    }
}
