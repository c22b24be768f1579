//! Rational numbers and conversions between floating point and exact data.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Real-valued weights are snapped to the dyadic grid `2^-WEIGHT_GRID_BITS`
/// (absolute error at most `2^-49 ≈ 1.8e-15`) so that every rationalized
/// weight shares one denominator.
pub const WEIGHT_GRID_BITS: u32 = 48;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Nearest point of the weight grid. Panics on non-finite input.
pub fn rationalize(x: f64) -> BigRational {
    assert!(x.is_finite(), "cannot rationalize {x}");
    let scale = 2f64.powi(WEIGHT_GRID_BITS as i32);
    let scaled = (x * scale).round();
    // |scaled| < 2^53 covers every value below 32 in magnitude exactly; larger
    // values are exact in f64 already at this resolution
    let numer = BigInt::from(scaled as i128);
    BigRational::new(numer, BigInt::one() << WEIGHT_GRID_BITS)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `p/q`, or just `p` for integers.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q`, integers, decimals and scientific notation exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{whole}{frac}");
    let numer: BigInt = if all_digits.is_empty() { BigInt::zero() } else { all_digits.parse().ok()? };
    let shift = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if shift >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Some(if negative { -value } else { value })
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `|r|` for rationals, kept here so call sites read uniformly.
pub fn abs(r: &BigRational) -> BigRational {
    r.abs()
}
