//! Exact rational helpers on top of [`num_rational::BigRational`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Arbitrary-precision fraction, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Builds `num/den` in lowest terms. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `p`, `-p`, `p/q` or `-p/q` (optional surrounding whitespace).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // numerator or denominator beyond f64 range; fall back to a scaled division
        let n = value.numer().to_f64().unwrap_or(f64::NAN);
        let d = value.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact decimal expansion truncated after `digits` fractional digits, with a
/// trailing `...` when the expansion does not terminate there.
pub fn decimal_string(value: &Rational, digits: usize) -> String {
    let negative = value.is_negative();
    let numer = value.numer().abs();
    let denom = value.denom().clone();
    let (whole, mut rem) = numer.div_rem(&denom);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&whole.to_string());
    if rem.is_zero() {
        return out;
    }
    out.push('.');
    let ten = BigInt::from(10);
    for _ in 0..digits {
        rem *= &ten;
        let (d, r) = rem.div_rem(&denom);
        out.push_str(&d.to_string());
        rem = r;
        if rem.is_zero() {
            return out;
        }
    }
    out.push_str("...");
    out
}
