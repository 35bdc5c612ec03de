//! Exact rational scalars and their `p/q` wire format.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

mod scalar;

pub use scalar::Rational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` in lowest terms. Panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {input:?}: expected an integer or \"p/q\"")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parses `"p"`, `"-p"` or `"p/q"`. Decimal notation is rejected so that no
/// value ever passes through floating point.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let s = input.trim();
    let valid_int = |t: &str| {
        let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    if !valid_int(num) || !valid_int(den) {
        return Err(err());
    }
    let num: BigInt = num.trim_start_matches('+').parse().map_err(|_| err())?;
    let den: BigInt = den.trim_start_matches('+').parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Renders `p` for integers and `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Newtype used where a rational has to cross a serde boundary as a string.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RationalString(pub Rational);

impl fmt::Display for RationalString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl serde::Serialize for RationalString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(RationalString)
            .map_err(serde::de::Error::custom)
    }
}

/// Returns `Some(m)` when `2r = m` is a natural number (zero included).
pub fn twice_natural(r: &Rational) -> Option<u32> {
    let twice = r * int(2);
    if twice.is_integer() && !twice.is_negative() {
        twice.to_integer().to_u32()
    } else {
        None
    }
}

pub fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

pub fn binomial(n: usize, k: usize) -> Rational {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_forms() {
        assert_eq!(parse_rational("3/2").unwrap(), frac(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational(" 4/6 ").unwrap(), frac(2, 3));
        assert_eq!(parse_rational("-1/3").unwrap(), frac(-1, 3));
    }

    #[test]
    fn rejects_decimals_and_garbage() {
        for bad in ["1.5", "", "1/0", "a/b", "1//2", "--1", "0x10"] {
            assert!(parse_rational(bad).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn formats_round_trip() {
        for s in ["0", "5", "-3/4", "7/5"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn detects_half_integers() {
        assert_eq!(twice_natural(&frac(3, 2)), Some(3));
        assert_eq!(twice_natural(&int(0)), Some(0));
        assert_eq!(twice_natural(&frac(1, 3)), None);
        assert_eq!(twice_natural(&frac(-1, 2)), None);
        assert_eq!(binomial(5, 2), int(10));
    }
}
