//! Exact rational scalars used for every DoF coordinate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::zero(), |acc, k| acc + rat(1, k))
}

/// Always `p/q`, including integers (`1/1`, `0/1`).
pub fn to_pq(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Display-friendly form: integers without a denominator.
pub fn pretty(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        to_pq(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRationalError(pub String);

/// Accepts `p/q`, `p`, and finite decimals such as `0.25`.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac);
        let mut numer = BigInt::from_str(&digits).map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rational::new(numer, denom));
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| err())
}

/// Comma-separated list of rationals.
pub fn parse_list(text: &str) -> Result<Vec<Rational>, ParseRationalError> {
    text.split(',').map(parse).collect()
}

pub fn to_f64(value: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    value.to_f64().unwrap_or(f64::NAN)
}

/// Scale a nonzero vector so that its first nonzero entry has magnitude one.
pub fn normalize_leading(v: &[Rational]) -> Vec<Rational> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let scale = lead.abs();
            v.iter().map(|x| x / &scale).collect()
        }
        None => v.to_vec(),
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_one(value: &Rational) -> bool {
    value.is_one()
}

/// Serde adapter writing a rational as a `p/q` string.
pub mod serde_pq {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_pq(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_pq_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        values.iter().map(to_pq).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Wrapper that prints as `p/q`.
pub struct Pq<'a>(pub &'a Rational);

impl fmt::Display for Pq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_pq(self.0))
    }
}
