//! Exact decimal fractions for configuration values such as `beta = "0.49"`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A non-negative rational parsed from a decimal string.
///
/// Arithmetic on fractions stays exact, so `1 - 2 * 0.49` is exactly `1/50`
/// and `ceil(gamma * N)` never suffers from binary rounding.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(Ratio<i64>);

impl Fraction {
    pub fn new(numer: i64, denom: i64) -> Fraction {
        Fraction(Ratio::new(numer, denom))
    }

    pub fn from_integer(n: i64) -> Fraction {
        Fraction(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// `ceil(self * n)` computed exactly.
    pub fn ceil_mul(&self, n: u64) -> u64 {
        let num = self.numer() as i128 * n as i128;
        let den = self.denom() as i128;
        Integer::div_ceil(&num, &den) as u64
    }

    /// `floor(self * n)` computed exactly.
    pub fn floor_mul(&self, n: u64) -> u64 {
        let num = self.numer() as i128 * n as i128;
        (num / self.denom() as i128) as u64
    }

    /// `1 - 2 * self`, the largest admissible gamma for a given beta.
    pub fn one_minus_twice(&self) -> Fraction {
        Fraction(Ratio::from_integer(1) - self.0 * 2)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl std::ops::Add for Fraction {
    type Output = Fraction;
    fn add(self, rhs: Fraction) -> Fraction {
        Fraction(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Fraction {
    type Output = Fraction;
    fn sub(self, rhs: Fraction) -> Fraction {
        Fraction(self.0 - rhs.0)
    }
}

impl std::ops::Mul for Fraction {
    type Output = Fraction;
    fn mul(self, rhs: Fraction) -> Fraction {
        Fraction(self.0 * rhs.0)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    /// Accepts `"0.49"`, `"3"`, `"1/4"` and `"1e-3"`-free decimals only.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not an exact decimal fraction: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Fraction::new(n, d));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if frac_part.len() > 15 {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
        let denom = 10i64.pow(frac_part.len() as u32);
        let numer = if neg { -numer } else { numer };
        Ok(Fraction::new(numer, denom))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Terminating decimals print as decimals, everything else as n/d.
        let mut d = self.denom();
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        if d != 1 {
            return write!(f, "{}/{}", self.numer(), self.denom());
        }
        let mut digits = 0u32;
        while 10i64.pow(digits) % self.denom() != 0 {
            digits += 1;
        }
        let scaled = self.numer() as i128 * (10i128.pow(digits) / self.denom() as i128);
        if digits == 0 {
            return write!(f, "{scaled}");
        }
        let sign = if scaled < 0 { "-" } else { "" };
        let a = scaled.unsigned_abs();
        let p = 10u128.pow(digits);
        write!(f, "{sign}{}.{:0width$}", a / p, a % p, width = digits as usize)
    }
}

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fraction({self})")
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        let beta: Fraction = "0.49".parse().unwrap();
        assert_eq!(beta, Fraction::new(49, 100));
        let gamma = beta.one_minus_twice();
        assert_eq!(gamma, Fraction::new(1, 50));
        assert_eq!(gamma.ceil_mul(9000), 180);
        assert_eq!(gamma.ceil_mul(138), 3);
        assert_eq!(beta.ceil_mul(9000), 4410);
        assert_eq!("1/4".parse::<Fraction>().unwrap(), Fraction::new(1, 4));
        assert_eq!("2".parse::<Fraction>().unwrap(), Fraction::from_integer(2));
        assert!("0.1e3".parse::<Fraction>().is_err());
        assert!("abc".parse::<Fraction>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0.49", "0.02", "0.5", "3", "0.125", "1/3"] {
            let f: Fraction = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
    }
}
