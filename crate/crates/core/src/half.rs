//! Exact half-integer arithmetic.
//!
//! Preference counts, disorders and midranks are always multiples of ½, so
//! they are stored as a count of halves.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A value `halves / 2`.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Half(i64);

impl Half {
    pub const ZERO: Half = Half(0);

    pub const fn from_halves(halves: i64) -> Self {
        Half(halves)
    }

    pub const fn from_int(value: i64) -> Self {
        Half(value * 2)
    }

    /// Twice the value, i.e. the raw number of halves.
    pub const fn halves(self) -> i64 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Parses decimal text that must denote a multiple of ½ (`20`, `21.5`, `-3.0`).
    pub fn parse(text: &str) -> Option<Half> {
        let text = text.trim();
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let whole: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
        let frac = frac_part.trim_end_matches('0');
        let half = match frac {
            "" => 0,
            "5" => 1,
            _ => return None,
        };
        let halves = whole.checked_mul(2)?.checked_add(half)?;
        Some(Half(if neg { -halves } else { halves }))
    }
}

impl From<i64> for Half {
    fn from(value: i64) -> Self {
        Half::from_int(value)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        if abs.is_multiple_of(2) {
            write!(f, "{sign}{}", abs / 2)
        } else {
            write!(f, "{sign}{}.5", abs / 2)
        }
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl AddAssign for Half {
    fn add_assign(&mut self, rhs: Half) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Half {
    fn sub_assign(&mut self, rhs: Half) {
        self.0 -= rhs.0;
    }
}

impl Sum for Half {
    fn sum<I: Iterator<Item = Half>>(iter: I) -> Half {
        Half(iter.map(|h| h.0).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display() {
        assert_eq!(Half::from_halves(43).to_string(), "21.5");
        assert_eq!(Half::from_int(20).to_string(), "20");
        assert_eq!(Half::from_halves(-1).to_string(), "-0.5");
    }

    #[test]
    fn parse() {
        assert_eq!(Half::parse("21.5"), Some(Half::from_halves(43)));
        assert_eq!(Half::parse("20"), Some(Half::from_int(20)));
        assert_eq!(Half::parse("20.000"), Some(Half::from_int(20)));
        assert_eq!(Half::parse(".5"), Some(Half::from_halves(1)));
        assert_eq!(Half::parse("-3.5"), Some(Half::from_halves(-7)));
        assert_eq!(Half::parse("1.25"), None);
        assert_eq!(Half::parse("abc"), None);
        assert_eq!(Half::parse(""), None);
    }

    #[test]
    fn arithmetic() {
        let a = Half::from_halves(3);
        let b = Half::from_int(2);
        assert_eq!(a + b, Half::from_halves(7));
        assert_eq!(b - a, Half::from_halves(1));
        assert!(!a.is_integer());
        assert!(b.is_integer());
        assert_eq!([a, a].into_iter().sum::<Half>(), Half::from_int(3));
    }
}
