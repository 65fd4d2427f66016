//! Exact non-negative costs and the cost-or-unreachable value domain.

use core::cmp::Ordering;
use core::fmt;
use core::ops::Add;
use core::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Zero};

/// A non-negative rational cost.
///
/// Costs are exact so that optimality comparisons never depend on rounding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cost(Ratio<u64>);

impl Cost {
    pub const ZERO: Cost = Cost(Ratio::new_raw(0, 1));

    pub fn integer(n: u64) -> Self {
        Cost(Ratio::from_integer(n))
    }

    /// `numer / denom`; panics if `denom` is zero.
    pub fn ratio(numer: u64, denom: u64) -> Self {
        Cost(Ratio::new(numer, denom))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn checked_add(&self, other: &Cost) -> Option<Cost> {
        self.0.checked_add(&other.0).map(Cost)
    }
}

impl Add for Cost {
    type Output = Cost;

    /// Panics on overflow of the underlying `u64` ratio. Desk-scale models
    /// with decimal costs stay many orders of magnitude below that.
    fn add(self, rhs: Cost) -> Cost {
        self.checked_add(&rhs).expect("cost overflow")
    }
}

impl core::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostParseError {
    #[error("empty cost")]
    Empty,
    #[error("invalid cost '{0}'")]
    Invalid(alloc::string::String),
    #[error("cost '{0}' is negative")]
    Negative(alloc::string::String),
    #[error("cost '{0}' does not fit")]
    Overflow(alloc::string::String),
}

impl FromStr for Cost {
    type Err = CostParseError;

    /// Accepts `7`, `0.25`, `.5` and `1/3`. Negative values are rejected.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        use alloc::string::ToString;
        let s = text.trim();
        if s.is_empty() {
            return Err(CostParseError::Empty);
        }
        if s.starts_with('-') {
            return Err(CostParseError::Negative(s.to_string()));
        }
        let invalid = || CostParseError::Invalid(s.to_string());
        let overflow = || CostParseError::Overflow(s.to_string());
        let s = s.strip_prefix('+').unwrap_or(s);

        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = parse_digits(n.trim()).ok_or_else(invalid)?;
            let d: u64 = parse_digits(d.trim()).ok_or_else(invalid)?;
            if d == 0 {
                return Err(invalid());
            }
            return Ok(Cost::ratio(n, d));
        }

        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(invalid());
        }
        let int_value: u64 = if int_part.is_empty() {
            0
        } else {
            parse_digits(int_part).ok_or_else(invalid)?
        };
        let mut numer = Ratio::from_integer(int_value);
        if !frac_part.is_empty() {
            let digits: u64 = parse_digits(frac_part).ok_or_else(invalid)?;
            let mut scale: u64 = 1;
            for _ in 0..frac_part.len() {
                scale = scale.checked_mul(10).ok_or_else(overflow)?;
            }
            numer = numer
                .checked_add(&Ratio::new(digits, scale))
                .ok_or_else(overflow)?;
        }
        Ok(Cost(numer))
    }
}

fn parse_digits(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Cost {
    /// Terminating decimals print as decimals, everything else as `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.numer(), self.denom());
        if d == 1 {
            return write!(f, "{n}");
        }
        let mut rest = d;
        let (mut twos, mut fives) = (0u32, 0u32);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        if rest != 1 {
            return write!(f, "{n}/{d}");
        }
        let places = twos.max(fives);
        let scale = 10u64.checked_pow(places);
        let scaled = scale.and_then(|s| Ratio::from_integer(n).checked_mul(&Ratio::new(s, d)));
        match (scale, scaled) {
            (Some(scale), Some(scaled)) => {
                let v = scaled.to_integer();
                write!(f, "{}.{:0width$}", v / scale, v % scale, width = places as usize)
            }
            _ => write!(f, "{n}/{d}"),
        }
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A cost or the explicit "unreachable" marker used for weight-to-go.
///
/// `Finite(_) < Unreachable` for every finite cost.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Value {
    Finite(Cost),
    Unreachable,
}

impl Value {
    pub const ZERO: Value = Value::Finite(Cost::ZERO);

    pub fn is_finite(&self) -> bool {
        matches!(self, Value::Finite(_))
    }

    pub fn finite(&self) -> Option<Cost> {
        match self {
            Value::Finite(c) => Some(*c),
            Value::Unreachable => None,
        }
    }

    /// `cost + self`, absorbing into `Unreachable`.
    pub fn plus(&self, cost: Cost) -> Value {
        match self {
            Value::Finite(c) => Value::Finite(*c + cost),
            Value::Unreachable => Value::Unreachable,
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => a.cmp(b),
            (Value::Finite(_), Value::Unreachable) => Ordering::Less,
            (Value::Unreachable, Value::Finite(_)) => Ordering::Greater,
            (Value::Unreachable, Value::Unreachable) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Cost> for Value {
    fn from(c: Cost) -> Self {
        Value::Finite(c)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(c) => write!(f, "{c}"),
            Value::Unreachable => f.write_str("inf"),
        }
    }
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::Cost;
    use alloc::string::{String, ToString};
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for Cost {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&self.to_string())
        }
    }

    impl<'de> Deserialize<'de> for Cost {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let text = String::deserialize(d)?;
            text.parse().map_err(de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!("2".parse::<Cost>().unwrap(), Cost::integer(2));
        assert_eq!("0.1".parse::<Cost>().unwrap(), Cost::ratio(1, 10));
        assert_eq!(".5".parse::<Cost>().unwrap(), Cost::ratio(1, 2));
        assert_eq!("1/3".parse::<Cost>().unwrap(), Cost::ratio(1, 3));
        assert_eq!("1.250".parse::<Cost>().unwrap(), Cost::ratio(5, 4));
        // 0.1 + 0.2 is exactly 0.3 here.
        let sum = "0.1".parse::<Cost>().unwrap() + "0.2".parse::<Cost>().unwrap();
        assert_eq!(sum, "0.3".parse::<Cost>().unwrap());
    }

    #[test]
    fn rejects_bad_costs() {
        assert!(matches!("-1".parse::<Cost>(), Err(CostParseError::Negative(_))));
        assert!(matches!("".parse::<Cost>(), Err(CostParseError::Empty)));
        assert!("abc".parse::<Cost>().is_err());
        assert!("1/0".parse::<Cost>().is_err());
        assert!("1.2.3".parse::<Cost>().is_err());
        assert!(".".parse::<Cost>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["0", "3", "0.5", "1.25", "1/3", "2/7", "0.001"] {
            let c: Cost = text.parse().unwrap();
            assert_eq!(c.to_string(), text);
            assert_eq!(c.to_string().parse::<Cost>().unwrap(), c);
        }
    }

    #[test]
    fn unreachable_dominates() {
        assert!(Value::Finite(Cost::integer(1_000_000)) < Value::Unreachable);
        assert_eq!(Value::Unreachable.plus(Cost::integer(1)), Value::Unreachable);
        assert_eq!(Value::ZERO.plus(Cost::integer(2)), Value::Finite(Cost::integer(2)));
    }
}
