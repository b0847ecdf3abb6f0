use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};

/// An exact rational data value. Integers have denominator one.
///
/// The wrapped ratio is always reduced with a positive denominator, so
/// structural equality coincides with numeric equality.
#[derive(Clone, Copy)]
pub struct Value(Ratio<i64>);

// Hand-written because the ratio's own impls renormalise on every call.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.numer() == other.numer() && self.denom() == other.denom()
    }
}

impl Eq for Value {}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.numer(), self.denom()).hash(state);
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.denom() == 1 && other.denom() == 1 {
            self.numer().cmp(&other.numer())
        } else {
            self.0.cmp(&other.0)
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// The ordered domain that data values are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Domain {
    Nat,
    Int,
    #[default]
    Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("denominator must be non-zero")]
    ZeroDenominator,
    #[error("arithmetic overflow on values")]
    Overflow,
    #[error("malformed number `{0}`")]
    Malformed(String),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value(Ratio::from_integer(n))
    }

    pub fn ratio(numer: i64, denom: i64) -> Result<Self, ValueError> {
        if denom == 0 {
            return Err(ValueError::ZeroDenominator);
        }
        // gcd and negation both overflow on i64::MIN.
        if numer == i64::MIN || denom == i64::MIN {
            return Err(ValueError::Overflow);
        }
        let g = num_integer::gcd(numer, denom);
        let (mut n, mut d) = (numer / g, denom / g);
        if d < 0 {
            n = n.checked_neg().ok_or(ValueError::Overflow)?;
            d = d.checked_neg().ok_or(ValueError::Overflow)?;
        }
        Ok(Value(Ratio::new_raw(n, d)))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.denom() == 1
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn checked_add(&self, other: &Value) -> Result<Value, ValueError> {
        self.0.checked_add(&other.0).map(Value).ok_or(ValueError::Overflow)
    }

    pub fn checked_sub(&self, other: &Value) -> Result<Value, ValueError> {
        self.0.checked_sub(&other.0).map(Value).ok_or(ValueError::Overflow)
    }

    pub fn checked_mul(&self, other: &Value) -> Result<Value, ValueError> {
        self.0.checked_mul(&other.0).map(Value).ok_or(ValueError::Overflow)
    }

    pub fn checked_div(&self, other: &Value) -> Result<Value, ValueError> {
        if other.0.is_zero() {
            return Err(ValueError::ZeroDenominator);
        }
        self.0.checked_div(&other.0).map(Value).ok_or(ValueError::Overflow)
    }
}

impl Domain {
    pub fn contains(self, v: Value) -> bool {
        match self {
            Domain::Rat => true,
            Domain::Int => v.is_integer(),
            Domain::Nat => v.is_integer() && !v.is_negative(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Nat => "nat",
            Domain::Int => "int",
            Domain::Rat => "rat",
        }
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nat" | "N" => Ok(Domain::Nat),
            "int" | "Z" => Ok(Domain::Int),
            "rat" | "Q" => Ok(Domain::Rat),
            other => Err(format!("unknown domain `{other}` (expected nat, int or rat)")),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::int(n)
    }
}

impl FromStr for Value {
    type Err = ValueError;

    /// Accepts `n` and `p/q` with an optional leading minus on the numerator.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ValueError::Malformed(s.to_string());
        let parse_int = |t: &str| -> Result<i64, ValueError> {
            let digits = t.strip_prefix('-').unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse::<i64>().map_err(|_| ValueError::Overflow)
        };
        match s.split_once('/') {
            None => parse_int(s).map(Value::int),
            Some((n, d)) => {
                if d.starts_with('-') {
                    return Err(bad());
                }
                Value::ratio(parse_int(n)?, parse_int(d)?)
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_are_reduced_with_positive_denominator() {
        let v = Value::ratio(6, -4).unwrap();
        assert_eq!((v.numer(), v.denom()), (-3, 2));
        assert_eq!(Value::ratio(4, 2).unwrap(), Value::int(2));
        assert_eq!(Value::ratio(1, 0), Err(ValueError::ZeroDenominator));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "-7", "10/3", "-1/2"] {
            assert_eq!(s.parse::<Value>().unwrap().to_string(), s);
        }
        assert_eq!("20/6".parse::<Value>().unwrap().to_string(), "10/3");
        assert!("1/-2".parse::<Value>().is_err());
        assert!("x".parse::<Value>().is_err());
        assert_eq!("99999999999999999999".parse::<Value>(), Err(ValueError::Overflow));
    }

    #[test]
    fn ordering_is_numeric() {
        let third: Value = "1/3".parse().unwrap();
        assert!(Value::int(0) < third && third < Value::int(1));
        assert!(Value::int(-2) < Value::int(-1));
    }

    #[test]
    fn domain_membership() {
        let half = Value::ratio(1, 2).unwrap();
        assert!(Domain::Rat.contains(half));
        assert!(!Domain::Int.contains(half));
        assert!(Domain::Int.contains(Value::int(-3)));
        assert!(!Domain::Nat.contains(Value::int(-3)));
        assert!(Domain::Nat.contains(Value::int(0)));
    }

    #[test]
    fn checked_arithmetic_reports_overflow() {
        let big = Value::int(i64::MAX);
        assert_eq!(big.checked_add(&Value::int(1)), Err(ValueError::Overflow));
        assert_eq!(Value::int(10).checked_div(&Value::int(3)).unwrap(), Value::ratio(10, 3).unwrap());
    }
}
