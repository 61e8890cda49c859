use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// An exact rational exponent.
///
/// Exponents are kept rational so that the boundary cases of the horizon
/// trichotomy (`C = A + B/2`) and the Kronecker term `δ_{B,2A}` are decided
/// exactly. In JSON an exponent is written as `"1/3"`, an integer, or a
/// float (converted to the nearest small-denominator fraction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(Ratio<i64>);

impl Exponent {
    pub fn new(num: i64, den: i64) -> Self {
        Self(Ratio::new(num, den))
    }

    pub fn integer(n: i64) -> Self {
        Self(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_positive(&self) -> bool {
        *self.0.numer() > 0
    }

    pub fn is_negative(&self) -> bool {
        *self.0.numer() < 0
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Validation(format!("exponent {x} is not finite")));
        }
        // Prefer the smallest denominator reproducing x to 1e-12.
        for den in 1..=1000i64 {
            let num = (x * den as f64).round();
            if (num / den as f64 - x).abs() < 1e-12 {
                return Ok(Self::new(num as i64, den));
            }
        }
        Ratio::approximate_float(x)
            .map(Self)
            .ok_or_else(|| Error::Validation(format!("exponent {x} has no rational form")))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("cannot parse exponent {s:?}"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Self::new(n, d))
        } else if let Ok(n) = s.parse::<i64>() {
            Ok(Self::integer(n))
        } else {
            Self::from_f64(s.parse().map_err(|_| bad())?)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

macro_rules! forward_op {
    ($tr:ident, $m:ident) => {
        impl $tr for Exponent {
            type Output = Exponent;
            fn $m(self, rhs: Exponent) -> Exponent {
                Exponent(self.0.$m(rhs.0))
            }
        }
    };
}
forward_op!(Add, add);
forward_op!(Sub, sub);
forward_op!(Mul, mul);
forward_op!(Div, div);

impl Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(-self.0)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Exponent::integer(n)),
            Raw::Float(x) => Exponent::from_f64(x),
            Raw::Text(s) => Exponent::parse(&s),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing_forms() {
        assert_eq!(Exponent::parse("1/3").unwrap(), Exponent::new(1, 3));
        assert_eq!(Exponent::parse("2").unwrap(), Exponent::integer(2));
        assert_eq!(Exponent::parse("0.5").unwrap(), Exponent::new(1, 2));
        assert!(Exponent::parse("1/0").is_err());
        assert!(Exponent::parse("x").is_err());
    }

    #[test]
    fn float_to_fraction() {
        assert_eq!(Exponent::from_f64(1.0 / 3.0).unwrap(), Exponent::new(1, 3));
        assert_eq!(Exponent::from_f64(0.75).unwrap(), Exponent::new(3, 4));
    }

    #[test]
    fn json_round_trip() {
        let e: Vec<Exponent> = serde_json::from_str(r#"["1/6", 2, 0.25]"#).unwrap();
        assert_eq!(e, vec![Exponent::new(1, 6), Exponent::integer(2), Exponent::new(1, 4)]);
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"["1/6","2","1/4"]"#);
    }

    #[test]
    fn arithmetic_is_exact() {
        let third = Exponent::new(1, 3);
        assert_eq!(third + third + third, Exponent::integer(1));
        assert_eq!((third * Exponent::integer(3)).value(), 1.0);
        assert!((-third).is_negative());
    }
}
