//! Exact points on the circle R/Z.
//!
//! Starting points, jump locations and multipliers are all kept as exact
//! rationals so that congruence arguments (`{q_n x}` depends only on
//! `q_n mod denominator`) and breakpoint comparisons stay exact.  Decimal
//! literals like `"0.4142135623"` are parsed as the rational they denote.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A point of [0,1) with exact rational coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TorusPoint {
    value: BigRational,
}

impl TorusPoint {
    /// Reduce an arbitrary rational mod 1 into [0,1).
    pub fn new(x: BigRational) -> Self {
        let one = BigRational::one();
        let f = x.floor();
        let mut v = x - f;
        if v >= one {
            v -= BigRational::one();
        }
        TorusPoint { value: v }
    }

    pub fn zero() -> Self {
        TorusPoint { value: BigRational::zero() }
    }

    pub fn from_ratio(num: i64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        TorusPoint::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact value in [0,1).
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    /// Distance to the nearest integer, ‖x‖ = min({x}, 1-{x}).
    pub fn norm(&self) -> BigRational {
        let other = BigRational::one() - &self.value;
        if self.value <= other {
            self.value.clone()
        } else {
            other
        }
    }

    /// {x + y} as a torus point.
    pub fn add(&self, other: &TorusPoint) -> TorusPoint {
        TorusPoint::new(&self.value + &other.value)
    }

    /// {-x}.
    pub fn neg(&self) -> TorusPoint {
        TorusPoint::new(-self.value.clone())
    }

    /// {n · x}, exact.  Only the residue of n modulo the denominator of x
    /// matters, which is what the subsequence-limit machinery exploits.
    pub fn mul_int(&self, n: &BigInt) -> TorusPoint {
        TorusPoint::new(&self.value * n)
    }

    /// Nearest dyadic integer X with |x - X/2^bits| <= 2^-(bits+1),
    /// reduced mod 2^bits.
    pub fn scaled(&self, bits: u32) -> BigUint {
        let two_b = BigInt::one() << bits;
        let scaled = &self.value * &two_b;
        // round half up; the half-ulp tie direction is irrelevant downstream
        let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
        let m = rounded.to_integer().mod_floor(&two_b);
        m.to_biguint().expect("non-negative after mod_floor")
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl From<TorusPoint> for String {
    fn from(p: TorusPoint) -> String {
        p.value.to_string()
    }
}

impl TryFrom<String> for TorusPoint {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for TorusPoint {
    type Err = Error;

    /// Accepts `"p/q"`, integers, and decimal literals (`"0.35"`).
    fn from_str(s: &str) -> Result<Self> {
        Ok(TorusPoint::new(parse_rational(s)?))
    }
}

/// Parse `"p/q"`, `"-3"`, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::InvalidInput("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| Error::InvalidInput(format!("bad numerator in {s:?}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| Error::InvalidInput(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_str = if int_part.is_empty() || int_part == "-" { "0" } else { int_part };
        let i = BigInt::from_str(int_str)
            .map_err(|_| Error::InvalidInput(format!("bad integer part in {s:?}")))?;
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidInput(format!("bad fractional part in {s:?}")));
        }
        let f = BigInt::from_str(frac_part).expect("digits only");
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = BigRational::new(f, scale);
        let whole = BigRational::from_integer(i);
        return Ok(if negative { whole - frac } else { whole + frac });
    }
    let i = BigInt::from_str(s).map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))?;
    Ok(BigRational::from_integer(i))
}
