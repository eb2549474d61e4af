//! Exact specifications of the rotation number α.
//!
//! Three source forms are supported:
//!
//! * `DigitRule` — the continued fraction digits themselves (an explicit
//!   prefix, a tail rule, and a sparse map of forced quotients), so any
//!   depth of the expansion is available exactly;
//! * `Surd` — a quadratic irrational `(p + √d)/q`, expanded with the
//!   classical integer `(P, Q)` recursion, all floors taken exactly;
//! * `Literal` — a decimal literal standing for a number known only to
//!   `±2^-bits`; digits are emitted only while they are stable under that
//!   perturbation, and the expansion refuses (`PrecisionExhausted`) once
//!   certification fails.
//!
//! Every consumer works through two certified queries: `expand` (digit
//! prefix of the expansion) and `enclosure` (exact rational interval of
//! requested dyadic width containing α).

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Rule generating continued fraction digits past the explicit prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailRule {
    /// a_k = value for every index past the prefix.
    Constant { value: u64 },
    /// Digits cycle through `values`.
    Periodic { values: Vec<u64> },
}

impl TailRule {
    fn digit(&self, offset: usize) -> u64 {
        match self {
            TailRule::Constant { value } => *value,
            TailRule::Periodic { values } => values[offset % values.len()],
        }
    }
}

/// JSON map keys are strings; the tagged-enum buffer does not coerce them
/// back to integers, so parse them by hand.
fn forced_from_wire<'de, D>(de: D) -> std::result::Result<BTreeMap<usize, u64>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw = BTreeMap::<String, u64>::deserialize(de)?;
    raw.into_iter()
        .map(|(k, v)| k.parse::<usize>().map(|k| (k, v)).map_err(serde::de::Error::custom))
        .collect()
}

/// Symbolic description of an irrational rotation number in (0,1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum AlphaSpec {
    /// α given by its continued fraction digits a_1, a_2, …
    DigitRule {
        prefix: Vec<u64>,
        tail: TailRule,
        /// Sparse overrides: `forced[k] = a_k` (1-based index), taking
        /// precedence over both prefix and tail.
        #[serde(default, deserialize_with = "forced_from_wire")]
        forced: BTreeMap<usize, u64>,
    },
    /// α = (p + √d)/q with integer coefficients, q > 0 or q < 0.
    Surd { p: i64, d: u64, q: i64 },
    /// A decimal literal certified to ±2^-bits.
    Literal { decimal: String, bits: u32 },
}

impl AlphaSpec {
    /// (√5 − 1)/2, the golden rotation; digits are all 1.
    pub fn golden() -> Self {
        AlphaSpec::Surd { p: -1, d: 5, q: 2 }
    }

    /// √2 − 1; digits are all 2.
    pub fn sqrt2_minus_1() -> Self {
        AlphaSpec::Surd { p: -1, d: 2, q: 1 }
    }

    /// All-ones digit rule (same number as `golden`, different source form).
    pub fn ones() -> Self {
        AlphaSpec::DigitRule {
            prefix: Vec::new(),
            tail: TailRule::Constant { value: 1 },
            forced: BTreeMap::new(),
        }
    }

    /// Check structural validity without expanding anything.
    pub fn validate(&self) -> Result<()> {
        match self {
            AlphaSpec::DigitRule { prefix, tail, forced } => {
                let tail_ok = match tail {
                    TailRule::Constant { value } => *value >= 1,
                    TailRule::Periodic { values } => {
                        !values.is_empty() && values.iter().all(|&v| v >= 1)
                    }
                };
                if !tail_ok {
                    return Err(Error::InvalidInput("tail digits must be >= 1".into()));
                }
                if prefix.iter().any(|&v| v < 1) {
                    return Err(Error::InvalidInput("prefix digits must be >= 1".into()));
                }
                if forced.iter().any(|(&k, &v)| k < 1 || v < 1) {
                    return Err(Error::InvalidInput(
                        "forced quotients need 1-based index and digit >= 1".into(),
                    ));
                }
                Ok(())
            }
            AlphaSpec::Surd { p, d, q } => {
                if *q == 0 {
                    return Err(Error::InvalidInput("surd denominator q must be nonzero".into()));
                }
                let s = d.sqrt();
                if s * s == *d {
                    return Err(Error::InvalidInput(format!(
                        "d = {d} is a perfect square; (p + sqrt(d))/q is rational"
                    )));
                }
                let _ = p;
                Ok(())
            }
            AlphaSpec::Literal { decimal, bits } => {
                if *bits < 8 {
                    return Err(Error::InvalidInput("literal precision below 8 bits".into()));
                }
                let v = crate::torus::parse_rational(decimal)?;
                if v <= BigRational::zero() || v >= BigRational::one() {
                    return Err(Error::InvalidInput(format!(
                        "literal {decimal:?} not in the open interval (0,1)"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Hard certification budget, if any: a `Literal` can never be trusted
    /// beyond its own declared bits; symbolic sources are unbounded.
    pub fn max_certified_bits(&self) -> Option<u32> {
        match self {
            AlphaSpec::Literal { bits, .. } => Some(*bits),
            _ => None,
        }
    }

    /// First `k` continued fraction digits a_1 … a_k.
    ///
    /// Fails with `RationalInput` when the expansion terminates before
    /// producing `k` digits and with `PrecisionExhausted` when a literal's
    /// digit is not stable under a ±2^-bits perturbation.
    pub fn expand(&self, k: usize) -> Result<Vec<u64>> {
        self.validate()?;
        match self {
            AlphaSpec::DigitRule { prefix, tail, forced } => {
                let mut out = Vec::with_capacity(k);
                for idx in 1..=k {
                    let d = forced
                        .get(&idx)
                        .copied()
                        .unwrap_or_else(|| match prefix.get(idx - 1) {
                            Some(&v) => v,
                            None => tail.digit(idx - 1 - prefix.len()),
                        });
                    out.push(d);
                }
                Ok(out)
            }
            AlphaSpec::Surd { p, d, q } => surd_digits(*p, *d, *q, k),
            AlphaSpec::Literal { decimal, bits } => {
                let v = crate::torus::parse_rational(decimal)?;
                literal_digits(&v, *bits, k)
            }
        }
    }

    /// Exact rational interval `[lo, hi]` containing α with
    /// `hi − lo <= 2^-bits`.
    pub fn enclosure(&self, bits: u32) -> Result<(BigRational, BigRational)> {
        self.validate()?;
        match self {
            AlphaSpec::DigitRule { .. } => {
                // consecutive convergents bracket α and q_m q_{m+1} bounds
                // the gap; grow the expansion until the gap closes
                let target: BigInt = BigInt::one() << bits;
                let mut depth = 16usize;
                loop {
                    let digits = self.expand(depth)?;
                    let (pm, qm, pn, qn) = last_two_convergents(&digits);
                    if &qm * &qn >= target {
                        let a = BigRational::new(pm, qm);
                        let b = BigRational::new(pn, qn);
                        return Ok(if a <= b { (a, b) } else { (b, a) });
                    }
                    depth *= 2;
                    if depth > 1 << 22 {
                        return Err(Error::PrecisionExhausted(
                            "digit rule enclosure did not converge".into(),
                        ));
                    }
                }
            }
            AlphaSpec::Surd { p, d, q } => {
                // exact reduced state (P + √D)/Q in (0,1), then bracket √D
                // by an integer square root at bits + bitlen(Q) precision
                let (pp, dd, qq) = surd_reduced_state(*p, *d, *q);
                let extra = qq.bits() as u32 + 2;
                let shift = bits + extra;
                let scaled: BigUint = &dd << (2 * shift);
                let s = scaled.sqrt();
                let denom: BigInt = BigInt::one() << shift;
                let lo_root = BigRational::new(BigInt::from(s.clone()), denom.clone());
                let hi_root = BigRational::new(BigInt::from(s + BigUint::one()), denom);
                let pb = BigRational::from_integer(pp);
                let qb = BigRational::from_integer(qq);
                let a = (&pb + lo_root) / &qb;
                let b = (&pb + hi_root) / &qb;
                Ok(if a <= b { (a, b) } else { (b, a) })
            }
            AlphaSpec::Literal { decimal, bits: own } => {
                if bits > *own {
                    return Err(Error::PrecisionExhausted(format!(
                        "literal certified to {own} bits, {bits} requested"
                    )));
                }
                let v = crate::torus::parse_rational(decimal)?;
                let u = BigRational::new(BigInt::one(), BigInt::one() << (bits + 1));
                Ok((&v - &u, &v + &u))
            }
        }
    }

    /// Nearest dyadic A with |α − A/2^bits| <= 2^-bits, certified.
    pub fn scaled(&self, bits: u32) -> Result<BigUint> {
        let (lo, hi) = self.enclosure(bits + 2)?;
        let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
        let two_b = BigInt::one() << bits;
        let rounded = (&mid * &two_b + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
        let m = rounded.to_integer().mod_floor(&two_b);
        Ok(m.to_biguint().expect("non-negative"))
    }

    /// Midpoint of a tight enclosure as f64, for display.
    pub fn approx_f64(&self) -> Result<f64> {
        let (lo, hi) = self.enclosure(64)?;
        let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
        Ok(mid.to_f64().unwrap_or(f64::NAN))
    }

    pub fn describe(&self) -> String {
        match self {
            AlphaSpec::DigitRule { prefix, tail, forced } => {
                let tail_s = match tail {
                    TailRule::Constant { value } => format!("const {value}"),
                    TailRule::Periodic { values } => format!("periodic {values:?}"),
                };
                if forced.is_empty() {
                    format!("digits prefix {prefix:?}, tail {tail_s}")
                } else {
                    format!("digits prefix {prefix:?}, tail {tail_s}, forced {forced:?}")
                }
            }
            AlphaSpec::Surd { p, d, q } => format!("({p} + sqrt({d}))/{q}"),
            AlphaSpec::Literal { decimal, bits } => {
                format!("literal {decimal} (+/- 2^-{bits})")
            }
        }
    }
}

/// p_k, q_k recursion over a digit prefix; returns the last two pairs
/// (p_{m-1}, q_{m-1}, p_m, q_m) for m = digits.len().
fn last_two_convergents(digits: &[u64]) -> (BigInt, BigInt, BigInt, BigInt) {
    // seeds: (p_{-1}, q_{-1}) = (1, 0), (p_0, q_0) = (0, 1)
    let mut p_prev = BigInt::one();
    let mut q_prev = BigInt::zero();
    let mut p = BigInt::zero();
    let mut q = BigInt::one();
    for &a in digits {
        let ab = BigInt::from(a);
        let pn = &ab * &p + &p_prev;
        let qn = &ab * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, pn);
        q_prev = std::mem::replace(&mut q, qn);
    }
    (p_prev, q_prev, p, q)
}

/// Exact floor of (P + √D)/Q for non-square D ≥ 0 and Q ≠ 0.
fn surd_floor(p: &BigInt, d: &BigUint, q: &BigInt) -> BigInt {
    let s = BigInt::from(d.sqrt());
    if q.is_positive() {
        (p + &s).div_floor(q)
    } else {
        // x lies strictly between (P+s+1)/Q and (P+s)/Q; the floor of the
        // left endpoint is exact because (P+s+1)/Q has denominator |Q| and
        // x is irrational
        (p + &s + BigInt::one()).div_floor(q)
    }
}

/// Scaled state (P, D, Q) with (P + √D)/Q = fractional part of (p + √d)/q
/// and the classical invariant Q | D − P².
fn surd_reduced_state(p: i64, d: u64, q: i64) -> (BigInt, BigUint, BigInt) {
    // scale numerator and denominator by |q| so that Q divides D − P²
    let qa = BigInt::from(q.unsigned_abs());
    let mut pp: BigInt = BigInt::from(p) * &qa;
    let dd: BigUint = BigUint::from(d) * (q.unsigned_abs() as u128).pow(2);
    let qq: BigInt = BigInt::from(q) * &qa;
    let f = surd_floor(&pp, &dd, &qq);
    pp -= &f * &qq;
    (pp, dd, qq)
}

/// Continued fraction digits of (p + √d)/q via the integer (P, Q) recursion.
fn surd_digits(p: i64, d: u64, q: i64, k: usize) -> Result<Vec<u64>> {
    let (mut pp, dd, mut qq) = surd_reduced_state(p, d, q);
    let d_big = BigInt::from(dd.clone());

    let mut digits = Vec::with_capacity(k);
    // x_0 = (P+√D)/Q in (0,1); step x -> 1/(x - floor x)
    let mut a_cur = BigInt::zero();
    for _ in 0..k {
        // invert: x' = 1/((P - aQ + √D)/Q) = (-(P-aQ) + √D) / ((D-(P-aQ)²)/Q)
        let shifted = &pp - &a_cur * &qq;
        let num = &d_big - &shifted * &shifted;
        let (q_next, rem) = num.div_rem(&qq);
        debug_assert!(rem.is_zero(), "PQ invariant broken");
        pp = -shifted;
        qq = q_next;
        a_cur = surd_floor(&pp, &dd, &qq);
        let digit = a_cur
            .to_u64()
            .ok_or_else(|| Error::InvalidInput("surd digit exceeds u64".into()))?;
        debug_assert!(digit >= 1);
        digits.push(digit);
    }
    Ok(digits)
}

/// Certified digits of a decimal literal: digits follow the exact rational,
/// certification tracks the ±2^-bits interval.
pub(crate) fn literal_digits(v: &BigRational, bits: u32, k: usize) -> Result<Vec<u64>> {
    let u = BigRational::new(BigInt::one(), BigInt::one() << bits);
    let mut lo = v - &u;
    let mut hi = v + &u;
    let mut x = v.clone();
    let mut digits: Vec<u64> = Vec::with_capacity(k);
    for _ in 1..=k {
        if x.is_zero() {
            return Err(Error::RationalInput { digits });
        }
        let inv = x.recip();
        let a = inv.floor().to_integer();
        let rem = &inv - BigRational::from_integer(a.clone());
        let digit = a
            .to_u64()
            .ok_or_else(|| Error::PrecisionExhausted("literal digit exceeds u64".into()))?;
        let certified = if lo.is_positive() && hi.is_positive() {
            let ilo = hi.recip();
            let ihi = lo.recip();
            ilo.floor().to_integer() == a && ihi.floor().to_integer() == a
        } else {
            false
        };
        if certified {
            let new_lo = hi.recip() - BigRational::from_integer(a.clone());
            let new_hi = lo.recip() - BigRational::from_integer(a.clone());
            lo = new_lo;
            hi = new_hi;
            x = rem;
            digits.push(digit);
        } else if rem.is_zero() {
            // final digit of a terminating rational; the next round trips
            // the RationalInput branch if more digits were requested
            digits.push(digit);
            x = rem;
            lo = BigRational::zero();
            hi = BigRational::zero();
        } else {
            return Err(Error::PrecisionExhausted(format!(
                "digit {} of literal not stable under +/-2^-{} perturbation",
                digits.len() + 1,
                bits
            )));
        }
    }
    Ok(digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_digits_are_all_ones() {
        let a = AlphaSpec::golden();
        assert_eq!(a.expand(6).unwrap(), vec![1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn sqrt2_minus_1_digits_are_all_twos() {
        let a = AlphaSpec::sqrt2_minus_1();
        assert_eq!(a.expand(5).unwrap(), vec![2, 2, 2, 2, 2]);
    }

    #[test]
    fn surd_reduces_value_mod_one() {
        // (5 + √2)/2 = 3.207…, same digits as its fractional part 0.207…
        let a = AlphaSpec::Surd { p: 5, d: 2, q: 2 };
        let b = AlphaSpec::Surd { p: -1, d: 2, q: 2 };
        assert_eq!(a.expand(8).unwrap(), b.expand(8).unwrap());
    }

    #[test]
    fn surd_with_negative_denominator() {
        // (1 + √2)/(-2) ≡ (3 - √2)/2 ≈ 0.79289 (mod 1), expansion [1,3,1,4,1,4,…]
        let a = AlphaSpec::Surd { p: 1, d: 2, q: -2 };
        let (lo, hi) = a.enclosure(80).unwrap();
        let mid = (lo + hi.clone()).to_f64().unwrap() / 2.0;
        assert!((mid - (3.0 - std::f64::consts::SQRT_2) / 2.0).abs() < 1e-12);
        assert_eq!(a.expand(6).unwrap(), vec![1, 3, 1, 4, 1, 4]);
    }

    #[test]
    fn perfect_square_surd_is_rejected() {
        let a = AlphaSpec::Surd { p: -1, d: 4, q: 3 };
        assert!(matches!(a.expand(3), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn digit_rule_with_forced_quotient() {
        let mut forced = BTreeMap::new();
        forced.insert(11usize, 10_000u64);
        let a = AlphaSpec::DigitRule {
            prefix: vec![],
            tail: TailRule::Constant { value: 1 },
            forced,
        };
        let d = a.expand(12).unwrap();
        assert_eq!(d[10], 10_000);
        assert_eq!(d[0], 1);
        assert_eq!(d[11], 1);
    }

    #[test]
    fn periodic_tail_cycles() {
        let a = AlphaSpec::DigitRule {
            prefix: vec![3],
            tail: TailRule::Periodic { values: vec![1, 2] },
            forced: BTreeMap::new(),
        };
        assert_eq!(a.expand(6).unwrap(), vec![3, 1, 2, 1, 2, 1]);
    }

    #[test]
    fn literal_half_terminates_as_rational() {
        let a = AlphaSpec::Literal { decimal: "0.5".into(), bits: 256 };
        match a.expand(2) {
            Err(Error::RationalInput { digits }) => assert_eq!(digits, vec![2]),
            other => panic!("expected RationalInput, got {other:?}"),
        }
        // exactly one digit is fine
        assert_eq!(a.expand(1).unwrap(), vec![2]);
    }

    #[test]
    fn literal_refuses_past_certification() {
        // 0.414 at 8 bits: third digit depends on the unknown tail
        let a = AlphaSpec::Literal { decimal: "0.414".into(), bits: 8 };
        assert_eq!(a.expand(2).unwrap(), vec![2, 2]);
        assert!(matches!(a.expand(3), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn literal_certifies_digits_at_high_bits() {
        let a = AlphaSpec::Literal { decimal: "0.4142135623730950488".into(), bits: 60 };
        assert_eq!(a.expand(8).unwrap(), vec![2; 8]);
    }

    #[test]
    fn enclosures_have_requested_width_and_agree() {
        for spec in [AlphaSpec::golden(), AlphaSpec::ones()] {
            let (lo, hi) = spec.enclosure(128).unwrap();
            let w = &hi - &lo;
            assert!(w <= BigRational::new(BigInt::one(), BigInt::one() << 128));
            let g = (5f64.sqrt() - 1.0) / 2.0;
            assert!((lo.to_f64().unwrap() - g).abs() < 1e-14);
        }
    }

    #[test]
    fn scaled_value_matches_float() {
        let a = AlphaSpec::golden();
        let s = a.scaled(64).unwrap();
        let approx = s.to_f64().unwrap() / 2f64.powi(64);
        assert!((approx - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_matches_spec_shapes() {
        let j = r#"{"variant":"digit_rule","prefix":[1,1],"tail":{"kind":"constant","value":1},"forced":{"11":10000}}"#;
        let a: AlphaSpec = serde_json::from_str(j).unwrap();
        assert_eq!(a.expand(11).unwrap()[10], 10000);
        let j2 = r#"{"variant":"surd","p":-1,"d":5,"q":2}"#;
        let b: AlphaSpec = serde_json::from_str(j2).unwrap();
        assert_eq!(b, AlphaSpec::golden());
        let j3 = r#"{"variant":"literal","decimal":"0.41421356237","bits":32}"#;
        let c: AlphaSpec = serde_json::from_str(j3).unwrap();
        assert_eq!(c.expand(3).unwrap(), vec![2, 2, 2]);
    }
}
