//! Exact fixed-point orbit engine for x_k = ι(x₀ + kα).
//!
//! Positions are integers X_k = X₀ + kA (mod 2^B) with A = ⌊α·2^B⌉ taken
//! from a certified enclosure, so the stored orbit is exact integer
//! arithmetic and the only error is the initial rounding: the true point
//! differs from X_k/2^B by at most (k+2)·2^-B. With B ≥ 64 + log₂(N+1) + 16
//! every point of an N-step orbit is known to well below the 2^-64
//! collision threshold.
//!
//! Piece attribution compares X_k against the scaled piece boundaries.
//! A point within 2^-64 of a genuine discontinuity cannot be attributed
//! (`JumpCollision`); the single exception is x₀ itself landing exactly on
//! a jump (an exact rational equality), where the right-continuity
//! convention gives the correct value and `JumpPolicy::RightLimit` accepts
//! it. For irrational α no later orbit point can equal a rational jump
//! location, so near-hits past k = 0 signal either astronomical luck or a
//! misconfigured precision, and always error.
//!
//! Orbits run on u128 words when B ≤ 120 and on big integers beyond.

use crate::alpha::AlphaSpec;
use crate::error::{Error, Result};
use crate::piecewise::{horner, CompiledFn};
use crate::torus::TorusPoint;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

/// What to do when an orbit point sits on a discontinuity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpPolicy {
    /// Any hit errors, including an exact one at k = 0.
    #[default]
    Strict,
    /// An exact rational hit at k = 0 takes the right-limit value.
    RightLimit,
}

const U128_MAX_BITS: u32 = 120;

/// Prepared orbit state: scaled α, start point, and break tables.
pub(crate) struct ScaledOrbit<'f> {
    cfn: Option<&'f CompiledFn>,
    bits: u32,
    a: BigUint,
    x0: BigUint,
    /// k = 0 sits exactly on a jump and the policy accepted it.
    exact_start: bool,
}

impl<'f> ScaledOrbit<'f> {
    pub fn prepare(
        cfn: &'f CompiledFn,
        alpha: &AlphaSpec,
        x0: &TorusPoint,
        bits: u32,
        policy: JumpPolicy,
    ) -> Result<Self> {
        let mut orbit = Self::prepare_points(alpha, x0, bits)?;
        let exact_start = cfn.jump_points.contains(x0.value());
        if exact_start && policy == JumpPolicy::Strict {
            return Err(Error::JumpCollision { index: 0, gamma: x0.value().to_string() });
        }
        orbit.cfn = Some(cfn);
        orbit.exact_start = exact_start;
        Ok(orbit)
    }

    /// Orbit without a function: pure point stream, no collision checks.
    pub fn prepare_points(alpha: &AlphaSpec, x0: &TorusPoint, bits: u32) -> Result<Self> {
        if bits < 80 {
            return Err(Error::InvalidInput("orbit precision must be at least 80 bits".into()));
        }
        if let Some(max) = alpha.max_certified_bits() {
            if bits > max {
                return Err(Error::PrecisionExhausted(format!(
                    "orbit needs {bits} bits but the rotation number is certified to {max}"
                )));
            }
        }
        Ok(ScaledOrbit {
            cfn: None,
            bits,
            a: alpha.scaled(bits)?,
            x0: x0.scaled(bits),
            exact_start: false,
        })
    }

    /// Value of piece `idx` of the attached function at x.
    pub fn term(&self, idx: usize, x: f64) -> f64 {
        horner(&self.cfn.expect("orbit prepared without a function").polys[idx], x)
    }

    /// Apply `on_point(k, ι(x₀+kα), piece index)` for k in [from, to).
    pub fn sweep<F: FnMut(u64, f64, usize)>(&self, from: u64, to: u64, on_point: F) -> Result<()> {
        if to <= from {
            return Ok(());
        }
        let modulus = BigUint::one() << self.bits;
        let start = (&self.x0 + &self.a * BigUint::from(from)) % &modulus;
        if self.bits <= U128_MAX_BITS {
            self.sweep_u128(start, from, to, on_point)
        } else {
            self.sweep_big(start, from, to, on_point)
        }
    }

    fn tables(&self) -> (&[num_rational::BigRational], &[num_rational::BigRational]) {
        match self.cfn {
            Some(c) => (&c.breaks, &c.jump_points),
            None => (&[], &[]),
        }
    }

    fn sweep_u128<F: FnMut(u64, f64, usize)>(
        &self,
        start: BigUint,
        from: u64,
        to: u64,
        mut on_point: F,
    ) -> Result<()> {
        let b = self.bits;
        let modulus: u128 = 1u128 << b;
        let a = self.a.to_u128().unwrap();
        let mut x = start.to_u128().unwrap();
        let (break_rats, jump_rats) = self.tables();
        let breaks: Vec<u128> = break_rats.iter().map(|r| scale_rational_u128(r, b)).collect();
        let jumps: Vec<u128> = jump_rats.iter().map(|r| scale_rational_u128(r, b)).collect();
        let threshold: u128 = 1u128 << (b - 64);
        let shift = b - 53;
        let inv = 1.0 / (1u64 << 53) as f64;
        for k in from..to {
            if !(k == 0 && self.exact_start) {
                for (j, &g) in jumps.iter().enumerate() {
                    let d = if x >= g { x - g } else { g - x };
                    if d.min(modulus - d) < threshold {
                        return Err(Error::JumpCollision {
                            index: k,
                            gamma: jump_rats[j].to_string(),
                        });
                    }
                }
            }
            let idx = if breaks.is_empty() { 0 } else { breaks.partition_point(|&c| c <= x) - 1 };
            let xf = ((x >> shift) as u64) as f64 * inv;
            on_point(k, xf, idx);
            x += a;
            if x >= modulus {
                x -= modulus;
            }
        }
        Ok(())
    }

    fn sweep_big<F: FnMut(u64, f64, usize)>(
        &self,
        start: BigUint,
        from: u64,
        to: u64,
        mut on_point: F,
    ) -> Result<()> {
        let b = self.bits;
        let modulus = BigUint::one() << b;
        let mut x = start;
        let (break_rats, jump_rats) = self.tables();
        let breaks: Vec<BigUint> = break_rats.iter().map(|r| scale_rational(r, b)).collect();
        let jumps: Vec<BigUint> = jump_rats.iter().map(|r| scale_rational(r, b)).collect();
        let threshold = BigUint::one() << (b - 64);
        let shift = b - 53;
        let inv = 1.0 / (1u64 << 53) as f64;
        for k in from..to {
            if !(k == 0 && self.exact_start) {
                for (j, g) in jumps.iter().enumerate() {
                    let d = if &x >= g { &x - g } else { g - &x };
                    let d = (&modulus - &d).min(d);
                    if d < threshold {
                        return Err(Error::JumpCollision {
                            index: k,
                            gamma: jump_rats[j].to_string(),
                        });
                    }
                }
            }
            let idx = if breaks.is_empty() { 0 } else { breaks.partition_point(|c| c <= &x) - 1 };
            let xf = (&x >> shift).to_u64().unwrap() as f64 * inv;
            on_point(k, xf, idx);
            x += &self.a;
            if x >= modulus {
                x -= &modulus;
            }
        }
        Ok(())
    }
}

/// ⌊v·2^bits⌉ for v ∈ [0,1), as used for piece boundaries.
fn scale_rational(v: &num_rational::BigRational, bits: u32) -> BigUint {
    TorusPoint::new(v.clone()).scaled(bits)
}

fn scale_rational_u128(v: &num_rational::BigRational, bits: u32) -> u128 {
    scale_rational(v, bits).to_u128().unwrap()
}

/// Working precision that keeps an N-step orbit certified: the accumulated
/// drift (N+2)·2^-B stays 2^16 below the 2^-64 collision threshold.
pub fn default_bits(n_steps: u64) -> u32 {
    64 + 16 + (u64::BITS - n_steps.leading_zeros()).max(1)
}
