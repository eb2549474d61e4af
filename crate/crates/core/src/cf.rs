//! Convergent tables, δ_k certification, metric statistics, and the
//! design/search of index sequences with large partial quotients.
//!
//! The convergents p_k/q_k of α obey
//!
//!   p_{k+1} = a_{k+1} p_k + p_{k−1},   q_{k+1} = a_{k+1} q_k + q_{k−1},
//!
//! with p₀ = 0, q₀ = 1, p₁ = 1, q₁ = a₁, and the signed remainders
//! δ_k = (−1)^k (q_k α − p_k) lie in (0,1) with
//!
//!   1/((a_{k+1}+2) q_k) ≤ δ_k ≤ 1/(a_{k+1} q_k)   (k ≥ 1).
//!
//! δ_k is irrational whenever α is, so each row carries an exact rational
//! enclosure [delta_lo, delta_hi] of width ≤ 2^-bits instead of a rounded
//! value; bound checks compare rationals, never floats.
//!
//! Ensemble statistics reproduce two metric theorems at finite depth: the
//! Khintchine–Lévy slope E[log q_k]/k → π²/(12 log 2) and the trimmed digit
//! sums (Σ_{ℓ≤K} a_ℓ − max a_ℓ)/(K log K / log 2) → 1.
//!
//! `construct_alpha` and `find_good_indices` realise, at finite scale,
//! rotation numbers whose even-index convergents combine a prescribed
//! residue q_k ≡ r (mod m) with a huge next quotient a_{k+1}, so that
//! Σ_{i≤k} a_i / a_{k+1} is small.

use crate::alpha::{literal_digits, AlphaSpec, TailRule};
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default enclosure width (bits) for certified real quantities.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// π²/(12 log 2), the almost-sure limit of log q_k / k.
pub fn khintchine_levy() -> f64 {
    std::f64::consts::PI * std::f64::consts::PI / (12.0 * std::f64::consts::LN_2)
}

/// One row of the convergent table.
#[derive(Clone, Debug)]
pub struct Convergent {
    /// Index k ≥ 0.
    pub k: usize,
    /// Partial quotient a_k (0 sentinel on the k = 0 row, which has none).
    pub a: u64,
    pub p: BigInt,
    pub q: BigInt,
    /// Exact lower bound of the δ_k enclosure.
    pub delta_lo: BigRational,
    /// Exact upper bound of the δ_k enclosure.
    pub delta_hi: BigRational,
}

impl Convergent {
    /// Midpoint of the δ_k enclosure as a float.
    pub fn delta(&self) -> f64 {
        let two = BigRational::from_integer(BigInt::from(2));
        ((&self.delta_lo + &self.delta_hi) / two).to_f64().unwrap_or(f64::NAN)
    }
}

/// Convergent rows k = 0..K−1 of one rotation number, with certified δ_k.
#[derive(Clone, Debug)]
pub struct ConvergentTable {
    pub digits: Vec<u64>,
    pub rows: Vec<Convergent>,
    /// Enclosure width exponent: delta_hi − delta_lo ≤ 2^-delta_bits.
    pub delta_bits: u32,
}

impl ConvergentTable {
    /// Build K rows from `alpha`, certifying each δ_k to ±2^-delta_bits.
    ///
    /// Needs K digits: row K−1 checks its bound against a_K.
    pub fn new(alpha: &AlphaSpec, k_rows: usize, delta_bits: u32) -> Result<Self> {
        if k_rows == 0 {
            return Err(Error::InvalidInput("need at least one convergent row".into()));
        }
        let digits = alpha.expand(k_rows)?;
        let pq = convergent_pairs(&digits);
        // δ_k = ±(q_k α − p_k) inherits q_k times the α enclosure width.
        let q_bits = pq[k_rows - 1].1.bits() as u32;
        let (alo, ahi) = alpha.enclosure(delta_bits + q_bits + 1)?;
        let rows = (0..k_rows)
            .map(|k| {
                let (p, q) = &pq[k];
                let (qr, pr) =
                    (BigRational::from_integer(q.clone()), BigRational::from_integer(p.clone()));
                let (mut lo, mut hi) = (&qr * &alo - &pr, &qr * &ahi - &pr);
                if k % 2 == 1 {
                    let (nl, nh) = (-hi, -lo);
                    lo = nl;
                    hi = nh;
                }
                Convergent {
                    k,
                    a: if k == 0 { 0 } else { digits[k - 1] },
                    p: p.clone(),
                    q: q.clone(),
                    delta_lo: lo,
                    delta_hi: hi,
                }
            })
            .collect();
        Ok(ConvergentTable { digits, rows, delta_bits })
    }

    /// a_{k+1}, the quotient governing row k's δ bounds.
    pub fn a_next(&self, k: usize) -> Option<u64> {
        self.digits.get(k).copied()
    }

    /// Row accessor.
    pub fn row(&self, k: usize) -> &Convergent {
        &self.rows[k]
    }
}

/// Exact convergent pairs (p_k, q_k) for k = 0..digits.len().
///
/// Entry k uses digits a_1..a_k, so the result has digits.len()+1 entries.
pub fn convergent_pairs(digits: &[u64]) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::with_capacity(digits.len() + 1);
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (BigInt::zero(), BigInt::one());
    out.push((p.clone(), q.clone()));
    for &a in digits {
        let a = BigInt::from(a);
        let (pn, qn) = (&a * &p + &p_prev, &a * &q + &q_prev);
        p_prev = std::mem::replace(&mut p, pn);
        q_prev = std::mem::replace(&mut q, qn);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// Result of checking δ_k against its two-sided bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeltaBoundCheck {
    pub pass: bool,
    /// δ_k − 1/((a_{k+1}+2) q_k); nonnegative iff the lower bound holds.
    pub lower_slack: f64,
    /// 1/(a_{k+1} q_k) − δ_k; nonnegative iff the upper bound holds.
    pub upper_slack: f64,
}

/// Certified check of 1/((a_{k+1}+2)q_k) ≤ δ_k ≤ 1/(a_{k+1} q_k).
///
/// Comparisons use the row's exact enclosure: pass requires the whole
/// enclosure inside the bound interval, so a pass is a proof.
pub fn check_delta_bounds(row: &Convergent, a_next: u64) -> Result<DeltaBoundCheck> {
    if row.k == 0 {
        return Err(Error::InvalidInput("delta bounds hold for k >= 1 only".into()));
    }
    if a_next == 0 {
        return Err(Error::InvalidInput("partial quotient must be >= 1".into()));
    }
    let a = BigInt::from(a_next);
    let lower = BigRational::new(BigInt::one(), (&a + BigInt::from(2)) * &row.q);
    let upper = BigRational::new(BigInt::one(), &a * &row.q);
    let pass = row.delta_lo >= lower && row.delta_hi <= upper;
    let two = BigRational::from_integer(BigInt::from(2));
    let mid = (&row.delta_lo + &row.delta_hi) / two;
    Ok(DeltaBoundCheck {
        pass,
        lower_slack: (&mid - &lower).to_f64().unwrap_or(f64::NAN),
        upper_slack: (&upper - &mid).to_f64().unwrap_or(f64::NAN),
    })
}

/// Request for a designed rotation number: even target indices k with huge
/// a_{k+1}, an optional residue for q_k, and the ratio bound θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexPlan {
    /// Even indices k at which q_k should be "good".
    pub target_indices: Vec<usize>,
    /// Forced large quotients, keyed by 1-based digit index (typically k+1).
    #[serde(default)]
    pub forced_quotients: BTreeMap<usize, u64>,
    /// Require q_k ≡ r (mod m) at every target; m ≤ 100.
    #[serde(default)]
    pub congruence_class: Option<(u64, u64)>,
    /// Bound θ on Σ_{i≤k} a_i / a_{k+1}.
    pub ratio_threshold: f64,
}

impl IndexPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio_threshold > 0.0) {
            return Err(Error::InvalidInput("ratio threshold must be > 0".into()));
        }
        if self.target_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("target indices must be strictly increasing".into()));
        }
        if self.target_indices.iter().any(|k| k % 2 != 0 || *k == 0) {
            return Err(Error::InvalidInput("target indices must be even and positive".into()));
        }
        for (&i, &a) in &self.forced_quotients {
            if i == 0 || a == 0 {
                return Err(Error::InvalidInput(
                    "forced quotients need 1-based index and digit >= 1".into(),
                ));
            }
            if !self.target_indices.iter().any(|&k| k + 1 == i) {
                return Err(Error::InvalidInput(format!(
                    "forced quotient at index {i} does not follow a target index"
                )));
            }
        }
        if let Some((r, m)) = self.congruence_class {
            if m == 0 || m > 100 {
                return Err(Error::InvalidInput("congruence modulus must be in 1..=100".into()));
            }
            if r >= m {
                return Err(Error::InvalidInput("congruence residue must be < modulus".into()));
            }
        }
        Ok(())
    }
}

/// Digit rule produced by `construct_alpha`, with the search notes.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructedAlpha {
    pub spec: AlphaSpec,
    /// Filler digits changed from 1 by the congruence search (index → digit).
    pub adjustments: BTreeMap<usize, u64>,
    /// Largest window (in digits before a target) the search needed.
    pub search_radius: usize,
}

/// Build a digit rule realising `plan`: all-ones filler, forced quotients at
/// k+1, and, when a congruence class is set, filler digits in {1,2,3} near
/// each target adjusted so q_k ≡ r (mod m).
///
/// Targets are processed left to right; a target's adjustment window never
/// reaches at or before the previous target, so earlier residues are
/// preserved. The window grows (8, 16, …) until the residue is reached or
/// the space between targets is exhausted (`ConstructionFailed`).
pub fn construct_alpha(plan: &IndexPlan) -> Result<ConstructedAlpha> {
    plan.validate()?;
    let k_max = plan.target_indices.last().copied().unwrap_or(0);
    // Working digit array a_1..a_{k_max+1}, 1-based via index-1 storage.
    let len = plan.forced_quotients.keys().max().copied().unwrap_or(0).max(k_max + 1);
    let mut digits = vec![1u64; len];
    for (&i, &a) in &plan.forced_quotients {
        digits[i - 1] = a;
    }
    let mut adjustments = BTreeMap::new();
    let mut search_radius = 0usize;

    if let Some((r, m)) = plan.congruence_class {
        let mut prev_target = 0usize;
        for &k in &plan.target_indices {
            let max_window = k - prev_target;
            let mut radius = 8.min(max_window);
            loop {
                match steer_residue(&digits, k, radius, r, m) {
                    Some(window) => {
                        for (i, d) in window {
                            if digits[i - 1] != d {
                                digits[i - 1] = d;
                                adjustments.insert(i, d);
                            }
                        }
                        search_radius = search_radius.max(radius);
                        break;
                    }
                    None if radius < max_window => radius = (radius * 2).min(max_window),
                    None => {
                        return Err(Error::ConstructionFailed(format!(
                            "q_{k} cannot reach residue {r} mod {m} with digits <= 3 \
                             in the {max_window} positions after index {prev_target}"
                        )))
                    }
                }
            }
            prev_target = k;
        }
    }

    // Meet the ratio bound at each target, deriving a_{k+1} when not forced.
    let mut digit_sum = 0u128;
    for k in 1..=k_max {
        digit_sum += digits[k - 1] as u128;
        if plan.target_indices.contains(&k) {
            let needed = (digit_sum as f64 / plan.ratio_threshold).ceil() as u64;
            let forced = plan.forced_quotients.get(&(k + 1));
            match forced {
                Some(&a) if (digit_sum as f64) / (a as f64) > plan.ratio_threshold => {
                    return Err(Error::ConstructionFailed(format!(
                        "forced a_{} = {a} leaves ratio {} above theta {}",
                        k + 1,
                        digit_sum as f64 / a as f64,
                        plan.ratio_threshold
                    )));
                }
                Some(_) => {}
                None => digits[k] = needed.max(1),
            }
        }
    }

    let forced: BTreeMap<usize, u64> = digits
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 1)
        .map(|(i, &d)| (i + 1, d))
        .collect();
    let spec = AlphaSpec::DigitRule {
        prefix: Vec::new(),
        tail: TailRule::Constant { value: 1 },
        forced,
    };
    spec.validate()?;
    Ok(ConstructedAlpha { spec, adjustments, search_radius })
}

/// Choose digits in (k−radius, k] from {1,2,3} (forced positions fixed) so
/// that q_k ≡ r (mod m); returns the lexicographically smallest choice.
fn steer_residue(
    digits: &[u64],
    k: usize,
    radius: usize,
    r: u64,
    m: u64,
) -> Option<Vec<(usize, u64)>> {
    let start = k - radius + 1; // first adjustable 1-based digit index
    // Exact state before the window: (q_{start-1} mod m, q_{start-2} mod m).
    let (mut q_hi, mut q_lo) = (1u64 % m, 0u64);
    for i in 1..start {
        let next = (digits[i - 1] % m * q_hi + q_lo) % m;
        q_lo = std::mem::replace(&mut q_hi, next);
    }
    // Forward DP keeping the smallest digit string reaching each state.
    let mut best: BTreeMap<(u64, u64), Vec<u64>> = BTreeMap::new();
    best.insert((q_hi, q_lo), Vec::new());
    for i in start..=k {
        let choices: &[u64] = if digits[i - 1] != 1 { &[] } else { &[1, 2, 3] };
        let mut next: BTreeMap<(u64, u64), Vec<u64>> = BTreeMap::new();
        for ((hi, lo), path) in &best {
            let opts = if choices.is_empty() { vec![digits[i - 1]] } else { choices.to_vec() };
            for d in opts {
                let state = ((d % m * hi + lo) % m, *hi);
                let mut p = path.clone();
                p.push(d);
                match next.get(&state) {
                    Some(existing) if *existing <= p => {}
                    _ => {
                        next.insert(state, p);
                    }
                }
            }
        }
        best = next;
    }
    best.iter()
        .find(|((qk, _), _)| *qk == r)
        .map(|(_, path)| (start..=k).zip(path.iter().copied()).collect())
}

/// Positive even indices k < digits.len() whose q_k passes `predicate` and
/// whose digit sum obeys Σ_{i≤k} a_i ≤ θ · a_{k+1}.
pub fn find_good_indices<P>(digits: &[u64], mut predicate: P, theta: f64) -> Vec<usize>
where
    P: FnMut(&BigInt) -> bool,
{
    let pq = convergent_pairs(digits);
    let mut out = Vec::new();
    let mut digit_sum = 0f64;
    for k in 1..digits.len() {
        digit_sum += digits[k - 1] as f64;
        if k % 2 == 0 && digit_sum <= theta * digits[k] as f64 && predicate(&pq[k].1) {
            out.push(k);
        }
    }
    out
}

/// Ensemble statistics over uniformly drawn rotation numbers.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricStats {
    pub sample_size: usize,
    pub k_depth: usize,
    /// Mean of log q_K / K; → π²/(12 log 2).
    pub mean_log_q_over_k: f64,
    /// Mean of (Σ_{ℓ≤K} a_ℓ − max a_ℓ)/(K log K / log 2); → 1. None at K = 1.
    pub mean_trimmed_ratio: Option<f64>,
    /// Samples whose expansion could not be certified and were redrawn.
    pub resampled: usize,
}

/// Draw `sample_size` uniform α's as 1024-bit fractions, expand each to
/// `k_depth` certified digits, and average the two metric statistics.
///
/// Deterministic for a given seed: each sample derives its own generator,
/// so the result is independent of thread count. A draw whose expansion
/// fails certification is redrawn (counted in `resampled`).
pub fn metric_stats(sample_size: usize, k_depth: usize, seed: u64) -> Result<MetricStats> {
    if sample_size == 0 || k_depth == 0 {
        return Err(Error::InvalidInput("sample size and depth must be >= 1".into()));
    }
    const BITS: u32 = 1024;
    let per_sample: Vec<(f64, f64, usize)> = (0..sample_size)
        .into_par_iter()
        .map(|j| {
            let mut resampled = 0usize;
            let digits = loop {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, (j as u64) << 8 | resampled as u64));
                let v = uniform_fraction(&mut rng, BITS);
                match literal_digits(&v, BITS, k_depth) {
                    Ok(d) => break d,
                    Err(_) => resampled += 1,
                }
            };
            let pq = convergent_pairs(&digits);
            let log_q = ln_big(pq[k_depth].1.magnitude());
            let sum: f64 = digits.iter().map(|&a| a as f64).sum();
            let max = digits.iter().copied().max().unwrap_or(1) as f64;
            (log_q / k_depth as f64, sum - max, resampled)
        })
        .collect();

    let mut kl = NeumaierSum::new();
    let mut trimmed = NeumaierSum::new();
    let mut resampled = 0usize;
    for (lq, tr, rs) in &per_sample {
        kl.add(*lq);
        trimmed.add(*tr);
        resampled += rs;
    }
    let n = sample_size as f64;
    let k = k_depth as f64;
    let mean_trimmed_ratio = if k_depth >= 2 {
        Some(trimmed.value() / n / (k * k.ln() / std::f64::consts::LN_2))
    } else {
        None
    };
    Ok(MetricStats {
        sample_size,
        k_depth,
        mean_log_q_over_k: kl.value() / n,
        mean_trimmed_ratio,
        resampled,
    })
}

/// Uniform fraction X/2^bits with X drawn from `bits` random bits.
fn uniform_fraction<R: Rng>(rng: &mut R, bits: u32) -> BigRational {
    let mut bytes = vec![0u8; (bits as usize) / 8];
    rng.fill(&mut bytes[..]);
    BigRational::new(BigInt::from(BigUint::from_bytes_le(&bytes)), BigInt::one() << bits)
}

/// Natural log of a positive big integer via its top 52 bits.
fn ln_big(x: &BigUint) -> f64 {
    let b = x.bits();
    if b <= 52 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = b - 52;
        let top = (x >> shift).to_f64().unwrap();
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// SplitMix64 stream: decorrelated per-sample seeds from one master seed.
fn splitmix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
