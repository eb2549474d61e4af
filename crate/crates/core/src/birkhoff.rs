//! Birkhoff sums S_N(f, α, x₀) = Σ_{k=0}^{N−1} f(ι(x₀ + kα)), their
//! q_n-block structure, and the two classical bounds that control them:
//!
//!   |S_{q_n}| ≤ Var(f)                  (Denjoy–Koksma),
//!   |S_N| ≤ 2·Var(f)·Σ_{i≤k} a_i        (q_{k−1} ≤ N < q_k),
//!
//! together with the exact star discrepancy of the orbit. The explicit
//! constants are classical sharp forms adopted as test constants.
//!
//! Summation is deterministic: the orbit runs in exact fixed-point
//! arithmetic, terms accumulate in compensated (Neumaier) sums over fixed
//! 65536-term chunks, and chunk partials merge in index order, so results
//! are identical for any worker count. On a jump collision the working
//! precision is doubled, up to 4096 bits, before the error surfaces.

use crate::alpha::AlphaSpec;
use crate::cf::{convergent_pairs, ConvergentTable};
use crate::error::{Error, Result};
use crate::orbit::{default_bits, JumpPolicy, ScaledOrbit};
use crate::piecewise::CompiledFn;
use crate::sum::NeumaierSum;
use crate::torus::TorusPoint;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fixed accumulation chunk; results never depend on the worker count.
const CHUNK: u64 = 65536;

/// Largest precision the collision ladder will try.
const MAX_LADDER_BITS: u32 = 4096;

/// Guard for exact O(N log N) work on materialized orbits.
const MAX_EXACT_POINTS: u64 = 1_000_000;

/// Precision and jump handling for one summation run.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SumOptions {
    /// Working bits; `None` sizes them from N (64 + log₂(N+1) + 16).
    pub bits: Option<u32>,
    #[serde(default)]
    pub policy: JumpPolicy,
}

impl SumOptions {
    fn ladder(&self, n_steps: u64) -> Vec<u32> {
        let base = self.bits.unwrap_or_else(|| default_bits(n_steps));
        let mut out = vec![base];
        let mut b = base;
        while b < MAX_LADDER_BITS {
            b = (b * 2).min(MAX_LADDER_BITS);
            out.push(b);
        }
        out
    }
}

/// Run `body` at increasing precision until it stops raising JumpCollision.
fn with_ladder<T>(
    opts: &SumOptions,
    n_steps: u64,
    body: impl Fn(u32) -> Result<T>,
) -> Result<T> {
    let ladder = opts.ladder(n_steps);
    let last = ladder.len() - 1;
    for (i, &bits) in ladder.iter().enumerate() {
        match body(bits) {
            Err(Error::JumpCollision { .. }) if i < last => continue,
            other => return other,
        }
    }
    unreachable!("ladder is never empty")
}

/// S over k ∈ [from, to), parallel over fixed chunks, merged in order.
fn chunked_sum(orbit: &ScaledOrbit, from: u64, to: u64) -> Result<NeumaierSum> {
    let spans: Vec<(u64, u64)> = (from..to)
        .step_by(CHUNK as usize)
        .map(|s| (s, (s + CHUNK).min(to)))
        .collect();
    let partials: Vec<Result<NeumaierSum>> = spans
        .into_par_iter()
        .map(|(s, e)| {
            let mut acc = NeumaierSum::new();
            orbit.sweep(s, e, |_, x, idx| acc.add(orbit.term(idx, x)))?;
            Ok(acc)
        })
        .collect();
    let mut total = NeumaierSum::new();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

/// S_N(f, α, x₀): N terms from k = 0.
pub fn birkhoff_sum(
    cfn: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    n: u64,
    opts: &SumOptions,
) -> Result<f64> {
    sum_range(cfn, alpha, x0, 0, n, opts)
}

/// Σ_{k=from}^{to−1} f(ι(x₀ + kα)).
pub fn sum_range(
    cfn: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    from: u64,
    to: u64,
    opts: &SumOptions,
) -> Result<f64> {
    if to <= from {
        return Ok(0.0);
    }
    with_ladder(opts, to, |bits| {
        let orbit = ScaledOrbit::prepare(cfn, alpha, x0, bits, opts.policy)?;
        Ok(chunked_sum(&orbit, from, to)?.value())
    })
}

/// S_N at each checkpoint (sorted, deduplicated by the caller), in one
/// sequential sweep to max(N).
pub fn sums_at(
    cfn: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    checkpoints: &[u64],
    opts: &SumOptions,
) -> Result<Vec<f64>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("checkpoints must be strictly increasing".into()));
    }
    let Some(&n_max) = checkpoints.last() else {
        return Ok(Vec::new());
    };
    with_ladder(opts, n_max, |bits| {
        let orbit = ScaledOrbit::prepare(cfn, alpha, x0, bits, opts.policy)?;
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut acc = NeumaierSum::new();
        let mut next = 0usize;
        while next < checkpoints.len() && checkpoints[next] == 0 {
            out.push(0.0);
            next += 1;
        }
        orbit.sweep(0, n_max, |k, x, idx| {
            acc.add(orbit.term(idx, x));
            if next < checkpoints.len() && checkpoints[next] == k + 1 {
                out.push(acc.value());
                next += 1;
            }
        })?;
        Ok(out)
    })
}

/// All prefix sums S_1..S_M via a deterministic two-pass chunk scan:
/// chunk totals in parallel, exclusive offsets merged in order, then each
/// chunk re-swept in parallel writing offset-plus-local prefixes.
pub fn prefix_values(
    cfn: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    m: u64,
    opts: &SumOptions,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    if m > (1 << 24) {
        return Err(Error::SizeLimit(format!("prefix sweep of {m} values exceeds 2^24")));
    }
    with_ladder(opts, m, |bits| {
        let orbit = ScaledOrbit::prepare(cfn, alpha, x0, bits, opts.policy)?;
        let spans: Vec<(u64, u64)> =
            (0..m).step_by(CHUNK as usize).map(|s| (s, (s + CHUNK).min(m))).collect();
        let totals: Vec<Result<NeumaierSum>> = spans
            .par_iter()
            .map(|&(s, e)| {
                let mut acc = NeumaierSum::new();
                orbit.sweep(s, e, |_, x, idx| acc.add(orbit.term(idx, x)))?;
                Ok(acc)
            })
            .collect();
        let mut offsets = Vec::with_capacity(spans.len());
        let mut run = NeumaierSum::new();
        for t in totals {
            offsets.push(run.clone());
            run.merge(&t?);
        }
        let mut out = vec![0.0f64; m as usize];
        let errs: Vec<Result<()>> = out
            .par_chunks_mut(CHUNK as usize)
            .zip(spans.par_iter().zip(offsets.par_iter()))
            .map(|(slot, (&(s, e), off))| {
                let mut acc = *off;
                orbit.sweep(s, e, |k, x, idx| {
                    acc.add(orbit.term(idx, x));
                    slot[(k - s) as usize] = acc.value();
                })?;
                Ok(())
            })
            .collect();
        for r in errs {
            r?;
        }
        Ok(out)
    })
}

/// S_{q_n} started at the u-th block: S over k ∈ [u·q_n, (u+1)·q_n).
pub fn block_increment(
    cfn: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    u: u64,
    q_n: u64,
    opts: &SumOptions,
) -> Result<f64> {
    sum_range(cfn, alpha, x0, u * q_n, (u + 1) * q_n, opts)
}

/// N = b·q_n + rem with 0 ≤ rem < q_n, at the convergent index n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub n: usize,
    pub q_n: u64,
    pub b: u64,
    pub rem: u64,
}

/// Largest index n with q_n ≤ N (requires N ≥ 1 = q₀).
pub fn locate_index(table: &ConvergentTable, n_value: u64) -> Result<usize> {
    if n_value == 0 {
        return Err(Error::InvalidInput("N must be >= 1 to locate q_n <= N".into()));
    }
    let big = BigInt::from(n_value);
    let idx = table.rows.partition_point(|r| r.q <= big);
    if idx == 0 {
        return Err(Error::InvalidInput("convergent table starts above N".into()));
    }
    Ok(idx - 1)
}

/// Decompose N over the convergent ladder: n = n(N), b = ⌊N/q_n⌋.
pub fn block_decompose(table: &ConvergentTable, n_value: u64) -> Result<BlockDecomposition> {
    let n = locate_index(table, n_value)?;
    let q_n = table.rows[n]
        .q
        .to_u64()
        .ok_or_else(|| Error::SizeLimit("q_n does not fit in 64 bits".into()))?;
    Ok(BlockDecomposition { n, q_n, b: n_value / q_n, rem: n_value % q_n })
}

/// Outcome of the Denjoy–Koksma check |S_{q_n}| ≤ Var(f).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DenjoyKoksmaReport {
    pub n: usize,
    pub q_n: u64,
    pub abs_sum: f64,
    pub var: f64,
    pub pass: bool,
}

/// Check |S_{q_n}(f, α, x₀)| ≤ Var(f) (with 10⁻⁹ rounding slack).
pub fn denjoy_koksma_check(
    cfn: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    n: usize,
    opts: &SumOptions,
) -> Result<DenjoyKoksmaReport> {
    let table = ConvergentTable::new(alpha, n + 1, 64)?;
    let q_n = table.rows[n]
        .q
        .to_u64()
        .ok_or_else(|| Error::SizeLimit("q_n does not fit in 64 bits".into()))?;
    let s = birkhoff_sum(cfn, alpha, x0, q_n, opts)?;
    let var = cfn.total_variation();
    Ok(DenjoyKoksmaReport { n, q_n, abs_sum: s.abs(), var, pass: s.abs() <= var + 1e-9 })
}

/// Outcome of the partial-quotient bound |S_N| ≤ 2·Var·Σ_{i≤k} a_i.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuotientBoundReport {
    pub n_value: u64,
    pub k: usize,
    pub abs_sum: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Check |S_N| against 2·Var(f)·Σ_{i≤k} a_i where q_{k−1} ≤ N < q_k.
pub fn partial_quotient_bound_check(
    cfn: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    n_value: u64,
    opts: &SumOptions,
) -> Result<QuotientBoundReport> {
    if n_value == 0 {
        return Ok(QuotientBoundReport { n_value, k: 0, abs_sum: 0.0, bound: 0.0, pass: true });
    }
    // Expand until q_k > N; the digit sum then runs over i = 1..=k.
    let mut rows = 8;
    let (k, digits) = loop {
        let digits = alpha.expand(rows)?;
        let pq = convergent_pairs(&digits);
        if let Some(k) = (0..pq.len()).find(|&j| pq[j].1 > BigInt::from(n_value)) {
            break (k, digits);
        }
        rows *= 2;
    };
    let digit_sum: f64 = digits[..k].iter().map(|&a| a as f64).sum();
    let bound = 2.0 * cfn.total_variation() * digit_sum;
    let s = birkhoff_sum(cfn, alpha, x0, n_value, opts)?;
    Ok(QuotientBoundReport { n_value, k, abs_sum: s.abs(), bound, pass: s.abs() <= bound + 1e-9 })
}

/// Exact star discrepancy of points u_1..u_N via the sorted extremal form
///   D* = max_i max(i/N − u_(i), u_(i) − (i−1)/N).
pub fn star_discrepancy_of(points: &mut [f64]) -> f64 {
    let n = points.len() as f64;
    points.sort_by(f64::total_cmp);
    points
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let hi = (i + 1) as f64 / n - u;
            let lo = u - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Star discrepancy report; 2·D* bounds the two-sided interval form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StarDiscrepancy {
    pub n_points: u64,
    pub d_star: f64,
    pub two_d_star: f64,
}

/// Exact D* of {ι(x₀ + nα)}_{n=1..N}; N ≤ 10⁶ for the O(N log N) sort.
pub fn star_discrepancy(
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    n_points: u64,
    bits: Option<u32>,
) -> Result<StarDiscrepancy> {
    if n_points == 0 {
        return Err(Error::InvalidInput("discrepancy needs at least one point".into()));
    }
    if n_points > MAX_EXACT_POINTS {
        return Err(Error::SizeLimit(format!(
            "exact discrepancy capped at {MAX_EXACT_POINTS} points, got {n_points}"
        )));
    }
    let bits = bits.unwrap_or_else(|| default_bits(n_points + 1));
    let orbit = ScaledOrbit::prepare_points(alpha, x0, bits)?;
    let mut pts = Vec::with_capacity(n_points as usize);
    orbit.sweep(1, n_points + 1, |_, x, _| pts.push(x))?;
    let d_star = star_discrepancy_of(&mut pts);
    Ok(StarDiscrepancy { n_points, d_star, two_d_star: 2.0 * d_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::JumpFunction;

    fn opts() -> SumOptions {
        SumOptions::default()
    }

    #[test]
    fn empty_and_single_term_sums() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let a = AlphaSpec::golden();
        let x0 = TorusPoint::from_ratio(1, 4);
        assert_eq!(birkhoff_sum(&cfn, &a, &x0, 0, &opts()).unwrap(), 0.0);
        assert_eq!(birkhoff_sum(&cfn, &a, &x0, 1, &opts()).unwrap(), -0.25);
    }

    #[test]
    fn matches_naive_float_summation() {
        let cfn = JumpFunction::square_minus_third().compile().unwrap();
        let a = AlphaSpec::sqrt2_minus_1();
        let x0 = TorusPoint::from_ratio(1, 10);
        let s = birkhoff_sum(&cfn, &a, &x0, 5000, &opts()).unwrap();
        let alpha = 2f64.sqrt() - 1.0;
        let naive: f64 = (0..5000)
            .map(|k| {
                let x = (0.1 + k as f64 * alpha).rem_euclid(1.0);
                x * x - 1.0 / 3.0
            })
            .sum();
        assert!((s - naive).abs() < 1e-7);
    }

    #[test]
    fn denjoy_koksma_at_fibonacci_times() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let a = AlphaSpec::golden();
        let x0 = TorusPoint::zero();
        let o = SumOptions { bits: None, policy: JumpPolicy::RightLimit };
        for n in 1..=15 {
            let rep = denjoy_koksma_check(&cfn, &a, &x0, n, &o).unwrap();
            assert!(rep.pass, "n={n}: |S|={} var={}", rep.abs_sum, rep.var);
        }
        let ind = JumpFunction::indicator(TorusPoint::from_ratio(1, 3)).compile().unwrap();
        let x1 = TorusPoint::from_ratio(1, 10);
        for n in 1..=12 {
            assert!(denjoy_koksma_check(&ind, &a, &x1, n, &opts()).unwrap().pass);
        }
    }

    #[test]
    fn cocycle_identity() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let a = AlphaSpec::golden();
        let x0 = TorusPoint::from_ratio(3, 7);
        for (m, n) in [(13u64, 55u64), (100, 231), (1, 999)] {
            let whole = birkhoff_sum(&cfn, &a, &x0, m + n, &opts()).unwrap();
            let head = birkhoff_sum(&cfn, &a, &x0, m, &opts()).unwrap();
            let tail = sum_range(&cfn, &a, &x0, m, m + n, &opts()).unwrap();
            assert!((whole - head - tail).abs() < 1e-10);
        }
    }

    #[test]
    fn blocks_telescope() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let a = AlphaSpec::golden();
        let x0 = TorusPoint::from_ratio(1, 7);
        let q_n = 13u64; // q_6 for the golden ratio
        let b = 9u64;
        let mut acc = 0.0;
        for u in 0..b {
            acc += block_increment(&cfn, &a, &x0, u, q_n, &opts()).unwrap();
        }
        let direct = birkhoff_sum(&cfn, &a, &x0, b * q_n, &opts()).unwrap();
        assert!((acc - direct).abs() < 1e-10);
    }

    #[test]
    fn sums_at_agrees_with_separate_runs() {
        let cfn = JumpFunction::square_minus_third().compile().unwrap();
        let a = AlphaSpec::golden();
        let x0 = TorusPoint::from_ratio(2, 9);
        let cps = [0u64, 1, 13, 144, 610];
        let got = sums_at(&cfn, &a, &x0, &cps, &opts()).unwrap();
        for (i, &n) in cps.iter().enumerate() {
            let solo = birkhoff_sum(&cfn, &a, &x0, n, &opts()).unwrap();
            assert!((got[i] - solo).abs() < 1e-10, "N={n}");
        }
    }

    #[test]
    fn prefix_values_match_spot_sums() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let a = AlphaSpec::sqrt2_minus_1();
        let x0 = TorusPoint::from_ratio(1, 4);
        let m = 200_000u64;
        let pv = prefix_values(&cfn, &a, &x0, m, &opts()).unwrap();
        assert_eq!(pv.len(), m as usize);
        for n in [1u64, 2, 65_536, 65_537, 100_000, 199_999, 200_000] {
            let solo = birkhoff_sum(&cfn, &a, &x0, n, &opts()).unwrap();
            assert!((pv[(n - 1) as usize] - solo).abs() < 1e-9, "N={n}");
        }
    }

    #[test]
    fn shift_invariance_of_sums() {
        // S_N(f, x₀) = S_N(f(·−y₀), x₀+y₀) with jumps moved to γ+y₀
        let y0 = TorusPoint::from_ratio(2, 5);
        let f = JumpFunction::from_jump_data(vec![(TorusPoint::zero(), 1.0)]);
        let shifted = JumpFunction::from_jump_data(vec![(y0.clone(), 1.0)]);
        let a = AlphaSpec::golden();
        let x0 = TorusPoint::from_ratio(1, 9);
        let lhs = birkhoff_sum(&f.compile().unwrap(), &a, &x0, 500, &opts()).unwrap();
        let rhs = birkhoff_sum(&shifted.compile().unwrap(), &a, &x0.add(&y0), 500, &opts())
            .unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn quotient_bound_holds_at_thousand() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let rep = partial_quotient_bound_check(
            &cfn,
            &AlphaSpec::golden(),
            &TorusPoint::from_ratio(1, 3),
            1000,
            &opts(),
        )
        .unwrap();
        assert!(rep.pass);
        assert_eq!(rep.k, 16); // q_16 = 1597 > 1000 > q_15 = 987
        let zero = partial_quotient_bound_check(
            &cfn,
            &AlphaSpec::golden(),
            &TorusPoint::from_ratio(1, 3),
            0,
            &opts(),
        )
        .unwrap();
        assert!(zero.pass && zero.abs_sum == 0.0);
    }

    #[test]
    fn block_decomposition_is_exact() {
        let table = ConvergentTable::new(&AlphaSpec::golden(), 12, 64).unwrap();
        let d = block_decompose(&table, 100).unwrap();
        assert_eq!((d.q_n, d.b, d.rem), (89, 1, 11));
        assert_eq!(d.n, 10);
        assert!(locate_index(&table, 0).is_err());
    }

    #[test]
    fn star_discrepancy_formula_cases() {
        // single point at 1/2: D* = 1/2
        let mut one = vec![0.5];
        assert_eq!(star_discrepancy_of(&mut one), 0.5);
        // shifted lattice j/N + 1/(2N): D* = 1/(2N) + ... = 1/N at the ends
        let n = 100usize;
        let mut lattice: Vec<f64> =
            (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect();
        let d = star_discrepancy_of(&mut lattice);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        // lattice at j/N exactly: D* = 1/N
        let mut exact: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        assert!((star_discrepancy_of(&mut exact) - 1.0 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn orbit_discrepancy_decays_at_fibonacci_n() {
        let a = AlphaSpec::golden();
        let x0 = TorusPoint::zero();
        let d1 = star_discrepancy(&a, &x0, 55, None).unwrap().d_star;
        let d2 = star_discrepancy(&a, &x0, 6765, None).unwrap().d_star;
        assert!(d2 < d1 / 20.0, "D*({}) = {d1}, D*({}) = {d2}", 55, 6765);
        assert!(star_discrepancy(&a, &x0, 2_000_000, None).is_err());
    }
}
