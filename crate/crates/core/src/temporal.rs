//! Temporal statistics of Birkhoff sums: empirical CDFs of S_N with N
//! drawn uniformly from {1..M}, the subsequence scales
//! M_ℓ = ⌊c·a_{n_ℓ+1}⌋q_{n_ℓ} + q_{n_ℓ} − 1 with normalization
//! B̃_M = M/q_n, Kolmogorov–Smirnov distances between empirical and
//! analytic laws, the isolated-multiplier sieve
//! {N : ∀j ‖Nβ_j‖ > δ}, and the refutation experiment: after affine
//! standardization the laws of g(U_{c₁}) and g(U_{c₂}) stay apart, so no
//! single normalization can produce a temporal distributional limit.

use crate::alpha::AlphaSpec;
use crate::birkhoff::{prefix_values, SumOptions};
use crate::cf::convergent_pairs;
use crate::error::{Error, Result};
use crate::limit_law::{bar_limits, g_closed_form, BarInput, BarMode, GLaw, PiecewiseQuadratic};
use crate::piecewise::{normal_form, CompiledFn, JumpFunction};
use crate::torus::TorusPoint;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Right-continuous nondecreasing CDF with a finite support hint.
pub trait Cdf {
    fn cdf_at(&self, x: f64) -> f64;
    /// Interval outside which the CDF is flat 0 or 1.
    fn span(&self) -> (f64, f64);
}

impl<T: Cdf + ?Sized> Cdf for &T {
    fn cdf_at(&self, x: f64) -> f64 {
        (**self).cdf_at(x)
    }

    fn span(&self) -> (f64, f64) {
        (**self).span()
    }
}

/// Sorted sample values defining F(x) = #{values ≤ x}/M.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalCDF {
    values: Vec<f64>,
}

impl EmpiricalCDF {
    pub fn from_samples(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("an empirical CDF needs at least one sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("empirical CDF samples must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalCDF { values })
    }

    pub fn sample_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|v| *v <= x) as f64 / self.values.len() as f64
    }

    /// Smallest sample value v with F(v) ≥ p.
    pub fn quantile(&self, p: f64) -> f64 {
        let m = self.values.len();
        let rank = ((p * m as f64).ceil() as usize).clamp(1, m);
        self.values[rank - 1]
    }

    /// Subtract the median and divide by the interquartile range.
    pub fn standardized(&self) -> Result<EmpiricalCDF> {
        let med = self.quantile(0.5);
        let iqr = self.quantile(0.75) - self.quantile(0.25);
        if iqr <= 0.0 {
            return Err(Error::DegenerateG("sample interquartile range is zero".into()));
        }
        EmpiricalCDF::from_samples(self.values.iter().map(|v| (v - med) / iqr).collect())
    }

    /// Associative merge of two sorted sample sets.
    pub fn merge(&self, other: &EmpiricalCDF) -> EmpiricalCDF {
        let (a, b) = (&self.values, &other.values);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        EmpiricalCDF { values: out }
    }
}

impl Cdf for EmpiricalCDF {
    fn cdf_at(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn span(&self) -> (f64, f64) {
        (self.values[0], *self.values.last().unwrap())
    }
}

impl Cdf for GLaw {
    fn cdf_at(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    fn span(&self) -> (f64, f64) {
        self.support()
    }
}

/// The law of center + scale·X for X ~ inner (scale > 0), exposed through
/// the standardizing map x ↦ inner.cdf(center + scale·x) when used with
/// center = −median/IQR conventions below.
#[derive(Clone, Debug)]
pub struct Standardized<C> {
    pub inner: C,
    pub center: f64,
    pub scale: f64,
}

impl<C: Cdf> Cdf for Standardized<C> {
    fn cdf_at(&self, x: f64) -> f64 {
        self.inner.cdf_at(self.center + self.scale * x)
    }

    fn span(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.span();
        ((lo - self.center) / self.scale, (hi - self.center) / self.scale)
    }
}

/// The law of factor·X for X ~ inner, factor > 0.
#[derive(Clone, Debug)]
pub struct ScaledLaw<C> {
    pub inner: C,
    pub factor: f64,
}

impl<C: Cdf> Cdf for ScaledLaw<C> {
    fn cdf_at(&self, x: f64) -> f64 {
        self.inner.cdf_at(x / self.factor)
    }

    fn span(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.span();
        (lo * self.factor, hi * self.factor)
    }
}

/// Exact sup distance between two empirical CDFs (merged staircase walk,
/// checking both the left limit and the value at every event point).
pub fn ks_distance(f: &EmpiricalCDF, g: &EmpiricalCDF) -> f64 {
    let (a, b) = (f.values(), g.values());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        d = d.max((i as f64 / na - j as f64 / nb).abs());
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Sup distance between two monotone CDFs by interval branch-and-bound:
/// on [l,r], |F−G| ≤ max of the endpoint gaps plus the smaller of the two
/// oscillations, so intervals that cannot beat the current best are cut.
pub fn ks_between<F: Cdf + ?Sized, G: Cdf + ?Sized>(f: &F, g: &G) -> f64 {
    let (fl, fh) = f.span();
    let (gl, gh) = g.span();
    let lo = fl.min(gl) - 1e-9;
    let hi = fh.max(gh) + 1e-9;
    let (flo, glo) = (f.cdf_at(lo), g.cdf_at(lo));
    let (fhi, ghi) = (f.cdf_at(hi), g.cdf_at(hi));
    let mut best = (flo - glo).abs().max((fhi - ghi).abs());
    let mut stack = vec![(lo, flo, glo, hi, fhi, ghi, 0u32)];
    while let Some((l, fl, gl, r, fr, gr, depth)) = stack.pop() {
        let bound = (fl - gl).abs().max((fr - gr).abs()) + (fr - fl).min(gr - gl);
        if bound <= best + 1e-7 || depth >= 60 {
            continue;
        }
        let m = 0.5 * (l + r);
        let (fm, gm) = (f.cdf_at(m), g.cdf_at(m));
        best = best.max((fm - gm).abs());
        stack.push((l, fl, gl, m, fm, gm, depth + 1));
        stack.push((m, fm, gm, r, fr, gr, depth + 1));
    }
    best
}

/// Centering and scaling applied to S_N before ranking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Normalization {
    Explicit { a: f64, b: f64 },
    /// A = 0, B = M/q_{n(M)} with q_{n(M)} ≤ M < q_{n(M)+1}.
    PaperTilde,
    /// A = 0, B = M/q_n at a pinned convergent index (resolves the
    /// boundary case c = 1 where M_ℓ itself passes q_{n_ℓ+1}).
    PaperTildeAt { n: usize },
}

impl Normalization {
    /// Resolve to concrete (A_M, B_M).
    pub fn resolve(&self, m: u64, alpha: &AlphaSpec) -> Result<(f64, f64)> {
        match self {
            Normalization::Explicit { a, b } => {
                if !(*b > 0.0) {
                    return Err(Error::InvalidInput("normalization scale B must be > 0".into()));
                }
                Ok((*a, *b))
            }
            Normalization::PaperTilde => {
                let mut k = 8usize;
                loop {
                    let digits = alpha.expand(k)?;
                    let pairs = convergent_pairs(&digits);
                    if pairs.last().unwrap().1 > BigInt::from(m) {
                        let n = pairs.partition_point(|(_, q)| q <= &BigInt::from(m)) - 1;
                        let q_n = pairs[n].1.to_f64().unwrap();
                        return Ok((0.0, m as f64 / q_n));
                    }
                    k *= 2;
                    if k > 1 << 20 {
                        return Err(Error::SizeLimit("q_n ladder exceeded 2^20 digits".into()));
                    }
                }
            }
            Normalization::PaperTildeAt { n } => {
                let digits = alpha.expand((*n).max(1))?;
                let pairs = convergent_pairs(&digits);
                let q_n = pairs[*n]
                    .1
                    .to_u64()
                    .ok_or_else(|| Error::SizeLimit("q_n does not fit in 64 bits".into()))?;
                if q_n > m {
                    return Err(Error::InvalidInput(format!(
                        "pinned index has q_n = {q_n} > M = {m}"
                    )));
                }
                Ok((0.0, m as f64 / q_n as f64))
            }
        }
    }
}

/// ECDF of (S_N − A_M)/B_M over N = 1..M, via one prefix-sum sweep.
pub fn temporal_ecdf(
    f: &CompiledFn,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    m: u64,
    norm: &Normalization,
    opts: &SumOptions,
) -> Result<EmpiricalCDF> {
    if m == 0 {
        return Err(Error::InvalidInput("temporal sampling needs M >= 1".into()));
    }
    let (a, b) = norm.resolve(m, alpha)?;
    let prefixes = prefix_values(f, alpha, x0, m, opts)?;
    EmpiricalCDF::from_samples(prefixes.iter().map(|s| (s - a) / b).collect())
}

/// The subsequence scale M_ℓ and its decomposition parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubsequenceM {
    pub n: usize,
    pub a_next: u64,
    pub q_n: u64,
    pub m: u64,
}

/// M_ℓ = ⌊c·a_{n+1}⌋·q_n + q_n − 1, exactly.
pub fn subsequence_m(c: &BigRational, n: usize, alpha: &AlphaSpec) -> Result<SubsequenceM> {
    if !(c.is_positive() && c <= &BigRational::from_integer(BigInt::from(1))) {
        return Err(Error::InvalidInput("c must lie in (0,1]".into()));
    }
    let digits = alpha.expand(n + 1)?;
    let pairs = convergent_pairs(&digits);
    let a_next = digits[n];
    let q_n = pairs[n]
        .1
        .to_u64()
        .ok_or_else(|| Error::SizeLimit("q_n does not fit in 64 bits".into()))?;
    let floor_ca = (c * BigRational::from_integer(BigInt::from(a_next)))
        .floor()
        .to_integer()
        .to_u64()
        .unwrap();
    let m = floor_ca
        .checked_mul(q_n)
        .and_then(|v| v.checked_add(q_n - 1))
        .ok_or_else(|| Error::SizeLimit("M_l overflows 64 bits".into()))?;
    Ok(SubsequenceM { n, a_next, q_n, m })
}

/// Members of {1 ≤ N ≤ N_max : ∀j ‖Nβ_j‖ > δ} with a density estimate.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplierReport {
    pub delta: f64,
    pub n_max: u64,
    pub members: Vec<u64>,
    pub density: f64,
    pub empty: bool,
}

/// Proof-side default δ = 1/(4ν), safely below the 1/(2ν) constraint.
pub fn default_isolation_delta(nu: usize) -> f64 {
    1.0 / (4.0 * nu as f64)
}

/// Sieve the isolated multipliers. Rational β get an exact residue table
/// modulo their denominator (the congruence pre-pass); irrational β are
/// tested in floating point, whose error stays below N_max·2⁻⁵² and is
/// negligible against any δ of interest.
pub fn isolated_multipliers(
    betas: &[BarInput],
    delta: f64,
    n_max: u64,
) -> Result<MultiplierReport> {
    if betas.is_empty() {
        return Err(Error::InvalidInput("at least one multiplier β is required".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("δ must be positive".into()));
    }
    if n_max == 0 || n_max > 10_000_000 {
        return Err(Error::SizeLimit("N_max must lie in [1, 10^7]".into()));
    }
    if delta >= 0.5 {
        // ‖·‖ ≤ 1/2 always: nothing qualifies
        return Ok(MultiplierReport { delta, n_max, members: Vec::new(), density: 0.0, empty: true });
    }
    let delta_rat = BigRational::from_float(delta).unwrap();
    let mut residue_tables: Vec<(u64, Vec<bool>)> = Vec::new();
    let mut numeric: Vec<f64> = Vec::new();
    for beta in betas {
        match beta {
            BarInput::Rational { value } => {
                if value.is_zero() {
                    return Err(Error::InvalidInput("multipliers β must be nonzero".into()));
                }
                let den = value.value().denom().to_u64();
                match den {
                    Some(d) if d <= 1_000_000 => {
                        let table: Vec<bool> = (0..d)
                            .map(|r| {
                                let v = TorusPoint::new(
                                    value.value() * BigRational::from_integer(BigInt::from(r)),
                                );
                                v.norm() > delta_rat
                            })
                            .collect();
                        residue_tables.push((d, table));
                    }
                    _ => numeric.push(value.to_f64()),
                }
            }
            BarInput::Certified { spec } => numeric.push(spec.approx_f64()?),
        }
    }
    let members: Vec<u64> = (1..=n_max)
        .filter(|&n| {
            residue_tables.iter().all(|(d, t)| t[(n % d) as usize])
                && numeric.iter().all(|&b| {
                    let f = (n as f64 * b).fract();
                    f.min(1.0 - f) > delta
                })
        })
        .collect();
    let density = members.len() as f64 / n_max as f64;
    Ok(MultiplierReport { delta, n_max, empty: members.is_empty(), members, density })
}

/// Whether the two standardized laws are distinguishable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Distinct,
    Same,
}

/// Outcome of the two-scale comparison of g(U_{c₁}) and g(U_{c₂}).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RefutationReport {
    pub c1: f64,
    pub c2: f64,
    pub eps: f64,
    pub delta: f64,
    pub ks_standardized: f64,
    pub ks_empirical_c1: f64,
    pub ks_empirical_c2: f64,
    pub verdict: Verdict,
}

/// First point t > 0 where g′ changes sign (g's first extremum).
fn first_extremum(pq: &PiecewiseQuadratic) -> Result<f64> {
    let mut edges: Vec<f64> = pq.breaks.clone();
    edges.extend(pq.stationary_points());
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut base = 0.0f64;
    for w in edges.windows(2) {
        let d = pq.derivative_at(0.5 * (w[0] + w[1]));
        let s = if d.abs() < 1e-12 { 0.0 } else { d.signum() };
        if s == 0.0 {
            continue;
        }
        if base == 0.0 {
            base = s;
        } else if s != base {
            return Ok(w[0]);
        }
    }
    Err(Error::DegenerateG("g has no interior extremum".into()))
}

/// The crossing of g with g(ε)/2 on the return branch right of ε.
fn half_value_crossing(pq: &PiecewiseQuadratic, eps: f64) -> Result<f64> {
    let target = pq.eval(eps) / 2.0;
    let mut lo = eps;
    let mut hi = 1.0;
    let f_lo = pq.eval(lo) - target;
    if (pq.eval(hi) - target).signum() == f_lo.signum() {
        return Err(Error::DegenerateG("g does not return through g(ε)/2".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (pq.eval(mid) - target).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Run the refutation experiment.
///
/// With c₁, c₂ unset, picks c₁ = ε (the first extremum of g, so g is
/// one monotone branch on [0,ε]) and c₂ = δ, the point past ε where g
/// has returned to half its extremal value (so [0,δ] covers the branch
/// and a distinct re-weighted stretch). Both analytic laws are
/// standardized by median/IQR; a standardized KS distance above 0.01
/// certifies that no affine normalization can match them. Each analytic
/// law is also cross-checked against the B̃-normalized empirical
/// temporal ECDF at M_ℓ(c), with the analytic side scaled by
/// κ = a_{n+1}·q_n/M_ℓ (the finite-scale gap between a_{n+1} and B̃).
pub fn tdlt_refutation(
    f: &JumpFunction,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    indices: &[usize],
    c_override: Option<(f64, f64)>,
    opts: &SumOptions,
) -> Result<RefutationReport> {
    let h = normal_form(f)?;
    let gamma_inputs: Vec<BarInput> =
        h.terms.iter().map(|t| BarInput::Rational { value: t.gamma.clone() }).collect();
    let bars = bar_limits(
        alpha,
        &BarInput::Rational { value: x0.clone() },
        &gamma_inputs,
        indices,
        BarMode::Exact,
    )?;
    let weights: Vec<f64> = h.terms.iter().map(|t| t.h).collect();
    let pq = g_closed_form(&weights, &bars)?;

    let eps = first_extremum(&pq)?;
    if pq.eval(eps).abs() < 1e-12 {
        return Err(Error::DegenerateG("g vanishes at its first extremum".into()));
    }
    let delta = half_value_crossing(&pq, eps)?;
    let (c1, c2) = c_override.unwrap_or((eps, delta));
    for c in [c1, c2] {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidInput("c values must lie in (0,1]".into()));
        }
    }
    let (lo, hi) = pq.range_on(c1.max(c2));
    if hi - lo <= 1e-12 {
        return Err(Error::DegenerateG("g is constant on [0, max(c1,c2)]".into()));
    }

    let law1 = GLaw::new(pq.clone(), c1)?;
    let law2 = GLaw::new(pq.clone(), c2)?;
    let std1 = Standardized { center: law1.median(), scale: law1.iqr()?, inner: &law1 };
    let std2 = Standardized { center: law2.median(), scale: law2.iqr()?, inner: &law2 };
    let ks_standardized = ks_between(&std1, &std2);
    let verdict = if ks_standardized > 0.01 { Verdict::Distinct } else { Verdict::Same };

    let n_l = *indices.last().unwrap();
    let cfn = h.compile()?;
    let mut empirical = [0.0f64; 2];
    for (slot, c) in empirical.iter_mut().zip([c1, c2]) {
        let cr = BigRational::from_float(c)
            .ok_or_else(|| Error::InvalidInput("c is not a finite number".into()))?;
        let sub = subsequence_m(&cr, n_l, alpha)?;
        let ecdf =
            temporal_ecdf(&cfn, alpha, x0, sub.m, &Normalization::PaperTildeAt { n: n_l }, opts)?;
        let aq = sub.a_next as f64 * sub.q_n as f64;
        let kappa = aq / sub.m as f64;
        let c_eff = (sub.m as f64 / aq).min(1.0);
        let law = ScaledLaw { inner: GLaw::new(pq.clone(), c_eff)?, factor: kappa };
        *slot = ks_between(&ecdf, &law);
    }

    Ok(RefutationReport {
        c1,
        c2,
        eps,
        delta,
        ks_standardized,
        ks_empirical_c1: empirical[0],
        ks_empirical_c2: empirical[1],
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::TailRule;
    use crate::birkhoff::birkhoff_sum;
    use crate::cf::{construct_alpha, IndexPlan};
    use crate::orbit::JumpPolicy;

    fn right_limit_opts() -> SumOptions {
        SumOptions { bits: None, policy: JumpPolicy::RightLimit }
    }

    fn digit_alpha(prefix: Vec<u64>) -> AlphaSpec {
        AlphaSpec::DigitRule {
            prefix,
            tail: TailRule::Constant { value: 1 },
            forced: Default::default(),
        }
    }

    #[test]
    fn single_sample_is_point_mass() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let ecdf = temporal_ecdf(
            &cfn,
            &AlphaSpec::golden(),
            &TorusPoint::zero(),
            1,
            &Normalization::Explicit { a: 0.0, b: 1.0 },
            &right_limit_opts(),
        )
        .unwrap();
        assert_eq!(ecdf.values(), &[-0.5]);
        assert_eq!(ecdf.eval(-0.5), 1.0);
        assert_eq!(ecdf.eval(-0.5 - 1e-12), 0.0);
    }

    #[test]
    fn ecdf_matches_direct_summation() {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let alpha = AlphaSpec::golden();
        let x0 = TorusPoint::from_ratio(1, 7);
        let opts = SumOptions::default();
        let m = 400u64;
        let ecdf = temporal_ecdf(
            &cfn,
            &alpha,
            &x0,
            m,
            &Normalization::Explicit { a: 0.0, b: 1.0 },
            &opts,
        )
        .unwrap();
        let mut direct: Vec<f64> =
            (1..=m).map(|n| birkhoff_sum(&cfn, &alpha, &x0, n, &opts).unwrap()).collect();
        direct.sort_by(f64::total_cmp);
        for (a, b) in ecdf.values().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn ks_of_identical_samples_is_zero() {
        let f = EmpiricalCDF::from_samples(vec![0.1, 0.4, 0.9]).unwrap();
        assert_eq!(ks_distance(&f, &f.clone()), 0.0);
    }

    #[test]
    fn ks_staircase_hand_case() {
        let f = EmpiricalCDF::from_samples(vec![1.0, 2.0]).unwrap();
        let g = EmpiricalCDF::from_samples(vec![1.5]).unwrap();
        assert!((ks_distance(&f, &g) - 0.5).abs() < 1e-15);
        let h = EmpiricalCDF::from_samples(vec![0.0]).unwrap();
        let k = EmpiricalCDF::from_samples(vec![1.0]).unwrap();
        assert_eq!(ks_distance(&h, &k), 1.0);
    }

    struct UniformCdf;

    impl Cdf for UniformCdf {
        fn cdf_at(&self, x: f64) -> f64 {
            x.clamp(0.0, 1.0)
        }

        fn span(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
    }

    #[test]
    fn point_mass_vs_uniform_ks_is_one() {
        let f = EmpiricalCDF::from_samples(vec![0.0]).unwrap();
        assert!((ks_between(&f, &UniformCdf) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn merge_equals_joint_sort() {
        let a = EmpiricalCDF::from_samples(vec![0.3, 0.1, 0.9]).unwrap();
        let b = EmpiricalCDF::from_samples(vec![0.2, 0.5]).unwrap();
        let joint =
            EmpiricalCDF::from_samples(vec![0.3, 0.1, 0.9, 0.2, 0.5]).unwrap();
        assert_eq!(a.merge(&b).values(), joint.values());
    }

    #[test]
    fn subsequence_formula_examples() {
        // digits [2,3,10]: q_0=1, q_1=2, q_2=7, a_3=10
        let alpha = digit_alpha(vec![2, 3, 10]);
        let one = BigRational::from_integer(BigInt::from(1));
        let sub = subsequence_m(&one, 2, &alpha).unwrap();
        assert_eq!((sub.a_next, sub.q_n, sub.m), (10, 7, 76));
        let small = BigRational::new(BigInt::from(1), BigInt::from(100));
        assert_eq!(subsequence_m(&small, 2, &alpha).unwrap().m, 6);
    }

    #[test]
    fn paper_tilde_normalization_resolves_index() {
        let alpha = AlphaSpec::golden();
        let (a, b) = Normalization::PaperTilde.resolve(100, &alpha).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 100.0 / 89.0).abs() < 1e-15);
        let r = Normalization::PaperTildeAt { n: 11 }.resolve(100, &alpha);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rational_multiplier_sieve() {
        let betas = [BarInput::Rational { value: TorusPoint::from_ratio(1, 3) }];
        let rep = isolated_multipliers(&betas, 0.1, 30).unwrap();
        assert_eq!(rep.members.len(), 20);
        assert!(rep.members.iter().all(|n| n % 3 != 0));
        assert!((rep.density - 2.0 / 3.0).abs() < 1e-12);
        assert!(!rep.empty);
    }

    #[test]
    fn delta_past_half_empties_the_sieve() {
        let betas = [BarInput::Rational { value: TorusPoint::from_ratio(1, 3) }];
        let rep = isolated_multipliers(&betas, 0.5, 30).unwrap();
        assert!(rep.empty && rep.members.is_empty() && rep.density == 0.0);
    }

    #[test]
    fn zero_multiplier_is_rejected() {
        let betas = [BarInput::Rational { value: TorusPoint::zero() }];
        assert!(matches!(
            isolated_multipliers(&betas, 0.1, 10),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn standardization_is_affine_invariant() {
        let base: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64 / 7.0).collect();
        let mapped: Vec<f64> = base.iter().map(|v| 3.5 * v - 11.0).collect();
        let s1 = EmpiricalCDF::from_samples(base).unwrap().standardized().unwrap();
        let s2 = EmpiricalCDF::from_samples(mapped).unwrap().standardized().unwrap();
        for (a, b) in s1.values().iter().zip(s2.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn test_alpha_a500() -> AlphaSpec {
        let plan = IndexPlan {
            target_indices: vec![6],
            forced_quotients: [(7usize, 500u64)].into_iter().collect(),
            congruence_class: None,
            ratio_threshold: 0.1,
        };
        construct_alpha(&plan).unwrap().spec
    }

    #[test]
    fn refutation_default_geometry_on_sawtooth() {
        let rep = tdlt_refutation(
            &JumpFunction::sawtooth(),
            &test_alpha_a500(),
            &TorusPoint::zero(),
            &[6],
            None,
            &right_limit_opts(),
        )
        .unwrap();
        // pure sawtooth: g = (x²−x)/2, vertex 1/2, half-value return at (1+√½)/2
        assert!((rep.eps - 0.5).abs() < 1e-9);
        assert!((rep.delta - (1.0 + 0.5f64.sqrt()) / 2.0).abs() < 1e-9);
        assert!(rep.eps < rep.delta);
        assert_eq!(rep.verdict, Verdict::Distinct);
        assert!(rep.ks_standardized > 0.01, "ks {}", rep.ks_standardized);
        assert!(rep.ks_empirical_c1 < 0.15, "emp1 {}", rep.ks_empirical_c1);
        assert!(rep.ks_empirical_c2 < 0.15, "emp2 {}", rep.ks_empirical_c2);
    }

    #[test]
    fn refutation_equal_cs_is_same() {
        let rep = tdlt_refutation(
            &JumpFunction::sawtooth(),
            &test_alpha_a500(),
            &TorusPoint::zero(),
            &[6],
            Some((0.5, 0.5)),
            &right_limit_opts(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Same);
        assert_eq!(rep.ks_standardized, 0.0);
    }
}
