//! The analytic limit of rescaled Birkhoff sums along q_n-blocks: the
//! limit points x̄₀ = lim ι(q_{n_ℓ} x₀), γ̄_i = lim ι(q_{n_ℓ} γ_i), the
//! closed-form limit function
//!
//!   g(x) = (Σ H_i)(∫₀^x ι(y+x̄₀) dy − x/2)
//!        + Σ H_i (∫₀^x 1_{[0,γ̄_i]}(y+x̄₀) dy − x·ι(γ̄_i)),
//!
//! the exact law of g(U_c) for U_c uniform on [0,c], and the finite-scale
//! convergence check sup_c |S_{⌊c·a_{n+1}⌋ q_n}/a_{n+1} − g(c)|.
//!
//! g is piecewise quadratic on [0,1]: the sawtooth integral contributes
//! x²/2 + ι(x̄₀)·x − max(0, x − (1−ι(x̄₀))) − x/2 and each indicator a
//! continuous piecewise-linear term. Slope changes at ι(−x̄₀) cancel
//! exactly between the sawtooth kink and the indicator entries, so g′
//! jumps only at the points ι(γ̄_i − x̄₀), and g(0) = g(1) = 0 are analytic
//! identities asserted after assembly.
//!
//! The centering in the indicator term is linear in x (x·ι(γ̄_i)); this is
//! the only reading under which g(1) = 0 holds, and it is the one the
//! block-decomposition argument uses.

use crate::alpha::AlphaSpec;
use crate::birkhoff::{sums_at, SumOptions};
use crate::cf::convergent_pairs;
use crate::error::{Error, Result};
use crate::piecewise::NormalForm;
use crate::torus::TorusPoint;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A point whose bar limit is requested: an exact rational or a certified
/// irrational (same enclosure interface as rotation numbers).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BarInput {
    Rational { value: TorusPoint },
    Certified { spec: AlphaSpec },
}

/// How the bar limits were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Certainty {
    /// Forced by a congruence q_{n_ℓ} ≡ r (mod denominator): exact.
    Exact,
    /// Mean of a numeric cluster of ι(q_{n_ℓ}·v) with the given radius.
    Clustered { radius: f64 },
}

/// The limit points feeding g, with their provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarLimits {
    pub x0_bar: TorusPoint,
    pub gamma_bars: Vec<TorusPoint>,
    /// Convergent indices n_ℓ the limits were taken along.
    pub indices: Vec<usize>,
    pub certainty: Certainty,
}

/// Parameters of the law of g(U_c).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitLawParams {
    /// Jump heights H_i, aligned with `bars.gamma_bars`.
    pub h: Vec<f64>,
    pub bars: BarLimits,
    /// Right endpoint of U_c's support, in (0,1].
    pub c: f64,
}

impl LimitLawParams {
    pub fn validate(&self) -> Result<()> {
        if self.h.len() != self.bars.gamma_bars.len() {
            return Err(Error::InvalidInput("one γ̄ per jump height required".into()));
        }
        if self.h.iter().map(|v| v.abs()).sum::<f64>() == 0.0 {
            return Err(Error::NoJump);
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::InvalidInput("c must lie in (0,1]".into()));
        }
        Ok(())
    }
}

/// Requested derivation mode for bar limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarMode {
    Exact,
    Clustered,
}

/// Compute x̄₀ and the γ̄_i along the subsequence n_ℓ.
///
/// Exact mode requires rational inputs p/d and a constant residue
/// q_{n_ℓ} mod d over the subsequence, which then forces
/// ι(q_{n_ℓ}·p/d) = ι(r·p/d) for every ℓ. Clustered mode evaluates
/// ι(q_{n_ℓ}·v) numerically and accepts the tail cluster when its radius
/// is at most 10⁻³, refusing otherwise (`NoConvergence`).
pub fn bar_limits(
    alpha: &AlphaSpec,
    x0: &BarInput,
    gammas: &[BarInput],
    indices: &[usize],
    mode: BarMode,
) -> Result<BarLimits> {
    if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("indices must be nonempty and increasing".into()));
    }
    let max_n = *indices.last().unwrap();
    let digits = alpha.expand(max_n.max(1))?;
    let pq = convergent_pairs(&digits);
    let qs: Vec<&BigInt> = indices.iter().map(|&n| &pq[n].1).collect();

    let resolve = |input: &BarInput| -> Result<(TorusPoint, f64)> {
        match (mode, input) {
            (BarMode::Exact, BarInput::Rational { value }) => {
                let d = value.value().denom().clone();
                let residues: Vec<BigInt> =
                    qs.iter().map(|q| (*q) % &d).collect();
                if residues.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::InvalidInput(format!(
                        "q_n mod {d} is not constant on the subsequence; \
                         steer the congruence or use clustered mode"
                    )));
                }
                let bar =
                    TorusPoint::new(value.value() * BigRational::from_integer(residues[0].clone()));
                Ok((bar, 0.0))
            }
            (BarMode::Exact, BarInput::Certified { .. }) => Err(Error::InvalidInput(
                "exact bar limits need rational inputs; use clustered mode".into(),
            )),
            (BarMode::Clustered, input) => {
                if indices.len() < 8 {
                    return Err(Error::InvalidInput(
                        "clustered bar limits need at least 8 indices".into(),
                    ));
                }
                let values: Vec<f64> = qs
                    .iter()
                    .map(|q| match input {
                        BarInput::Rational { value } => Ok(TorusPoint::new(
                            value.value() * BigRational::from_integer((*q).clone()),
                        )
                        .to_f64()),
                        BarInput::Certified { spec } => fractional_multiple(spec, q),
                    })
                    .collect::<Result<_>>()?;
                cluster_tail(&values)
            }
        }
    };

    let (x0_bar, r0) = resolve(x0)?;
    let mut radius = r0;
    let mut gamma_bars = Vec::with_capacity(gammas.len());
    for g in gammas {
        let (bar, r) = resolve(g)?;
        radius = radius.max(r);
        gamma_bars.push(bar);
    }
    let certainty = match mode {
        BarMode::Exact => Certainty::Exact,
        BarMode::Clustered => Certainty::Clustered { radius },
    };
    Ok(BarLimits { x0_bar, gamma_bars, indices: indices.to_vec(), certainty })
}

/// Certified ι(q·v) for an irrational v, accurate to ~2^-60.
fn fractional_multiple(spec: &AlphaSpec, q: &BigInt) -> Result<f64> {
    let q_bits = q.bits() as u32;
    let (lo, hi) = spec.enclosure(q_bits + 64)?;
    let qr = BigRational::from_integer(q.clone());
    let (a, b) = (&qr * &lo, &qr * &hi);
    if a.floor() != b.floor() {
        // the multiple straddles an integer; retry once, much sharper
        let (lo, hi) = spec.enclosure(q_bits + 128)?;
        let (a, b) = (&qr * &lo, &qr * &hi);
        if a.floor() != b.floor() {
            return Err(Error::PrecisionExhausted(format!(
                "ι({q}·v) sits on an integer boundary beyond certification"
            )));
        }
        return Ok((&a - a.floor()).to_f64().unwrap());
    }
    Ok((&a - a.floor()).to_f64().unwrap())
}

/// Accept the tail half of the values as a cluster of radius ≤ 10⁻³.
fn cluster_tail(values: &[f64]) -> Result<(TorusPoint, f64)> {
    let tail = &values[values.len() - (values.len() / 2).max(4)..];
    // try the raw coordinates, then recentered by 1/2 for wrap clusters
    for shift in [0.0, 0.5] {
        let shifted: Vec<f64> = tail.iter().map(|v| (v + shift).rem_euclid(1.0)).collect();
        let lo = shifted.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = shifted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 2e-3 {
            let mean = shifted.iter().sum::<f64>() / shifted.len() as f64 - shift;
            let radius = (hi - lo) / 2.0;
            return Ok((TorusPoint::new(BigRational::from_float(mean.rem_euclid(1.0)).unwrap()), radius));
        }
    }
    Err(Error::NoConvergence(
        "ι(q_n·v) does not cluster within 10⁻³ on the tail; pass a longer subsequence".into(),
    ))
}

/// g on [0,1] as contiguous quadratic pieces A y² + B y + C.
#[derive(Clone, Debug, Serialize)]
pub struct PiecewiseQuadratic {
    /// 0 = breaks[0] < … < breaks[m] = 1.
    pub breaks: Vec<f64>,
    /// Per piece, Horner order [C, B, A].
    pub coeffs: Vec<[f64; 3]>,
}

impl PiecewiseQuadratic {
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.piece_of(x);
        let [c, b, a] = self.coeffs[i];
        (a * x + b) * x + c
    }

    fn piece_of(&self, x: f64) -> usize {
        if x >= 1.0 {
            return self.coeffs.len() - 1;
        }
        self.breaks.partition_point(|&b| b <= x).max(1) - 1
    }

    /// One-sided derivative at x (right-sided at breakpoints).
    pub fn derivative_at(&self, x: f64) -> f64 {
        let [_, b, a] = self.coeffs[self.piece_of(x)];
        2.0 * a * x + b
    }

    /// Interior stationary points (vertex of a piece inside the piece).
    pub fn stationary_points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, [_, b, a]) in self.coeffs.iter().enumerate() {
            if *a != 0.0 {
                let v = -b / (2.0 * a);
                if v > self.breaks[i] && v < self.breaks[i + 1] {
                    out.push(v);
                }
            }
        }
        out
    }

    /// min and max of g over [0, c].
    pub fn range_on(&self, c: f64) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut consider = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };
        consider(self.eval(0.0));
        consider(self.eval(c));
        for (i, [_, b, a]) in self.coeffs.iter().enumerate() {
            let (pl, ph) = (self.breaks[i], self.breaks[i + 1].min(c));
            if ph <= pl {
                continue;
            }
            consider(self.eval(ph));
            if *a != 0.0 {
                let v = -b / (2.0 * a);
                if v > pl && v < ph {
                    consider(self.eval(v));
                }
            }
        }
        (lo, hi)
    }
}

/// Assemble g from jump heights and bar limits.
///
/// Breakpoints are formed in exact rationals ({ι(γ̄_i − x̄₀)} ∪ {ι(−x̄₀)}
/// ∪ {0,1}), deduplicated exactly, and required to be separated by more
/// than 10⁻⁹ before any root solving happens on the pieces.
pub fn g_closed_form(h: &[f64], bars: &BarLimits) -> Result<PiecewiseQuadratic> {
    if h.len() != bars.gamma_bars.len() {
        return Err(Error::InvalidInput("one γ̄ per jump height required".into()));
    }
    if h.iter().map(|v| v.abs()).sum::<f64>() == 0.0 {
        return Err(Error::NoJump);
    }
    let a = &bars.x0_bar;
    let af = a.to_f64();
    let s: f64 = h.iter().sum();

    let mut cuts: Vec<BigRational> = vec![BigRational::zero()];
    if !a.is_zero() {
        cuts.push(a.clone().neg().value().clone());
    }
    for (hi, gb) in h.iter().zip(&bars.gamma_bars) {
        if *hi != 0.0 && !gb.is_zero() {
            let cut = TorusPoint::new(gb.value() - a.value());
            if !cut.is_zero() {
                cuts.push(cut.value().clone());
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut breaks: Vec<f64> = cuts.iter().map(|r| r.to_f64().unwrap()).collect();
    breaks.push(1.0);
    for w in breaks.windows(2) {
        if w[1] - w[0] <= 1e-9 {
            return Err(Error::DegenerateG(format!(
                "g breakpoints {} and {} are closer than 1e-9",
                w[0], w[1]
            )));
        }
    }

    let one = BigRational::from_integer(BigInt::from(1));
    let two = BigRational::from_integer(BigInt::from(2));
    let mut coeffs: Vec<[f64; 3]> = Vec::with_capacity(cuts.len());
    let mut c_run = 0.0f64; // continuity constant, g(0) = 0
    for (j, lo) in cuts.iter().enumerate() {
        let hi_cut = if j + 1 < cuts.len() { cuts[j + 1].clone() } else { one.clone() };
        let mid = (lo + &hi_cut) / &two;
        // sawtooth slope: S(x + a − u − 1/2), u = [mid > 1 − a]
        let u = if mid > &one - a.value() { 1.0 } else { 0.0 };
        let mut b = s * (af - u - 0.5);
        for (hi, gb) in h.iter().zip(&bars.gamma_bars) {
            if *hi == 0.0 || gb.is_zero() {
                continue;
            }
            let pos = TorusPoint::new(&mid + a.value());
            let ind = if pos.value() <= gb.value() { 1.0 } else { 0.0 };
            b += hi * (ind - gb.to_f64());
        }
        // continuity pins C: the previous piece ends at value c_run
        let a2 = s / 2.0;
        let lof = breaks[j];
        let c0 = c_run - (a2 * lof + b) * lof;
        coeffs.push([c0, b, a2]);
        let hif = breaks[j + 1];
        c_run = (a2 * hif + b) * hif + c0;
    }
    let g1 = c_run;
    let scale = 1.0 + h.iter().map(|v| v.abs()).sum::<f64>();
    if g1.abs() > 1e-9 * scale {
        return Err(Error::DegenerateG(format!("g(1) = {g1:.3e}, expected 0")));
    }
    Ok(PiecewiseQuadratic { breaks, coeffs })
}

/// The exact law of g(U_c).
#[derive(Clone, Debug)]
pub struct GLaw {
    pub pq: PiecewiseQuadratic,
    pub c: f64,
}

impl GLaw {
    pub fn new(pq: PiecewiseQuadratic, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidInput("c must lie in (0,1]".into()));
        }
        Ok(GLaw { pq, c })
    }

    /// P[g(U_c) ≤ x] = Leb{y ∈ [0,c] : g(y) ≤ x} / c.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut measure = 0.0;
        for (i, [c0, b, a]) in self.pq.coeffs.iter().enumerate() {
            let lo = self.pq.breaks[i];
            let hi = self.pq.breaks[i + 1].min(self.c);
            if hi <= lo {
                continue;
            }
            measure += leq_measure(*a, *b, c0 - x, lo, hi);
        }
        measure / self.c
    }

    /// Smallest x with F(x) ≥ p, to absolute tolerance 10⁻¹³.
    pub fn quantile(&self, p: f64) -> f64 {
        let (min, max) = self.support();
        let (mut lo, mut hi) = (min - 1e-12, max);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Interquartile range; errors if the law is concentrated enough to
    /// make it vanish (no usable scale).
    pub fn iqr(&self) -> Result<f64> {
        let w = self.quantile(0.75) - self.quantile(0.25);
        if w <= 1e-12 {
            return Err(Error::DegenerateG("interquartile range is zero".into()));
        }
        Ok(w)
    }

    /// [min, max] of g on [0, c].
    pub fn support(&self) -> (f64, f64) {
        self.pq.range_on(self.c)
    }
}

/// Lebesgue measure of {y ∈ [lo, hi] : a y² + b y + d ≤ 0}.
fn leq_measure(a: f64, b: f64, d: f64, lo: f64, hi: f64) -> f64 {
    let clip = |l: f64, h: f64| (h.min(hi) - l.max(lo)).max(0.0);
    if a == 0.0 {
        if b == 0.0 {
            return if d <= 0.0 { hi - lo } else { 0.0 };
        }
        let r = -d / b;
        return if b > 0.0 { clip(f64::NEG_INFINITY, r) } else { clip(r, f64::INFINITY) };
    }
    let disc = b * b - 4.0 * a * d;
    if disc <= 0.0 {
        // no real crossing: sign is a's everywhere
        return if a < 0.0 { hi - lo } else { 0.0 };
    }
    let sq = disc.sqrt();
    let (r1, r2) = {
        let ra = (-b - sq) / (2.0 * a);
        let rb = (-b + sq) / (2.0 * a);
        (ra.min(rb), ra.max(rb))
    };
    if a > 0.0 {
        clip(r1, r2)
    } else {
        clip(f64::NEG_INFINITY, r1) + clip(r2, f64::INFINITY)
    }
}

/// One subsequence entry of the finite-scale convergence check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaReportRow {
    pub n: usize,
    pub a_next: u64,
    pub q_n: u64,
    pub sup_error: f64,
    pub c_at_sup: f64,
}

/// For each n_ℓ, sup over the c-grid (equispaced points plus every
/// breakpoint of g) of |S_{⌊c·a_{n+1}⌋·q_n}(h, α, x₀)/a_{n+1} − g(c)|.
pub fn lemma_convergence_report(
    h: &NormalForm,
    alpha: &AlphaSpec,
    x0: &TorusPoint,
    bars: &BarLimits,
    grid: usize,
    opts: &SumOptions,
) -> Result<Vec<LemmaReportRow>> {
    if grid < 2 {
        return Err(Error::InvalidInput("c-grid needs at least two points".into()));
    }
    let weights: Vec<f64> = h.terms.iter().map(|t| t.h).collect();
    let pq = g_closed_form(&weights, bars)?;
    let cfn = h.compile()?;

    let max_n = *bars.indices.last().unwrap();
    let digits = alpha.expand(max_n + 1)?;
    let pairs = convergent_pairs(&digits);

    let mut cs: Vec<f64> = (0..grid).map(|j| j as f64 / (grid - 1) as f64).collect();
    cs.extend(pq.breaks.iter().copied());
    cs.sort_by(f64::total_cmp);
    cs.dedup();

    let rows: Vec<Result<LemmaReportRow>> = bars
        .indices
        .par_iter()
        .map(|&n| {
            let q_n = pairs[n]
                .1
                .to_u64()
                .ok_or_else(|| Error::SizeLimit("q_n does not fit in 64 bits".into()))?;
            let a_next = digits[n];
            let ns: Vec<u64> =
                cs.iter().map(|&c| (c * a_next as f64).floor() as u64 * q_n).collect();
            let mut unique = ns.clone();
            unique.sort_unstable();
            unique.dedup();
            let nonzero: Vec<u64> = unique.iter().copied().filter(|&v| v > 0).collect();
            let sums = sums_at(&cfn, alpha, x0, &nonzero, opts)?;
            let lookup = |nv: u64| -> f64 {
                if nv == 0 {
                    0.0
                } else {
                    sums[nonzero.binary_search(&nv).unwrap()]
                }
            };
            let mut sup = (0.0f64, 0.0f64);
            for (c, nv) in cs.iter().zip(&ns) {
                let err = (lookup(*nv) / a_next as f64 - pq.eval(*c)).abs();
                if err > sup.0 {
                    sup = (err, *c);
                }
            }
            Ok(LemmaReportRow { n, a_next, q_n, sup_error: sup.0, c_at_sup: sup.1 })
        })
        .collect();
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{construct_alpha, IndexPlan};
    use crate::orbit::JumpPolicy;
    use crate::piecewise::{normal_form, JumpFunction};

    fn exact_bars(x0_bar: TorusPoint, gamma_bars: Vec<TorusPoint>) -> BarLimits {
        BarLimits { x0_bar, gamma_bars, indices: vec![2], certainty: Certainty::Exact }
    }

    #[test]
    fn pure_sawtooth_g_is_centered_parabola() {
        let bars = exact_bars(TorusPoint::zero(), vec![TorusPoint::zero()]);
        let pq = g_closed_form(&[1.0], &bars).unwrap();
        assert_eq!(pq.coeffs.len(), 1);
        assert!((pq.eval(0.5) + 0.125).abs() < 1e-15);
        assert!(pq.eval(0.0).abs() < 1e-15 && pq.eval(1.0).abs() < 1e-15);
    }

    #[test]
    fn indicator_at_half_adds_tent() {
        // H=[1,1]: sawtooth plus indicator with γ̄ = 1/2, x̄₀ = 0
        let bars = exact_bars(
            TorusPoint::zero(),
            vec![TorusPoint::zero(), TorusPoint::from_ratio(1, 2)],
        );
        let pq = g_closed_form(&[1.0, 1.0], &bars).unwrap();
        // hand value: saw gives 2·(x²−x)/2 at x=1/2 → −1/4; tent gives +1/4
        let saw_part = 2.0 * (0.25 - 0.5) / 2.0;
        assert!((pq.eval(0.5) - (saw_part + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn single_indicator_with_unit_total_matches_example() {
        // ∑H = 1 carried entirely by one indicator at γ̄ = 1/2: g(1/2) = 1/8
        let bars = exact_bars(TorusPoint::zero(), vec![TorusPoint::from_ratio(1, 2)]);
        let pq = g_closed_form(&[1.0], &bars).unwrap();
        assert!((pq.eval(0.5) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn shifted_start_moves_the_kink() {
        // x̄₀ = 1/2, pure sawtooth: g(x) = x²/2 − max(0, x−1/2)
        let bars = exact_bars(TorusPoint::from_ratio(1, 2), vec![TorusPoint::zero()]);
        let pq = g_closed_form(&[1.0], &bars).unwrap();
        assert!((pq.eval(0.5) - 0.125).abs() < 1e-12);
        assert!((pq.eval(0.75) - (0.28125 - 0.25)).abs() < 1e-12);
        assert!(pq.eval(1.0).abs() < 1e-12);
        assert_eq!(pq.coeffs.len(), 2);
    }

    #[test]
    fn sawtooth_cdf_is_analytic_root() {
        let bars = exact_bars(TorusPoint::zero(), vec![TorusPoint::zero()]);
        let law = GLaw::new(g_closed_form(&[1.0], &bars).unwrap(), 1.0).unwrap();
        assert!((law.cdf(-1.0 / 32.0) - 3f64.sqrt() / 2.0).abs() < 1e-12);
        let (min, max) = law.support();
        assert!((min + 0.125).abs() < 1e-12 && max.abs() < 1e-12);
        assert_eq!(law.cdf(max + 1e-9), 1.0);
        assert_eq!(law.cdf(min - 1.0), 0.0);
    }

    #[test]
    fn sawtooth_law_quartiles() {
        let bars = exact_bars(TorusPoint::zero(), vec![TorusPoint::zero()]);
        let law = GLaw::new(g_closed_form(&[1.0], &bars).unwrap(), 1.0).unwrap();
        assert!((law.median() + 3.0 / 32.0).abs() < 1e-9);
        assert!((law.iqr().unwrap() - 1.0 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn non_constancy_of_g() {
        for (h, gb) in [
            (vec![1.0], vec![TorusPoint::zero()]),
            (vec![-1.0, 1.0], vec![TorusPoint::zero(), TorusPoint::from_ratio(1, 3)]),
        ] {
            let pq = g_closed_form(&h, &exact_bars(TorusPoint::zero(), gb)).unwrap();
            let (lo, hi) = pq.range_on(1.0);
            assert!(hi - lo > 0.0);
        }
    }

    #[test]
    fn bar_limits_exact_by_congruence() {
        let plan = IndexPlan {
            target_indices: vec![4, 8],
            forced_quotients: Default::default(),
            congruence_class: Some((1, 3)),
            ratio_threshold: f64::INFINITY,
        };
        let alpha = construct_alpha(&plan).unwrap().spec;
        let bars = bar_limits(
            &alpha,
            &BarInput::Rational { value: TorusPoint::from_ratio(1, 3) },
            &[BarInput::Rational { value: TorusPoint::zero() }],
            &[4, 8],
            BarMode::Exact,
        )
        .unwrap();
        assert_eq!(bars.x0_bar, TorusPoint::from_ratio(1, 3));
        assert!(bars.gamma_bars[0].is_zero());
        assert_eq!(bars.certainty, Certainty::Exact);
    }

    #[test]
    fn bar_limits_exact_refuses_mixed_residues() {
        // golden q_k mod 3 is not constant on {2, 6}: q_2 = 2, q_6 = 13
        let r = bar_limits(
            &AlphaSpec::golden(),
            &BarInput::Rational { value: TorusPoint::from_ratio(1, 3) },
            &[],
            &[2, 6],
            BarMode::Exact,
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn clustered_bars_detect_decaying_fractional_parts() {
        // ι(q_n·(√2−1)) = δ_n → 0 along even n for α = √2−1 itself
        let alpha = AlphaSpec::sqrt2_minus_1();
        let idx: Vec<usize> = (8..=22).step_by(2).collect();
        let bars = bar_limits(
            &alpha,
            &BarInput::Rational { value: TorusPoint::zero() },
            &[BarInput::Certified { spec: AlphaSpec::sqrt2_minus_1() }],
            &idx,
            BarMode::Clustered,
        )
        .unwrap();
        match bars.certainty {
            Certainty::Clustered { radius } => assert!(radius <= 1e-3),
            _ => panic!("expected clustered certainty"),
        }
        assert!(bars.gamma_bars[0].to_f64() < 1e-3);
    }

    #[test]
    fn clustered_bars_refuse_equidistributed_values() {
        let idx: Vec<usize> = (2..=16).step_by(2).collect();
        let r = bar_limits(
            &AlphaSpec::golden(),
            &BarInput::Rational { value: TorusPoint::zero() },
            &[BarInput::Certified { spec: AlphaSpec::sqrt2_minus_1() }],
            &idx,
            BarMode::Clustered,
        );
        assert!(matches!(r, Err(Error::NoConvergence(_))));
    }

    #[test]
    fn lemma_report_small_scale() {
        let plan = IndexPlan {
            target_indices: vec![6],
            forced_quotients: [(7usize, 500u64)].into_iter().collect(),
            congruence_class: None,
            ratio_threshold: 0.1,
        };
        let alpha = construct_alpha(&plan).unwrap().spec;
        let h = normal_form(&JumpFunction::sawtooth()).unwrap();
        let bars = bar_limits(
            &alpha,
            &BarInput::Rational { value: TorusPoint::zero() },
            &[BarInput::Rational { value: TorusPoint::zero() }],
            &[6],
            BarMode::Exact,
        )
        .unwrap();
        let opts = SumOptions { bits: None, policy: JumpPolicy::RightLimit };
        let rows = lemma_convergence_report(&h, &alpha, &TorusPoint::zero(), &bars, 51, &opts)
            .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].a_next, 500);
        assert_eq!(rows[0].q_n, 13);
        assert!(rows[0].sup_error < 0.1, "sup error {}", rows[0].sup_error);
    }
}
