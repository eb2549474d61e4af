//! Mean-zero piecewise-smooth circle functions and their reduction to the
//! sawtooth-plus-indicators normal form.
//!
//! A function is given by declared jump data {(γ_i, H_i)} with
//! H_i = lim_{δ→0}[f(γ_i−δ) − f(γ_i+δ)], plus an optional list of
//! polynomial pieces on [0,1). When the pieces are absent the function is
//! the canonical mean-zero representative with exactly those jumps,
//!
//!   h(x) = (Σ H_i)(ι(x) − 1/2) + Σ H_i (1_{[0,γ_i)}(x) − ι(γ_i)),
//!
//! which is also the normal form every valid input reduces to: Birkhoff
//! sums of f and of h differ by O_f(1), so h carries all the distributional
//! content. Functions are right-continuous at jumps (1_{[0,γ)} is 1 at 0
//! and 0 at γ).
//!
//! Total variation is computed exactly: slope contributions per piece via
//! monotone decomposition of the polynomial, plus jump magnitudes merged at
//! coincident points before absolute values are taken (so a sawtooth and an
//! indicator cancel their opposite jumps at 0).

use crate::error::{Error, Result};
use crate::torus::TorusPoint;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// One declared discontinuity: position γ and size H = f(γ⁻) − f(γ⁺).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpSpec {
    pub gamma: TorusPoint,
    #[serde(rename = "H")]
    pub h: f64,
}

/// One polynomial piece: f(x) = Σ coeffs[j]·x^j for ι(x) ∈ [start, next).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothPiece {
    pub start: TorusPoint,
    pub coeffs: Vec<f64>,
}

/// A mean-zero piecewise-smooth function on the circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpFunction {
    /// Declared jumps, sorted by position, distinct, at least one H ≠ 0.
    pub jumps: Vec<JumpSpec>,
    /// Explicit polynomial pieces; `None` means the canonical form built
    /// from the jumps alone.
    #[serde(default, with = "smooth_wire")]
    pub smooth: Option<Vec<SmoothPiece>>,
}

/// The reduced form: total slope Σ H_i plus one indicator term per jump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    /// Σ H_i, the slope of the sawtooth part.
    pub total_jump: f64,
    /// Indicator terms (γ_i, H_i); a γ = 0 term evaluates to zero but is
    /// kept so the jump ledger stays complete.
    pub terms: Vec<JumpSpec>,
    /// Recorded shift y₀ when some γ_i = 0: orbits of x₀ + y₀ under the
    /// shifted function reproduce S_N(f, α, x₀) with all jumps off 0.
    pub shift: Option<TorusPoint>,
}

/// Piece table shared by every evaluator and the orbit engine.
#[derive(Clone, Debug)]
pub struct CompiledFn {
    /// Piece start points, sorted, breaks[0] = 0.
    pub breaks: Vec<BigRational>,
    /// Same break points as f64 for fast piece location.
    pub breaks_f64: Vec<f64>,
    /// Horner coefficients (low→high) per piece, in the absolute coordinate.
    pub polys: Vec<Vec<f64>>,
    /// Break points carrying a genuine discontinuity.
    pub jump_points: Vec<BigRational>,
    /// Exact total variation.
    pub var: f64,
}

impl JumpFunction {
    /// Sawtooth {x} − 1/2: single jump of +1 at 0.
    pub fn sawtooth() -> Self {
        Self::from_jump_data(vec![(TorusPoint::zero(), 1.0)])
    }

    /// Centered indicator 1_{[0,γ)} − ι(γ): jumps −1 at 0 and +1 at γ.
    pub fn indicator(gamma: TorusPoint) -> Self {
        Self::from_jump_data(vec![(TorusPoint::zero(), -1.0), (gamma, 1.0)])
    }

    /// {x}² − 1/3: smooth inside, single jump of +1 at 0.
    pub fn square_minus_third() -> Self {
        JumpFunction {
            jumps: vec![JumpSpec { gamma: TorusPoint::zero(), h: 1.0 }],
            smooth: Some(vec![SmoothPiece {
                start: TorusPoint::zero(),
                coeffs: vec![-1.0 / 3.0, 0.0, 1.0],
            }]),
        }
    }

    /// Canonical mean-zero function with exactly the given jumps.
    pub fn from_jump_data(mut jumps: Vec<(TorusPoint, f64)>) -> Self {
        jumps.sort_by(|a, b| a.0.value().cmp(b.0.value()));
        JumpFunction {
            jumps: jumps.into_iter().map(|(gamma, h)| JumpSpec { gamma, h }).collect(),
            smooth: None,
        }
    }

    /// The polynomial pieces defining the function.
    pub fn pieces(&self) -> Vec<SmoothPiece> {
        match &self.smooth {
            Some(p) => p.clone(),
            None => synthesize_pieces(&self.jumps),
        }
    }

    /// Structural and analytic validation per the declared invariants.
    pub fn validate(&self) -> Result<()> {
        if self.jumps.iter().all(|j| j.h == 0.0) {
            return Err(Error::NoJump);
        }
        for w in self.jumps.windows(2) {
            if w[0].gamma.value() >= w[1].gamma.value() {
                return Err(Error::InvalidInput("jumps must be sorted with distinct γ".into()));
            }
        }
        let pieces = self.pieces();
        if pieces.is_empty() || !pieces[0].start.is_zero() {
            return Err(Error::InvalidInput("pieces must start at 0".into()));
        }
        for w in pieces.windows(2) {
            if w[0].start.value() >= w[1].start.value() {
                return Err(Error::InvalidInput("piece starts must be strictly increasing".into()));
            }
        }
        // Every declared jump with H ≠ 0 must sit on a piece boundary.
        for j in &self.jumps {
            if j.h != 0.0 && !pieces.iter().any(|p| p.start == j.gamma) {
                return Err(Error::InvalidInput(format!(
                    "declared jump at {} is interior to a smooth piece",
                    j.gamma.value()
                )));
            }
        }
        // One-sided limits at every boundary must match the declared H
        // (zero when undeclared), and the mean must vanish.
        let var = variation_of_pieces(&pieces);
        for (b, computed) in boundary_jumps(&pieces) {
            let declared = self
                .jumps
                .iter()
                .find(|j| *j.gamma.value() == b)
                .map(|j| j.h)
                .unwrap_or(0.0);
            if (computed - declared).abs() > 1e-8 {
                return Err(Error::InvalidInput(format!(
                    "jump at {b} is {computed:.3e} but {declared:.3e} was declared"
                )));
            }
        }
        let mean = mean_of_pieces(&pieces);
        if mean.abs() > 1e-12 * (1.0 + var) {
            return Err(Error::InvalidInput(format!("mean is {mean:.3e}, not zero")));
        }
        Ok(())
    }

    /// Value at an exact point (right-continuous at jumps).
    pub fn evaluate(&self, x: &TorusPoint) -> f64 {
        let pieces = self.pieces();
        let idx = locate_piece(&pieces, x.value());
        horner(&pieces[idx].coeffs, x.to_f64())
    }

    /// Validate and build the shared piece table.
    pub fn compile(&self) -> Result<CompiledFn> {
        self.validate()?;
        Ok(compile_pieces(self.pieces()))
    }
}

impl NormalForm {
    /// Value of (Σ H)(ι(x)−1/2) + Σ H_i(1_{[0,γ_i)}(x) − ι(γ_i)); the
    /// indicator uses an exact rational comparison.
    pub fn evaluate(&self, x: &TorusPoint) -> f64 {
        let mut v = self.total_jump * (x.to_f64() - 0.5);
        for t in &self.terms {
            let ind = if x.value() < t.gamma.value() { 1.0 } else { 0.0 };
            v += t.h * (ind - t.gamma.to_f64());
        }
        v
    }

    /// Exact variation sweep: |slope| plus merged jump magnitudes, the
    /// γ = 0 indicator jumps cancelling against the sawtooth's.
    pub fn total_variation(&self) -> f64 {
        let slope = self.total_jump.abs();
        let at_zero: f64 = self.terms.iter().filter(|t| t.gamma.is_zero()).map(|t| t.h).sum();
        let elsewhere: f64 =
            self.terms.iter().filter(|t| !t.gamma.is_zero()).map(|t| t.h.abs()).sum();
        slope + at_zero.abs() + elsewhere
    }

    /// The function as jump data, for round-trips and compilation.
    pub fn to_jump_function(&self) -> JumpFunction {
        JumpFunction::from_jump_data(
            self.terms.iter().map(|t| (t.gamma.clone(), t.h)).collect(),
        )
    }

    /// Validate and build the shared piece table.
    pub fn compile(&self) -> Result<CompiledFn> {
        self.to_jump_function().compile()
    }
}

/// Reduce a piecewise-smooth function to its normal form.
///
/// The jump data is copied verbatim; when a jump sits at 0 the recorded
/// shift y₀ (midpoint of the largest gap between the γ_i, nudged so that
/// no γ_i + y₀ ≡ 0) lets callers move every jump off the origin via
/// S_N(f, α, x₀) = S_N(f(· − y₀), α, x₀ + y₀).
pub fn normal_form(f: &JumpFunction) -> Result<NormalForm> {
    f.validate()?;
    let terms = f.jumps.clone();
    let total_jump = terms.iter().map(|t| t.h).sum();
    let needs_shift = terms.iter().any(|t| t.h != 0.0 && t.gamma.is_zero());
    let shift = if needs_shift { Some(pick_shift(&terms)) } else { None };
    Ok(NormalForm { total_jump, terms, shift })
}

/// Midpoint of the largest cyclic gap between jump positions, nudged within
/// the gap until it differs from every −γ_i.
fn pick_shift(terms: &[JumpSpec]) -> TorusPoint {
    let mut gammas: Vec<BigRational> = terms.iter().map(|t| t.gamma.value().clone()).collect();
    gammas.sort();
    let n = gammas.len();
    let one = BigRational::from_integer(BigInt::one());
    let (mut best_start, mut best_len) = (gammas[0].clone(), BigRational::zero());
    for i in 0..n {
        let next = if i + 1 == n { &gammas[0] + &one } else { gammas[i + 1].clone() };
        let len = &next - &gammas[i];
        if len > best_len {
            best_len = len;
            best_start = gammas[i].clone();
        }
    }
    let forbidden: Vec<TorusPoint> =
        terms.iter().map(|t| t.gamma.clone().neg()).collect();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut offset = &best_len / &two;
    loop {
        let candidate = TorusPoint::new(&best_start + &offset);
        if !forbidden.contains(&candidate) {
            return candidate;
        }
        offset /= &two;
    }
}

/// Linear pieces of the canonical form built from jump data alone.
fn synthesize_pieces(jumps: &[JumpSpec]) -> Vec<SmoothPiece> {
    let slope: f64 = jumps.iter().map(|j| j.h).sum();
    let sum_h_gamma: f64 = jumps.iter().map(|j| j.h * j.gamma.to_f64()).sum();
    let mut breaks: Vec<BigRational> = vec![BigRational::zero()];
    for j in jumps {
        if !j.gamma.is_zero() {
            breaks.push(j.gamma.value().clone());
        }
    }
    breaks.sort();
    breaks.dedup();
    breaks
        .into_iter()
        .map(|start| {
            let above: f64 =
                jumps.iter().filter(|j| *j.gamma.value() > start).map(|j| j.h).sum();
            let constant = -slope / 2.0 + above - sum_h_gamma;
            SmoothPiece { start: TorusPoint::new(start), coeffs: vec![constant, slope] }
        })
        .collect()
}

/// Jump f(b⁻) − f(b⁺) at every piece boundary, including the wrap at 0.
fn boundary_jumps(pieces: &[SmoothPiece]) -> Vec<(BigRational, f64)> {
    let n = pieces.len();
    (0..n)
        .map(|i| {
            let b = pieces[i].start.value().clone();
            let left = if i == 0 { &pieces[n - 1] } else { &pieces[i - 1] };
            let at = if i == 0 { 1.0 } else { b.to_f64().unwrap() };
            (b, horner(&left.coeffs, at) - horner(&pieces[i].coeffs, at.rem_euclid(1.0)))
        })
        .collect()
}

fn piece_ends(pieces: &[SmoothPiece]) -> Vec<f64> {
    let mut ends: Vec<f64> =
        pieces.iter().skip(1).map(|p| p.start.to_f64()).collect();
    ends.push(1.0);
    ends
}

fn mean_of_pieces(pieces: &[SmoothPiece]) -> f64 {
    let ends = piece_ends(pieces);
    pieces
        .iter()
        .zip(ends)
        .map(|(p, end)| {
            let anti = antiderivative(&p.coeffs);
            horner(&anti, end) - horner(&anti, p.start.to_f64())
        })
        .sum()
}

fn variation_of_pieces(pieces: &[SmoothPiece]) -> f64 {
    let ends = piece_ends(pieces);
    let slopes: f64 = pieces
        .iter()
        .zip(&ends)
        .map(|(p, &end)| monotone_variation(&p.coeffs, p.start.to_f64(), end))
        .sum();
    let jumps: f64 = boundary_jumps(pieces).iter().map(|(_, j)| j.abs()).sum();
    slopes + jumps
}

fn compile_pieces(pieces: Vec<SmoothPiece>) -> CompiledFn {
    let var = variation_of_pieces(&pieces);
    let jump_points = boundary_jumps(&pieces)
        .into_iter()
        .filter(|(_, j)| j.abs() > 1e-12)
        .map(|(b, _)| b)
        .collect();
    CompiledFn {
        breaks: pieces.iter().map(|p| p.start.value().clone()).collect(),
        breaks_f64: pieces.iter().map(|p| p.start.to_f64()).collect(),
        polys: pieces.iter().map(|p| p.coeffs.clone()).collect(),
        jump_points,
        var,
    }
}

impl CompiledFn {
    /// Value at an exact point (right-continuous at jumps).
    pub fn eval_exact(&self, x: &TorusPoint) -> f64 {
        let idx = self.breaks.partition_point(|b| b <= x.value()) - 1;
        horner(&self.polys[idx], x.to_f64())
    }

    /// Value at a float point, locating the piece by float comparison.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let idx = self.breaks_f64.partition_point(|&b| b <= x) - 1;
        horner(&self.polys[idx], x)
    }

    /// Value of piece `idx` at x (piece chosen by the caller's exact test).
    pub fn eval_piece(&self, idx: usize, x: f64) -> f64 {
        horner(&self.polys[idx], x)
    }

    /// Exact total variation.
    pub fn total_variation(&self) -> f64 {
        self.var
    }
}

fn locate_piece(pieces: &[SmoothPiece], x: &BigRational) -> usize {
    pieces.partition_point(|p| p.start.value() <= x) - 1
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
}

fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(0.0);
    out.extend(coeffs.iter().enumerate().map(|(i, &c)| c / (i + 1) as f64));
    out
}

/// ∫_a^b |p′| as Σ |p(t_{i+1}) − p(t_i)| over a monotone decomposition;
/// extra split points are harmless, so roots of p′ are located by a sign
/// scan plus bisection.
fn monotone_variation(coeffs: &[f64], a: f64, b: f64) -> f64 {
    let dp = derivative(coeffs);
    let mut splits = vec![a, b];
    if dp.len() > 1 {
        let n = 64 * dp.len();
        let mut prev = (a, horner(&dp, a));
        for i in 1..=n {
            let x = a + (b - a) * i as f64 / n as f64;
            let s = horner(&dp, x);
            if prev.1 == 0.0 {
                splits.push(prev.0);
            } else if prev.1 * s < 0.0 {
                splits.push(bisect_root(&dp, prev.0, x));
            }
            prev = (x, s);
        }
        splits.sort_by(f64::total_cmp);
    }
    splits.windows(2).map(|w| (horner(coeffs, w[1]) - horner(coeffs, w[0])).abs()).sum()
}

fn bisect_root(poly: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let s_lo = horner(poly, lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if (horner(poly, mid) > 0.0) == (s_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Wire format for the smooth part: "none" or a piece array.
mod smooth_wire {
    use super::SmoothPiece;
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Tag(String),
        Pieces(Vec<SmoothPiece>),
    }

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<SmoothPiece>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match v {
            None => Wire::Tag("none".into()).serialize(s),
            Some(p) => Wire::Pieces(p.clone()).serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<SmoothPiece>>, D::Error> {
        match Option::<Wire>::deserialize(d)? {
            None | Some(Wire::Tag(_)) => Ok(None),
            Some(Wire::Pieces(p)) => Ok(Some(p)),
        }
        .and_then(|v| match v {
            None => Ok(None),
            Some(p) if p.is_empty() => Err(D::Error::custom("empty piece list")),
            some => Ok(some),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(num: i64, den: u64) -> TorusPoint {
        TorusPoint::from_ratio(num, den)
    }

    #[test]
    fn sawtooth_evaluates_as_shifted_fraction() {
        let f = JumpFunction::sawtooth();
        assert_eq!(f.evaluate(&tp(1, 4)), -0.25);
        assert_eq!(f.evaluate(&tp(0, 1)), -0.5);
        assert_eq!(f.evaluate(&tp(3, 4)), 0.25);
    }

    #[test]
    fn square_minus_third_values_and_jump() {
        let f = JumpFunction::square_minus_third();
        assert!((f.evaluate(&tp(1, 2)) + 1.0 / 12.0).abs() < 1e-15);
        f.validate().unwrap();
        let h = normal_form(&f).unwrap();
        assert_eq!(h.total_jump, 1.0);
        assert_eq!(h.terms.len(), 1);
        assert!(h.terms[0].gamma.is_zero());
        assert_eq!(h.shift, Some(tp(1, 2)));
    }

    #[test]
    fn indicator_has_opposite_jumps_at_zero_and_gamma() {
        let f = JumpFunction::indicator(tp(1, 2));
        f.validate().unwrap();
        let h = normal_form(&f).unwrap();
        assert_eq!(h.total_jump, 0.0);
        assert_eq!(h.terms.len(), 2);
        assert_eq!(h.terms[0].h, -1.0);
        assert_eq!(h.terms[1].h, 1.0);
        assert_eq!(f.evaluate(&tp(1, 4)), 0.5);
        assert_eq!(f.evaluate(&tp(3, 4)), -0.5);
        assert_eq!(f.evaluate(&tp(0, 1)), 0.5);
        assert_eq!(f.evaluate(&tp(1, 2)), -0.5);
    }

    #[test]
    fn normal_form_formula_at_zero() {
        // H = 2 at γ = 1/3: h(0) = 2(−1/2) + 2(1 − 1/3) = 1/3
        let f = JumpFunction::from_jump_data(vec![(tp(1, 3), 2.0)]);
        let h = normal_form(&f).unwrap();
        assert!((h.evaluate(&tp(0, 1)) - 1.0 / 3.0).abs() < 1e-15);
        assert!(h.shift.is_none());
    }

    #[test]
    fn evaluate_matches_between_form_and_pieces() {
        let f = JumpFunction::from_jump_data(vec![(tp(1, 3), 2.0), (tp(2, 5), -0.5)]);
        let h = normal_form(&f).unwrap();
        let c = f.compile().unwrap();
        for den in [7u64, 11, 13] {
            for num in 0..den {
                let x = tp(num as i64, den);
                let direct = h.evaluate(&x);
                assert!((direct - f.evaluate(&x)).abs() < 1e-12);
                assert!((direct - c.eval_exact(&x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn variation_merges_coincident_jumps() {
        assert_eq!(normal_form(&JumpFunction::sawtooth()).unwrap().total_variation(), 2.0);
        assert_eq!(
            normal_form(&JumpFunction::indicator(tp(1, 3))).unwrap().total_variation(),
            2.0
        );
        // sawtooth + indicator in one form: the ±1 jumps at 0 cancel
        let h = normal_form(&JumpFunction::from_jump_data(vec![(tp(1, 3), 1.0)])).unwrap();
        assert_eq!(h.total_variation(), 2.0);
        let c = h.compile().unwrap();
        assert!((c.total_variation() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compiled_variation_of_smooth_piece() {
        // |f′| integrates to 1 and the wrap jump adds 1
        let c = JumpFunction::square_minus_third().compile().unwrap();
        assert!((c.total_variation() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn validation_rejects_wrong_declarations() {
        let mut f = JumpFunction::square_minus_third();
        f.jumps[0].h = 0.5;
        assert!(matches!(f.validate(), Err(Error::InvalidInput(_))));

        let g = JumpFunction {
            jumps: vec![JumpSpec { gamma: TorusPoint::zero(), h: 1.0 }],
            smooth: Some(vec![SmoothPiece { start: TorusPoint::zero(), coeffs: vec![0.25, 1.0] }]),
        };
        assert!(matches!(g.validate(), Err(Error::InvalidInput(_))));

        let z = JumpFunction::from_jump_data(vec![(tp(1, 3), 0.0)]);
        assert!(matches!(z.validate(), Err(Error::NoJump)));
    }

    #[test]
    fn normal_form_is_idempotent() {
        let f = JumpFunction::from_jump_data(vec![(tp(0, 1), -1.0), (tp(2, 5), 1.0)]);
        let h = normal_form(&f).unwrap();
        let h2 = normal_form(&h.to_jump_function()).unwrap();
        assert_eq!(h.total_jump, h2.total_jump);
        assert_eq!(h.terms, h2.terms);
    }

    #[test]
    fn shift_lands_in_largest_gap_and_avoids_negated_jumps() {
        // γ ∈ {0, 1/3}: largest gap (1/3, 1), midpoint 2/3 collides with
        // −1/3 ≡ 2/3 and must be nudged
        let f = JumpFunction::from_jump_data(vec![(tp(0, 1), 1.0), (tp(1, 3), 1.0)]);
        let y0 = normal_form(&f).unwrap().shift.unwrap();
        assert!(*y0.value() > BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert!(y0 != tp(2, 3) && !y0.is_zero());
    }

    #[test]
    fn json_wire_shape_round_trips() {
        let j = r#"{"jumps":[{"gamma":"1/3","H":1.0}],"smooth":"none"}"#;
        let f: JumpFunction = serde_json::from_str(j).unwrap();
        assert_eq!(f.jumps[0].gamma, tp(1, 3));
        assert!(f.smooth.is_none());
        let out = serde_json::to_string(&f).unwrap();
        let f2: JumpFunction = serde_json::from_str(&out).unwrap();
        assert_eq!(f, f2);
        let g: JumpFunction =
            serde_json::from_str(r#"{"jumps":[{"gamma":"0","H":1.0}]}"#).unwrap();
        assert!(g.smooth.is_none());
    }
}
