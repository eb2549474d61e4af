//! Experiment manifests: one JSON document describes one scenario run.
//!
//! A manifest is a flat bag of optional fields plus a `scenario` tag; each
//! scenario reads the fields it needs and [`ExperimentManifest::validate`]
//! rejects incoherent combinations up front with the offending field named,
//! so a bad manifest exits with code 2 before any computation starts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rotation_lab::limit_law::{BarInput, BarMode};
use rotation_lab::torus::parse_rational;
use rotation_lab::{
    AlphaSpec, Error, JumpFunction, JumpPolicy, Normalization, Result, SumOptions, TorusPoint,
};
use serde::{Deserialize, Serialize};

/// Which experiment the manifest drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// Convergent table with certified δ_k enclosures and bound checks.
    CfTable,
    /// Khintchine–Lévy ensemble statistics over seeded uniform α.
    MetricStats,
    /// Denjoy–Koksma inequality |S_{q_n}| ≤ Var(f) over a grid of inputs.
    DkCheck,
    /// Birkhoff sums at explicit checkpoints with partial-quotient bounds.
    Birkhoff,
    /// The limit function g, its law g(U_c), and finite-scale sup errors.
    LimitLaw,
    /// Temporal ECDF under B̃ = M/q_n normalization vs the analytic law.
    TemporalEcdf,
    /// Two-scale comparison of g(U_{c₁}) and g(U_{c₂}) after standardization.
    RefuteTdlt,
    /// Sieve of block indices isolated from every jump location.
    Isolated,
    /// Running max of |S_N(f) − S_N(h)| against the normal form.
    Remainder,
}

impl ScenarioKind {
    /// Stable kebab-case name (matches the serde wire form).
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::CfTable => "cf-table",
            ScenarioKind::MetricStats => "metric-stats",
            ScenarioKind::DkCheck => "dk-check",
            ScenarioKind::Birkhoff => "birkhoff",
            ScenarioKind::LimitLaw => "limit-law",
            ScenarioKind::TemporalEcdf => "temporal-ecdf",
            ScenarioKind::RefuteTdlt => "refute-tdlt",
            ScenarioKind::Isolated => "isolated",
            ScenarioKind::Remainder => "remainder",
        }
    }
}

/// Subsequence rule M = ⌊c·a_{n+1}⌋·q_n + q_n − 1; `c` is an exact
/// rational in (0,1] kept as text so c = 1 survives the round trip.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MRule {
    pub c: String,
    pub index: usize,
}

impl MRule {
    /// Parse and range-check the scale fraction.
    pub fn c_value(&self) -> Result<BigRational> {
        let c = parse_rational(&self.c)
            .map_err(|e| Error::InvalidInput(format!("m_rule.c: {e}")))?;
        if c <= BigRational::from_integer(BigInt::from(0))
            || c > BigRational::from_integer(BigInt::one())
        {
            return Err(Error::InvalidInput(format!(
                "m_rule.c must lie in (0, 1], got {}",
                self.c
            )));
        }
        Ok(c)
    }
}

/// The full experiment description. Unknown fields are rejected so typos
/// fail loudly instead of silently running defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub scenario: ScenarioKind,
    /// Rotation number; required by every scenario except metric-stats.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    /// Function under study (jump positions are exact rationals).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<JumpFunction>,
    /// Several functions (dk-check sweeps them); falls back to [function].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<JumpFunction>,
    /// Orbit start; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<TorusPoint>,
    /// Several orbit starts (dk-check); falls back to [x0].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x0_list: Vec<TorusPoint>,
    /// Convergent indices n_ℓ of the subsequence under study.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indices: Vec<usize>,
    /// Explicit N checkpoints (birkhoff).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<u64>,
    /// Scale fractions c for law tables (limit-law).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c_values: Vec<f64>,
    /// c-grid resolution for sup-error reports; defaults to 101.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Forced partial quotients a_{n+1} for the convergence ladder.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<u64>,
    /// Convergent index n the ladder forces its quotient after; even.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder_index: Option<usize>,
    /// Explicit temporal range M.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Derived temporal range M_ℓ(c, n); mutually exclusive with `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_rule: Option<MRule>,
    /// ECDF normalization; defaults to B̃ = M/q_n (pinned when m_rule).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    /// Scale pair for refute-tdlt; both-or-neither, each in (0,1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    /// Jump multipliers β_i for the isolation sieve.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub betas: Vec<BarInput>,
    /// Isolation half-width δ; defaults to 1/(4·|betas|).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Sieve range bound N_max; defaults to 10⁴.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    /// Expansion depth (cf-table rows, metric-stats digits).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_depth: Option<usize>,
    /// Ensemble size for metric-stats; defaults to 1000.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    /// RNG seed for metric-stats; defaults to 20260815.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Working precision override for Birkhoff sums.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    /// Jump-collision policy (strict certification vs one-sided limits).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<JumpPolicy>,
    /// Bar-limit derivation mode; defaults to exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar_mode: Option<BarMode>,
    /// Pass/fail threshold for the scenario's headline check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Shorthand for a named-field validation error (exit code 2).
fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl ExperimentManifest {
    /// Minimal manifest for the given scenario; fields start empty.
    pub fn new(scenario: ScenarioKind) -> Self {
        ExperimentManifest {
            scenario,
            alpha: None,
            function: None,
            functions: Vec::new(),
            x0: None,
            x0_list: Vec::new(),
            indices: Vec::new(),
            checkpoints: Vec::new(),
            c_values: Vec::new(),
            grid: None,
            ladder: Vec::new(),
            ladder_index: None,
            m: None,
            m_rule: None,
            normalization: None,
            c1: None,
            c2: None,
            betas: Vec::new(),
            delta: None,
            n_max: None,
            k_depth: None,
            sample_size: None,
            seed: None,
            bits: None,
            policy: None,
            bar_mode: None,
            tolerance: None,
        }
    }

    /// The rotation number, or a named error when the scenario needs one.
    pub fn alpha(&self) -> Result<&AlphaSpec> {
        self.alpha.as_ref().ok_or_else(|| bad("alpha: required by this scenario"))
    }

    /// The function under study, or a named error.
    pub fn function(&self) -> Result<&JumpFunction> {
        self.function.as_ref().ok_or_else(|| bad("function: required by this scenario"))
    }

    /// Functions for sweep scenarios: `functions`, else [function].
    pub fn function_list(&self) -> Result<Vec<&JumpFunction>> {
        if self.functions.is_empty() {
            Ok(vec![self.function()?])
        } else {
            Ok(self.functions.iter().collect())
        }
    }

    /// Orbit start, defaulting to 0.
    pub fn x0_or_zero(&self) -> TorusPoint {
        self.x0.clone().unwrap_or_else(TorusPoint::zero)
    }

    /// Orbit starts for multi-point scenarios: x0_list, else [x0].
    pub fn x0s(&self) -> Vec<TorusPoint> {
        if self.x0_list.is_empty() {
            vec![self.x0_or_zero()]
        } else {
            self.x0_list.clone()
        }
    }

    /// Summation options assembled from `bits` and `policy`.
    pub fn sum_options(&self) -> SumOptions {
        SumOptions { bits: self.bits, policy: self.policy.unwrap_or_default() }
    }

    /// Headline threshold with a scenario-supplied default.
    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    /// Cross-field validation; every error names the offending field.
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = &self.alpha {
            a.validate()?;
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(bad("tolerance: must be > 0"));
            }
        }
        match self.scenario {
            ScenarioKind::CfTable => {
                self.alpha()?;
                if self.k_depth == Some(0) {
                    return Err(bad("k_depth: must be >= 1"));
                }
            }
            ScenarioKind::MetricStats => {
                if self.sample_size == Some(0) {
                    return Err(bad("sample_size: must be >= 1"));
                }
                if self.k_depth == Some(0) {
                    return Err(bad("k_depth: must be >= 1"));
                }
            }
            ScenarioKind::DkCheck => {
                self.alpha()?;
                self.function_list()?;
                if self.indices.iter().any(|&n| n == 0) {
                    return Err(bad("indices: Denjoy–Koksma needs n >= 1"));
                }
            }
            ScenarioKind::Birkhoff => {
                self.alpha()?;
                self.function()?;
                if self.checkpoints.is_empty() {
                    return Err(bad("checkpoints: at least one N is required"));
                }
                if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
                    return Err(bad("checkpoints: must be strictly increasing"));
                }
            }
            ScenarioKind::LimitLaw => {
                self.function()?;
                if self.grid == Some(0) || self.grid == Some(1) {
                    return Err(bad("grid: needs at least two points"));
                }
                for &c in &self.c_values {
                    if !(c > 0.0 && c <= 1.0) {
                        return Err(bad("c_values: every c must lie in (0, 1]"));
                    }
                }
                if self.ladder.is_empty() {
                    self.alpha()?;
                    if self.indices.is_empty() {
                        return Err(bad("indices: required when no ladder is given"));
                    }
                    self.even_indices(&self.indices, "indices")?;
                } else {
                    if self.ladder.iter().any(|&a| a == 0) {
                        return Err(bad("ladder: forced quotients must be >= 1"));
                    }
                    let idx = self.ladder_index.unwrap_or(10);
                    self.even_indices(&[idx], "ladder_index")?;
                }
            }
            ScenarioKind::TemporalEcdf => {
                self.alpha()?;
                self.function()?;
                match (&self.m, &self.m_rule) {
                    (Some(_), Some(_)) => {
                        return Err(bad("m / m_rule: give one or the other, not both"));
                    }
                    (None, None) => {
                        return Err(bad("m / m_rule: one of the two is required"));
                    }
                    (Some(0), None) => return Err(bad("m: must be >= 1")),
                    (None, Some(rule)) => {
                        rule.c_value()?;
                        self.even_indices(&[rule.index], "m_rule.index")?;
                    }
                    _ => {}
                }
            }
            ScenarioKind::RefuteTdlt => {
                self.alpha()?;
                self.function()?;
                if self.indices.is_empty() {
                    return Err(bad("indices: at least one convergent index is required"));
                }
                self.even_indices(&self.indices, "indices")?;
                match (self.c1, self.c2) {
                    (None, None) => {}
                    (Some(c1), Some(c2)) => {
                        for (name, c) in [("c1", c1), ("c2", c2)] {
                            if !(c > 0.0 && c <= 1.0) {
                                return Err(bad(format!("{name}: must lie in (0, 1]")));
                            }
                        }
                    }
                    _ => return Err(bad("c1 / c2: give both or neither")),
                }
            }
            ScenarioKind::Isolated => {
                if self.betas.is_empty() {
                    return Err(bad("betas: at least one multiplier is required"));
                }
                if let Some(d) = self.delta {
                    if !(d > 0.0) {
                        return Err(bad("delta: must be > 0"));
                    }
                }
                if self.n_max == Some(0) {
                    return Err(bad("n_max: must be >= 1"));
                }
            }
            ScenarioKind::Remainder => {
                self.alpha()?;
                self.function()?;
                if let Some(m) = self.m {
                    if m < 100 {
                        return Err(bad("m: decade comparison needs m >= 100"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The sign pattern of δ_n alternates; the g derivation fixes the
    /// positive orientation, so subsequence indices must be even.
    fn even_indices(&self, indices: &[usize], field: &str) -> Result<()> {
        if let Some(n) = indices.iter().find(|&&n| n % 2 != 0) {
            return Err(bad(format!("{field}: index {n} is odd; the limit \
                 derivation fixes the even-index orientation of delta_n")));
        }
        Ok(())
    }
}
