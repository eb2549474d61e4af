//! A computational laboratory for Birkhoff sums of piecewise-smooth
//! functions over irrational circle rotations, centered on the mechanism
//! that rules out temporal distributional limit theorems: along the
//! subsequence scales M_ℓ = ⌊c·a_{n_ℓ+1}⌋q_{n_ℓ} + q_{n_ℓ} − 1 the
//! normalized sums converge to g(U_c) for an explicit piecewise-quadratic
//! g, and the laws g(U_c) for different c are not affinely related, so no
//! single centering/scaling can work for all of them.
//!
//! Layers, bottom up:
//! - [`torus`], [`sum`]: exact circle points and compensated summation.
//! - [`alpha`], [`cf`]: certified rotation numbers (digit rules, quadratic
//!   surds, literals), convergents p_k/q_k with certified enclosures of
//!   δ_k = (−1)^k(q_kα − p_k), digit-sum index search, congruence
//!   steering, and metric (Khintchine–Lévy) sampling statistics.
//! - [`piecewise`], [`orbit`], [`birkhoff`]: jump functions and their
//!   sawtooth-plus-indicator normal forms, an exact fixed-point orbit
//!   engine with jump-collision detection, and Birkhoff sums with
//!   checkpointed and prefix variants, Denjoy–Koksma and partial-quotient
//!   bound checks, and star discrepancy.
//! - [`limit_law`], [`temporal`]: bar limits x̄₀, γ̄_i along subsequences,
//!   the closed form of g and the exact law of g(U_c), finite-scale
//!   convergence reports, temporal ECDFs under B̃ = M/q_n normalization,
//!   Kolmogorov–Smirnov distances, the isolated-multiplier sieve, and the
//!   refutation experiment.
//!
//! All arithmetic that decides a certified statement (convergents, orbit
//! positions, breakpoints) is exact big-integer/rational or fixed-point;
//! floating point only carries function values and statistics.

pub mod alpha;
pub mod birkhoff;
pub mod cf;
pub mod error;
pub mod limit_law;
pub mod orbit;
pub mod piecewise;
pub mod sum;
pub mod temporal;
pub mod torus;

pub use alpha::{AlphaSpec, TailRule};
pub use birkhoff::{birkhoff_sum, prefix_values, sums_at, SumOptions};
pub use cf::{khintchine_levy, ConvergentTable};
pub use error::{Error, Result};
pub use limit_law::{bar_limits, g_closed_form, BarInput, BarLimits, GLaw, PiecewiseQuadratic};
pub use orbit::JumpPolicy;
pub use piecewise::{normal_form, CompiledFn, JumpFunction, NormalForm};
pub use temporal::{
    isolated_multipliers, ks_between, ks_distance, tdlt_refutation, temporal_ecdf, EmpiricalCDF,
    Normalization, RefutationReport, Verdict,
};
pub use torus::TorusPoint;
