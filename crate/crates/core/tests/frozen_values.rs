//! Frozen derived values: every number here was computed once by an
//! independent route (surd algebra, hand calculus, closed forms) and is
//! pinned as a literal so regressions cannot drift silently.

use num_bigint::BigInt;
use num_rational::BigRational;
use rotation_lab::cf::{check_delta_bounds, construct_alpha, IndexPlan};
use rotation_lab::limit_law::{g_closed_form, BarLimits, Certainty};
use rotation_lab::temporal::subsequence_m;
use rotation_lab::{khintchine_levy, AlphaSpec, ConvergentTable, GLaw, TorusPoint};

fn bars(x0: TorusPoint, gs: Vec<TorusPoint>) -> BarLimits {
    BarLimits { x0_bar: x0, gamma_bars: gs, indices: vec![2], certainty: Certainty::Exact }
}

#[test]
fn golden_fibonacci_ladder() {
    let table = ConvergentTable::new(&AlphaSpec::golden(), 13, 64).unwrap();
    assert!(table.digits.iter().all(|&a| a == 1));
    let fib: Vec<u64> = vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233];
    for (k, expect) in fib.iter().enumerate() {
        assert_eq!(table.row(k).q, BigInt::from(*expect));
    }
}

#[test]
fn golden_delta_two_is_sqrt5_minus_2() {
    // δ₂ = q₂α − p₂ = 2(√5−1)/2 − 1 = √5 − 2
    let table = ConvergentTable::new(&AlphaSpec::golden(), 8, 128).unwrap();
    let row = table.row(2);
    let mid = (row.delta_lo.clone() + row.delta_hi.clone())
        / BigRational::from_integer(BigInt::from(2));
    let mid_f = rotation_lab::TorusPoint::new(mid).to_f64();
    assert!((mid_f - 0.2360679774997897).abs() < 1e-15);
    // slacks against 1/((a+2)q) = 1/6 and 1/(aq) = 1/2
    let check = check_delta_bounds(row, table.a_next(2).unwrap()).unwrap();
    assert!(check.pass);
    assert!((check.lower_slack - (0.2360679774997897 - 1.0 / 6.0)).abs() < 1e-12);
    assert!((check.upper_slack - (0.5 - 0.2360679774997897)).abs() < 1e-12);
}

#[test]
fn khintchine_levy_closed_form() {
    assert!((khintchine_levy() - 1.1865691104156255).abs() < 1e-15);
}

#[test]
fn constructed_alpha_ladder_at_ten_thousand() {
    // all-ones prefix with a₁₁ = 10⁴ forced at even index 10
    let plan = IndexPlan {
        target_indices: vec![10],
        forced_quotients: [(11usize, 10_000u64)].into_iter().collect(),
        congruence_class: None,
        ratio_threshold: 0.1,
    };
    let alpha = construct_alpha(&plan).unwrap().spec;
    let table = ConvergentTable::new(&alpha, 12, 64).unwrap();
    assert_eq!(table.row(10).q, BigInt::from(89u32));
    assert_eq!(table.row(11).q, BigInt::from(890_055u64));
    let one = BigRational::from_integer(BigInt::from(1));
    let sub = subsequence_m(&one, 10, &alpha).unwrap();
    assert_eq!(sub.m, 890_088);
    assert_eq!((sub.a_next, sub.q_n), (10_000, 89));
}

#[test]
fn g_values_frozen() {
    // pure sawtooth, x̄₀ = 0: g(1/2) = −1/8
    let saw = g_closed_form(&[1.0], &bars(TorusPoint::zero(), vec![TorusPoint::zero()])).unwrap();
    assert!((saw.eval(0.5) - (-0.125)).abs() < 1e-15);
    // sawtooth started at x̄₀ = 1/2: g(1/2) = +1/8
    let shifted =
        g_closed_form(&[1.0], &bars(TorusPoint::from_ratio(1, 2), vec![TorusPoint::zero()]))
            .unwrap();
    assert!((shifted.eval(0.5) - 0.125).abs() < 1e-15);
    // pushforward CDF of the pure-sawtooth law at −1/32 is √3/2
    let law = GLaw::new(saw, 1.0).unwrap();
    assert!((law.cdf(-1.0 / 32.0) - 0.8660254037844386).abs() < 1e-12);
}
