//! Randomized structural properties: determinant and gcd identities of
//! convergents, positivity of certified δ enclosures, the Birkhoff
//! cocycle identity, metric axioms of the KS distance, normal-form
//! round-trips, and affine invariance of standardization.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;
use rotation_lab::birkhoff::sum_range;
use rotation_lab::cf::{check_delta_bounds, convergent_pairs};
use rotation_lab::limit_law::{g_closed_form, BarLimits, Certainty};
use rotation_lab::temporal::{ks_distance, EmpiricalCDF};
use rotation_lab::{
    birkhoff_sum, normal_form, AlphaSpec, ConvergentTable, JumpFunction, SumOptions, TailRule,
    TorusPoint,
};

fn digit_alpha(prefix: Vec<u64>) -> AlphaSpec {
    AlphaSpec::DigitRule { prefix, tail: TailRule::Constant { value: 1 }, forced: Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convergents_are_coprime_with_unit_determinant(
        digits in proptest::collection::vec(1u64..=9, 1..=12)
    ) {
        let pairs = convergent_pairs(&digits);
        for w in pairs.windows(2) {
            let (p0, q0) = &w[0];
            let (p1, q1) = &w[1];
            let det = p1 * q0 - p0 * q1;
            prop_assert_eq!(det.abs().to_u64(), Some(1));
            prop_assert_eq!(p1.gcd(q1).to_u64(), Some(1));
        }
    }

    #[test]
    fn delta_enclosures_are_positive_and_pass_bounds(
        prefix in proptest::collection::vec(1u64..=6, 2..=8)
    ) {
        let k_rows = prefix.len();
        let table = ConvergentTable::new(&digit_alpha(prefix), k_rows, 64).unwrap();
        for k in 1..k_rows {
            let row = table.row(k);
            prop_assert!(row.delta_lo <= row.delta_hi);
            prop_assert!(row.delta_lo.numer().to_f64().unwrap() > 0.0);
            let check = check_delta_bounds(row, table.a_next(k).unwrap()).unwrap();
            prop_assert!(check.pass);
        }
    }

    #[test]
    fn birkhoff_cocycle_identity(
        m in 1u64..300,
        n in 1u64..300,
        num in 0i64..100,
    ) {
        let cfn = JumpFunction::sawtooth().compile().unwrap();
        let alpha = AlphaSpec::golden();
        let x0 = TorusPoint::from_ratio(num, 101);
        let opts = SumOptions::default();
        let whole = birkhoff_sum(&cfn, &alpha, &x0, m + n, &opts).unwrap();
        let head = birkhoff_sum(&cfn, &alpha, &x0, m, &opts).unwrap();
        let tail = sum_range(&cfn, &alpha, &x0, m, m + n, &opts).unwrap();
        prop_assert!((whole - (head + tail)).abs() < 1e-9);
    }

    #[test]
    fn ks_distance_is_a_metric(
        a in proptest::collection::vec(-50i32..50, 1..12),
        b in proptest::collection::vec(-50i32..50, 1..12),
        c in proptest::collection::vec(-50i32..50, 1..12),
    ) {
        let mk = |v: &[i32]| {
            EmpiricalCDF::from_samples(v.iter().map(|x| *x as f64 / 3.0).collect()).unwrap()
        };
        let (f, g, h) = (mk(&a), mk(&b), mk(&c));
        prop_assert_eq!(ks_distance(&f, &f.clone()), 0.0);
        prop_assert!((ks_distance(&f, &g) - ks_distance(&g, &f)).abs() < 1e-15);
        prop_assert!(ks_distance(&f, &h) <= ks_distance(&f, &g) + ks_distance(&g, &h) + 1e-15);
    }

    #[test]
    fn normal_form_round_trips(
        raw in proptest::collection::btree_map(0u32..20, -30i32..30, 1..5)
    ) {
        let jumps: Vec<(TorusPoint, f64)> = raw
            .iter()
            .map(|(g, h)| {
                let height = if *h >= 0 { *h as f64 / 10.0 + 0.5 } else { *h as f64 / 10.0 - 0.5 };
                (TorusPoint::from_ratio(*g as i64, 20), height)
            })
            .collect();
        let f = JumpFunction::from_jump_data(jumps);
        let h1 = normal_form(&f).unwrap();
        let h2 = normal_form(&h1.to_jump_function()).unwrap();
        prop_assert_eq!(h1.terms.len(), h2.terms.len());
        for (a, b) in h1.terms.iter().zip(&h2.terms) {
            prop_assert_eq!(&a.gamma, &b.gamma);
            prop_assert_eq!(a.h, b.h);
        }
        prop_assert_eq!(h1.total_jump, h2.total_jump);
        // evaluations agree off the jump set
        for i in 0..40 {
            let x = TorusPoint::from_ratio(2 * i + 1, 81);
            prop_assert!((h1.evaluate(&x) - h2.evaluate(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn standardization_ignores_affine_maps(
        base in proptest::collection::vec(-1000i32..1000, 8..40),
        scale in 1u32..100,
        shift in -500i32..500,
    ) {
        let samples: Vec<f64> = base.iter().map(|v| *v as f64 / 7.0).collect();
        let ecdf = EmpiricalCDF::from_samples(samples.clone()).unwrap();
        prop_assume!(ecdf.quantile(0.75) > ecdf.quantile(0.25));
        let mapped: Vec<f64> =
            samples.iter().map(|v| v * scale as f64 / 8.0 + shift as f64).collect();
        let s1 = ecdf.standardized().unwrap();
        let s2 = EmpiricalCDF::from_samples(mapped).unwrap().standardized().unwrap();
        for (a, b) in s1.values().iter().zip(s2.values()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn g_vanishes_at_both_ends_for_random_bars(
        x0_num in 0i64..30,
        g_num in 0i64..30,
        h_sign in proptest::bool::ANY,
    ) {
        let h = if h_sign { 1.0 } else { -1.0 };
        let bars = BarLimits {
            x0_bar: TorusPoint::from_ratio(x0_num, 30),
            gamma_bars: vec![TorusPoint::from_ratio(g_num, 30)],
            indices: vec![2],
            certainty: Certainty::Exact,
        };
        let pq = g_closed_form(&[h, 0.5 * h], &BarLimits {
            gamma_bars: vec![bars.gamma_bars[0].clone(), TorusPoint::zero()],
            ..bars
        }).unwrap();
        prop_assert!(pq.eval(0.0).abs() < 1e-12);
        prop_assert!(pq.eval(1.0).abs() < 1e-12);
        let (lo, hi) = pq.range_on(1.0);
        prop_assert!(hi - lo > 0.0);
    }
}
