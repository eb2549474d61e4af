//! Built-in experiment manifests: the canonical runs of the laboratory,
//! addressable by name from the command line. Each is an ordinary
//! [`ExperimentManifest`] value; `lab run <name>` executes it and
//! `lab show <name>` prints its JSON, which is a valid starting point for
//! custom manifests.

use crate::manifest::{ExperimentManifest, MRule, ScenarioKind};
use rotation_lab::limit_law::BarInput;
use rotation_lab::{AlphaSpec, JumpFunction, JumpPolicy, TailRule, TorusPoint};
use std::collections::BTreeMap;

/// A named manifest with a one-line description for `lab list`.
pub struct Builtin {
    pub name: &'static str,
    pub about: &'static str,
    build: fn() -> ExperimentManifest,
}

impl Builtin {
    /// Materialize the manifest.
    pub fn manifest(&self) -> ExperimentManifest {
        (self.build)()
    }
}

/// Digit rule 1,1,1,… with a single forced partial quotient a_k = value.
fn ones_with_forced(k: usize, value: u64) -> AlphaSpec {
    AlphaSpec::DigitRule {
        prefix: Vec::new(),
        tail: TailRule::Constant { value: 1 },
        forced: BTreeMap::from([(k, value)]),
    }
}

fn cf_golden_table() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::CfTable);
    m.alpha = Some(AlphaSpec::golden());
    m.k_depth = Some(30);
    m
}

fn cf_sqrt2_table() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::CfTable);
    m.alpha = Some(AlphaSpec::sqrt2_minus_1());
    m.k_depth = Some(30);
    m
}

fn khintchine_levy_mc() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::MetricStats);
    m.sample_size = Some(1000);
    m.k_depth = Some(50);
    m.seed = Some(20260815);
    m.tolerance = Some(0.05);
    m
}

/// Sawtooth plus two distinct centered indicators: the three test
/// functions the variation-bound suite sweeps.
fn dk_functions() -> Vec<JumpFunction> {
    vec![
        JumpFunction::sawtooth(),
        JumpFunction::indicator(TorusPoint::from_ratio(1, 3)),
        JumpFunction::indicator(TorusPoint::from_ratio(1, 7)),
    ]
}

fn dk_suite(alpha: AlphaSpec) -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::DkCheck);
    m.alpha = Some(alpha);
    m.functions = dk_functions();
    m.x0_list = vec![
        TorusPoint::zero(),
        TorusPoint::from_ratio(1, 7),
        TorusPoint::from_ratio(2, 3),
    ];
    m.indices = (1..=20).collect();
    m.policy = Some(JumpPolicy::RightLimit);
    m
}

fn dk_golden_suite() -> ExperimentManifest {
    dk_suite(AlphaSpec::golden())
}

fn dk_constructed_suite() -> ExperimentManifest {
    dk_suite(ones_with_forced(7, 50))
}

fn birkhoff_golden_checkpoints() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::Birkhoff);
    m.alpha = Some(AlphaSpec::golden());
    m.function = Some(JumpFunction::sawtooth());
    m.x0 = Some(TorusPoint::from_ratio(1, 7));
    // a mix of round numbers and Fibonacci denominators q_15 = 987,
    // q_19 = 6765, q_20 = 10946
    m.checkpoints = vec![10, 100, 987, 6765, 10946, 100_000];
    m
}

fn lemma_convergence_ladder() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::LimitLaw);
    m.function = Some(JumpFunction::sawtooth());
    m.x0 = Some(TorusPoint::zero());
    m.ladder = vec![100, 1000, 10_000];
    m.ladder_index = Some(10);
    m.grid = Some(101);
    m.policy = Some(JumpPolicy::RightLimit);
    m.tolerance = Some(0.05);
    m
}

fn temporal_ecdf_vs_law() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::TemporalEcdf);
    m.alpha = Some(ones_with_forced(11, 10_000));
    m.function = Some(JumpFunction::sawtooth());
    m.x0 = Some(TorusPoint::zero());
    m.m_rule = Some(MRule { c: "1".into(), index: 10 });
    m.policy = Some(JumpPolicy::RightLimit);
    m.tolerance = Some(0.05);
    m
}

fn refute_tdlt_sawtooth() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::RefuteTdlt);
    m.alpha = Some(ones_with_forced(11, 10_000));
    m.function = Some(JumpFunction::sawtooth());
    m.x0 = Some(TorusPoint::zero());
    m.indices = vec![10];
    m.policy = Some(JumpPolicy::RightLimit);
    m.tolerance = Some(0.05);
    m
}

fn isolated_sqrt2() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::Isolated);
    m.betas = vec![BarInput::Certified { spec: AlphaSpec::sqrt2_minus_1() }];
    m.delta = Some(0.1);
    m.n_max = Some(10_000);
    m.tolerance = Some(0.05);
    m
}

fn smooth_remainder_bound() -> ExperimentManifest {
    let mut m = ExperimentManifest::new(ScenarioKind::Remainder);
    m.alpha = Some(AlphaSpec::golden());
    m.function = Some(JumpFunction::square_minus_third());
    m.x0 = Some(TorusPoint::from_ratio(1, 7));
    m.m = Some(100_000);
    m.tolerance = Some(1.10);
    m
}

/// Every built-in, in stable presentation order.
pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "cf-golden-table",
        about: "golden rotation: convergents k <= 30 with certified delta enclosures",
        build: cf_golden_table,
    },
    Builtin {
        name: "cf-sqrt2-table",
        about: "sqrt(2)-1: convergents k <= 30 with certified delta enclosures",
        build: cf_sqrt2_table,
    },
    Builtin {
        name: "khintchine-levy-mc",
        about: "1000 seeded uniform rotations, 50 digits: mean log q_k / k vs pi^2/(12 log 2)",
        build: khintchine_levy_mc,
    },
    Builtin {
        name: "dk-golden-suite",
        about: "variation bound |S_{q_n}| <= Var(f), golden rotation, 3 functions x 3 starts, n <= 20",
        build: dk_golden_suite,
    },
    Builtin {
        name: "dk-constructed-suite",
        about: "variation bound on a digit-rule rotation with a_7 = 50, same grid",
        build: dk_constructed_suite,
    },
    Builtin {
        name: "birkhoff-golden-checkpoints",
        about: "sawtooth sums at fixed checkpoints with partial-quotient bounds",
        build: birkhoff_golden_checkpoints,
    },
    Builtin {
        name: "lemma-convergence-ladder",
        about: "sup_c |S/a - g(c)| ladder a_11 in {1e2,1e3,1e4}: decreasing, final <= 0.05",
        build: lemma_convergence_ladder,
    },
    Builtin {
        name: "temporal-ecdf-vs-law",
        about: "temporal ECDF at M(c=1), a_11 = 1e4, vs the exact law of g(U_1): KS <= 0.05",
        build: temporal_ecdf_vs_law,
    },
    Builtin {
        name: "refute-tdlt-sawtooth",
        about: "two-scale standardized comparison of g(U_c) laws; verdict distinct",
        build: refute_tdlt_sawtooth,
    },
    Builtin {
        name: "isolated-sqrt2",
        about: "isolation sieve for beta = sqrt(2)-1, delta = 0.1, N <= 1e4: density near 0.8",
        build: isolated_sqrt2,
    },
    Builtin {
        name: "smooth-remainder-bound",
        about: "running max of |S_N(f) - S_N(h)| for {x}^2 - 1/3: flat across the last decade",
        build: smooth_remainder_bound,
    },
];

/// Look up a built-in manifest by name.
pub fn builtin(name: &str) -> Option<ExperimentManifest> {
    BUILTINS.iter().find(|b| b.name == name).map(|b| b.manifest())
}
