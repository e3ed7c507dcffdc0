//! Randomized property suites for the analytics and parsers.

use proptest::prelude::*;

use bestk::arm::{ArmSpec, SampleLedger};
use bestk::complexity::{
    bin_rel_entropy, h_large_lb, h_small_lb, h_term, h_tilde, h_tilde_large_cumulative,
    h_tilde_small_cumulative, ComplexityReport,
};
use bestk::instance::Instance;
use bestk::params::{parse_number, parse_params};
use bestk::rng::ArmStreams;
use bestk::subroutines::{pac_best_k, pac_budget, SubroutineConfig};

/// Means vectors that produce a valid instance for some k.
fn arb_instance() -> impl Strategy<Value = Instance> {
    (2usize..14, proptest::collection::vec(0.0f64..=0.5, 2..14))
        .prop_filter_map("needs a strict boundary gap", |(k_seed, means)| {
            let n = means.len();
            let k = 1 + k_seed % (n - 1);
            let arms = means
                .iter()
                .enumerate()
                .map(|(i, &m)| ArmSpec::gaussian(i, m))
                .collect();
            Instance::new(arms, k).ok()
        })
}

proptest! {
    #[test]
    fn groups_partition_the_arms(inst in arb_instance()) {
        let d = inst.decompose_groups().unwrap();
        let large: usize = d.groups_large.values().map(Vec::len).sum();
        let small: usize = d.groups_small.values().map(Vec::len).sum();
        prop_assert_eq!(large, inst.k);
        prop_assert_eq!(small, inst.n_arms() - inst.k);
        let mut seen: Vec<usize> = d
            .groups_large
            .values()
            .chain(d.groups_small.values())
            .flatten()
            .copied()
            .collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..inst.n_arms()).collect::<Vec<_>>());
    }

    #[test]
    fn analytics_are_permutation_invariant(inst in arb_instance(), seed in any::<u64>()) {
        let (p, _) = inst.permute(seed);
        let a = inst.decompose_groups().unwrap();
        let b = p.decompose_groups().unwrap();
        prop_assert_eq!(h_term(&a), h_term(&b));
        prop_assert_eq!(h_tilde(&a), h_tilde(&b));
        prop_assert_eq!(h_large_lb(&a), h_large_lb(&b));
        prop_assert_eq!(h_small_lb(&a), h_small_lb(&b));
        prop_assert_eq!(h_tilde_large_cumulative(&a), h_tilde_large_cumulative(&b));
        prop_assert_eq!(h_tilde_small_cumulative(&a), h_tilde_small_cumulative(&b));
    }

    #[test]
    fn report_terms_nonnegative_finite(inst in arb_instance()) {
        let r = ComplexityReport::from_decomposition(&inst.decompose_groups().unwrap(), inst.k);
        for v in [r.h, r.h_tilde, r.h_large_lb, r.h_small_lb, r.h_tilde_large,
                  r.h_tilde_small, r.h_ln_k] {
            prop_assert!(v.is_finite() && v >= 0.0, "term {}", v);
        }
        prop_assert!(r.h_tilde >= r.h);
    }

    // interchange of summation order, on arbitrary per-level weights
    #[test]
    fn summation_interchange_holds_for_arbitrary_weights(
        sizes in proptest::collection::vec(0usize..6, 1..10),
        weights in proptest::collection::vec(0.0f64..100.0, 10),
    ) {
        let levels = sizes.len();
        let double: f64 = (0..levels)
            .map(|i| sizes[i] as f64 * weights[..=i].iter().sum::<f64>())
            .sum();
        let single: f64 = (0..levels)
            .map(|j| weights[j] * sizes[j..].iter().sum::<usize>() as f64)
            .sum();
        prop_assert!((double - single).abs() <= 1e-9 * double.abs().max(1.0));
    }

    #[test]
    fn theorem3_ratio_envelope(inst in arb_instance()) {
        let r = ComplexityReport::from_decomposition(&inst.decompose_groups().unwrap(), inst.k);
        // sanity envelope, not a proof check
        prop_assert!(r.ratio_vs_lb_lnln_n <= 32.0, "ratio {}", r.ratio_vs_lb_lnln_n);
        prop_assert!(r.ratio_vs_h_ln_k <= 32.0, "ratio {}", r.ratio_vs_h_ln_k);
    }

    #[test]
    fn entropy_symmetric_under_complement(x in 0.001f64..0.999, y in 0.001f64..0.999) {
        let a = bin_rel_entropy(x, y).unwrap();
        let b = bin_rel_entropy(1.0 - x, 1.0 - y).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        prop_assert!(a >= -1e-15);
    }

    #[test]
    fn instance_json_round_trip(inst in arb_instance()) {
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back.k, inst.k);
        prop_assert_eq!(back.true_means(), inst.true_means());
    }

    #[test]
    fn pac_budget_accounting(
        n_arms in 2usize..6,
        k_seed in 1usize..6,
        eps in 0.05f64..0.5,
        delta in 0.01f64..0.5,
        seed in any::<u64>(),
    ) {
        let k = 1 + k_seed % n_arms;
        let arms: Vec<ArmSpec> = (0..n_arms).map(|i| ArmSpec::gaussian(i, 0.25)).collect();
        let s: Vec<usize> = (0..n_arms).collect();
        let cfg = SubroutineConfig::default();
        let mut streams = ArmStreams::new(seed, 0, n_arms);
        let mut ledger = SampleLedger::new(n_arms);
        let p = pac_best_k(&arms, &s, k, eps, delta, &cfg, &mut streams, &mut ledger).unwrap();
        let expected = if k == n_arms {
            0
        } else {
            pac_budget(&cfg, n_arms, k, eps, delta) * n_arms as u64
        };
        prop_assert_eq!(p.samples_used, expected);
        prop_assert_eq!(ledger.total, expected);
        prop_assert_eq!(p.s_large.len(), k);
    }

    #[test]
    fn number_parser_round_trips_floats(v in -1.0e6f64..1.0e6) {
        let parsed = parse_number(&format!("{}", v)).unwrap();
        prop_assert_eq!(parsed, v);
    }

    #[test]
    fn params_parser_never_panics(s in "[a-z=0-9,.^-]{0,40}") {
        let _ = parse_params(&s);
    }
}
