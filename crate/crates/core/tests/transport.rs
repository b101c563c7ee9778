use atlas_core::transport::{sinkhorn, wasserstein, OtParams};
use atlas_core::PointPattern;
use proptest::prelude::*;

fn pattern(owner: &'static str, dim: usize) -> impl Strategy<Value = PointPattern> {
    pattern_in(owner, dim, 5.0)
}

/// Patterns with coordinates in `[-half_width, half_width]^dim`.
fn pattern_in(owner: &'static str, dim: usize, half_width: f64) -> impl Strategy<Value = PointPattern> {
    (1usize..=8).prop_flat_map(move |n| {
        (
            prop::collection::vec(-half_width..half_width, n * dim),
            prop::collection::vec(0.05f64..1.0, n),
        )
            .prop_map(move |(points, weights)| PointPattern::from_weights(owner, dim, &points, &weights).unwrap())
    })
}

fn w(a: &PointPattern, b: &PointPattern, p: u32) -> f64 {
    wasserstein(a, b, &OtParams { p, ..OtParams::default() }).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms(a in pattern("a", 3), b in pattern("b", 3), c in pattern("c", 3), p in 1u32..=2) {
        let (ab, ba) = (w(&a, &b, p), w(&b, &a, p));
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert_eq!(w(&a, &a, p), 0.0);
        prop_assert!(w(&a, &c, p) <= ab + w(&b, &c, p) + 1e-9);
    }

    #[test]
    fn plan_marginals_match_masses(a in pattern("a", 2), b in pattern("b", 2)) {
        let (_, plan) = wasserstein(&a, &b, &OtParams::default()).unwrap();
        let (rows, cols) = plan.marginals(a.len(), b.len());
        for (r, m) in rows.iter().zip(&a.masses) {
            prop_assert!((r - m).abs() <= 1e-9);
        }
        for (c, m) in cols.iter().zip(&b.masses) {
            prop_assert!((c - m).abs() <= 1e-9);
        }
        prop_assert!(plan.flows.iter().all(|f| f.2 >= 0.0));
    }

    #[test]
    fn translation_invariance(a in pattern("a", 3), b in pattern("b", 3), shift in prop::collection::vec(-3.0f64..3.0, 3)) {
        let moved = w(&a.translated(&shift), &b.translated(&shift), 2);
        prop_assert!((moved - w(&a, &b, 2)).abs() <= 1e-12 * (1.0 + moved));
    }

    #[test]
    fn scaling_covariance(a in pattern("a", 3), b in pattern("b", 3), s in 0.1f64..10.0) {
        let scaled = w(&a.scaled(s), &b.scaled(s), 2);
        prop_assert!((scaled - s * w(&a, &b, 2)).abs() <= 1e-9 * (1.0 + scaled));
    }

    #[test]
    // the default sharpness converges within max_iter only for moderate costs
    fn sinkhorn_never_undercuts(a in pattern_in("a", 3, 0.5), b in pattern_in("b", 3, 0.5)) {
        let params = OtParams::default();
        // a one-point side forces the plan, and then the two costs differ only by summation order
        let exact = w(&a, &b, 2);
        prop_assert!(sinkhorn(&a, &b, &params).unwrap() >= exact * (1.0 - 1e-12));
    }
}

#[test]
fn f32_patterns_agree_with_f64() {
    let a = atlas_core::transport::WeightedPointPattern::<f32>::new("a", 2, vec![0.0, 0.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap();
    let b = atlas_core::transport::WeightedPointPattern::<f32>::new("b", 2, vec![0.0, 0.0], vec![1.0]).unwrap();
    let (d, _) = wasserstein(&a, &b, &OtParams::default()).unwrap();
    assert!((d - 0.5f32.sqrt()).abs() < 1e-6);
}
