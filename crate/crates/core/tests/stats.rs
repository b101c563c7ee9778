use atlas_core::stats::{fisher_exact, spearman, wilcoxon_signed_rank, ContingencyTable2x2};
use proptest::prelude::*;

fn distinct_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-1000i32..1000, n).prop_map(|s| s.into_iter().map(|v| v as f64 / 7.0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn spearman_identity_and_antisymmetry(x in distinct_values(15), y in distinct_values(15)) {
        prop_assert!((spearman(&x, &x).unwrap().rho - 1.0).abs() <= 1e-12);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let (a, b) = (spearman(&x, &y).unwrap().rho, spearman(&x, &neg).unwrap().rho);
        prop_assert!((a + b).abs() <= 1e-12);
    }

    #[test]
    fn fisher_is_a_probability_and_transpose_invariant(a in 0u64..15, b in 0u64..15, c in 0u64..15, d in 0u64..15) {
        prop_assume!(a + b > 0 && c + d > 0 && a + c > 0 && b + d > 0);
        let r = fisher_exact(ContingencyTable2x2::new(a, b, c, d)).unwrap();
        let t = fisher_exact(ContingencyTable2x2::new(a, c, b, d)).unwrap();
        prop_assert!(r.p_two_sided > 0.0 && r.p_two_sided <= 1.0 + 1e-12);
        prop_assert!((r.p_two_sided - t.p_two_sided).abs() <= 1e-12);
        prop_assert!(r.ci95_low <= r.odds_ratio && r.odds_ratio <= r.ci95_high);
    }

    #[test]
    fn wilcoxon_is_sign_symmetric(diffs in prop::collection::vec(-5i32..=5, 1..15)) {
        prop_assume!(diffs.iter().any(|&d| d != 0));
        let x: Vec<f64> = diffs.iter().map(|&d| d as f64).collect();
        let zeros = vec![0.0; x.len()];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let (p, q) = (wilcoxon_signed_rank(&x, &zeros).unwrap(), wilcoxon_signed_rank(&neg, &zeros).unwrap());
        prop_assert!((p.p_two_sided - q.p_two_sided).abs() <= 1e-12);
        prop_assert!(p.p_two_sided > 0.0 && p.p_two_sided <= 1.0);
        prop_assert_eq!(p.w_plus, q.w_minus);
    }
}

#[test]
fn wilcoxon_rejects_all_zero_differences() {
    assert!(wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]).is_err());
}
