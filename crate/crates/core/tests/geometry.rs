use atlas_core::docterm::{DocRow, SparseDocTermMatrix};
use atlas_core::geometry::{
    angular_distance, angular_distance_dense, pairwise_term_distances, CondensedDistanceMatrix, MatrixKind,
};
use atlas_core::text::Vocabulary;
use proptest::prelude::*;

fn support() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::btree_set(0u32..24, 1..12).prop_map(|s| s.into_iter().collect())
}

fn dense(s: &[u32]) -> Vec<f64> {
    let mut v = vec![0.0; 24];
    for &i in s {
        v[i as usize] = 1.0;
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sparse_angle_matches_dense(x in support(), y in support()) {
        let sparse: f64 = angular_distance(&x, &y).unwrap();
        let d: f64 = angular_distance_dense(&dense(&x), &dense(&y)).unwrap();
        prop_assert!((sparse - d).abs() <= 1e-12);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&sparse));
    }

    #[test]
    fn angle_is_symmetric_and_satisfies_triangle(x in support(), y in support(), z in support()) {
        let d = |a: &[u32], b: &[u32]| -> f64 { angular_distance(a, b).unwrap() };
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
    }

    #[test]
    fn pairwise_matrix_matches_columnwise_angles(rows in prop::collection::vec(support(), 1..20)) {
        let n_terms = 24;
        let docs: Vec<DocRow> = rows
            .iter()
            .enumerate()
            .map(|(d, s)| DocRow { doc_index: d, terms: s.iter().map(|t| t + 1).collect() })
            .collect();
        let x = SparseDocTermMatrix::from_rows(rows.len(), n_terms, docs).unwrap();
        let vocab = Vocabulary::from_counts((0..n_terms).map(|t| (format!("t{t:02}"), 100 - t as u64)));
        let td = pairwise_term_distances::<f64>(&x, &vocab).unwrap();
        let columns = x.column_supports();
        prop_assert_eq!(td.ranks.len() + td.excluded.len(), n_terms);
        for (i, &ri) in td.ranks.iter().enumerate() {
            for (j, &rj) in td.ranks.iter().enumerate().skip(i + 1) {
                let want: f64 = angular_distance(&columns[ri - 1], &columns[rj - 1]).unwrap();
                prop_assert!((td.matrix.get(i, j) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn binary_round_trip(values in prop::collection::vec(0.0f64..10.0, 15)) {
        let ids: Vec<String> = (0..6).map(|i| format!("a{i}")).collect();
        let m = CondensedDistanceMatrix::new(6, values, MatrixKind::Author, ids).unwrap();
        let mut bytes = Vec::new();
        m.write_binary(&mut bytes).unwrap();
        let back = CondensedDistanceMatrix::<f64>::read_binary(&m.header(), &bytes).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn initial_layout_follows_point_ids() {
    use atlas_core::geometry::umap::random_init;
    let ids: Vec<String> = ["cell", "gene", "virus", "tumor"].iter().map(|s| s.to_string()).collect();
    let reversed: Vec<String> = ids.iter().rev().cloned().collect();
    let (a, b) = (random_init(&ids, 3, 9), random_init(&reversed, 3, 9));
    for i in 0..4 {
        assert_eq!(&a[i * 3..i * 3 + 3], &b[(3 - i) * 3..(3 - i) * 3 + 3]);
    }
}
