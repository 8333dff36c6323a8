use proptest::prelude::*;

use ssweight::linalg::{
    frac, image, induced_map, kernel, rank, rat, signature, QuotientSpace, Rat, RatMatrix, Subspace,
};
use ssweight::polygons::{newton_polygon, Polygon, SlopeMultiset};
use ssweight::scenarios::random_instance;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = RatMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-3i64..=3, r * c).prop_map(move |v| RatMatrix::from_ints(r, c, &v))
    })
}

fn shaped(rows: usize, cols: usize) -> impl Strategy<Value = RatMatrix> {
    prop::collection::vec(-2i64..=2, rows * cols).prop_map(move |v| RatMatrix::from_ints(rows, cols, &v))
}

/// Upper unitriangular times lower unitriangular: always invertible.
fn invertible(n: usize) -> impl Strategy<Value = RatMatrix> {
    (shaped(n, n), shaped(n, n)).prop_map(move |(a, b)| {
        let mut u = RatMatrix::identity(n);
        let mut l = RatMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                if i < j {
                    u.set(i, j, a.get(i, j).clone());
                } else if i > j {
                    l.set(i, j, b.get(i, j).clone());
                }
            }
        }
        &u * &l
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_plus_nullity(m in matrix(6, 6)) {
        prop_assert_eq!(rank(&m) + kernel(&m).dim(), m.cols());
    }

    #[test]
    fn rank_of_transpose(m in matrix(6, 6)) {
        prop_assert_eq!(rank(&m), rank(&m.transpose()));
    }

    #[test]
    fn signature_is_congruence_invariant(
        (s, p) in (1usize..=5).prop_flat_map(|n| (shaped(n, n), invertible(n)))
    ) {
        let sym = &s + &s.transpose();
        let moved = &(&p.transpose() * &sym) * &p;
        prop_assert_eq!(signature(&sym).unwrap(), signature(&moved).unwrap());
    }

    #[test]
    fn induced_maps_compose(
        a in shaped(4, 3),
        b in shaped(3, 4),
        d in shaped(3, 1),
        extra in shaped(4, 1),
    ) {
        // Denominators chosen so both maps descend.
        let q1 = QuotientSpace::new(Subspace::full(3), image(&d)).unwrap();
        let d2 = image(&(&a * &d)).sum(&image(&extra));
        let q2 = QuotientSpace::new(Subspace::full(4), d2.clone()).unwrap();
        let q3 = QuotientSpace::new(Subspace::full(3), d2.map(&b)).unwrap();
        let fa = induced_map(&a, &q1, &q2).unwrap();
        let fb = induced_map(&b, &q2, &q3).unwrap();
        let fba = induced_map(&(&b * &a), &q1, &q3).unwrap();
        prop_assert_eq!(fba, &fb * &fa);
    }

    #[test]
    fn polygon_vertices_decide_dominance(
        xs in prop::collection::vec((0i64..=8, 1i64..=4), 0..6),
        ys in prop::collection::vec((0i64..=8, 1i64..=4), 0..6),
    ) {
        let len = xs.len().min(ys.len());
        let to_rats = |v: &[(i64, i64)]| -> Vec<Rat> { v[..len].iter().map(|&(n, d)| frac(n, d)).collect() };
        let p = newton_polygon(&SlopeMultiset::new(2, to_rats(&xs)));
        let q = Polygon::from_segments(to_rats(&ys).into_iter().map(|s| (s, 1)));
        let dense = (0..=24 * len as i64).all(|k| {
            let x = frac(k, 24);
            p.value_at(&x).unwrap() >= q.value_at(&x).unwrap()
        });
        prop_assert_eq!(p.first_point_below(&q).is_none(), dense);
        prop_assert_eq!(p.endpoint().0.clone(), rat(len as i64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_complexes_satisfy_structure(seed in any::<u64>()) {
        let sc = random_instance(seed);
        prop_assert!(sc.validate().is_valid());
        let bad: Vec<_> = sc.structure_checks().into_iter().filter(|c| c.failed()).collect();
        prop_assert!(bad.is_empty(), "{:?}", bad);
        let e1 = ssweight::weight_ss::build_e1(&sc).unwrap();
        prop_assert!(e1.structure_checks().iter().all(|c| !c.failed()));
        // Gysin maps are derived, so recomputing them is exact.
        for k in 1..=sc.max_level() {
            for m in 0..=2 * sc.n {
                prop_assert_eq!(sc.tau(k, m).ok(), sc.tau(k, m).ok());
            }
        }
    }
}
