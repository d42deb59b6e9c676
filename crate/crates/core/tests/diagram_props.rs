use proptest::prelude::*;
use tdarobust_core::diagram::oracle::{bottleneck_brute, wasserstein_brute};
use tdarobust_core::diagram::{
    bottleneck_points, persistence_image, wasserstein_points, PersistenceImageSpec, Point,
};
use tdarobust_core::grid::Direction;
use tdarobust_core::homology::{PersistenceDiagram, PersistencePair};

fn small_diagram() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0.0f64..4.0, 0.01f64..3.0).prop_map(|(l, p)| (l, l + p)), 0..=5)
}

/// Quantized coordinates make ties between candidate costs frequent.
fn tied_diagram() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0u8..6, 1u8..5).prop_map(|(l, p)| (l as f64 * 0.5, (l + p) as f64 * 0.5)), 0..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matchers_equal_brute_force(a in small_diagram(), b in small_diagram()) {
        prop_assert_eq!(bottleneck_points(&a, &b), bottleneck_brute(&a, &b));
        for p in [1.0, 2.0] {
            prop_assert_eq!(wasserstein_points(&a, &b, p).unwrap(), wasserstein_brute(&a, &b, p));
        }
    }

    #[test]
    fn matchers_equal_brute_force_with_ties(a in tied_diagram(), b in tied_diagram()) {
        prop_assert_eq!(bottleneck_points(&a, &b), bottleneck_brute(&a, &b));
        for p in [1.0, 2.0] {
            prop_assert_eq!(wasserstein_points(&a, &b, p).unwrap(), wasserstein_brute(&a, &b, p));
        }
    }

    #[test]
    fn metric_axioms(a in small_diagram(), b in small_diagram(), c in small_diagram()) {
        prop_assert_eq!(bottleneck_points(&a, &b), bottleneck_points(&b, &a));
        prop_assert_eq!(bottleneck_points(&a, &a), 0.0);
        let ab = bottleneck_points(&a, &b);
        let bc = bottleneck_points(&b, &c);
        let ac = bottleneck_points(&a, &c);
        prop_assert!(ac <= ab + bc + 1e-9);
        for p in [1.0, 2.0, 3.5] {
            let w = |x: &[Point], y: &[Point]| wasserstein_points(x, y, p).unwrap();
            prop_assert_eq!(w(&a, &b), w(&b, &a));
            prop_assert!(w(&a, &a).abs() <= 1e-12);
            prop_assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-9);
        }
    }

    #[test]
    fn bottleneck_is_below_every_wasserstein(a in small_diagram(), b in small_diagram(), p in 1.0f64..8.0) {
        let w = wasserstein_points(&a, &b, p).unwrap();
        prop_assert!(bottleneck_points(&a, &b) <= w * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn images_are_nonnegative_and_vanish_for_diagonal_points(a in small_diagram()) {
        let pairs: Vec<PersistencePair> = a.iter().map(|&(l, u)| PersistencePair::finite(l, u)).collect();
        let d = PersistenceDiagram::new(1, Direction::Superlevel, pairs);
        let spec = PersistenceImageSpec::new(8, 8, 0.2);
        let img = persistence_image(&d, &spec).unwrap();
        prop_assert!(img.data.iter().all(|v| *v >= 0.0));
        let flat = PersistenceDiagram::new(1, Direction::Superlevel, vec![]);
        let zero = persistence_image(&flat, &spec).unwrap();
        prop_assert!(zero.data.iter().all(|v| *v == 0.0));
    }
}
