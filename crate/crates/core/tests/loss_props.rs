use proptest::prelude::*;
use tdarobust_core::loss::Loss;

fn any_loss() -> impl Strategy<Value = Loss> {
    prop_oneof![
        Just(Loss::Squared),
        Just(Loss::Huber),
        (1.0f64..=2.0).prop_map(|alpha| Loss::Charbonnier { alpha }),
        Just(Loss::Cauchy),
        (0.1f64..2.0, 0.1f64..2.0, 0.1f64..2.0)
            .prop_map(|(a, db, dc)| Loss::Hampel { a, b: a + db, c: a + db + dc }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rho_prime_is_z_times_phi(loss in any_loss(), z in 1e-6f64..20.0) {
        let lhs = loss.rho_prime(z);
        let rhs = z * loss.phi(z);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn zeta_dominates_phi_where_phi_decreases(loss in any_loss(), z in 1e-6f64..20.0) {
        if loss.phi_prime(z) <= 0.0 {
            let (phi, zeta) = (loss.phi(z), loss.zeta(z));
            prop_assert!(phi >= 0.0);
            prop_assert!(zeta >= phi - 1e-15);
        }
    }
}
