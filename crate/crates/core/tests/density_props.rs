use proptest::prelude::*;
use tdarobust_core::density::{kde_fit, rkde_fit, KirwlsOptions};
use tdarobust_core::grid::GridSpec;
use tdarobust_core::kernel::{residual_norm, rkhs_norm, sup_norm_on_grid, KernelExpansion, KernelSpec};
use tdarobust_core::loss::Loss;
use tdarobust_core::PointCloud;

fn cloud(max_n: usize, max_d: usize) -> impl Strategy<Value = PointCloud> {
    (1..=max_d, 2..=max_n).prop_flat_map(|(d, n)| {
        prop::collection::vec(-3.0f64..3.0, n * d).prop_map(move |c| PointCloud::new(d, c).unwrap())
    })
}

fn robust_loss() -> impl Strategy<Value = Loss> {
    prop_oneof![
        Just(Loss::Huber),
        (1.0f64..=2.0).prop_map(|alpha| Loss::Charbonnier { alpha }),
        Just(Loss::Cauchy),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn squared_loss_reproduces_the_kde(x in cloud(200, 3), sigma in 0.2f64..2.0) {
        let k = KernelSpec::gaussian(sigma, x.dim()).unwrap();
        let fit = rkde_fit(&x, &k, &Loss::Squared, &KirwlsOptions::default()).unwrap();
        let kde = kde_fit(&x, &k).unwrap();
        for (a, b) in fit.expansion.weights().iter().zip(kde.weights()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn kirwls_risk_never_increases(
        x in cloud(120, 3),
        sigma in 0.2f64..2.0,
        loss in robust_loss(),
        scale in 0.1f64..2.0,
    ) {
        let k = KernelSpec::gaussian(sigma, x.dim()).unwrap();
        let loss = loss.scaled(scale * k.nu());
        let fit = rkde_fit(&x, &k, &loss, &KirwlsOptions::default()).unwrap();
        for w in fit.risk_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", fit.risk_trace);
        }
        prop_assert!(fit.converged);
        prop_assert!(fit.iterations <= 200);
        let w = fit.expansion.weights();
        prop_assert!(w.iter().all(|&v| v >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_are_at_most_twice_nu(x in cloud(40, 3), sigma in 0.1f64..2.0, y in prop::collection::vec(-6.0f64..6.0, 3)) {
        let k = KernelSpec::gaussian(sigma, x.dim()).unwrap();
        let g = kde_fit(&x, &k).unwrap();
        let r = residual_norm(&k, &y[..x.dim()], &g).unwrap();
        prop_assert!(r <= 2.0 * k.nu() * (1.0 + 1e-12));
    }

    #[test]
    fn norm_sandwich_for_convex_weights(
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0), 1..12),
        sigma in 0.3f64..1.0,
    ) {
        let coords: Vec<f64> = raw.iter().flat_map(|(a, b, _)| [*a, *b]).collect();
        let total: f64 = raw.iter().map(|t| t.2).sum();
        let w: Vec<f64> = raw.iter().map(|t| t.2 / total).collect();
        let k = KernelSpec::gaussian(sigma, 2).unwrap();
        let g = KernelExpansion::new(k, PointCloud::new(2, coords).unwrap(), w).unwrap();
        let grid = GridSpec::cube(2, -2.0, 2.0, 81).unwrap();
        let sup = sup_norm_on_grid(&g, &grid).unwrap();
        // the grid sup underestimates the true sup by at most L · h √d / 2
        let slack = k.lipschitz() * grid.max_spacing() * std::f64::consts::SQRT_2 / 2.0;
        let norm = rkhs_norm(&g);
        prop_assert!(norm * norm <= sup + slack);
        prop_assert!(sup <= k.nu() * norm * (1.0 + 1e-12));
    }
}
