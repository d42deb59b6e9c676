use proptest::prelude::*;
use tdarobust_core::density::{rkde_fit, KirwlsOptions};
use tdarobust_core::kernel::KernelSpec;
use tdarobust_core::loss::Loss;
use tdarobust_core::robustness::{confidence_radius, influence_bound_kde, ConfidenceSpec, RkdeInfluenceBound};
use tdarobust_core::PointCloud;

fn spec_strategy() -> impl Strategy<Value = ConfidenceSpec> {
    (
        prop_oneof![0.05f64..0.45, Just(0.5), 0.55f64..0.95],
        1.1f64..5.0,
        0.001f64..0.5,
        0.0f64..10.0,
        0.1f64..4.0,
        0.05f64..2.0,
    )
        .prop_map(|(p, a_sigma, alpha, extra_gamma, m, mu)| ConfidenceSpec {
            n: 16,
            p,
            a_sigma,
            alpha,
            gamma: ConfidenceSpec::gamma_floor() + 1e-6 + extra_gamma,
            c: ConfidenceSpec::default_c(a_sigma),
            m,
            mu,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// From n = 16 on, past the turning point of `log n / √n`.
    #[test]
    fn radius_decreases_along_a_dyadic_ladder(spec in spec_strategy(), nu in 0.01f64..10.0) {
        let radii: Vec<f64> = (4..=24)
            .map(|k| confidence_radius(&ConfidenceSpec { n: 1 << k, ..spec }, nu).unwrap())
            .collect();
        for w in radii.windows(2) {
            prop_assert!(w[1] < w[0], "{:?}", radii);
        }
    }
}

fn cluster() -> PointCloud {
    let mut c = Vec::new();
    for i in 0..30 {
        let t = i as f64 * 0.7;
        c.extend([t.cos() * 0.5, (1.3 * t).sin() * 0.5]);
    }
    PointCloud::new(2, c).unwrap()
}

#[test]
fn rkde_bound_stays_bounded_while_kde_saturates() {
    let x = cluster();
    let k = KernelSpec::gaussian(0.4, 2).unwrap();
    let kde_ceiling = {
        let kde = tdarobust_core::density::kde_fit(&x, &k).unwrap();
        k.kappa().sqrt() * (k.kappa() + kde.squared_norm()).sqrt()
    };
    let ladder: Vec<f64> = (0..12).map(|i| 2f64.powi(i)).collect();
    let losses = [
        Loss::Huber.scaled(k.nu()),
        Loss::Charbonnier { alpha: 1.0 },
        Loss::Cauchy,
        Loss::Hampel { a: 1.0, b: 2.0, c: 3.0 }.scaled(k.nu()),
    ];
    for loss in losses {
        let fit = rkde_fit(&x, &k, &loss, &KirwlsOptions::default()).unwrap();
        let bound = RkdeInfluenceBound::new(&fit).unwrap();
        let values: Vec<f64> = ladder.iter().map(|&r| bound.at(&[r, 0.0])).collect();
        assert!(values.iter().all(|v| v.is_finite()), "{}", loss.name());
        // far away the residual saturates, so the sequence converges
        let tail = &values[values.len() - 3..];
        assert!((tail[2] - tail[0]).abs() <= 1e-9 * tail[0].abs().max(1.0), "{} {:?}", loss.name(), values);
    }
    let kde: Vec<f64> = ladder.iter().map(|&r| influence_bound_kde(&x, &k, &[r, 0.0]).unwrap()).collect();
    for w in kde.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
    let last = *kde.last().unwrap();
    assert!((last - kde_ceiling).abs() <= 1e-9 * kde_ceiling, "{last} vs {kde_ceiling}");
}
