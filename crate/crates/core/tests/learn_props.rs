use proptest::prelude::*;
use tdarobust_core::learn::{fit, LinearSpec, Task};

fn dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (10usize..60, 1usize..5).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), n),
            prop::collection::vec(-1.0f64..1.0, d),
            prop::collection::vec(-0.3f64..0.3, n),
        )
            .prop_map(|(x, beta, noise)| {
                let y = x
                    .iter()
                    .zip(&noise)
                    .map(|(row, e)| row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + e)
                    .collect();
                (x, y)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn averaged_objective_is_nonincreasing((x, y) in dataset(), seed in 0u64..1000, classify in prop::bool::ANY) {
        let (targets, task) = if classify {
            (y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect::<Vec<_>>(), Task::Classify)
        } else {
            (y, Task::Regress)
        };
        let spec = LinearSpec { task, epochs: 60, seed, ..LinearSpec::default() };
        let model = fit(&x, &targets, &spec).unwrap();
        for w in model.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-3, "{:?}", model.objective_trace);
        }
    }

    #[test]
    fn fitting_is_deterministic((x, y) in dataset(), seed in 0u64..1000) {
        let spec = LinearSpec { task: Task::Regress, epochs: 20, seed, ..LinearSpec::default() };
        prop_assert_eq!(fit(&x, &y, &spec).unwrap(), fit(&x, &y, &spec).unwrap());
    }
}
