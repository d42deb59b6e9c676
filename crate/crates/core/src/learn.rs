//! Linear SVM (one-vs-rest hinge loss) and linear ε-insensitive SVR trained by
//! primal stochastic subgradient descent with an L2 penalty.
//!
//! Steps decay as `1/√t` and the model returned is the average of all
//! iterates. Samples are visited in a seeded shuffle of a canonical (sorted)
//! order, so the fitted model does not depend on the order rows are supplied
//! in.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;

use crate::synth::rng_stream;
use crate::math::sqrt;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Task {
    Classify,
    Regress,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LinearSpec {
    pub task: Task,
    pub lambda: f64,
    pub epochs: usize,
    /// Width of the insensitive zone (regression only).
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for LinearSpec {
    fn default() -> Self {
        Self {
            task: Task::Classify,
            lambda: 1e-3,
            epochs: 200,
            epsilon: 0.1,
            seed: 0,
        }
    }
}

impl LinearSpec {
    pub fn classify() -> Self {
        Self::default()
    }

    pub fn regress() -> Self {
        Self {
            task: Task::Regress,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::param("epochs must be positive"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::param("epsilon must be nonnegative"));
        }
        Ok(())
    }
}

/// One weight row and bias per class (one-vs-rest), or a single row for
/// regression.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearModel {
    pub spec: LinearSpec,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Class labels matching the weight rows; empty for regression.
    pub classes: Vec<i64>,
    /// Regularized training objective of the averaged iterate after each epoch.
    pub objective_trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn check_features(features: &[Vec<f64>], targets: &[f64]) -> Result<usize> {
    if features.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            found: targets.len(),
        });
    }
    let p = features.first().map(|r| r.len()).unwrap_or(0);
    for row in features {
        if row.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("features must be finite"));
        }
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("targets must be finite"));
    }
    Ok(p)
}

/// Per-sample loss and its derivative with respect to the score.
trait Margin {
    fn loss(&self, score: f64, y: f64) -> f64;
    fn slope(&self, score: f64, y: f64) -> f64;
}

struct Hinge;

impl Margin for Hinge {
    fn loss(&self, score: f64, y: f64) -> f64 {
        (1.0 - y * score).max(0.0)
    }
    fn slope(&self, score: f64, y: f64) -> f64 {
        if y * score < 1.0 {
            -y
        } else {
            0.0
        }
    }
}

struct Insensitive(f64);

impl Margin for Insensitive {
    fn loss(&self, score: f64, y: f64) -> f64 {
        ((score - y).abs() - self.0).max(0.0)
    }
    fn slope(&self, score: f64, y: f64) -> f64 {
        let r = score - y;
        if r > self.0 {
            1.0
        } else if r < -self.0 {
            -1.0
        } else {
            0.0
        }
    }
}

fn objective(
    loss: &impl Margin,
    lambda: f64,
    w: &[f64],
    b: f64,
    x: &[&[f64]],
    y: &[f64],
) -> f64 {
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| loss.loss(dot(w, xi) + b, *yi))
        .sum::<f64>()
        / x.len() as f64;
    0.5 * lambda * dot(w, w) + data
}

/// Averaged SGD with steps `η₀/√(1+t)`, `η₀ = 1/(2R²)` where `R²` bounds
/// `1 + ‖x‖²`, starting from `w = 0` and bias `b0`. Returns the running
/// average of all iterates and the objective of that average after each
/// epoch.
fn sgd(
    loss: &impl Margin,
    spec: &LinearSpec,
    x: &[&[f64]],
    y: &[f64],
    b0: f64,
    stream: u64,
) -> (Vec<f64>, f64, Vec<f64>) {
    let p = x[0].len();
    let lambda = spec.lambda;
    let r2 = x.iter().map(|r| 1.0 + dot(r, r)).fold(0.0, f64::max);
    let eta0 = 0.5 / r2;
    let mut w = vec![0.0; p];
    let mut b = b0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = rng_stream(spec.seed, stream);
    let mut trace = Vec::with_capacity(spec.epochs);
    let mut sum_w = vec![0.0; p];
    let mut sum_b = 0.0;
    let mut avg_w = vec![0.0; p];
    let mut t = 0.0f64;
    for _ in 0..spec.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1.0;
            let eta = eta0 / sqrt(1.0 + t);
            let g = loss.slope(dot(&w, x[i]) + b, y[i]);
            let shrink = 1.0 - eta * lambda;
            for (wj, xj) in w.iter_mut().zip(x[i]) {
                *wj = shrink * *wj - eta * g * xj;
            }
            b -= eta * g;
            for (a, wj) in sum_w.iter_mut().zip(&w) {
                *a += wj;
            }
            sum_b += b;
        }
        for (a, s) in avg_w.iter_mut().zip(&sum_w) {
            *a = s / t;
        }
        trace.push(objective(loss, lambda, &avg_w, sum_b / t, x, y));
    }
    (avg_w, sum_b / t, trace)
}

/// Fit a linear model. Classification targets must be integral.
pub fn fit(features: &[Vec<f64>], targets: &[f64], spec: &LinearSpec) -> Result<LinearModel> {
    spec.validate()?;
    let p = check_features(features, targets)?;
    if features.len() < 2 {
        return Err(Error::param("need at least two samples"));
    }
    if p == 0 {
        return Err(Error::param("need at least one feature"));
    }

    let mut canon: Vec<usize> = (0..features.len()).collect();
    canon.sort_by(|&a, &b| {
        lex_cmp(&features[a], &features[b]).then(targets[a].total_cmp(&targets[b]))
    });
    let x: Vec<&[f64]> = canon.iter().map(|&i| features[i].as_slice()).collect();
    let y: Vec<f64> = canon.iter().map(|&i| targets[i]).collect();

    match spec.task {
        Task::Regress => {
            // the median is the best constant predictor under absolute loss
            let mut sorted = y.clone();
            sorted.sort_by(f64::total_cmp);
            let b0 = sorted[(sorted.len() - 1) / 2];
            let (w, b, trace) = sgd(&Insensitive(spec.epsilon), spec, &x, &y, b0, 0);
            Ok(LinearModel {
                spec: *spec,
                weights: vec![w],
                bias: vec![b],
                classes: Vec::new(),
                objective_trace: trace,
            })
        }
        Task::Classify => {
            if y.iter().any(|t| libm::trunc(*t) != *t) {
                return Err(Error::param("class labels must be integers"));
            }
            let mut classes: Vec<i64> = y.iter().map(|t| *t as i64).collect();
            classes.sort_unstable();
            classes.dedup();
            if classes.len() < 2 {
                return Err(Error::param("classification needs at least two classes"));
            }
            let mut weights = Vec::with_capacity(classes.len());
            let mut bias = Vec::with_capacity(classes.len());
            let mut trace = vec![0.0; spec.epochs];
            for (k, &c) in classes.iter().enumerate() {
                let yk: Vec<f64> = y
                    .iter()
                    .map(|t| if *t as i64 == c { 1.0 } else { -1.0 })
                    .collect();
                let (w, b, tr) = sgd(&Hinge, spec, &x, &yk, 0.0, k as u64);
                for (acc, v) in trace.iter_mut().zip(tr) {
                    *acc += v;
                }
                weights.push(w);
                bias.push(b);
            }
            Ok(LinearModel {
                spec: *spec,
                weights,
                bias,
                classes,
                objective_trace: trace,
            })
        }
    }
}

impl LinearModel {
    pub fn n_features(&self) -> usize {
        self.weights[0].len()
    }

    /// Regression value, or the label of the highest-scoring class.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let scores = self.weights.iter().zip(&self.bias).map(|(w, b)| dot(w, x) + b);
        Ok(match self.spec.task {
            Task::Regress => scores.sum(),
            Task::Classify => {
                let mut best = (f64::NEG_INFINITY, 0usize);
                for (k, s) in scores.enumerate() {
                    if s > best.0 {
                        best = (s, k);
                    }
                }
                self.classes[best.1] as f64
            }
        })
    }
}

/// Mean squared error (regression) or misclassification rate (classification).
pub fn evaluate(model: &LinearModel, features: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
    check_features(features, targets)?;
    if features.is_empty() {
        return Err(Error::Empty("evaluation set is empty"));
    }
    let mut acc = 0.0;
    for (x, y) in features.iter().zip(targets) {
        let p = model.predict(x)?;
        acc += match model.spec.task {
            Task::Regress => (p - y) * (p - y),
            Task::Classify => f64::from(u8::from(p != *y)),
        };
    }
    Ok(acc / features.len() as f64)
}

const SPREAD_FLOOR: f64 = 1e-6;

/// Column-wise centring and scaling fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Columns whose spread is zero, or below `1e-6` of the largest spread,
    /// keep scale 1 so that unseen rows cannot be blown up.
    pub fn fit(features: &[Vec<f64>]) -> Result<Self> {
        let first = features.first().ok_or(Error::Empty("no rows to standardize"))?;
        let p = first.len();
        let n = features.len() as f64;
        let mut mean = vec![0.0; p];
        for row in features {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: row.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; p];
        for row in features {
            for j in 0..p {
                let d = row[j] - mean[j];
                var[j] += d * d / n;
            }
        }
        let spread: Vec<f64> = var.iter().map(|v| sqrt(*v)).collect();
        let floor = SPREAD_FLOOR * spread.iter().copied().fold(0.0, f64::max);
        let scale = spread
            .into_iter()
            .map(|s| if s > floor && s > 0.0 { s } else { 1.0 })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_classes_are_learned() {
        let x = vec![vec![-2.0, 0.0], vec![-1.5, 0.3], vec![2.0, 0.1], vec![1.7, -0.2]];
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let m = fit(&x, &y, &LinearSpec::classify()).unwrap();
        assert_eq!(evaluate(&m, &x, &y).unwrap(), 0.0);
    }

    #[test]
    fn constant_target_regression() {
        let raw: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64 * 0.37).sin(), i as f64 / 20.0]).collect();
        let x = Standardizer::fit(&raw).unwrap().transform_all(&raw);
        let y = vec![3.0; 20];
        let spec = LinearSpec {
            epsilon: 0.0,
            ..LinearSpec::regress()
        };
        let m = fit(&x, &y, &spec).unwrap();
        assert!(m.weights[0].iter().all(|w| w.abs() < 0.05), "{:?}", m.weights);
        assert!((m.bias[0] - 3.0).abs() < 0.05, "{}", m.bias[0]);
    }

    #[test]
    fn input_order_does_not_matter() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5], vec![0.9, 0.2]];
        let y = vec![1.0, 2.0, 1.0, 2.0];
        let a = fit(&x, &y, &LinearSpec::classify().with_seed(4)).unwrap();
        let perm = [2, 0, 3, 1];
        let xp: Vec<Vec<f64>> = perm.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let b = fit(&xp, &yp, &LinearSpec::classify().with_seed(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_inputs() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(fit(&x, &[1.0, 1.0], &LinearSpec::classify()).is_err());
        assert!(fit(&x, &[1.0], &LinearSpec::classify()).is_err());
        assert!(fit(&x, &[0.5, 1.0], &LinearSpec::classify()).is_err());
        let m = fit(&x, &[0.0, 1.0], &LinearSpec::classify()).unwrap();
        assert!(evaluate(&m, &[], &[]).is_err());
    }

    #[test]
    fn metric_examples() {
        let x = vec![vec![-1.0], vec![1.0]];
        let y = vec![0.0, 1.0];
        let m = fit(&x, &y, &LinearSpec::classify()).unwrap();
        assert_eq!(evaluate(&m, &x, &y).unwrap(), 0.0);
        assert_eq!(evaluate(&m, &x, &[1.0, 0.0]).unwrap(), 1.0);

        // a zero model predicts its bias; MSE of the mean is the variance
        let r = LinearModel {
            spec: LinearSpec::regress(),
            weights: vec![vec![0.0]],
            bias: vec![2.0],
            classes: vec![],
            objective_trace: vec![],
        };
        let t = [1.0, 3.0, 2.0, 2.0];
        let xs = vec![vec![0.0]; 4];
        assert!((evaluate(&r, &xs, &t).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn standardizer_centres_and_scales() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.transform(&[1.0, 5.0]), vec![-1.0, 0.0]);
        assert_eq!(s.transform(&[3.0, 5.0]), vec![1.0, 0.0]);
    }
}
