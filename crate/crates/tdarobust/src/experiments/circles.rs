//! Regress the number of circles in a noisy point cloud on persistence images.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tdarobust_core::density::{bandwidth_knn, dtm_fit, eval_on_grid, kde_fit, DtmSpec, Estimator};
use tdarobust_core::grid::GridSpec;
use tdarobust_core::homology::{persistence_with, PersistenceDiagram};
use tdarobust_core::kernel::KernelSpec;
use tdarobust_core::learn::LinearSpec;
use tdarobust_core::stats::mean;
use tdarobust_core::synth::{random_circles, RandomCirclesSpec};

use super::vectorize::{image_features, split_errors, Scaling};
use super::{default_seed, replicate_seeds, Report};
use crate::config::{HomologyConfig, KirwlsConfig, LossConfig};
use crate::error::{AppError, AppResult};
use crate::io::{num, Table};
use crate::pipeline::fit_rkde;
use crate::svg;

pub const ESTIMATORS: [&str; 3] = ["kde", "rkde", "dtm"];

fn default_clouds() -> usize {
    100
}
fn default_ks() -> Vec<usize> {
    vec![5, 7]
}
fn default_hs() -> Vec<f64> {
    vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.4]
}
fn default_splits() -> usize {
    30
}
fn default_train() -> f64 {
    0.75
}
fn default_resolution() -> usize {
    121
}
fn default_dims() -> Vec<usize> {
    vec![1]
}
fn default_image() -> (usize, usize) {
    (20, 20)
}
fn default_scaling() -> Scaling {
    Scaling::PerDiagram
}
fn default_learner() -> LinearSpec {
    LinearSpec::regress()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_clouds")]
    pub clouds: usize,
    #[serde(default)]
    pub circles: RandomCirclesSpec,
    /// Neighbour indices for `σ(k)` and `m(k)`.
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    /// Persistence-image bandwidths.
    #[serde(default = "default_hs")]
    pub hs: Vec<f64>,
    #[serde(default = "default_splits")]
    pub splits: usize,
    #[serde(default = "default_train")]
    pub train_fraction: f64,
    /// Grid vertices per axis over the enclosing rectangle.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Homology dimensions whose images are concatenated, in order.
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_image")]
    pub image_resolution: (usize, usize),
    #[serde(default = "default_scaling")]
    pub scaling: Scaling,
    #[serde(default = "default_learner")]
    pub learner: LinearSpec,
    #[serde(default)]
    pub loss: LossConfig,
    #[serde(default)]
    pub kirwls: KirwlsConfig,
    #[serde(default)]
    pub homology: HomologyConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Test error of one split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub k: usize,
    pub estimator: &'static str,
    pub h: f64,
    pub split: usize,
    pub error: f64,
}

/// Mean test error against the image bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub k: usize,
    pub estimator: &'static str,
    pub h: Vec<f64>,
    pub mean_error: Vec<f64>,
}

/// The bandwidth minimizing the error averaged over estimators, and each
/// estimator's error there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestCommon {
    pub k: usize,
    pub h: f64,
    pub errors: Vec<(&'static str, f64)>,
}

impl BestCommon {
    pub fn error(&self, estimator: &str) -> f64 {
        self.errors
            .iter()
            .find(|e| e.0 == estimator)
            .map(|e| e.1)
            .unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: &'static str,
    /// `mse` or `misclassification`.
    pub error: &'static str,
    pub samples: usize,
    pub splits: usize,
    pub seed: u64,
    pub curves: Vec<Curve>,
    pub best_common: Vec<BestCommon>,
}

pub struct Output {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// Fits the three estimators with `σ(k)`, `m(k)` and returns their diagrams
/// for `dims`, in [`ESTIMATORS`] order.
#[allow(clippy::too_many_arguments)]
pub(crate) fn three_diagrams(
    points: &tdarobust_core::PointCloud,
    k: usize,
    grid: &GridSpec,
    dims: &[usize],
    loss: &LossConfig,
    kirwls: &KirwlsConfig,
    homology: &HomologyConfig,
) -> AppResult<Vec<Vec<PersistenceDiagram>>> {
    let kernel = KernelSpec::gaussian(bandwidth_knn(points, k)?, points.dim())?;
    let (rkde, _) = fit_rkde(points, &kernel, &loss.rule(), &kirwls.options())?;
    let ests = [
        Estimator::Expansion(kde_fit(points, &kernel)?),
        rkde,
        Estimator::Dtm(dtm_fit(points, &DtmSpec::from_neighbors(k, points.len())?)?),
    ];
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let opts = homology.options();
    ests.iter()
        .map(|e| {
            let ds = persistence_with(&eval_on_grid(e, grid)?, max_dim, &opts)?;
            Ok(dims.iter().map(|&d| ds[d].clone()).collect())
        })
        .collect()
}

/// Error curves for every `(k, estimator, h)`; `diagrams[k][estimator][sample]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn error_curves(
    diagrams: &[Vec<Vec<Vec<PersistenceDiagram>>>],
    targets: &[f64],
    ks: &[usize],
    hs: &[f64],
    image_resolution: (usize, usize),
    scaling: Scaling,
    learner: &LinearSpec,
    train_fraction: f64,
    split_seeds: &[u64],
) -> AppResult<(Vec<Row>, Vec<Curve>, Vec<BestCommon>)> {
    let jobs: Vec<(usize, usize, usize)> = (0..ks.len())
        .flat_map(|a| (0..ESTIMATORS.len()).flat_map(move |b| (0..hs.len()).map(move |c| (a, b, c))))
        .collect();
    let errors = jobs
        .par_iter()
        .map(|&(a, b, c)| {
            let x = image_features(&diagrams[a][b], scaling, hs[c], image_resolution)?;
            split_errors(&x, targets, learner, train_fraction, split_seeds)
        })
        .collect::<AppResult<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut means = vec![vec![vec![0.0; hs.len()]; ESTIMATORS.len()]; ks.len()];
    for (&(a, b, c), errs) in jobs.iter().zip(&errors) {
        for (s, &e) in errs.iter().enumerate() {
            rows.push(Row {
                k: ks[a],
                estimator: ESTIMATORS[b],
                h: hs[c],
                split: s,
                error: e,
            });
        }
        means[a][b][c] = mean(errs);
    }
    let mut best = Vec::new();
    for (a, &k) in ks.iter().enumerate() {
        for (b, est) in ESTIMATORS.iter().enumerate() {
            curves.push(Curve {
                k,
                estimator: est,
                h: hs.to_vec(),
                mean_error: means[a][b].clone(),
            });
        }
        let avg = |c: usize| (0..ESTIMATORS.len()).map(|b| means[a][b][c]).sum::<f64>();
        let c = (0..hs.len())
            .min_by(|&i, &j| avg(i).total_cmp(&avg(j)))
            .expect("at least one bandwidth");
        best.push(BestCommon {
            k,
            h: hs[c],
            errors: ESTIMATORS
                .iter()
                .enumerate()
                .map(|(b, e)| (*e, means[a][b][c]))
                .collect(),
        });
    }
    Ok((rows, curves, best))
}

pub(crate) fn validate_common(ks: &[usize], hs: &[f64], splits: usize, train: f64) -> AppResult<()> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(AppError::config("ks must be nonempty and positive"));
    }
    if hs.is_empty() || hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(AppError::config("image bandwidths must be positive"));
    }
    if splits == 0 {
        return Err(AppError::config("need at least one split"));
    }
    if !(train > 0.0 && train < 1.0) {
        return Err(AppError::config("train_fraction must lie in (0, 1)"));
    }
    Ok(())
}

pub fn run(cfg: &Config) -> AppResult<Output> {
    validate_common(&cfg.ks, &cfg.hs, cfg.splits, cfg.train_fraction)?;
    if cfg.clouds < 4 {
        return Err(AppError::config("need at least four point clouds"));
    }
    if cfg.dims.is_empty() || cfg.dims.iter().any(|d| *d > 1) {
        return Err(AppError::config("dims must be a nonempty subset of {0, 1}"));
    }
    let rect = cfg.circles.enclosing();
    let grid = GridSpec::new(
        rect.lower.to_vec(),
        rect.upper.to_vec(),
        vec![cfg.resolution; 2],
    )?;
    let seeds = replicate_seeds(cfg.seed, 400, cfg.clouds);
    // per cloud: (count, per k: per estimator: diagrams)
    let clouds = seeds
        .par_iter()
        .map(|&s| {
            let (sample, count) = random_circles(&cfg.circles, s)?;
            let per_k = cfg
                .ks
                .iter()
                .map(|&k| {
                    three_diagrams(&sample.points, k, &grid, &cfg.dims, &cfg.loss, &cfg.kirwls, &cfg.homology)
                })
                .collect::<AppResult<Vec<_>>>()?;
            Ok((count as f64, per_k))
        })
        .collect::<AppResult<Vec<_>>>()?;
    let targets: Vec<f64> = clouds.iter().map(|c| c.0).collect();
    let diagrams = regroup(clouds.into_iter().map(|c| c.1).collect(), cfg.ks.len());
    let split_seeds = replicate_seeds(cfg.seed, 401, cfg.splits);
    let (rows, curves, best_common) = error_curves(
        &diagrams,
        &targets,
        &cfg.ks,
        &cfg.hs,
        cfg.image_resolution,
        cfg.scaling,
        &cfg.learner,
        cfg.train_fraction,
        &split_seeds,
    )?;
    Ok(Output {
        rows,
        summary: Summary {
            experiment: "circles-sim",
            error: "mse",
            samples: cfg.clouds,
            splits: cfg.splits,
            seed: cfg.seed,
            curves,
            best_common,
        },
    })
}

/// `[sample][k][estimator]` → `[k][estimator][sample]`.
pub(crate) fn regroup(
    per_sample: Vec<Vec<Vec<Vec<PersistenceDiagram>>>>,
    nk: usize,
) -> Vec<Vec<Vec<Vec<PersistenceDiagram>>>> {
    let mut out = vec![vec![Vec::with_capacity(per_sample.len()); ESTIMATORS.len()]; nk];
    for sample in per_sample {
        for (a, per_est) in sample.into_iter().enumerate() {
            for (b, ds) in per_est.into_iter().enumerate() {
                out[a][b].push(ds);
            }
        }
    }
    out
}

impl Output {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["k", "estimator", "h", "split", self.summary.error]);
        for w in &self.rows {
            t.row(&[
                w.k.to_string(),
                w.estimator.to_string(),
                num(w.h),
                w.split.to_string(),
                num(w.error),
            ]);
        }
        t
    }

    pub(crate) fn into_report(self, name: &'static str) -> Report {
        let mut plots = Vec::new();
        let mut ks: Vec<usize> = self.summary.curves.iter().map(|c| c.k).collect();
        ks.dedup();
        for k in ks {
            let series: Vec<(String, Vec<(f64, f64)>)> = self
                .summary
                .curves
                .iter()
                .filter(|c| c.k == k)
                .map(|c| {
                    (
                        c.estimator.to_string(),
                        c.h.iter().copied().zip(c.mean_error.iter().copied()).collect(),
                    )
                })
                .collect();
            plots.push((
                format!("error_k{k}"),
                svg::line_plot(&format!("{name}, k = {k}"), "h", self.summary.error, &series),
            ));
        }
        Report {
            name,
            tables: vec![("errors".into(), self.table())],
            summary: serde_json::to_value(&self.summary).expect("summary serializes"),
            plots,
        }
    }
}

impl From<Output> for Report {
    fn from(out: Output) -> Self {
        out.into_report("circles-sim")
    }
}
