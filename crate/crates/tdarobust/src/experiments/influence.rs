//! How far do diagrams move when a ring of outliers is added at distance `r`?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tdarobust_core::density::{bandwidth_knn, eval_on_grid, DtmSpec};
use tdarobust_core::diagram::{bottleneck, wasserstein};
use tdarobust_core::grid::{GridSpec, ScalarField};
use tdarobust_core::homology::{persistence_with, PersistenceDiagram, PersistenceOptions};
use tdarobust_core::kernel::KernelSpec;
use tdarobust_core::robustness::InfluenceEstimator;
use tdarobust_core::stats::mean;
use tdarobust_core::synth::{outlier_ring, sample, MixtureSpec, Rect, Signal};

use super::{default_seed, replicate_seeds, Report};
use crate::config::{HomologyConfig, KirwlsConfig, LossConfig};
use crate::error::{AppError, AppResult};
use crate::io::{num, Table};
use crate::svg;

fn default_n() -> usize {
    300
}
fn default_pi() -> f64 {
    0.1
}
fn default_signal() -> Signal {
    Signal::Annulus {
        radius: 3.0,
        width: 1.0,
    }
}
fn default_square() -> Rect {
    Rect::square(-5.0, 5.0)
}
fn default_radii() -> Vec<f64> {
    vec![5.0, 10.0, 20.0]
}
fn default_replicates() -> usize {
    20
}
fn default_k() -> usize {
    5
}
fn default_resolution() -> usize {
    211
}
fn default_margin() -> f64 {
    1.0
}
fn default_pin() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Size of the clean sample.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Fraction of the clean sample that is background noise.
    #[serde(default = "default_pi")]
    pub pi: f64,
    #[serde(default = "default_signal")]
    pub signal: Signal,
    #[serde(default = "default_square")]
    pub square: Rect,
    /// Outlier distances; `round(r)` outliers are added at distance `r`.
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Sets both `σ(k)` and `m(k) = k/n` on the clean sample.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Vertices per axis of the grid `[-(r_max + margin), r_max + margin]²`.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub loss: LossConfig,
    /// Resolve a data-dependent loss once on the clean sample and reuse it
    /// for the contaminated fits; otherwise each fit resolves its own.
    #[serde(default = "default_pin")]
    pub pin_loss: bool,
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

pub const ESTIMATORS: [&str; 3] = ["kde", "rkde", "dtm"];

/// One influence measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub r: f64,
    pub estimator: &'static str,
    /// `linf`, `winf` or `w1`.
    pub metric: &'static str,
    /// Homology dimension; `None` for the sup-norm.
    pub dim: Option<usize>,
    pub value: f64,
    pub seed: u64,
}

/// Mean influence over replicates along the `r` ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub estimator: &'static str,
    pub metric: &'static str,
    pub dim: Option<usize>,
    pub r: Vec<f64>,
    pub mean: Vec<f64>,
}

impl Curve {
    /// `max_r |c(r) - c(r_0)| / c(r_0)`.
    pub fn relative_variation(&self) -> f64 {
        let base = self.mean[0];
        self.mean
            .iter()
            .map(|v| (v - base).abs() / base)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: &'static str,
    pub n: usize,
    pub k: usize,
    pub replicates: usize,
    pub seed: u64,
    pub curves: Vec<Curve>,
}

impl Summary {
    pub fn curve(&self, estimator: &str, metric: &str, dim: Option<usize>) -> Option<&Curve> {
        self.curves
            .iter()
            .find(|c| c.estimator == estimator && c.metric == metric && c.dim == dim)
    }
}

pub struct Output {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

fn diagrams(field: &ScalarField, opts: &PersistenceOptions) -> AppResult<Vec<PersistenceDiagram>> {
    Ok(persistence_with(field, 1, opts)?)
}

fn replicate(cfg: &Config, seed: u64, grid: &GridSpec) -> AppResult<Vec<Row>> {
    let mix = MixtureSpec {
        signal: cfg.signal.clone(),
        noise: cfg.square,
        pi: cfg.pi,
        n: cfg.n,
        seed,
    };
    let x = sample(&mix)?.points;
    let kernel = KernelSpec::gaussian(bandwidth_knn(&x, cfg.k)?, 2)?;
    let opts = cfg.kirwls.options();
    let hopts = cfg.homology.options();
    let estimators = [
        InfluenceEstimator::Kde,
        if cfg.pin_loss {
            InfluenceEstimator::Rkde(cfg.loss.rule()).pinned(&x, &kernel)?
        } else {
            InfluenceEstimator::Rkde(cfg.loss.rule())
        },
        InfluenceEstimator::Dtm(DtmSpec::from_neighbors(cfg.k, x.len())?),
    ];
    let ring_seeds = replicate_seeds(seed, 200, cfg.radii.len());
    let mut rows = Vec::new();
    for est in &estimators {
        let clean = eval_on_grid(&est.fit(&x, &kernel, &opts)?, grid)?;
        let dg_clean = diagrams(&clean, &hopts)?;
        for (&r, &ring_seed) in cfg.radii.iter().zip(&ring_seeds) {
            let all = x.union(&outlier_ring(r, 0, ring_seed)?)?;
            let dirty = eval_on_grid(&est.fit(&all, &kernel, &opts)?, grid)?;
            let dg_dirty = diagrams(&dirty, &hopts)?;
            let mut push = |metric, dim, value| {
                rows.push(Row {
                    r,
                    estimator: est.name(),
                    metric,
                    dim,
                    value,
                    seed,
                })
            };
            push("linf", None, clean.sup_distance(&dirty)?);
            for dim in 0..2 {
                push("winf", Some(dim), bottleneck(&dg_clean[dim], &dg_dirty[dim])?);
            }
            for dim in 0..2 {
                push("w1", Some(dim), wasserstein(&dg_clean[dim], &dg_dirty[dim], 1.0)?);
            }
        }
    }
    Ok(rows)
}

pub fn run(cfg: &Config) -> AppResult<Output> {
    if cfg.replicates == 0 || cfg.radii.is_empty() {
        return Err(AppError::config("need at least one replicate and one radius"));
    }
    if cfg.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(AppError::config("outlier radii must be positive"));
    }
    let r_max = cfg.radii.iter().copied().fold(0.0, f64::max);
    let half = r_max.max(cfg.square.upper[0].abs()).max(cfg.square.lower[0].abs())
        .max(cfg.square.upper[1].abs()).max(cfg.square.lower[1].abs())
        + cfg.margin;
    let grid = GridSpec::cube(2, -half, half, cfg.resolution)?;
    let seeds = replicate_seeds(cfg.seed, 300, cfg.replicates);
    let per_rep = seeds
        .par_iter()
        .map(|&s| replicate(cfg, s, &grid))
        .collect::<AppResult<Vec<_>>>()?;
    let rows: Vec<Row> = per_rep.into_iter().flatten().collect();

    let series: [(&'static str, Option<usize>); 5] = [
        ("linf", None),
        ("winf", Some(0)),
        ("winf", Some(1)),
        ("w1", Some(0)),
        ("w1", Some(1)),
    ];
    let mut curves = Vec::new();
    for est in ESTIMATORS {
        for (metric, dim) in series {
            let means = cfg
                .radii
                .iter()
                .map(|&r| {
                    let v: Vec<f64> = rows
                        .iter()
                        .filter(|w| w.estimator == est && w.metric == metric && w.dim == dim && w.r == r)
                        .map(|w| w.value)
                        .collect();
                    mean(&v)
                })
                .collect();
            curves.push(Curve {
                estimator: est,
                metric,
                dim,
                r: cfg.radii.clone(),
                mean: means,
            });
        }
    }
    Ok(Output {
        rows,
        summary: Summary {
            experiment: "influence-sim",
            n: cfg.n,
            k: cfg.k,
            replicates: cfg.replicates,
            seed: cfg.seed,
            curves,
        },
    })
}

impl Output {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["r", "estimator", "metric", "dim", "value", "seed"]);
        for w in &self.rows {
            t.row(&[
                num(w.r),
                w.estimator.to_string(),
                w.metric.to_string(),
                w.dim.map(|d| d.to_string()).unwrap_or_default(),
                num(w.value),
                w.seed.to_string(),
            ]);
        }
        t
    }
}

impl From<Output> for Report {
    fn from(out: Output) -> Self {
        let mut plots = Vec::new();
        for (metric, dim) in [("linf", None), ("winf", Some(0)), ("winf", Some(1)), ("w1", Some(0)), ("w1", Some(1))] {
            let series: Vec<(String, Vec<(f64, f64)>)> = out
                .summary
                .curves
                .iter()
                .filter(|c| c.metric == metric && c.dim == dim)
                .map(|c| (c.estimator.to_string(), c.r.iter().copied().zip(c.mean.iter().copied()).collect()))
                .collect();
            let stem = match dim {
                Some(d) => format!("influence_{metric}_h{d}"),
                None => format!("influence_{metric}"),
            };
            plots.push((stem.clone(), svg::line_plot(&stem, "r", "mean influence", &series)));
        }
        Report {
            name: "influence-sim",
            tables: vec![("influence".into(), out.table())],
            summary: serde_json::to_value(&out.summary).expect("summary serializes"),
            plots,
        }
    }
}
