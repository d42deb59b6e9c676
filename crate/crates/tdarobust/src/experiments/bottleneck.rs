//! Two noisy circles: does the robust diagram sit closer to the
//! noise-free one than the KDE diagram?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tdarobust_core::density::{bandwidth_knn, eval_on_grid, kde_fit, Estimator};
use tdarobust_core::diagram::bottleneck;
use tdarobust_core::grid::{GridSpec, ScalarField};
use tdarobust_core::homology::{persistence_with, PersistenceDiagram, PersistenceOptions};
use tdarobust_core::kernel::KernelSpec;
use tdarobust_core::stats::{median, sign_test_less};
use tdarobust_core::synth::{sample, Circle, MixtureSpec, Rect, Signal};

use super::{default_seed, replicate_seeds, Quartiles, Report};
use crate::config::{HomologyConfig, KirwlsConfig, LossConfig};
use crate::error::AppResult;
use crate::io::{num, Table};
use crate::pipeline::fit_rkde;
use crate::svg;

fn default_n() -> usize {
    300
}
fn default_pis() -> Vec<f64> {
    vec![0.2, 0.3, 0.4]
}
fn default_replicates() -> usize {
    50
}
fn default_k() -> usize {
    5
}
fn default_circles() -> Vec<Circle> {
    vec![
        Circle {
            center: [-1.8, 0.0],
            radius: 1.5,
        },
        Circle {
            center: [1.8, 0.0],
            radius: 1.5,
        },
    ]
}
fn default_square() -> Rect {
    Rect::square(-4.0, 4.0)
}
fn default_resolution() -> usize {
    64
}
fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Signal points.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Noise-to-signal ratios `m / n`.
    #[serde(default = "default_pis")]
    pub pis: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Neighbour index of the bandwidth `σ(k)`.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_circles")]
    pub circles: Vec<Circle>,
    /// Noise support; also the grid window.
    #[serde(default = "default_square")]
    pub square: Rect,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
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

/// `U = W∞(robust, reference)` and `V = W∞(kde, reference)` for one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replicate {
    pub pi: f64,
    pub index: usize,
    pub seed: u64,
    pub sigma: f64,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub pi: f64,
    pub m: usize,
    pub replicates: usize,
    pub u: Quartiles,
    pub v: Quartiles,
    pub median_u: f64,
    pub median_v: f64,
    /// Replicates with `U < V`.
    pub negative: usize,
    /// One-sided sign test of `median(U - V) < 0`.
    pub sign_test_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: &'static str,
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub seed: u64,
    pub levels: Vec<LevelSummary>,
}

pub struct Output {
    pub replicates: Vec<Replicate>,
    pub summary: Summary,
}

fn diagram(
    est: &Estimator,
    grid: &GridSpec,
    dim: usize,
    opts: &PersistenceOptions,
) -> AppResult<PersistenceDiagram> {
    let field: ScalarField = eval_on_grid(est, grid)?;
    Ok(persistence_with(&field, dim, opts)?.swap_remove(dim))
}

fn replicate(cfg: &Config, pi: f64, index: usize, seed: u64, grid: &GridSpec) -> AppResult<Replicate> {
    let m = (pi * cfg.n as f64).round() as usize;
    let total = cfg.n + m;
    let mix = MixtureSpec {
        signal: Signal::UnionOfCircles(cfg.circles.clone()),
        noise: cfg.square,
        pi: m as f64 / total as f64,
        n: total,
        seed,
    };
    let s = sample(&mix)?;
    let clean = s.signal_points();
    let sigma = bandwidth_knn(&s.points, cfg.k)?;
    let kernel = KernelSpec::gaussian(sigma, 2)?;
    let opts = cfg.homology.options();

    let (robust, _) = fit_rkde(&s.points, &kernel, &cfg.loss.rule(), &cfg.kirwls.options())?;
    let kde = Estimator::Expansion(kde_fit(&s.points, &kernel)?);
    let reference = Estimator::Expansion(kde_fit(&clean, &kernel)?);

    let d_ref = diagram(&reference, grid, cfg.dim, &opts)?;
    let u = bottleneck(&diagram(&robust, grid, cfg.dim, &opts)?, &d_ref)?;
    let v = bottleneck(&diagram(&kde, grid, cfg.dim, &opts)?, &d_ref)?;
    Ok(Replicate {
        pi,
        index,
        seed,
        sigma,
        u,
        v,
    })
}

pub fn run(cfg: &Config) -> AppResult<Output> {
    use crate::error::AppError;
    if cfg.replicates == 0 || cfg.pis.is_empty() {
        return Err(AppError::config("need at least one replicate and one noise level"));
    }
    if cfg.dim > 1 {
        return Err(AppError::config("planar diagrams exist in dimensions 0 and 1"));
    }
    let grid = GridSpec::new(
        cfg.square.lower.to_vec(),
        cfg.square.upper.to_vec(),
        vec![cfg.resolution; 2],
    )?;
    let mut replicates = Vec::new();
    let mut levels = Vec::new();
    for (level, &pi) in cfg.pis.iter().enumerate() {
        if !(pi > 0.0 && pi.is_finite()) {
            return Err(AppError::config("noise ratios must be positive"));
        }
        let seeds = replicate_seeds(cfg.seed, 100 + level as u64, cfg.replicates);
        let reps = seeds
            .par_iter()
            .enumerate()
            .map(|(i, &s)| replicate(cfg, pi, i, s, &grid))
            .collect::<AppResult<Vec<_>>>()?;
        let u: Vec<f64> = reps.iter().map(|r| r.u).collect();
        let v: Vec<f64> = reps.iter().map(|r| r.v).collect();
        let diffs: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        levels.push(LevelSummary {
            pi,
            m: (pi * cfg.n as f64).round() as usize,
            replicates: reps.len(),
            u: Quartiles::of(&u),
            v: Quartiles::of(&v),
            median_u: median(&u),
            median_v: median(&v),
            negative: diffs.iter().filter(|d| **d < 0.0).count(),
            sign_test_p: sign_test_less(&diffs),
        });
        replicates.extend(reps);
    }
    Ok(Output {
        replicates,
        summary: Summary {
            experiment: "bottleneck-sim",
            n: cfg.n,
            k: cfg.k,
            dim: cfg.dim,
            seed: cfg.seed,
            levels,
        },
    })
}

impl Output {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["pi", "replicate", "seed", "sigma", "u", "v"]);
        for r in &self.replicates {
            t.row(&[
                num(r.pi),
                r.index.to_string(),
                r.seed.to_string(),
                num(r.sigma),
                num(r.u),
                num(r.v),
            ]);
        }
        t
    }
}

impl From<Output> for Report {
    fn from(out: Output) -> Self {
        let groups: Vec<(String, [f64; 5])> = out
            .summary
            .levels
            .iter()
            .flat_map(|l| {
                [
                    (format!("robust pi={}", l.pi), l.u.as_array()),
                    (format!("kde pi={}", l.pi), l.v.as_array()),
                ]
            })
            .collect();
        Report {
            name: "bottleneck-sim",
            tables: vec![("replicates".into(), out.table())],
            summary: serde_json::to_value(&out.summary).expect("summary serializes"),
            plots: vec![(
                "boxplot".into(),
                svg::box_plot("distance to the noise-free diagram", &groups),
            )],
        }
    }
}
