//! Classify silhouette point clouds from concatenated H0/H1 persistence images.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tdarobust_core::grid::GridSpec;
use tdarobust_core::learn::LinearSpec;
use tdarobust_core::synth::{sample_shape, ShapeClass};
use tdarobust_core::PointCloud;

use super::circles::{error_curves, regroup, three_diagrams, validate_common, Output, Summary};
use super::vectorize::Scaling;
use super::{default_seed, replicate_seeds};
use crate::config::{HomologyConfig, KirwlsConfig, LossConfig};
use crate::error::{AppError, AppResult};
use crate::io::{read_points, write_points};

/// Generator settings for the synthetic silhouette classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticShapes {
    pub per_class: usize,
    pub n: usize,
    pub pi: f64,
}

impl Default for SyntheticShapes {
    fn default() -> Self {
        Self {
            per_class: 30,
            n: 300,
            pi: 0.15,
        }
    }
}

fn default_ks() -> Vec<usize> {
    vec![5]
}
fn default_hs() -> Vec<f64> {
    vec![0.005, 0.01, 0.02, 0.05, 0.1, 0.2]
}
fn default_splits() -> usize {
    30
}
fn default_train() -> f64 {
    0.9
}
fn default_resolution() -> usize {
    64
}
fn default_margin() -> f64 {
    0.1
}
fn default_dims() -> Vec<usize> {
    vec![0, 1]
}
fn default_image() -> (usize, usize) {
    (20, 20)
}
fn default_scaling() -> Scaling {
    Scaling::PerDiagram
}
fn default_learner() -> LinearSpec {
    LinearSpec::classify()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// One subdirectory per class holding one CSV point cloud per sample.
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
    #[serde(default)]
    pub header: bool,
    /// Generate the clouds in memory instead of reading `data_dir`.
    #[serde(default)]
    pub synthetic: Option<SyntheticShapes>,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default = "default_hs")]
    pub hs: Vec<f64>,
    #[serde(default = "default_splits")]
    pub splits: usize,
    #[serde(default = "default_train")]
    pub train_fraction: f64,
    /// Grid vertices per axis over each cloud's bounding box.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
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

/// Labelled clouds: `(class index, points)` plus the class names.
pub type Dataset = (Vec<String>, Vec<(usize, PointCloud)>);

/// Reads `dir/<class>/*.csv`, classes and files in name order.
pub fn read_dataset(dir: &Path, header: bool) -> AppResult<Dataset> {
    let sorted_entries = |d: &Path| -> AppResult<Vec<PathBuf>> {
        let mut v: Vec<PathBuf> = std::fs::read_dir(d)
            .map_err(|e| AppError::io(d, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| AppError::io(d, err)))
            .collect::<AppResult<_>>()?;
        v.sort();
        Ok(v)
    };
    if !dir.is_dir() {
        return Err(AppError::data(format!(
            "shape-classify needs a point-cloud directory; {} is not one",
            dir.display()
        )));
    }
    let mut classes = Vec::new();
    let mut samples = Vec::new();
    for class_dir in sorted_entries(dir)?.into_iter().filter(|p| p.is_dir()) {
        let label = classes.len();
        let files: Vec<PathBuf> = sorted_entries(&class_dir)?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        if files.is_empty() {
            continue;
        }
        for f in files {
            samples.push((label, read_points(&f, header)?));
        }
        classes.push(
            class_dir
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
    }
    if classes.len() < 2 {
        return Err(AppError::data(format!(
            "{} must hold at least two class subdirectories with CSV clouds",
            dir.display()
        )));
    }
    Ok((classes, samples))
}

/// The synthetic classes, generated in memory.
pub fn synthetic_dataset(spec: &SyntheticShapes, seed: u64) -> AppResult<Dataset> {
    if spec.per_class == 0 {
        return Err(AppError::config("per_class must be positive"));
    }
    let mut samples = Vec::new();
    for (label, class) in ShapeClass::ALL.iter().enumerate() {
        let seeds = replicate_seeds(seed, 500 + label as u64, spec.per_class);
        for s in seeds {
            samples.push((label, sample_shape(*class, spec.n, spec.pi, s)?.points));
        }
    }
    let names = ShapeClass::ALL.iter().map(|c| c.name().to_string()).collect();
    Ok((names, samples))
}

/// Writes the synthetic classes as `dir/<class>/<class>_NNN.csv`.
pub fn write_synthetic(dir: &Path, spec: &SyntheticShapes, seed: u64) -> AppResult<()> {
    let (names, samples) = synthetic_dataset(spec, seed)?;
    let mut counters = vec![0usize; names.len()];
    for (label, points) in samples {
        let class_dir = dir.join(&names[label]);
        std::fs::create_dir_all(&class_dir).map_err(|e| AppError::io(&class_dir, e))?;
        let path = class_dir.join(format!("{}_{:03}.csv", names[label], counters[label]));
        counters[label] += 1;
        write_points(&path, &points)?;
    }
    Ok(())
}

pub fn run(cfg: &Config) -> AppResult<Output> {
    validate_common(&cfg.ks, &cfg.hs, cfg.splits, cfg.train_fraction)?;
    if cfg.dims.is_empty() || cfg.dims.iter().any(|d| *d > 1) {
        return Err(AppError::config("dims must be a nonempty subset of {0, 1}"));
    }
    let (_, samples) = match (&cfg.data_dir, &cfg.synthetic) {
        (Some(dir), None) => read_dataset(dir, cfg.header)?,
        (None, Some(spec)) => synthetic_dataset(spec, cfg.seed)?,
        (Some(_), Some(_)) => {
            return Err(AppError::config("give either data_dir or synthetic, not both"))
        }
        (None, None) => {
            return Err(AppError::data(
                "shape-classify needs a point-cloud directory (data_dir) or a synthetic spec",
            ))
        }
    };
    if samples.iter().any(|(_, p)| p.dim() != 2) {
        return Err(AppError::data("shape point clouds must be planar"));
    }
    let per_sample = samples
        .par_iter()
        .map(|(_, points)| {
            let grid = GridSpec::covering(points, cfg.margin, cfg.resolution)?;
            cfg.ks
                .iter()
                .map(|&k| {
                    three_diagrams(points, k, &grid, &cfg.dims, &cfg.loss, &cfg.kirwls, &cfg.homology)
                })
                .collect::<AppResult<Vec<_>>>()
        })
        .collect::<AppResult<Vec<_>>>()?;
    let targets: Vec<f64> = samples.iter().map(|(c, _)| *c as f64).collect();
    let diagrams = regroup(per_sample, cfg.ks.len());
    let split_seeds = replicate_seeds(cfg.seed, 501, cfg.splits);
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
            experiment: "shape-classify",
            error: "misclassification",
            samples: samples.len(),
            splits: cfg.splits,
            seed: cfg.seed,
            curves,
            best_common,
        },
    })
}
