//! Seeded Monte-Carlo experiment pipelines.
//!
//! Every experiment is a pure function of its config: replicate seeds are
//! drawn from a ChaCha stream keyed by the config seed, replicates run in
//! parallel but are collected in index order, and no wall-clock data is
//! written, so re-runs produce byte-identical files.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use tdarobust_core::stats::quantile;
use tdarobust_core::synth::rng_stream;

use crate::error::AppResult;
use crate::io::{write_atomic, write_json, Table};

pub mod bottleneck;
pub mod circles;
pub mod confband;
pub mod influence;
pub mod shapes;
pub mod vectorize;

/// Config of `tdarobust experiment`, selected by its `"name"` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    BottleneckSim(bottleneck::Config),
    InfluenceSim(influence::Config),
    CirclesSim(circles::Config),
    ShapeClassify(shapes::Config),
    Confband(confband::Config),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::BottleneckSim(_) => "bottleneck-sim",
            ExperimentConfig::InfluenceSim(_) => "influence-sim",
            ExperimentConfig::CirclesSim(_) => "circles-sim",
            ExperimentConfig::ShapeClassify(_) => "shape-classify",
            ExperimentConfig::Confband(_) => "confband",
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::BottleneckSim(c) => c.seed = seed,
            ExperimentConfig::InfluenceSim(c) => c.seed = seed,
            ExperimentConfig::CirclesSim(c) => c.seed = seed,
            ExperimentConfig::ShapeClassify(c) => c.seed = seed,
            ExperimentConfig::Confband(_) => {}
        }
    }

    pub fn run(&self) -> AppResult<Report> {
        match self {
            ExperimentConfig::BottleneckSim(c) => bottleneck::run(c).map(Report::from),
            ExperimentConfig::InfluenceSim(c) => influence::run(c).map(Report::from),
            ExperimentConfig::CirclesSim(c) => circles::run(c).map(Report::from),
            ExperimentConfig::ShapeClassify(c) => shapes::run(c).map(|o| o.into_report("shape-classify")),
            ExperimentConfig::Confband(c) => confband::run(c).map(Report::from),
        }
    }
}

/// Files produced by one experiment run.
pub struct Report {
    pub name: &'static str,
    /// `(file stem, table)`; written as `<stem>.csv`.
    pub tables: Vec<(String, Table)>,
    pub summary: serde_json::Value,
    /// `(file stem, svg source)`.
    pub plots: Vec<(String, String)>,
}

impl Report {
    /// Write every table, `summary.json` and, if asked, the plots into `dir`.
    pub fn write(&self, dir: &Path, svg: bool) -> AppResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::AppError::io(dir, e))?;
        for (stem, table) in &self.tables {
            table.write(&dir.join(format!("{stem}.csv")))?;
        }
        write_json(&dir.join("summary.json"), &self.summary)?;
        if svg {
            for (stem, text) in &self.plots {
                write_atomic(&dir.join(format!("{stem}.svg")), text.as_bytes())?;
            }
        }
        Ok(())
    }
}

/// `count` replicate seeds drawn from stream `stream` of `seed`.
pub fn replicate_seeds(seed: u64, stream: u64, count: usize) -> Vec<u64> {
    let mut rng = rng_stream(seed, stream);
    (0..count).map(|_| rng.random::<u64>()).collect()
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.min, self.q1, self.median, self.q3, self.max]
    }
}

/// Random train/test split: a seeded permutation, the first
/// `round(train_fraction · n)` indices train.
pub fn split(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_stream(seed, 7));
    let cut = ((train_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1));
    let test = idx.split_off(cut);
    (idx, test)
}

fn default_seed() -> u64 {
    1
}
