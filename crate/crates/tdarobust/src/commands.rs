//! One function per CLI subcommand. Each returns the line printed on stdout.

use std::path::Path;

use serde::Serialize;
use tdarobust_core::diagram::{bottleneck_with, normalize_max_persistence, persistence_image, wasserstein_with};
use tdarobust_core::homology::max_supported_dim;
use tdarobust_core::robustness::DiagramMetric;

use crate::config::{load, DensityConfig, DistConfig, PdConfig, PimgConfig};
use crate::error::{AppError, AppResult};
use crate::experiments::ExperimentConfig;
use crate::io::{read_diagram, read_field, read_points, write_diagram, write_field, write_image, write_json};
use crate::pipeline::{diagrams, eval_on_grid_par, fit_estimator, with_pool};

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Common {
    pub out: std::path::PathBuf,
    pub seed: Option<u64>,
    /// Forces a header row on CSV inputs.
    pub header: bool,
    pub svg: bool,
}

fn ensure_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn line<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

pub fn density(config: &Path, common: &Common) -> AppResult<String> {
    let cfg: DensityConfig = load(config)?;
    let points = read_points(&cfg.input, cfg.header || common.header)?;
    let grid = cfg.grid.resolve(&points)?;
    let (estimator, info) = fit_estimator(&cfg.estimator, &points)?;
    let field = with_pool(|| eval_on_grid_par(&estimator, &grid))??;
    ensure_dir(&common.out)?;
    write_field(&common.out.join("field.csv"), &field)?;
    write_json(&common.out.join("fit.json"), &info)?;
    Ok(line(&serde_json::json!({
        "field": common.out.join("field.csv"),
        "vertices": grid.vertex_count(),
        "min": field.min(),
        "max": field.max(),
        "fit": info,
    })))
}

pub fn pd(config: &Path, common: &Common) -> AppResult<String> {
    let cfg: PdConfig = load(config)?;
    let field = match (&cfg.field, &cfg.input) {
        (Some(f), None) => read_field(f)?,
        (None, Some(input)) => {
            let (Some(est), Some(grid)) = (&cfg.estimator, &cfg.grid) else {
                return Err(AppError::config("an input sample needs `estimator` and `grid`"));
            };
            let points = read_points(input, cfg.header || common.header)?;
            let grid = grid.resolve(&points)?;
            let (estimator, _) = fit_estimator(est, &points)?;
            with_pool(|| eval_on_grid_par(&estimator, &grid))??
        }
        _ => return Err(AppError::config("give exactly one of `field` and `input`")),
    };
    let max_dim = cfg
        .max_dim
        .unwrap_or_else(|| max_supported_dim(field.grid().dim()));
    let ds = diagrams(&field, max_dim, &cfg.homology.options())?;
    ensure_dir(&common.out)?;
    let mut counts = Vec::new();
    for d in &ds {
        write_diagram(&common.out.join(format!("diagram_h{}.json", d.dim)), d)?;
        counts.push(serde_json::json!({"dim": d.dim, "pairs": d.len(), "essential": d.essential_count()}));
    }
    Ok(line(&counts))
}

pub fn dist(config: &Path, common: &Common) -> AppResult<String> {
    let cfg: DistConfig = load(config)?;
    let a = read_diagram(&cfg.a)?;
    let b = read_diagram(&cfg.b)?;
    if a.dim != b.dim {
        return Err(AppError::data(format!(
            "diagrams have homology dimensions {} and {}",
            a.dim, b.dim
        )));
    }
    let value = match cfg.metric.metric() {
        DiagramMetric::Bottleneck => bottleneck_with(&a, &b, cfg.include_essential)?,
        DiagramMetric::Wasserstein(p) => wasserstein_with(&a, &b, p, cfg.include_essential)?,
    };
    let out = serde_json::json!({"metric": cfg.metric.label(), "dim": a.dim, "value": value});
    ensure_dir(&common.out)?;
    write_json(&common.out.join("dist.json"), &out)?;
    Ok(line(&out))
}

pub fn pimg(config: &Path, common: &Common) -> AppResult<String> {
    let cfg: PimgConfig = load(config)?;
    let mut d = read_diagram(&cfg.diagram)?;
    if cfg.normalize {
        d = normalize_max_persistence(&d);
    }
    let img = persistence_image(&d, &cfg.image.spec())?;
    ensure_dir(&common.out)?;
    let path = common.out.join("image.csv");
    write_image(&path, &img)?;
    Ok(line(&serde_json::json!({
        "image": path,
        "rows": img.rows,
        "cols": img.cols,
        "total": img.data.iter().sum::<f64>(),
    })))
}

/// Loads an experiment config; `name`, when given, must match its `"name"`.
pub fn load_experiment(config: &Path, name: Option<&str>, seed: Option<u64>) -> AppResult<ExperimentConfig> {
    let mut cfg: ExperimentConfig = load(config)?;
    if let Some(n) = name {
        if n != cfg.name() {
            return Err(AppError::config(format!(
                "command asks for {n} but the config describes {}",
                cfg.name()
            )));
        }
    }
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

pub fn experiment(config: &Path, name: Option<&str>, common: &Common) -> AppResult<String> {
    let cfg = load_experiment(config, name, common.seed)?;
    let report = with_pool(|| cfg.run())??;
    report.write(&common.out, common.svg)?;
    Ok(line(&serde_json::json!({
        "experiment": report.name,
        "out": common.out,
        "files": report.tables.iter().map(|t| format!("{}.csv", t.0)).chain(["summary.json".to_string()]).collect::<Vec<_>>(),
    })))
}
