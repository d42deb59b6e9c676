//! Points → estimator → grid field → diagrams, with data-parallel grid
//! evaluation.

use rayon::prelude::*;
use serde::Serialize;
use tdarobust_core::density::{
    dtm_fit, kde_fit, rkde_fit, Estimator, KernelDistance, KirwlsOptions, LossRule,
};
use tdarobust_core::grid::{GridSpec, ScalarField};
use tdarobust_core::homology::{persistence_with, PersistenceDiagram, PersistenceOptions};
use tdarobust_core::kernel::KernelSpec;
use tdarobust_core::loss::Loss;
use tdarobust_core::PointCloud;

use crate::config::EstimatorConfig;
use crate::error::{AppError, AppResult};

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "TDAROBUST_THREADS";

/// Worker count from `TDAROBUST_THREADS`, or rayon's default when unset.
pub fn thread_count() -> AppResult<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(AppError::config(format!(
                "{THREADS_VAR} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Run `f` inside a pool sized by [`thread_count`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> AppResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| AppError::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

const CHUNK: usize = 1024;

/// [`tdarobust_core::density::eval_on_grid`] evaluated in parallel chunks.
/// Output is identical to the sequential evaluation.
pub fn eval_on_grid_par(estimator: &Estimator, grid: &GridSpec) -> AppResult<ScalarField> {
    grid.validate()?;
    if grid.dim() != estimator.dim() {
        return Err(AppError::data(format!(
            "grid has {} axes but the estimator lives in dimension {}",
            grid.dim(),
            estimator.dim()
        )));
    }
    let n = grid.vertex_count();
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| estimator.eval_vertices(grid, c * CHUNK..((c + 1) * CHUNK).min(n)))
        .collect();
    let values: Vec<f64> = chunks.into_iter().flatten().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AppError::Numeric("estimator produced a non-finite value".into()));
    }
    Ok(estimator.field_from_values(grid, values)?)
}

/// What was fitted, for summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitInfo {
    pub estimator: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtm_neighbors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_risk: Option<f64>,
}

impl FitInfo {
    fn new(estimator: &'static str) -> Self {
        Self {
            estimator,
            sigma: None,
            dtm_neighbors: None,
            loss: None,
            iterations: None,
            converged: None,
            final_risk: None,
        }
    }
}

pub fn describe_loss(loss: &Loss) -> String {
    match *loss {
        Loss::Squared => "squared".into(),
        Loss::Huber => "huber".into(),
        Loss::Charbonnier { alpha } => format!("charbonnier(alpha={alpha})"),
        Loss::Cauchy => "cauchy".into(),
        Loss::Hampel { a, b, c } => format!("hampel(a={a}, b={b}, c={c})"),
    }
}

/// Robust fit with a loss rule resolved on `points`.
pub fn fit_rkde(
    points: &PointCloud,
    kernel: &KernelSpec,
    rule: &LossRule,
    opts: &KirwlsOptions,
) -> AppResult<(Estimator, FitInfo)> {
    let loss = rule.resolve(points, kernel)?;
    let fit = rkde_fit(points, kernel, &loss, opts)?;
    let mut info = FitInfo::new("rkde");
    info.sigma = Some(kernel.sigma());
    info.loss = Some(describe_loss(&loss));
    info.iterations = Some(fit.iterations);
    info.converged = Some(fit.converged);
    info.final_risk = fit.risk_trace.last().copied();
    Ok((Estimator::Expansion(fit.expansion), info))
}

pub fn fit_estimator(cfg: &EstimatorConfig, points: &PointCloud) -> AppResult<(Estimator, FitInfo)> {
    match cfg {
        EstimatorConfig::Kde { bandwidth } => {
            let k = bandwidth.kernel(points)?;
            let mut info = FitInfo::new("kde");
            info.sigma = Some(k.sigma());
            Ok((Estimator::Expansion(kde_fit(points, &k)?), info))
        }
        EstimatorConfig::Rkde {
            bandwidth,
            loss,
            kirwls,
        } => {
            let k = bandwidth.kernel(points)?;
            fit_rkde(points, &k, &loss.rule(), &kirwls.options())
        }
        EstimatorConfig::Dtm { smoothing } => {
            let spec = smoothing.spec(points.len())?;
            let dtm = dtm_fit(points, &spec)?;
            let mut info = FitInfo::new("dtm");
            info.dtm_neighbors = Some(dtm.k());
            Ok((Estimator::Dtm(dtm), info))
        }
        EstimatorConfig::Kdist { bandwidth } => {
            let k = bandwidth.kernel(points)?;
            let mut info = FitInfo::new("kdist");
            info.sigma = Some(k.sigma());
            Ok((Estimator::KDist(KernelDistance::fit(points, &k)?), info))
        }
    }
}

pub fn diagrams(
    field: &ScalarField,
    max_dim: usize,
    opts: &PersistenceOptions,
) -> AppResult<Vec<PersistenceDiagram>> {
    Ok(persistence_with(field, max_dim, opts)?)
}
