//! JSON run configurations. Every struct rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tdarobust_core::density::{bandwidth_knn, DtmSpec, KirwlsOptions, LossRule};
use tdarobust_core::diagram::{ImageRange, ImageWeight, PersistenceImageSpec};
use tdarobust_core::grid::GridSpec;
use tdarobust_core::homology::{Construction, EssentialFloor, PersistenceOptions};
use tdarobust_core::kernel::KernelSpec;
use tdarobust_core::loss::Loss;
use tdarobust_core::robustness::DiagramMetric;
use tdarobust_core::PointCloud;

use crate::error::{AppError, AppResult};

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::config(format!("{}: {e}", path.display())))
}

/// Kernel bandwidth: explicit, or `σ(k)` (median distance to the k-th neighbour).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Bandwidth {
    Sigma(f64),
    Knn(usize),
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Knn(5)
    }
}

impl Bandwidth {
    pub fn resolve(&self, points: &PointCloud) -> AppResult<f64> {
        match *self {
            Bandwidth::Sigma(s) => Ok(s),
            Bandwidth::Knn(k) => Ok(bandwidth_knn(points, k)?),
        }
    }

    pub fn kernel(&self, points: &PointCloud) -> AppResult<KernelSpec> {
        Ok(KernelSpec::gaussian(self.resolve(points)?, points.dim())?)
    }
}

/// DTM mass parameter: explicit `m`, or `m(k) = k/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Smoothing {
    M(f64),
    Knn(usize),
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Knn(5)
    }
}

impl Smoothing {
    pub fn spec(&self, n: usize) -> AppResult<DtmSpec> {
        Ok(match *self {
            Smoothing::M(m) => DtmSpec::new(m)?,
            Smoothing::Knn(k) => DtmSpec::from_neighbors(k, n)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HampelScale {
    /// Knots multiplied by `ν_σ`.
    #[default]
    Nu,
    None,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn three() -> f64 {
    3.0
}
fn q_a() -> f64 {
    0.5
}
fn q_b() -> f64 {
    0.95
}

/// `{"kind":"charbonnier","alpha":1.0}` and friends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossConfig {
    Squared,
    Huber,
    Charbonnier {
        alpha: f64,
    },
    Cauchy,
    Hampel {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "two")]
        b: f64,
        #[serde(default = "three")]
        c: f64,
        #[serde(default)]
        scale: HampelScale,
    },
    /// Hampel with knots at quantiles of the KDE residuals.
    HampelQuantiles {
        #[serde(default = "q_a")]
        a: f64,
        #[serde(default = "q_b")]
        b: f64,
        #[serde(default = "one")]
        c: f64,
    },
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig::HampelQuantiles {
            a: q_a(),
            b: q_b(),
            c: one(),
        }
    }
}

impl LossConfig {
    pub fn rule(&self) -> LossRule {
        match *self {
            LossConfig::Squared => LossRule::Fixed(Loss::Squared),
            LossConfig::Huber => LossRule::Fixed(Loss::Huber),
            LossConfig::Charbonnier { alpha } => LossRule::Fixed(Loss::Charbonnier { alpha }),
            LossConfig::Cauchy => LossRule::Fixed(Loss::Cauchy),
            LossConfig::Hampel { a, b, c, scale } => match scale {
                HampelScale::Nu => LossRule::HampelNuScaled { a, b, c },
                HampelScale::None => LossRule::Fixed(Loss::Hampel { a, b, c }),
            },
            LossConfig::HampelQuantiles { a, b, c } => LossRule::HampelQuantiles { a, b, c },
        }
    }
}

fn default_max_iter() -> usize {
    200
}
fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KirwlsConfig {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for KirwlsConfig {
    fn default() -> Self {
        Self {
            max_iter: default_max_iter(),
            tol: default_tol(),
        }
    }
}

impl KirwlsConfig {
    pub fn options(&self) -> KirwlsOptions {
        KirwlsOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            ..KirwlsOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorConfig {
    Kde {
        #[serde(default)]
        bandwidth: Bandwidth,
    },
    Rkde {
        #[serde(default)]
        bandwidth: Bandwidth,
        #[serde(default)]
        loss: LossConfig,
        #[serde(default)]
        kirwls: KirwlsConfig,
    },
    Dtm {
        #[serde(default)]
        smoothing: Smoothing,
    },
    Kdist {
        #[serde(default)]
        bandwidth: Bandwidth,
    },
}

impl EstimatorConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorConfig::Kde { .. } => "kde",
            EstimatorConfig::Rkde { .. } => "rkde",
            EstimatorConfig::Dtm { .. } => "dtm",
            EstimatorConfig::Kdist { .. } => "kdist",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringGrid {
    /// Added on every side of the bounding box of the points.
    pub margin: f64,
    pub resolution: usize,
}

/// An explicit grid, or one fitted around the input points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Explicit(GridSpec),
    Covering(CoveringGrid),
}

impl GridConfig {
    pub fn resolve(&self, points: &PointCloud) -> AppResult<GridSpec> {
        let g = match self {
            GridConfig::Explicit(g) => g.clone(),
            GridConfig::Covering(c) => GridSpec::covering(points, c.margin, c.resolution)?,
        };
        g.validate()?;
        if g.dim() != points.dim() {
            return Err(AppError::data(format!(
                "grid has {} axes but the points have {} coordinates",
                g.dim(),
                points.dim()
            )));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FloorConfig {
    #[default]
    Zero,
    GlobalMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionConfig {
    #[default]
    Top,
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HomologyConfig {
    #[serde(default)]
    pub essential_floor: FloorConfig,
    #[serde(default)]
    pub construction: ConstructionConfig,
}

impl HomologyConfig {
    pub fn options(&self) -> PersistenceOptions {
        PersistenceOptions {
            essential_floor: match self.essential_floor {
                FloorConfig::Zero => EssentialFloor::Zero,
                FloorConfig::GlobalMin => EssentialFloor::GlobalMin,
            },
            construction: match self.construction {
                ConstructionConfig::Top => Construction::Top,
                ConstructionConfig::Vertex => Construction::Vertex,
            },
        }
    }
}

/// `{"kind":"bottleneck"}` or `{"kind":"wasserstein","p":1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    Bottleneck,
    Wasserstein { p: f64 },
}

impl MetricConfig {
    pub fn metric(&self) -> DiagramMetric {
        match *self {
            MetricConfig::Bottleneck => DiagramMetric::Bottleneck,
            MetricConfig::Wasserstein { p } => DiagramMetric::Wasserstein(p),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MetricConfig::Bottleneck => "winf".into(),
            MetricConfig::Wasserstein { p } => format!("w{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightConfig {
    #[default]
    LinearPersistence,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub birth: (f64, f64),
    pub persistence: (f64, f64),
}

fn default_image_resolution() -> (usize, usize) {
    (20, 20)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageConfig {
    /// `(rows, cols)`; rows index persistence, columns birth.
    #[serde(default = "default_image_resolution")]
    pub resolution: (usize, usize),
    pub bandwidth: f64,
    #[serde(default)]
    pub weight: WeightConfig,
    /// Fixed image window; fitted to the diagram when absent.
    #[serde(default)]
    pub range: Option<RangeConfig>,
}

impl ImageConfig {
    pub fn spec(&self) -> PersistenceImageSpec {
        let mut spec =
            PersistenceImageSpec::new(self.resolution.0, self.resolution.1, self.bandwidth);
        spec.weight = match self.weight {
            WeightConfig::LinearPersistence => ImageWeight::LinearPersistence,
            WeightConfig::Constant => ImageWeight::Constant,
        };
        spec.range = match self.range {
            None => ImageRange::Auto,
            Some(r) => ImageRange::Explicit {
                birth: r.birth,
                persistence: r.persistence,
            },
        };
        spec
    }
}

/// `tdarobust density`: fit an estimator and sample it on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub input: PathBuf,
    #[serde(default)]
    pub header: bool,
    pub estimator: EstimatorConfig,
    pub grid: GridConfig,
}

/// `tdarobust pd`: diagrams of a stored field, or of a freshly fitted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdConfig {
    #[serde(default)]
    pub field: Option<PathBuf>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub header: bool,
    #[serde(default)]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// Highest homology dimension; defaults to the largest supported.
    #[serde(default)]
    pub max_dim: Option<usize>,
    #[serde(default)]
    pub homology: HomologyConfig,
}

/// `tdarobust dist`: distance between two stored diagrams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistConfig {
    pub a: PathBuf,
    pub b: PathBuf,
    pub metric: MetricConfig,
    #[serde(default)]
    pub include_essential: bool,
}

/// `tdarobust pimg`: persistence image of a stored diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PimgConfig {
    pub diagram: PathBuf,
    pub image: ImageConfig,
    /// Rescale so the most persistent finite pair has persistence one.
    #[serde(default)]
    pub normalize: bool,
}
