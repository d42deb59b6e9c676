//! Confidence-band radius `δ_n` along a dyadic ladder of sample sizes.

use serde::{Deserialize, Serialize};
use tdarobust_core::kernel::KernelSpec;
use tdarobust_core::robustness::{confidence_radius, xi, ConfidenceSpec};

use super::Report;
use crate::config::LossConfig;
use crate::error::{AppError, AppResult};
use crate::io::{num, Table};
use crate::svg;

fn default_loss() -> LossConfig {
    LossConfig::Charbonnier { alpha: 1.0 }
}
fn default_sigma() -> f64 {
    0.5
}
fn default_dim() -> usize {
    2
}
fn default_alpha() -> f64 {
    0.05
}
fn default_ps() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_exponents() -> (u32, u32) {
    (4, 20)
}
fn default_a_sigma() -> f64 {
    ConfidenceSpec::DEFAULT_A_SIGMA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Must be a fixed loss with bounded derivative and `μ > 0`.
    #[serde(default = "default_loss")]
    pub loss: LossConfig,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Entropy exponents; one curve each.
    #[serde(default = "default_ps")]
    pub ps: Vec<f64>,
    /// `n = 2^e` for `e` in this inclusive range.
    #[serde(default = "default_exponents")]
    pub exponents: (u32, u32),
    #[serde(default = "default_a_sigma")]
    pub a_sigma: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default, rename = "C")]
    pub c: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub p: f64,
    pub n: usize,
    pub xi: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: &'static str,
    pub sigma: f64,
    pub nu_sigma: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub mu: f64,
    /// Whether `δ_n` strictly decreases along the ladder, per `p`.
    pub decreasing: Vec<(f64, bool)>,
}

pub struct Output {
    pub points: Vec<Point>,
    pub summary: Summary,
}

pub fn run(cfg: &Config) -> AppResult<Output> {
    let loss = match cfg.loss.rule() {
        tdarobust_core::density::LossRule::Fixed(l) => l,
        _ => return Err(AppError::config("confband needs a fixed loss")),
    };
    let (e0, e1) = cfg.exponents;
    if e0 > e1 || e1 > 62 {
        return Err(AppError::config("exponent range must be ordered and below 63"));
    }
    let kernel = KernelSpec::gaussian(cfg.sigma, cfg.dim)?;
    let nu = kernel.nu();
    let mut points = Vec::new();
    let mut decreasing = Vec::new();
    for &p in &cfg.ps {
        let mut prev = f64::INFINITY;
        let mut strict = true;
        for e in e0..=e1 {
            let n = 1usize << e;
            let mut spec = ConfidenceSpec::for_loss(&loss, nu, n, cfg.alpha);
            spec.p = p;
            spec.a_sigma = cfg.a_sigma;
            spec.c = cfg.c.unwrap_or_else(|| ConfidenceSpec::default_c(cfg.a_sigma));
            if let Some(g) = cfg.gamma {
                spec.gamma = g;
            }
            let delta = confidence_radius(&spec, nu)?;
            strict &= delta < prev;
            prev = delta;
            points.push(Point {
                p,
                n,
                xi: xi(&spec),
                delta,
            });
        }
        decreasing.push((p, strict));
    }
    let probe = ConfidenceSpec::for_loss(&loss, nu, 1, cfg.alpha);
    Ok(Output {
        points,
        summary: Summary {
            experiment: "confband",
            sigma: cfg.sigma,
            nu_sigma: nu,
            m: probe.m,
            mu: probe.mu,
            decreasing,
        },
    })
}

impl Output {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["p", "n", "xi", "delta"]);
        for q in &self.points {
            t.row(&[num(q.p), q.n.to_string(), num(q.xi), num(q.delta)]);
        }
        t
    }
}

impl From<Output> for Report {
    fn from(out: Output) -> Self {
        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for q in &out.points {
            let name = format!("p={}", q.p);
            if series.last().map(|s| s.0 != name).unwrap_or(true) {
                series.push((name, Vec::new()));
            }
            let s = series.last_mut().expect("just pushed");
            s.1.push(((q.n as f64).log2(), q.delta.log10()));
        }
        Report {
            name: "confband",
            tables: vec![("radius".into(), out.table())],
            summary: serde_json::to_value(&out.summary).expect("summary serializes"),
            plots: vec![(
                "radius".into(),
                svg::line_plot("confidence radius", "log2 n", "log10 delta", &series),
            )],
        }
    }
}
