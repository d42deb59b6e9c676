//! Persistence-influence diagnostics and confidence-band radii.
//!
//! Population integrals in the influence bounds are replaced by empirical
//! means over the sample the estimator was fitted on.

use alloc::vec::Vec;

use crate::density::{
    dtm_fit, eval_on_grid, kde_fit, rkde_fit, sample_residuals, DtmSpec, Estimator, KirwlsOptions,
    LossRule, RkdeFit,
};
use crate::diagram::{bottleneck, wasserstein};
use crate::grid::GridSpec;
use crate::homology::persistence;
use crate::kernel::{KernelExpansion, KernelSpec};
use crate::loss::{strong_convexity, Loss};
use crate::math::{ln, powf, sqrt};
use crate::stats::mean;
use crate::{Error, PointCloud, Result};

/// Filter function whose sensitivity is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfluenceEstimator {
    Kde,
    Rkde(LossRule),
    Dtm(DtmSpec),
}

impl InfluenceEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            InfluenceEstimator::Kde => "kde",
            InfluenceEstimator::Rkde(_) => "rkde",
            InfluenceEstimator::Dtm(_) => "dtm",
        }
    }

    /// Replace a data-dependent loss rule by the loss it resolves to on
    /// `points`, so later fits on other samples use the same estimator.
    pub fn pinned(&self, points: &PointCloud, kernel: &KernelSpec) -> Result<Self> {
        Ok(match self {
            InfluenceEstimator::Rkde(rule) => {
                InfluenceEstimator::Rkde(LossRule::Fixed(rule.resolve(points, kernel)?))
            }
            other => *other,
        })
    }

    /// Fit on `points`. A data-dependent loss rule is resolved on `points`.
    pub fn fit(
        &self,
        points: &PointCloud,
        kernel: &KernelSpec,
        opts: &KirwlsOptions,
    ) -> Result<Estimator> {
        Ok(match self {
            InfluenceEstimator::Kde => Estimator::Expansion(kde_fit(points, kernel)?),
            InfluenceEstimator::Rkde(rule) => {
                let loss = rule.resolve(points, kernel)?;
                Estimator::Expansion(rkde_fit(points, kernel, &loss, opts)?.expansion)
            }
            InfluenceEstimator::Dtm(spec) => Estimator::Dtm(dtm_fit(points, spec)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagramMetric {
    Bottleneck,
    Wasserstein(f64),
}

impl DiagramMetric {
    pub fn name(&self) -> &'static str {
        match self {
            DiagramMetric::Bottleneck => "winf",
            DiagramMetric::Wasserstein(_) => "wp",
        }
    }
}

/// Diagram distance between the clean and contaminated fits, and the
/// grid sup-norm of the difference of the two filter functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Influence {
    pub metric: f64,
    pub sup_diff: f64,
}

/// Effect of adding `extra` to `points` on the dimension-`dim` diagram.
///
/// A data-dependent loss rule is resolved once, on `points`, and the same
/// loss is used for the contaminated fit.
#[allow(clippy::too_many_arguments)]
pub fn empirical_influence(
    points: &PointCloud,
    extra: &PointCloud,
    kernel: &KernelSpec,
    estimator: &InfluenceEstimator,
    dim: usize,
    metric: DiagramMetric,
    grid: &GridSpec,
    opts: &KirwlsOptions,
) -> Result<Influence> {
    if points.is_empty() {
        return Err(Error::Empty("influence needs a nonempty base sample"));
    }
    grid.validate()?;
    if grid.dim() != points.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            found: grid.dim(),
        });
    }
    if extra.is_empty() {
        return Ok(Influence {
            metric: 0.0,
            sup_diff: 0.0,
        });
    }
    let all = points.union(extra)?;
    if !all.iter().all(|p| grid.contains(p)) {
        return Err(Error::param("grid does not cover the contaminated sample"));
    }
    let estimator = estimator.pinned(points, kernel)?;
    let clean = eval_on_grid(&estimator.fit(points, kernel, opts)?, grid)?;
    let dirty = eval_on_grid(&estimator.fit(&all, kernel, opts)?, grid)?;
    influence_between(&clean, &dirty, dim, metric)
}

/// Influence from two precomputed fields on the same grid.
pub fn influence_between(
    clean: &crate::grid::ScalarField,
    dirty: &crate::grid::ScalarField,
    dim: usize,
    metric: DiagramMetric,
) -> Result<Influence> {
    let sup_diff = clean.sup_distance(dirty)?;
    let a = persistence(clean, dim)?.swap_remove(dim);
    let b = persistence(dirty, dim)?.swap_remove(dim);
    let metric = match metric {
        DiagramMetric::Bottleneck => bottleneck(&b, &a)?,
        DiagramMetric::Wasserstein(p) => wasserstein(&b, &a, p)?,
    };
    Ok(Influence { metric, sup_diff })
}

/// Influence bound of a fitted robust KDE, evaluable at any point.
#[derive(Debug, Clone)]
pub struct RkdeInfluenceBound {
    expansion: KernelExpansion,
    loss: Loss,
    squared_norm: f64,
    zeta_mean: f64,
    phi_mean: f64,
}

impl RkdeInfluenceBound {
    pub fn new(fit: &RkdeFit) -> Result<Self> {
        let z = sample_residuals(fit.expansion.centers(), &fit.expansion)?;
        let zeta: Vec<f64> = z.iter().map(|&z| fit.loss.zeta(z)).collect();
        let phi: Vec<f64> = z.iter().map(|&z| fit.loss.phi(z)).collect();
        let zeta_mean = mean(&zeta);
        if !(zeta_mean > 0.0) {
            return Err(Error::Numeric("empirical mean of zeta is not positive".into()));
        }
        Ok(Self {
            squared_norm: fit.expansion.squared_norm(),
            expansion: fit.expansion.clone(),
            loss: fit.loss,
            zeta_mean,
            phi_mean: mean(&phi),
        })
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        self.expansion.residual_norm_with(x, self.squared_norm)
    }

    /// `ν ρ'(‖Φ(x) - f‖) / mean ζ(‖Φ(Xᵢ) - f‖)`.
    pub fn at(&self, x: &[f64]) -> f64 {
        let nu = self.expansion.kernel().nu();
        nu * self.loss.rho_prime(self.residual(x)) / self.zeta_mean
    }

    /// `ν w(x) ‖Φ(x) - f‖` with `w(x) = φ(‖Φ(x) - f‖) / mean φ`, the
    /// inlyingness-weighted form valid for nonincreasing `φ`.
    pub fn inlyingness_form(&self, x: &[f64]) -> f64 {
        let nu = self.expansion.kernel().nu();
        let z = self.residual(x);
        nu * self.loss.phi(z) / self.phi_mean * z
    }

    /// `n`-scaled inlyingness `φ(‖Φ(x) - f‖) / mean φ` of an arbitrary point.
    pub fn inlyingness_at(&self, x: &[f64]) -> f64 {
        self.loss.phi(self.residual(x)) / self.phi_mean
    }

    /// `ν (1 + mean ‖Φ(Xᵢ) - f‖²)`: the distance-free ceiling for the Cauchy loss.
    pub fn cauchy_ceiling(&self) -> f64 {
        let z = sample_residuals(self.expansion.centers(), &self.expansion)
            .expect("centers share the kernel dimension");
        let m2 = z.iter().map(|z| z * z).sum::<f64>() / z.len() as f64;
        self.expansion.kernel().nu() * (1.0 + m2)
    }
}

/// Influence bound of the robust KDE at `x`; fits with default KIRWLS options.
pub fn influence_bound_rkde(
    loss: &Loss,
    points: &PointCloud,
    kernel: &KernelSpec,
    x: &[f64],
) -> Result<f64> {
    kernel.check_dim(x.len())?;
    let fit = rkde_fit(points, kernel, loss, &KirwlsOptions::default())?;
    Ok(RkdeInfluenceBound::new(&fit)?.at(x))
}

/// `ν ‖Φ(x) - f̄‖_ℋ`, the influence bound of the KDE.
pub fn influence_bound_kde(points: &PointCloud, kernel: &KernelSpec, x: &[f64]) -> Result<f64> {
    kernel.check_dim(x.len())?;
    let kde = kde_fit(points, kernel)?;
    Ok(kernel.nu() * kde.residual_norm_with(x, kde.squared_norm()))
}

/// Converged KIRWLS weights (nonnegative, summing to one).
pub fn inlyingness(points: &PointCloud, kernel: &KernelSpec, loss: &Loss) -> Result<Vec<f64>> {
    Ok(rkde_fit(points, kernel, loss, &KirwlsOptions::default())?
        .expansion
        .weights()
        .to_vec())
}

/// Parameters of the uniform confidence radius for robust persistence diagrams.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ConfidenceSpec {
    pub n: usize,
    /// Entropy-number exponent, in `(0, 1)`.
    pub p: f64,
    /// Entropy-number constant, `> 1`.
    pub a_sigma: f64,
    pub alpha: f64,
    pub gamma: f64,
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    pub c: f64,
    /// Lipschitz constant of the loss.
    #[cfg_attr(feature = "serde", serde(rename = "M"))]
    pub m: f64,
    pub mu: f64,
}

impl ConfidenceSpec {
    pub const DEFAULT_P: f64 = 0.25;
    pub const DEFAULT_A_SIGMA: f64 = 2.0;

    /// Smallest admissible `γ`, `12/√log 2`.
    pub fn gamma_floor() -> f64 {
        12.0 / sqrt(ln(2.0))
    }

    /// `max(3 - log(9 a_σ), 0) + 1e-6`.
    pub fn default_c(a_sigma: f64) -> f64 {
        (3.0 - ln(9.0 * a_sigma)).max(0.0) + 1e-6
    }

    /// Defaults for a loss and kernel: `M` and `μ` from the loss at `ν_σ`.
    pub fn for_loss(loss: &Loss, nu_sigma: f64, n: usize, alpha: f64) -> Self {
        Self {
            n,
            p: Self::DEFAULT_P,
            a_sigma: Self::DEFAULT_A_SIGMA,
            alpha,
            gamma: Self::gamma_floor() + 1e-6,
            c: Self::default_c(Self::DEFAULT_A_SIGMA),
            m: loss.lipschitz_constant(),
            mu: strong_convexity(loss, nu_sigma),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("sample size must be positive"));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::param("entropy exponent p must lie in (0, 1)"));
        }
        if !(self.a_sigma > 1.0 && self.a_sigma.is_finite()) {
            return Err(Error::param("a_sigma must exceed 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("confidence level alpha must lie in (0, 1)"));
        }
        if !(self.gamma > Self::gamma_floor() && self.gamma.is_finite()) {
            return Err(Error::param("gamma must exceed 12/sqrt(log 2)"));
        }
        if !self.c.is_finite() {
            return Err(Error::param("C must be finite"));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::param(
                "loss derivative must be bounded (finite positive M)",
            ));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::param(
                "strong-convexity constant mu must be positive; the loss is not strictly convex",
            ));
        }
        Ok(())
    }
}

/// Entropy term `ξ(n, p)`.
pub fn xi(spec: &ConfidenceSpec) -> f64 {
    let n = spec.n as f64;
    let (p, a, g) = (spec.p, spec.a_sigma, spec.gamma);
    if p < 0.5 {
        g * powf(a, p) / ((1.0 - 2.0 * p) * sqrt(n))
    } else if p == 0.5 {
        g * spec.c * sqrt(a) * ln(n) / sqrt(n)
    } else {
        g * p * sqrt(a) / ((2.0 * p - 1.0) * powf(n, 1.0 / (4.0 * p)))
    }
}

/// `δ_n = (2 M ν_σ / μ)(ξ(n, p) + √(2 log(1/α) / n))`.
pub fn confidence_radius(spec: &ConfidenceSpec, nu_sigma: f64) -> Result<f64> {
    spec.validate()?;
    if !(nu_sigma > 0.0 && nu_sigma.is_finite()) {
        return Err(Error::param("nu_sigma must be positive"));
    }
    let n = spec.n as f64;
    let tail = sqrt(2.0 * ln(1.0 / spec.alpha) / n);
    Ok(2.0 * spec.m * nu_sigma / spec.mu * (xi(spec) + tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, p: f64) -> ConfidenceSpec {
        ConfidenceSpec {
            n,
            p,
            a_sigma: 2.0,
            alpha: 0.05,
            gamma: ConfidenceSpec::gamma_floor() + 1e-6,
            c: ConfidenceSpec::default_c(2.0),
            m: 1.0,
            mu: 0.5,
        }
    }

    #[test]
    fn xi_first_branch_closed_form() {
        let s = spec(10_000, 0.25);
        let expected = s.gamma * powf(2.0, 1.25) / 100.0;
        assert!((xi(&s) - expected).abs() < 1e-12);
    }

    #[test]
    fn xi_half_branch_ratio() {
        let (a, b) = (spec(1000, 0.5), spec(4000, 0.5));
        let expected = (ln(4000.0) / ln(1000.0)) / 2.0;
        assert!((xi(&b) / xi(&a) - expected).abs() < 1e-12);
    }

    #[test]
    fn radius_decreases_in_n() {
        for p in [0.25, 0.5, 0.75] {
            let mut prev = f64::INFINITY;
            for k in 4..20 {
                let r = confidence_radius(&spec(1 << k, p), 0.3).unwrap();
                assert!(r < prev);
                prev = r;
            }
        }
    }

    #[test]
    fn radius_rejects_bad_specs() {
        let mut s = spec(100, 1.0);
        assert!(confidence_radius(&s, 1.0).is_err());
        s.p = 0.3;
        s.mu = 0.0;
        assert!(confidence_radius(&s, 1.0).is_err());
        let sq = ConfidenceSpec::for_loss(&Loss::Squared, 1.0, 100, 0.05);
        assert!(confidence_radius(&sq, 1.0).is_err());
        let hu = ConfidenceSpec::for_loss(&Loss::Huber, 0.2, 100, 0.05);
        assert!(confidence_radius(&hu, 0.2).unwrap() > 0.0);
    }

    #[test]
    fn default_c_is_clamped() {
        assert_eq!(ConfidenceSpec::default_c(2.0), 3.0 - ln(18.0) + 1e-6);
        assert_eq!(ConfidenceSpec::default_c(10.0), 1e-6);
    }

    fn cluster() -> PointCloud {
        PointCloud::from_rows(&[
            [0.0, 0.0],
            [0.1, 0.0],
            [0.0, 0.1],
            [-0.1, 0.0],
            [0.0, -0.1],
            [0.05, 0.05],
        ])
        .unwrap()
    }

    #[test]
    fn squared_loss_bound_is_the_kde_bound() {
        let x = cluster();
        let k = KernelSpec::gaussian(0.5, 2).unwrap();
        for p in [[0.0, 0.0], [1.0, 2.0], [5.0, -3.0]] {
            let a = influence_bound_rkde(&Loss::Squared, &x, &k, &p).unwrap();
            let b = influence_bound_kde(&x, &k, &p).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn single_point_bound_vanishes_at_the_point() {
        let x = PointCloud::from_rows(&[[0.3, -0.2]]).unwrap();
        let k = KernelSpec::gaussian(0.5, 2).unwrap();
        let b = influence_bound_rkde(&Loss::Huber, &x, &k, &[0.3, -0.2]).unwrap();
        assert!(b.abs() < 1e-6);
    }

    #[test]
    fn cauchy_bound_stays_under_its_ceiling() {
        let x = cluster();
        let k = KernelSpec::gaussian(0.5, 2).unwrap();
        let fit = rkde_fit(&x, &k, &Loss::Cauchy, &KirwlsOptions::default()).unwrap();
        let b = RkdeInfluenceBound::new(&fit).unwrap();
        let ceiling = b.cauchy_ceiling();
        for r in [1.0, 10.0, 100.0, 1e4] {
            assert!(b.at(&[r, 0.0]) <= ceiling);
        }
    }

    #[test]
    fn kde_bound_saturates_far_away() {
        let x = cluster();
        let k = KernelSpec::gaussian(0.2, 2).unwrap();
        let kde = kde_fit(&x, &k).unwrap();
        let limit = k.nu() * sqrt(k.kappa() + kde.squared_norm());
        let far = influence_bound_kde(&x, &k, &[2.0, 0.0]).unwrap();
        assert!((far - limit).abs() < 1e-9 * limit);
        let near = influence_bound_kde(&x, &k, &[0.0, 0.0]).unwrap();
        assert!(near < far);
    }

    #[test]
    fn symmetric_pair_has_equal_inlyingness() {
        let x = PointCloud::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        let k = KernelSpec::gaussian(0.7, 2).unwrap();
        let w = inlyingness(&x, &k, &Loss::Huber).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inlyingness_form_dominates_for_nonincreasing_phi() {
        let x = cluster();
        let k = KernelSpec::gaussian(0.3, 2).unwrap();
        for loss in [Loss::Huber, Loss::Charbonnier { alpha: 1.0 }, Loss::Cauchy] {
            let fit = rkde_fit(&x, &k, &loss, &KirwlsOptions::default()).unwrap();
            let b = RkdeInfluenceBound::new(&fit).unwrap();
            for p in [[0.0, 0.0], [0.5, 0.5], [3.0, 0.0]] {
                assert!(b.at(&p) <= b.inlyingness_form(&p) * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn influence_of_nothing_is_zero() {
        let x = cluster();
        let k = KernelSpec::gaussian(0.2, 2).unwrap();
        let g = GridSpec::cube(2, -1.0, 1.0, 21).unwrap();
        let none = PointCloud::empty(2);
        let inf = empirical_influence(
            &x,
            &none,
            &k,
            &InfluenceEstimator::Kde,
            0,
            DiagramMetric::Bottleneck,
            &g,
            &KirwlsOptions::default(),
        )
        .unwrap();
        assert_eq!(inf.metric, 0.0);

        // an exact copy leaves the KDE unchanged
        let copy = empirical_influence(
            &x,
            &x,
            &k,
            &InfluenceEstimator::Kde,
            1,
            DiagramMetric::Bottleneck,
            &g,
            &KirwlsOptions::default(),
        )
        .unwrap();
        assert!(copy.metric < 1e-12 && copy.sup_diff < 1e-12);

        let outside = PointCloud::from_rows(&[[5.0, 0.0]]).unwrap();
        assert!(empirical_influence(
            &x,
            &outside,
            &k,
            &InfluenceEstimator::Kde,
            0,
            DiagramMetric::Bottleneck,
            &g,
            &KirwlsOptions::default(),
        )
        .is_err());
    }
}
