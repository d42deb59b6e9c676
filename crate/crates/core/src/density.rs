//! Filter-function estimators.
//!
//! * [`kde_fit`]: the kernel density estimator, uniform weights.
//! * [`rkde_fit`]: the robust KDE, the fixed point of kernelized iteratively
//!   reweighted least squares (KIRWLS). Weights are `φ(residual)` normalized
//!   to sum to one; residuals are RKHS norms computed with the Gram matrix.
//! * [`Dtm`]: empirical distance-to-measure with `k = ⌈m n⌉` neighbours.
//! * [`KernelDistance`]: `‖Φ_σ(x) - μ_{P_n}‖_ℋ`.
//!
//! [`eval_on_grid`] samples any of them into a [`ScalarField`] carrying the
//! filtration direction appropriate for the estimator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Direction, GridSpec, ScalarField};
use crate::kernel::{gram, KernelExpansion, KernelSpec};
use crate::loss::Loss;
use crate::math::{ceil, round, sqrt};
use crate::points::squared_distance;
use crate::stats::{lower_median, quantile};
use crate::{Error, PointCloud, Result};

/// KDE: the expansion with centers `X` and weights `1/n`.
pub fn kde_fit(points: &PointCloud, spec: &KernelSpec) -> Result<KernelExpansion> {
    if points.is_empty() {
        return Err(Error::Empty("kde needs at least one sample point"));
    }
    KernelExpansion::uniform(*spec, points.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KirwlsInit {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirwlsOptions {
    pub max_iter: usize,
    /// Stop once `|J_{k-1} - J_k| ≤ tol · |J_{k-1}|`.
    pub tol: f64,
    pub init: KirwlsInit,
}

impl Default for KirwlsOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-9,
            init: KirwlsInit::Uniform,
        }
    }
}

impl KirwlsOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::param("KIRWLS needs at least one iteration"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("KIRWLS tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RkdeFit {
    pub expansion: KernelExpansion,
    /// Number of risk evaluations performed.
    pub iterations: usize,
    /// Empirical risk `J_n(f^{(k)}) = (1/n) Σ ρ(‖Φ(Xᵢ) - f^{(k)}‖)`, one entry per iterate.
    pub risk_trace: Vec<f64>,
    pub converged: bool,
    /// The concrete loss the fit used.
    pub loss: Loss,
}

/// RKHS residuals `‖Φ(Xᵢ) - g‖_ℋ` of the sample points the Gram matrix was built on.
fn residuals_from_gram(kappa: f64, gw: &[f64], quad: f64) -> Vec<f64> {
    gw.iter()
        .map(|g| sqrt((kappa - 2.0 * g + quad).max(0.0)))
        .collect()
}

/// Robust KDE via KIRWLS.
///
/// `f^{(k)} = Σ w_i^{(k-1)} K(·, Xᵢ)` and `w_i^{(k)} ∝ φ(‖Φ(Xᵢ) - f^{(k)}‖_ℋ)`.
/// The returned expansion is the last iterate whose risk was recorded, so
/// `risk_trace.last()` is its empirical risk.
pub fn rkde_fit(
    points: &PointCloud,
    spec: &KernelSpec,
    loss: &Loss,
    opts: &KirwlsOptions,
) -> Result<RkdeFit> {
    if points.is_empty() {
        return Err(Error::Empty("robust kde needs at least one sample point"));
    }
    loss.validate()?;
    opts.validate()?;
    spec.check_dim(points.dim())?;

    let n = points.len();
    let g = gram(spec, points)?;
    let kappa = spec.kappa();
    let mut w = match opts.init {
        KirwlsInit::Uniform => vec![1.0 / n as f64; n],
    };
    let risk = |z: &[f64]| z.iter().map(|&z| loss.rho(z)).sum::<f64>() / n as f64;

    let mut trace = Vec::new();
    let mut converged = false;
    for k in 1..=opts.max_iter {
        let gw = g.apply(&w);
        let quad: f64 = gw.iter().zip(&w).map(|(a, b)| a * b).sum();
        let z = residuals_from_gram(kappa, &gw, quad);
        let j = risk(&z);
        trace.push(j);
        if matches!(loss, Loss::Squared) || n == 1 {
            // closed form: the KDE (or the single feature map) is optimal
            converged = true;
            break;
        }
        if k > 1 {
            let prev = trace[k - 2];
            if (prev - j).abs() <= opts.tol * prev.abs() {
                converged = true;
                break;
            }
        }
        if k == opts.max_iter {
            break;
        }
        let phi: Vec<f64> = z.iter().map(|&z| loss.phi(z)).collect();
        let total: f64 = phi.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateWeights);
        }
        w = phi.iter().map(|p| p / total).collect();
    }

    let iterations = trace.len();
    let expansion = KernelExpansion::new(*spec, points.clone(), normalized(w))?;
    Ok(RkdeFit {
        expansion,
        iterations,
        risk_trace: trace,
        converged,
        loss: *loss,
    })
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// How the loss of a robust fit is chosen for a given sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossRule {
    /// Use the loss as given.
    Fixed(Loss),
    /// Hampel with knots `(a, b, c)` multiplied by `ν_σ`.
    HampelNuScaled { a: f64, b: f64, c: f64 },
    /// Hampel with knots at the given quantile levels of the KDE residuals
    /// `‖Φ(Xᵢ) - f̄_σ‖_ℋ` (median, 95th percentile and maximum by default).
    HampelQuantiles { a: f64, b: f64, c: f64 },
}

impl LossRule {
    pub const ADAPTIVE_HAMPEL: LossRule = LossRule::HampelQuantiles {
        a: 0.5,
        b: 0.95,
        c: 1.0,
    };

    pub fn resolve(&self, points: &PointCloud, spec: &KernelSpec) -> Result<Loss> {
        let loss = match *self {
            LossRule::Fixed(loss) => loss,
            LossRule::HampelNuScaled { a, b, c } => Loss::Hampel { a, b, c }.scaled(spec.nu()),
            LossRule::HampelQuantiles { a, b, c } => {
                for q in [a, b, c] {
                    if !(0.0..=1.0).contains(&q) {
                        return Err(Error::param("hampel quantile levels must lie in [0, 1]"));
                    }
                }
                let kde = kde_fit(points, spec)?;
                let mut z = sample_residuals(points, &kde)?;
                z.sort_by(f64::total_cmp);
                Loss::Hampel {
                    a: quantile(&z, a),
                    b: quantile(&z, b),
                    c: quantile(&z, c),
                }
            }
        };
        loss.validate()?;
        Ok(loss)
    }
}

/// `‖Φ(Xᵢ) - g‖_ℋ` for every sample point.
pub fn sample_residuals(points: &PointCloud, g: &KernelExpansion) -> Result<Vec<f64>> {
    g.kernel().check_dim(points.dim())?;
    let sq = g.squared_norm();
    Ok(points.iter().map(|x| g.residual_norm_with(x, sq)).collect())
}

/// Smoothing mass `m ∈ (0, 1]` of the distance-to-measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtmSpec {
    pub m: f64,
}

impl DtmSpec {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 0.0 && m <= 1.0) {
            return Err(Error::param(format!("dtm mass m must lie in (0, 1], got {m}")));
        }
        Ok(Self { m })
    }

    /// `m(k) = k / n`.
    pub fn from_neighbors(k: usize, n: usize) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::param("dtm neighbour count must lie in [1, n]"));
        }
        Self::new(k as f64 / n as f64)
    }

    /// `k = ⌈m n⌉`, with `m n` that is integral up to rounding kept as is.
    pub fn neighbors(&self, n: usize) -> usize {
        let raw = self.m * n as f64;
        let k = if (raw - round(raw)).abs() < 1e-9 {
            round(raw)
        } else {
            ceil(raw)
        };
        (k as usize).clamp(1, n.max(1))
    }
}

/// Empirical distance-to-measure `√((1/k) Σ_{j≤k} dist_(j)(x)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtm {
    points: PointCloud,
    k: usize,
}

pub fn dtm_fit(points: &PointCloud, spec: &DtmSpec) -> Result<Dtm> {
    DtmSpec::new(spec.m)?;
    if points.is_empty() {
        return Err(Error::Empty("dtm needs at least one sample point"));
    }
    Ok(Dtm {
        k: spec.neighbors(points.len()),
        points: points.clone(),
    })
}

impl Dtm {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub(crate) fn eval_with(&self, x: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(self.points.iter().map(|p| squared_distance(x, p)));
        let k = self.k;
        if k < scratch.len() {
            scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
        }
        let mut nearest = scratch[..k].to_vec();
        // fixed summation order keeps results independent of the selection layout
        nearest.sort_by(f64::total_cmp);
        sqrt(nearest.iter().sum::<f64>() / k as f64)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.points.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.points.dim(),
                found: x.len(),
            });
        }
        Ok(self.eval_with(x, &mut Vec::with_capacity(self.points.len())))
    }
}

pub fn dtm_eval(dtm: &Dtm, x: &[f64]) -> Result<f64> {
    dtm.eval(x)
}

/// Kernel distance `d^K(x) = ‖Φ_σ(x) - μ_{P_n}‖_ℋ` with `‖μ_{P_n}‖²` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDistance {
    kde: KernelExpansion,
    squared_norm: f64,
}

impl KernelDistance {
    pub fn fit(points: &PointCloud, spec: &KernelSpec) -> Result<Self> {
        let kde = kde_fit(points, spec)?;
        let squared_norm = kde.squared_norm();
        Ok(Self { kde, squared_norm })
    }

    pub fn expansion(&self) -> &KernelExpansion {
        &self.kde
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.kde.kernel().check_dim(x.len())?;
        Ok(self.kde.residual_norm_with(x, self.squared_norm))
    }
}

pub fn kdist_eval(points: &PointCloud, spec: &KernelSpec, x: &[f64]) -> Result<f64> {
    KernelDistance::fit(points, spec)?.eval(x)
}

/// `σ(k)`: median over the sample of the distance to the k-th nearest other
/// point. With an even count the lower-middle value is taken.
pub fn bandwidth_knn(points: &PointCloud, k: usize) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::param("bandwidth heuristic needs at least two points"));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::param(format!(
            "neighbour rank must lie in [1, {}], got {k}",
            n - 1
        )));
    }
    let mut scratch = Vec::with_capacity(n - 1);
    let mut kth = Vec::with_capacity(n);
    for i in 0..n {
        let xi = points.point(i);
        scratch.clear();
        scratch.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| squared_distance(xi, points.point(j))),
        );
        let (_, d, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
        kth.push(sqrt(*d));
    }
    Ok(lower_median(&mut kth))
}

/// A fitted filter function.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// KDE or robust KDE; superlevel filtration.
    Expansion(KernelExpansion),
    /// Distance-to-measure; sublevel filtration.
    Dtm(Dtm),
    /// Kernel distance; sublevel filtration.
    KDist(KernelDistance),
}

impl Estimator {
    pub fn dim(&self) -> usize {
        match self {
            Estimator::Expansion(g) => g.kernel().dim(),
            Estimator::Dtm(d) => d.points.dim(),
            Estimator::KDist(k) => k.kde.kernel().dim(),
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Estimator::Expansion(_) => Direction::Superlevel,
            Estimator::Dtm(_) | Estimator::KDist(_) => Direction::Sublevel,
        }
    }

    /// Evaluate at `x` (dimension unchecked); `scratch` serves the DTM.
    pub fn eval_with(&self, x: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match self {
            Estimator::Expansion(g) => g.eval_unchecked(x),
            Estimator::Dtm(d) => d.eval_with(x, scratch),
            Estimator::KDist(k) => k.kde.residual_norm_with(x, k.squared_norm),
        }
    }

    /// Values at the grid vertices `range`, in order.
    pub fn eval_vertices(&self, grid: &GridSpec, range: core::ops::Range<usize>) -> Vec<f64> {
        let mut x = vec![0.0; grid.dim()];
        let mut scratch = Vec::new();
        range
            .map(|v| {
                grid.vertex_coords_into(v, &mut x);
                self.eval_with(&x, &mut scratch)
            })
            .collect()
    }

    /// Wrap precomputed vertex values with this estimator's metadata.
    pub fn field_from_values(&self, grid: &GridSpec, values: Vec<f64>) -> Result<ScalarField> {
        // density estimators are nonnegative; clamp rounding-level negatives
        let values = values.into_iter().map(|v| v.max(0.0)).collect();
        ScalarField::new(grid.clone(), values, self.direction(), true)
    }
}

/// Sample the estimator at every grid vertex.
pub fn eval_on_grid(estimator: &Estimator, grid: &GridSpec) -> Result<ScalarField> {
    grid.validate()?;
    if grid.dim() != estimator.dim() {
        return Err(Error::DimensionMismatch {
            expected: estimator.dim(),
            found: grid.dim(),
        });
    }
    let values = estimator.eval_vertices(grid, 0..grid.vertex_count());
    estimator.field_from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::residual_norm;

    fn pc1(v: &[f64]) -> PointCloud {
        PointCloud::new(1, v.to_vec()).unwrap()
    }

    #[test]
    fn kde_values() {
        let k = KernelSpec::gaussian(1.0, 1).unwrap();
        let f = kde_fit(&pc1(&[0.0]), &k).unwrap();
        assert!((f.eval(&[0.0]).unwrap() - 0.398_942_3).abs() < 1e-7);
        let f = kde_fit(&pc1(&[-1.0, 1.0]), &k).unwrap();
        assert!((f.eval(&[0.0]).unwrap() - 0.241_970_7).abs() < 1e-7);
        assert!(kde_fit(&PointCloud::empty(1), &k).is_err());
    }

    #[test]
    fn kde_integrates_to_one() {
        let k = KernelSpec::gaussian(0.3, 1).unwrap();
        let x = pc1(&[-1.0, 0.2, 0.25, 2.0]);
        let f = kde_fit(&x, &k).unwrap();
        let grid = GridSpec::cube(1, -6.0, 7.0, 4001).unwrap();
        let field = eval_on_grid(&Estimator::Expansion(f), &grid).unwrap();
        let h = grid.spacing(0);
        // trapezoid rule
        let v = field.values();
        let integral = h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]));
        assert!((integral - 1.0).abs() < 1e-8, "{integral}");
    }

    #[test]
    fn squared_loss_is_kde() {
        let k = KernelSpec::gaussian(0.5, 1).unwrap();
        let x = pc1(&[0.0, 0.1, 0.5, 3.0]);
        let fit = rkde_fit(&x, &k, &Loss::Squared, &KirwlsOptions::default()).unwrap();
        assert_eq!(fit.expansion.weights(), kde_fit(&x, &k).unwrap().weights());
        assert_eq!(fit.risk_trace.len(), 1);
    }

    #[test]
    fn single_point_weight_is_one() {
        let k = KernelSpec::gaussian(0.5, 2).unwrap();
        let x = PointCloud::new(2, vec![1.0, 2.0]).unwrap();
        for loss in [Loss::Huber, Loss::Cauchy, Loss::DEFAULT_HAMPEL] {
            let fit = rkde_fit(&x, &k, &loss, &KirwlsOptions::default()).unwrap();
            assert_eq!(fit.expansion.weights(), &[1.0]);
        }
    }

    #[test]
    fn symmetric_pair_keeps_equal_weights() {
        let k = KernelSpec::gaussian(1.0, 1).unwrap();
        let fit = rkde_fit(&pc1(&[-1.0, 1.0]), &k, &Loss::Huber, &KirwlsOptions::default()).unwrap();
        assert_eq!(fit.expansion.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn far_point_is_down_weighted() {
        let k = KernelSpec::gaussian(0.5, 1).unwrap();
        let mut v: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        v.push(50.0);
        let x = pc1(&v);
        let fit = rkde_fit(&x, &k, &Loss::Huber, &KirwlsOptions::default()).unwrap();
        let w = fit.expansion.weights();
        assert!(w[10] < 1.0 / 11.0, "{w:?}");
        assert!(w[..10].iter().all(|&wi| wi > w[10]));
    }

    #[test]
    fn risk_trace_is_nonincreasing_for_huber() {
        let k = KernelSpec::gaussian(0.2, 1).unwrap();
        let v: Vec<f64> = (0..40).map(|i| ((i * 37) % 23) as f64 * 0.1).collect();
        let fit = rkde_fit(&pc1(&v), &k, &Loss::Huber, &KirwlsOptions::default()).unwrap();
        assert!(fit.converged);
        for w in fit.risk_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn degenerate_hampel_weights_error() {
        let k = KernelSpec::gaussian(1.0, 1).unwrap();
        // every residual exceeds c
        let loss = Loss::Hampel {
            a: 1e-4,
            b: 2e-4,
            c: 3e-4,
        };
        let r = rkde_fit(&pc1(&[0.0, 5.0, 10.0]), &k, &loss, &KirwlsOptions::default());
        assert_eq!(r.unwrap_err(), Error::DegenerateWeights);
    }

    #[test]
    fn adaptive_hampel_knots_are_residual_quantiles() {
        let k = KernelSpec::gaussian(0.4, 1).unwrap();
        let x = pc1(&[0.0, 0.1, 0.2, 0.3, 0.35, 5.0]);
        let loss = LossRule::ADAPTIVE_HAMPEL.resolve(&x, &k).unwrap();
        let kde = kde_fit(&x, &k).unwrap();
        let z = sample_residuals(&x, &kde).unwrap();
        let zmax = z.iter().copied().fold(0.0, f64::max);
        match loss {
            Loss::Hampel { a, b, c } => {
                assert!(a < b && b < c);
                assert_eq!(c, zmax);
                assert!((z[5] - zmax).abs() < 1e-15);
            }
            _ => panic!("expected hampel"),
        }
    }

    #[test]
    fn dtm_values() {
        let x = pc1(&[0.0, 2.0]);
        let d1 = dtm_fit(&x, &DtmSpec::new(0.5).unwrap()).unwrap();
        assert_eq!(d1.k(), 1);
        assert_eq!(dtm_eval(&d1, &[0.0]).unwrap(), 0.0);
        assert_eq!(dtm_eval(&d1, &[1.0]).unwrap(), 1.0);
        let d2 = dtm_fit(&x, &DtmSpec::new(1.0).unwrap()).unwrap();
        assert!((dtm_eval(&d2, &[0.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(DtmSpec::new(0.0).is_err());
        assert!(DtmSpec::new(1.5).is_err());
    }

    #[test]
    fn dtm_neighbor_count_from_k_over_n() {
        for n in [7usize, 300, 390, 1000] {
            for k in [1usize, 5, 7] {
                let s = DtmSpec::from_neighbors(k, n).unwrap();
                assert_eq!(s.neighbors(n), k);
            }
        }
    }

    #[test]
    fn dtm_is_one_lipschitz() {
        let x = PointCloud::new(2, vec![0.0, 0.0, 1.0, 0.5, -0.3, 2.0, 0.7, 0.7]).unwrap();
        let d = dtm_fit(&x, &DtmSpec::new(0.5).unwrap()).unwrap();
        for i in 0..50 {
            let a = [i as f64 * 0.07 - 1.0, 0.3];
            let b = [a[0] + 0.013, 0.29];
            let gap = (d.eval(&a).unwrap() - d.eval(&b).unwrap()).abs();
            assert!(gap <= squared_distance(&a, &b).sqrt() + 1e-12);
        }
    }

    #[test]
    fn kdist_cases() {
        let k = KernelSpec::gaussian(1.0, 1).unwrap();
        assert!(kdist_eval(&pc1(&[3.0]), &k, &[3.0]).unwrap() < 1e-7);
        let x = pc1(&[0.0, 0.5]);
        let kde = kde_fit(&x, &k).unwrap();
        let far = kdist_eval(&x, &k, &[1e4]).unwrap();
        assert!((far - (k.kappa() + kde.squared_norm()).sqrt()).abs() < 1e-12);
        // sublevel sets of kdist are superlevel sets of the kde
        let kd = KernelDistance::fit(&x, &k).unwrap();
        let (a, b) = ([0.2], [1.5]);
        assert!(kde.eval(&a).unwrap() > kde.eval(&b).unwrap());
        assert!(kd.eval(&a).unwrap() < kd.eval(&b).unwrap());
        assert_eq!(kd.eval(&a).unwrap(), residual_norm(&k, &a, &kde).unwrap());
    }

    #[test]
    fn knn_bandwidth() {
        assert_eq!(bandwidth_knn(&pc1(&[0.0, 1.0, 3.0]), 1).unwrap(), 1.0);
        let grid: Vec<f64> = (0..10).map(|i| i as f64 * 0.25).collect();
        assert_eq!(bandwidth_knn(&pc1(&grid), 1).unwrap(), 0.25);
        assert_eq!(bandwidth_knn(&pc1(&[0.0, 5.0]), 1).unwrap(), 5.0);
        assert!(bandwidth_knn(&pc1(&[0.0]), 1).is_err());
        assert!(bandwidth_knn(&pc1(&[0.0, 1.0]), 2).is_err());
    }

    #[test]
    fn grid_field_peaks_at_center() {
        let k = KernelSpec::gaussian(0.3, 2).unwrap();
        let grid = GridSpec::cube(2, -1.0, 1.0, 21).unwrap();
        let f = KernelExpansion::feature_map(k, &[0.0, 0.0]).unwrap();
        let field = eval_on_grid(&Estimator::Expansion(f), &grid).unwrap();
        let argmax = field
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, 10 * 21 + 10);
        assert!(field.min() >= 0.0);
        assert_eq!(field.direction(), Direction::Superlevel);
        let bad = GridSpec::cube(1, -1.0, 1.0, 5).unwrap();
        let f = KernelExpansion::feature_map(k, &[0.0, 0.0]).unwrap();
        assert!(eval_on_grid(&Estimator::Expansion(f), &bad).is_err());
    }

    #[test]
    fn grid_refinement_respects_lipschitz_bound() {
        let k = KernelSpec::gaussian(0.25, 2).unwrap();
        let x = PointCloud::new(2, vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.5]).unwrap();
        let f = Estimator::Expansion(kde_fit(&x, &k).unwrap());
        let coarse = GridSpec::cube(2, -1.0, 1.0, 21).unwrap();
        let fine = GridSpec::cube(2, -1.0, 1.0, 41).unwrap();
        let s1 = eval_on_grid(&f, &coarse).unwrap().max();
        let s2 = eval_on_grid(&f, &fine).unwrap().max();
        // any point lies within half a diagonal of a coarse vertex
        let reach = coarse.max_spacing() * (2f64).sqrt() / 2.0;
        assert!(s2 >= s1 - 1e-15);
        assert!(s2 - s1 <= k.lipschitz() * reach);
    }
}
