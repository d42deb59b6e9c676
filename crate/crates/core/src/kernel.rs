//! Radial reproducing kernels and RKHS geometry of finite kernel expansions.
//!
//! All inner products and norms are computed through the kernel trick, so an
//! expansion `g = Σ wᵢ K(·, cᵢ)` never materializes as a function.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::GridSpec;
use crate::math::{exp, powf, sqrt};
use crate::points::squared_distance;
use crate::{Error, PointCloud, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum KernelProfile {
    #[default]
    Gaussian,
}

/// `K_σ(x, y) = σ^{-d} ψ(‖x - y‖₂ / σ)` with `ψ` a radial probability density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    profile: KernelProfile,
    sigma: f64,
    dim: usize,
    kappa: f64,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64, dim: usize) -> Result<Self> {
        Self::new(KernelProfile::Gaussian, sigma, dim)
    }

    pub fn new(profile: KernelProfile, sigma: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param("kernel bandwidth must be positive and finite"));
        }
        if dim == 0 {
            return Err(Error::param("kernel dimension must be positive"));
        }
        let kappa = match profile {
            KernelProfile::Gaussian => {
                powf(sigma, -(dim as f64)) * powf(2.0 * PI, -(dim as f64) / 2.0)
            }
        };
        Ok(Self {
            profile,
            sigma,
            dim,
            kappa,
        })
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    /// `κ_σ = sup K = σ^{-d} ψ(0)`.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `ν_σ = κ_σ^{1/2}`, the RKHS norm of a single feature map.
    #[inline]
    pub fn nu(&self) -> f64 {
        sqrt(self.kappa)
    }

    /// Kernel value from a squared Euclidean distance.
    #[inline]
    pub fn from_sq_dist(&self, d2: f64) -> f64 {
        match self.profile {
            KernelProfile::Gaussian => self.kappa * exp(-0.5 * d2 / (self.sigma * self.sigma)),
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.from_sq_dist(squared_distance(x, y))
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        self.check_dim(y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Lipschitz constant of `x ↦ K(x, c)` (Gaussian: `κ e^{-1/2} / σ`).
    pub fn lipschitz(&self) -> f64 {
        self.kappa * exp(-0.5) / self.sigma
    }
}

/// Dense symmetric Gram matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `G w`.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(w).map(|(g, w)| g * w).sum())
            .collect()
    }

    /// `wᵀ G w`.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        self.apply(w).iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

/// Gram matrix `G[i][j] = K(Xᵢ, Xⱼ)`.
pub fn gram(spec: &KernelSpec, points: &PointCloud) -> Result<Gram> {
    if points.is_empty() {
        return Err(Error::Empty("gram matrix needs at least one point"));
    }
    spec.check_dim(points.dim())?;
    let n = points.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = spec.kappa();
        let xi = points.point(i);
        for j in (i + 1)..n {
            let k = spec.eval_unchecked(xi, points.point(j));
            data[i * n + j] = k;
            data[j * n + i] = k;
        }
    }
    Ok(Gram { n, data })
}

/// An element `g = Σ wᵢ K(·, cᵢ)` of the mean-embedding class: nonnegative
/// weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpansion {
    kernel: KernelSpec,
    centers: PointCloud,
    weights: Vec<f64>,
}

pub(crate) const WEIGHT_SUM_TOL: f64 = 1e-10;

impl KernelExpansion {
    pub fn new(kernel: KernelSpec, centers: PointCloud, weights: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Empty("kernel expansion needs at least one center"));
        }
        kernel.check_dim(centers.dim())?;
        if weights.len() != centers.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::param("expansion weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::param("expansion weights must sum to one"));
        }
        Ok(Self {
            kernel,
            centers,
            weights,
        })
    }

    /// Uniform weights `1/n`: the empirical mean embedding (the KDE).
    pub fn uniform(kernel: KernelSpec, centers: PointCloud) -> Result<Self> {
        let n = centers.len();
        if n == 0 {
            return Err(Error::Empty("kernel expansion needs at least one center"));
        }
        Self::new(kernel, centers, vec![1.0 / n as f64; n])
    }

    /// The feature map `Φ_σ(x) = K(·, x)`.
    pub fn feature_map(kernel: KernelSpec, x: &[f64]) -> Result<Self> {
        kernel.check_dim(x.len())?;
        Self::new(kernel, PointCloud::new(x.len(), x.to_vec())?, vec![1.0])
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn centers(&self) -> &PointCloud {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * self.kernel.eval_unchecked(x, c))
            .sum()
    }

    /// `g(x) = Σ wᵢ K(x, cᵢ)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.kernel.check_dim(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// `‖g‖²_ℋ = wᵀ G w`.
    pub fn squared_norm(&self) -> f64 {
        let n = self.centers.len();
        let mut total = 0.0;
        for i in 0..n {
            let wi = self.weights[i];
            if wi == 0.0 {
                continue;
            }
            let ci = self.centers.point(i);
            let mut row = wi * self.kernel.kappa();
            for j in (i + 1)..n {
                let wj = self.weights[j];
                if wj != 0.0 {
                    row += 2.0 * wj * self.kernel.eval_unchecked(ci, self.centers.point(j));
                }
            }
            total += wi * row;
        }
        total.max(0.0)
    }

    /// `‖Φ_σ(x) - g‖_ℋ` given a precomputed `‖g‖²_ℋ`.
    pub fn residual_norm_with(&self, x: &[f64], squared_norm: f64) -> f64 {
        let cross = self.eval_unchecked(x);
        sqrt((self.kernel.kappa() - 2.0 * cross + squared_norm).max(0.0))
    }
}

/// `‖Φ_σ(x) - g‖_ℋ = √(κ - 2 Σ wᵢ K(x, cᵢ) + wᵀGw)`, clamped at zero.
pub fn residual_norm(spec: &KernelSpec, x: &[f64], g: &KernelExpansion) -> Result<f64> {
    if spec != g.kernel() {
        return Err(Error::param("residual kernel differs from the expansion's kernel"));
    }
    spec.check_dim(x.len())?;
    Ok(g.residual_norm_with(x, g.squared_norm()))
}

/// `‖g‖_ℋ`.
pub fn rkhs_norm(g: &KernelExpansion) -> f64 {
    sqrt(g.squared_norm())
}

/// `max |g(v)|` over the grid vertices, a lower estimate of `‖g‖_∞`.
pub fn sup_norm_on_grid(g: &KernelExpansion, grid: &GridSpec) -> Result<f64> {
    g.kernel.check_dim(grid.dim())?;
    let mut x = vec![0.0; grid.dim()];
    let mut best = 0.0f64;
    for v in 0..grid.vertex_count() {
        grid.vertex_coords_into(v, &mut x);
        best = best.max(g.eval_unchecked(&x).abs());
    }
    Ok(best)
}
