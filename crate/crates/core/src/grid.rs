//! Regular axis-aligned grids and scalar fields sampled on their vertices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, PointCloud, Result};

/// Axis-aligned box with `resolution[k] ≥ 2` vertices along axis `k`.
///
/// Vertices are linearized row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let g = GridSpec {
            lower,
            upper,
            resolution,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square grid `[lo, hi]^d` with `res` vertices per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, res: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![res; dim])
    }

    /// Bounding box of `points` enlarged by `margin` on every side.
    pub fn covering(points: &PointCloud, margin: f64, res: usize) -> Result<Self> {
        let (mut lo, mut hi) = points
            .bounding_box()
            .ok_or(Error::Empty("cannot build a grid around an empty sample"))?;
        for k in 0..lo.len() {
            lo[k] -= margin;
            hi[k] += margin;
            if hi[k] <= lo[k] {
                hi[k] = lo[k] + 1.0;
            }
        }
        let dim = lo.len();
        Self::new(lo, hi, vec![res; dim])
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if d == 0 {
            return Err(Error::param("grid must have at least one axis"));
        }
        if self.upper.len() != d || self.resolution.len() != d {
            return Err(Error::param("grid corner and resolution lengths differ"));
        }
        for k in 0..d {
            if !(self.lower[k].is_finite() && self.upper[k].is_finite()) {
                return Err(Error::param("grid corners must be finite"));
            }
            if !(self.upper[k] > self.lower[k]) {
                return Err(Error::param(format!("grid axis {k} has empty extent")));
            }
            if self.resolution[k] < 2 {
                return Err(Error::param("grid resolution must be at least 2 per axis"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.resolution[axis] - 1) as f64
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).fold(0.0, f64::max)
    }

    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1; d];
        for k in (0..d.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.resolution[k + 1];
        }
        s
    }

    pub fn multi_index(&self, mut v: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            out[k] = v % self.resolution[k];
            v /= self.resolution[k];
        }
    }

    pub fn vertex_coords_into(&self, v: usize, out: &mut [f64]) {
        let mut v = v;
        for k in (0..self.dim()).rev() {
            let i = v % self.resolution[k];
            v /= self.resolution[k];
            out[k] = self.lower[k] + i as f64 * self.spacing(k);
        }
    }

    pub fn vertex_coords(&self, v: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.vertex_coords_into(v, &mut out);
        out
    }

    /// All vertex coordinates as a point cloud.
    pub fn vertices(&self) -> PointCloud {
        let d = self.dim();
        let mut coords = vec![0.0; d * self.vertex_count()];
        for (v, chunk) in coords.chunks_exact_mut(d).enumerate() {
            self.vertex_coords_into(v, chunk);
        }
        PointCloud::new(d, coords).expect("grid coordinates are finite")
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .enumerate()
                .all(|(k, x)| *x >= self.lower[k] && *x <= self.upper[k])
    }

    /// Axis neighbours of vertex `v` (the 1-skeleton of the cubical grid).
    pub fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        let strides = self.strides();
        let mut idx = vec![0; self.dim()];
        self.multi_index(v, &mut idx);
        for k in 0..self.dim() {
            if idx[k] > 0 {
                f(v - strides[k]);
            }
            if idx[k] + 1 < self.resolution[k] {
                f(v + strides[k]);
            }
        }
    }

    /// All vertices at Chebyshev index distance one from `v` (the `3^d - 1`
    /// neighbourhood), in increasing index order.
    pub fn for_each_king_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        let d = self.dim();
        let strides = self.strides();
        let mut idx = vec![0; d];
        self.multi_index(v, &mut idx);
        let mut off = vec![-1i64; d];
        loop {
            let inside = (0..d).all(|k| {
                let c = idx[k] as i64 + off[k];
                c >= 0 && (c as usize) < self.resolution[k]
            });
            if inside && off.iter().any(|&o| o != 0) {
                let u = (0..d).fold(v as i64, |acc, k| acc + off[k] * strides[k] as i64);
                f(u as usize);
            }
            // odometer over {-1, 0, 1}^d, last axis fastest
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if off[k] < 1 {
                    off[k] += 1;
                    break;
                }
                off[k] = -1;
            }
        }
    }
}

/// Which nested family of sets the field filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    /// `{f ≥ r}` for decreasing `r` (densities).
    Superlevel,
    /// `{f ≤ r}` for increasing `r` (distance-like functions).
    Sublevel,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Superlevel => Direction::Sublevel,
            Direction::Sublevel => Direction::Superlevel,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Superlevel => "superlevel",
            Direction::Sublevel => "sublevel",
        }
    }
}

/// Filter-function values on the vertices of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
    direction: Direction,
    nonneg: bool,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>, direction: Direction, nonneg: bool) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.vertex_count(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("field values must be finite"));
        }
        if nonneg && values.iter().any(|v| *v < 0.0) {
            return Err(Error::param("field flagged nonnegative has negative values"));
        }
        Ok(Self {
            grid,
            values,
            direction,
            nonneg,
        })
    }

    /// Sample `f` at every grid vertex.
    pub fn from_fn(
        grid: GridSpec,
        direction: Direction,
        nonneg: bool,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self> {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.vertex_count())
            .map(|v| {
                grid.vertex_coords_into(v, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid, values, direction, nonneg)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn with_nonneg(mut self, nonneg: bool) -> Result<Self> {
        if nonneg && self.values.iter().any(|v| *v < 0.0) {
            return Err(Error::param("field has negative values"));
        }
        self.nonneg = nonneg;
        Ok(self)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `-f` with the opposite direction tag.
    pub fn negated(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            direction: self.direction.flipped(),
            nonneg: false,
        }
    }

    /// `max_v |f(v) - g(v)|` over a shared grid.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::param("fields live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
