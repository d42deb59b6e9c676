//! Distances between persistence diagrams and persistence images.
//!
//! Both distances match the points of two diagrams, with the diagonal
//! available to either side in unlimited supply. Ground cost is the ℓ∞
//! distance; the cost of sending `(l, u)` to the diagonal is `(u - l) / 2`.
//! The optimum is computed exactly on the `(n1 + n2) × (n1 + n2)` augmented
//! assignment problem.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::homology::PersistenceDiagram;
use crate::math::{erfc, powf};
use crate::matching::{hopcroft_karp, hungarian};
use crate::{Error, Result};

pub type Point = (f64, f64);

#[inline]
pub fn pair_distance(a: Point, b: Point) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

#[inline]
pub fn diagonal_distance(a: Point) -> f64 {
    (a.1 - a.0).abs() / 2.0
}

fn check_compatible(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    if d1.direction != d2.direction {
        return Err(Error::DiagramMismatch(format!(
            "{} vs {} filtration",
            d1.direction.as_str(),
            d2.direction.as_str()
        )));
    }
    if d1.dim != d2.dim {
        return Err(Error::DiagramMismatch(format!(
            "homology dimension {} vs {}",
            d1.dim, d2.dim
        )));
    }
    Ok(())
}

/// Bottleneck distance, essential pairs excluded.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    bottleneck_with(d1, d2, false)
}

pub fn bottleneck_with(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    include_essential: bool,
) -> Result<f64> {
    check_compatible(d1, d2)?;
    Ok(bottleneck_points(
        &d1.points(include_essential),
        &d2.points(include_essential),
    ))
}

/// p-Wasserstein distance, essential pairs excluded.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<f64> {
    wasserstein_with(d1, d2, p, false)
}

pub fn wasserstein_with(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    p: f64,
    include_essential: bool,
) -> Result<f64> {
    check_compatible(d1, d2)?;
    wasserstein_points(
        &d1.points(include_essential),
        &d2.points(include_essential),
        p,
    )
}

/// Augmented cost of left slot `i` against right slot `j`.
///
/// Left slots are the points of `a` followed by one diagonal slot per point
/// of `b`; right slots are the points of `b` followed by one diagonal slot per
/// point of `a`.
#[inline]
fn augmented_cost(a: &[Point], b: &[Point], i: usize, j: usize) -> f64 {
    match (i < a.len(), j < b.len()) {
        (true, true) => pair_distance(a[i], b[j]),
        (true, false) => diagonal_distance(a[i]),
        (false, true) => diagonal_distance(b[j]),
        (false, false) => 0.0,
    }
}

pub fn bottleneck_points(a: &[Point], b: &[Point]) -> f64 {
    let n = a.len() + b.len();
    if n == 0 {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(a.len() * b.len() + n + 1);
    candidates.push(0.0);
    for &p in a {
        candidates.push(diagonal_distance(p));
        for &q in b {
            candidates.push(pair_distance(p, q));
        }
    }
    candidates.extend(b.iter().map(|&q| diagonal_distance(q)));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let feasible = |t: f64| {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| augmented_cost(a, b, i, j) <= t).collect())
            .collect();
        hopcroft_karp(n, &adj) == n
    };
    // the largest candidate is always feasible
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// `Σ cost^p` over a partial matching plus diagonal assignments, summed in
/// ascending order so the value does not depend on which diagram is first.
pub(crate) fn canonical_sum(a: &[Point], b: &[Point], partner: &[Option<usize>], p: f64) -> f64 {
    let mut used = vec![false; b.len()];
    let mut terms = Vec::with_capacity(a.len() + b.len());
    for (i, &pa) in a.iter().enumerate() {
        let c = match partner[i] {
            Some(j) => {
                used[j] = true;
                pair_distance(pa, b[j])
            }
            None => diagonal_distance(pa),
        };
        terms.push(powf(c, p));
    }
    for (j, &pb) in b.iter().enumerate() {
        if !used[j] {
            terms.push(powf(diagonal_distance(pb), p));
        }
    }
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

pub fn wasserstein_points(a: &[Point], b: &[Point], p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("wasserstein order p must be finite and at least 1"));
    }
    let n = a.len() + b.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut cost = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            cost[i * n + j] = powf(augmented_cost(a, b, i, j), p);
        }
    }
    let assignment = hungarian(n, &cost);
    let partner: Vec<Option<usize>> = (0..a.len())
        .map(|i| (assignment[i] < b.len()).then_some(assignment[i]))
        .collect();
    Ok(powf(canonical_sum(a, b, &partner, p), 1.0 / p))
}

/// `(Σ |u - l|^p)^{1/p}` over all pairs, essential ones included.
pub fn total_persistence(d: &PersistenceDiagram, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param("total persistence order must be positive"));
    }
    let s: f64 = d.pairs.iter().map(|q| powf(q.persistence(), p)).sum();
    Ok(powf(s, 1.0 / p))
}

/// Scale both coordinates so the largest persistence is 1. An empty diagram is
/// returned unchanged.
pub fn normalize_max_persistence(d: &PersistenceDiagram) -> PersistenceDiagram {
    let max = d.pairs.iter().map(|q| q.persistence()).fold(0.0, f64::max);
    if d.pairs.is_empty() || max <= 0.0 {
        return d.clone();
    }
    let mut out = d.clone();
    for q in &mut out.pairs {
        q.lower /= max;
        q.upper /= max;
    }
    out
}

/// Exhaustive reference matcher for tiny diagrams.
///
/// Enumerates every partial injection of `a` into `b`; unmatched points on
/// either side go to the diagonal. Exponential; meant for ≤ 6 points a side.
pub mod oracle {
    use super::*;

    fn for_each_partial_injection(
        n_a: usize,
        n_b: usize,
        f: &mut impl FnMut(&[Option<usize>]),
    ) {
        fn go(
            i: usize,
            partner: &mut Vec<Option<usize>>,
            used: &mut Vec<bool>,
            f: &mut impl FnMut(&[Option<usize>]),
        ) {
            if i == partner.len() {
                f(partner);
                return;
            }
            partner[i] = None;
            go(i + 1, partner, used, f);
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    partner[i] = Some(j);
                    go(i + 1, partner, used, f);
                    used[j] = false;
                }
            }
            partner[i] = None;
        }
        go(0, &mut vec![None; n_a], &mut vec![false; n_b], f);
    }

    pub fn bottleneck_brute(a: &[Point], b: &[Point]) -> f64 {
        let mut best = f64::INFINITY;
        for_each_partial_injection(a.len(), b.len(), &mut |partner| {
            let mut used = vec![false; b.len()];
            let mut worst: f64 = 0.0;
            for (i, &pa) in a.iter().enumerate() {
                worst = worst.max(match partner[i] {
                    Some(j) => {
                        used[j] = true;
                        pair_distance(pa, b[j])
                    }
                    None => diagonal_distance(pa),
                });
            }
            for (j, &pb) in b.iter().enumerate() {
                if !used[j] {
                    worst = worst.max(diagonal_distance(pb));
                }
            }
            best = best.min(worst);
        });
        best
    }

    pub fn wasserstein_brute(a: &[Point], b: &[Point], p: f64) -> f64 {
        let mut best = f64::INFINITY;
        for_each_partial_injection(a.len(), b.len(), &mut |partner| {
            best = best.min(canonical_sum(a, b, partner, p));
        });
        powf(best, 1.0 / p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ImageWeight {
    /// `w(q) = q / q_max`, with `q_max` the top of the persistence range.
    #[default]
    LinearPersistence,
    Constant,
}

/// Birth × persistence window covered by the image.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", deny_unknown_fields))]
pub enum ImageRange {
    /// Smallest window holding every point, padded by `3h` (persistence starts at 0).
    #[default]
    Auto,
    Explicit {
        birth: (f64, f64),
        persistence: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PersistenceImageSpec {
    /// `(rows, cols)`: rows index persistence, columns index birth.
    pub resolution: (usize, usize),
    pub bandwidth: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub weight: ImageWeight,
    #[cfg_attr(feature = "serde", serde(default))]
    pub range: ImageRange,
}

impl PersistenceImageSpec {
    pub fn new(rows: usize, cols: usize, bandwidth: f64) -> Self {
        Self {
            resolution: (rows, cols),
            bandwidth,
            weight: ImageWeight::LinearPersistence,
            range: ImageRange::Auto,
        }
    }

    pub fn with_range(mut self, birth: (f64, f64), persistence: (f64, f64)) -> Self {
        self.range = ImageRange::Explicit { birth, persistence };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(Error::param("image resolution must be at least 1x1"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::param("image bandwidth must be positive"));
        }
        if let ImageRange::Explicit { birth, persistence } = self.range {
            let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.1 > r.0;
            if !ok(birth) || !ok(persistence) {
                return Err(Error::param("image range has zero area"));
            }
        }
        Ok(())
    }
}

/// Row-major raster; row 0 is the lowest persistence band.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceImage {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl PersistenceImage {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.data.iter().enumerate() {
            if *v > self.data[best] {
                best = k;
            }
        }
        (best / self.cols, best % self.cols)
    }
}

/// `(erf(b) − erf(a)) / 2`, evaluated on the tail side to avoid cancellation.
fn gaussian_band(a: f64, b: f64) -> f64 {
    let twice = if a >= 0.0 {
        erfc(a) - erfc(b)
    } else if b <= 0.0 {
        erfc(-b) - erfc(-a)
    } else {
        2.0 - erfc(-a) - erfc(b)
    };
    0.5 * twice
}

/// Persistence image of the finite pairs of `d`: each pixel holds the
/// weighted Gaussian mass over its cell.
pub fn persistence_image(d: &PersistenceDiagram, spec: &PersistenceImageSpec) -> Result<PersistenceImage> {
    spec.validate()?;
    let (rows, cols) = spec.resolution;
    let pts: Vec<Point> = d
        .pairs
        .iter()
        .filter(|q| !q.essential)
        .map(|q| (q.lower, q.persistence()))
        .collect();
    if pts.is_empty() {
        return Ok(PersistenceImage::zeros(rows, cols));
    }
    let h = spec.bandwidth;
    let (birth, pers) = match spec.range {
        ImageRange::Explicit { birth, persistence } => (birth, persistence),
        ImageRange::Auto => {
            let bmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let bmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let qmax = pts.iter().map(|p| p.1).fold(0.0, f64::max);
            ((bmin - 3.0 * h, bmax + 3.0 * h), (0.0, qmax + 3.0 * h))
        }
    };
    let db = (birth.1 - birth.0) / cols as f64;
    let dq = (pers.1 - pers.0) / rows as f64;
    if !(db > 0.0 && dq > 0.0) {
        return Err(Error::param("image range has zero area"));
    }
    let q_max = pers.1;
    let scale = 1.0 / (core::f64::consts::SQRT_2 * h);
    // Gaussian mass of each band `[lo + k·step, lo + (k+1)·step)` about `centre`
    let bands = |lo: f64, step: f64, n: usize, centre: f64| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let a = (lo + k as f64 * step - centre) * scale;
                let b = (lo + (k + 1) as f64 * step - centre) * scale;
                gaussian_band(a, b)
            })
            .collect()
    };

    let mut img = PersistenceImage::zeros(rows, cols);
    for &(b, q) in &pts {
        let w = match spec.weight {
            ImageWeight::Constant => 1.0,
            ImageWeight::LinearPersistence => {
                if q_max > 0.0 {
                    (q / q_max).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
        };
        if w == 0.0 {
            continue;
        }
        let gq = bands(pers.0, dq, rows, q);
        let gb = bands(birth.0, db, cols, b);
        for (row, q) in img.data.chunks_mut(cols).zip(&gq) {
            let s = w * q;
            if s == 0.0 {
                continue;
            }
            for (cell, g) in row.iter_mut().zip(&gb) {
                *cell += s * g;
            }
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use crate::grid::Direction;
    use crate::homology::PersistencePair;

    fn dgm(pts: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(
            1,
            Direction::Superlevel,
            pts.iter().map(|&(l, u)| PersistencePair::finite(l, u)).collect(),
        )
    }

    #[test]
    fn metric_examples() {
        let a = dgm(&[(0.0, 2.0), (0.0, 4.0)]);
        let b = dgm(&[(0.0, 5.0)]);
        let e = dgm(&[]);
        assert_eq!(bottleneck(&a, &a).unwrap(), 0.0);
        assert_eq!(bottleneck(&dgm(&[(0.0, 2.0)]), &e).unwrap(), 1.0);
        assert_eq!(bottleneck(&a, &b).unwrap(), 1.0);
        assert_eq!(wasserstein(&dgm(&[(0.0, 2.0)]), &e, 1.0).unwrap(), 1.0);
        assert_eq!(wasserstein(&a, &b, 1.0).unwrap(), 2.0);
        for p in [1.0, 2.0, 3.5] {
            assert_eq!(wasserstein(&a, &a, p).unwrap(), 0.0);
        }
        assert!(wasserstein(&a, &b, 0.5).is_err());
    }

    #[test]
    fn mismatched_diagrams_are_rejected() {
        let a = dgm(&[(0.0, 1.0)]);
        let mut b = a.clone();
        b.direction = Direction::Sublevel;
        assert!(bottleneck(&a, &b).is_err());
        let mut c = a.clone();
        c.dim = 0;
        assert!(wasserstein(&a, &c, 1.0).is_err());
    }

    #[test]
    fn essential_pairs_are_optional() {
        let mut a = dgm(&[(0.0, 1.0)]);
        a.pairs.push(PersistencePair {
            lower: 0.0,
            upper: 10.0,
            essential: true,
        });
        let b = dgm(&[(0.0, 1.0)]);
        assert_eq!(bottleneck(&a, &b).unwrap(), 0.0);
        assert_eq!(bottleneck_with(&a, &b, true).unwrap(), 5.0);
    }

    #[test]
    fn total_persistence_and_normalization() {
        assert_eq!(total_persistence(&dgm(&[(0.0, 2.0)]), 1.0).unwrap(), 2.0);
        let t = total_persistence(&dgm(&[(0.0, 1.0), (0.0, 2.0)]), 2.0).unwrap();
        assert!((t - 5f64.sqrt()).abs() < 1e-12);
        let n = normalize_max_persistence(&dgm(&[(0.0, 2.0), (1.0, 2.0)]));
        assert_eq!(n.points(false), vec![(0.0, 1.0), (0.5, 1.0)]);
        assert!(normalize_max_persistence(&dgm(&[])).is_empty());
    }

    #[test]
    fn small_brute_force_agreement() {
        let a = [(0.1, 0.9), (0.3, 0.5), (0.0, 0.2)];
        let b = [(0.15, 0.8), (0.4, 0.45)];
        assert_eq!(bottleneck_points(&a, &b), bottleneck_brute(&a, &b));
        for p in [1.0, 2.0] {
            assert_eq!(
                wasserstein_points(&a, &b, p).unwrap(),
                wasserstein_brute(&a, &b, p)
            );
        }
    }

    #[test]
    fn image_examples() {
        let spec = PersistenceImageSpec::new(20, 20, 0.015).with_range((0.0, 1.0), (0.0, 1.0));
        let empty = persistence_image(&dgm(&[]), &spec).unwrap();
        assert!(empty.data.iter().all(|v| *v == 0.0));

        let img = persistence_image(&dgm(&[(0.0, 1.0)]), &spec).unwrap();
        assert_eq!(img.argmax(), (19, 0));

        let d1 = dgm(&[(0.1, 0.6), (0.2, 0.9)]);
        let d2 = dgm(&[(0.4, 0.7)]);
        let mut both = d1.clone();
        both.pairs.extend(d2.pairs.iter().copied());
        let (i1, i2) = (
            persistence_image(&d1, &spec).unwrap(),
            persistence_image(&d2, &spec).unwrap(),
        );
        let i12 = persistence_image(&both, &spec).unwrap();
        for k in 0..i12.data.len() {
            assert!((i12.data[k] - i1.data[k] - i2.data[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn image_keeps_mass_below_pixel_scale() {
        let d = dgm(&[(0.5, 1.5)]);
        let spec = PersistenceImageSpec {
            weight: ImageWeight::Constant,
            ..PersistenceImageSpec::new(4, 5, 1e-3).with_range((0.0, 1.0), (0.0, 2.0))
        };
        let img = persistence_image(&d, &spec).unwrap();
        let total: f64 = img.data.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // the point sits on the edge between two pixels of one column
        for (r, c) in [(1, 2), (2, 2)] {
            assert!((img.get(r, c) - 0.5).abs() < 1e-12);
        }
        let wide = PersistenceImageSpec {
            weight: ImageWeight::Constant,
            ..PersistenceImageSpec::new(4, 5, 0.3).with_range((0.0, 1.0), (0.0, 2.0))
        };
        let total: f64 = persistence_image(&d, &wide).unwrap().data.iter().sum();
        assert!(total < 1.0 && total > 0.5);
    }

    #[test]
    fn image_spec_validation() {
        let d = dgm(&[(0.0, 1.0)]);
        assert!(persistence_image(&d, &PersistenceImageSpec::new(0, 3, 0.1)).is_err());
        assert!(persistence_image(&d, &PersistenceImageSpec::new(3, 3, 0.0)).is_err());
        let flat = PersistenceImageSpec::new(3, 3, 0.1).with_range((0.0, 0.0), (0.0, 1.0));
        assert!(persistence_image(&d, &flat).is_err());
        // auto range around a single point
        assert!(persistence_image(&d, &PersistenceImageSpec::new(3, 3, 0.1)).is_ok());
    }
}
