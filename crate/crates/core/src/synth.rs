//! Seeded generators for the experiment geometries.
//!
//! Every generator draws from a ChaCha8 stream selected by `(seed, stream)`,
//! so independent purposes never share random numbers and results are
//! bit-identical across platforms.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{cos, round, sin, sqrt};
use crate::{Error, PointCloud, Result};

/// The ChaCha8 generator for `(seed, stream)`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Rect {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl Rect {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            lower: [lo, lo],
            upper: [hi, hi],
        }
    }

    fn validate(&self) -> Result<()> {
        for k in 0..2 {
            if !(self.lower[k].is_finite() && self.upper[k].is_finite())
                || self.upper[k] <= self.lower[k]
            {
                return Err(Error::param("noise box must have positive area"));
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut impl Rng) -> [f64; 2] {
        [
            self.lower[0] + (self.upper[0] - self.lower[0]) * rng.random::<f64>(),
            self.lower[1] + (self.upper[1] - self.lower[1]) * rng.random::<f64>(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", deny_unknown_fields))]
pub enum Signal {
    UnionOfCircles(Vec<Circle>),
    /// Uniform (by area) on `{x : |‖x‖ - radius| ≤ width/2}`.
    Annulus { radius: f64, width: f64 },
}

impl Signal {
    fn validate(&self) -> Result<()> {
        match self {
            Signal::UnionOfCircles(cs) => {
                if cs.is_empty() {
                    return Err(Error::param("circle signal needs at least one circle"));
                }
                if cs.iter().any(|c| !(c.radius > 0.0 && c.radius.is_finite())) {
                    return Err(Error::param("circle radii must be positive"));
                }
            }
            Signal::Annulus { radius, width } => {
                if !(*width >= 0.0 && *radius - width / 2.0 > 0.0) {
                    return Err(Error::param("annulus must satisfy 0 <= width < 2 radius"));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut impl Rng) -> [f64; 2] {
        match self {
            Signal::UnionOfCircles(cs) => {
                let total: f64 = cs.iter().map(|c| c.radius).sum();
                let mut u = rng.random::<f64>() * total;
                let mut pick = cs[cs.len() - 1];
                for c in cs {
                    if u < c.radius {
                        pick = *c;
                        break;
                    }
                    u -= c.radius;
                }
                let t = TAU * rng.random::<f64>();
                [
                    pick.center[0] + pick.radius * cos(t),
                    pick.center[1] + pick.radius * sin(t),
                ]
            }
            Signal::Annulus { radius, width } => {
                let (r0, r1) = (radius - width / 2.0, radius + width / 2.0);
                let r = sqrt(r0 * r0 + (r1 * r1 - r0 * r0) * rng.random::<f64>());
                let t = TAU * rng.random::<f64>();
                [r * cos(t), r * sin(t)]
            }
        }
    }
}

/// `(1 - π) P + π Q` with `P` the signal and `Q` uniform on a box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MixtureSpec {
    pub signal: Signal,
    pub noise: Rect,
    pub pi: f64,
    pub n: usize,
    pub seed: u64,
}

/// Points with a noise flag per point. Signal points come first.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub points: PointCloud,
    pub is_noise: Vec<bool>,
}

impl LabeledSample {
    pub fn noise_count(&self) -> usize {
        self.is_noise.iter().filter(|b| **b).count()
    }

    pub fn signal_points(&self) -> PointCloud {
        let mut out = PointCloud::empty(self.points.dim());
        for (p, noise) in self.points.iter().zip(&self.is_noise) {
            if !noise {
                out.push(p).expect("same dimension");
            }
        }
        out
    }
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.pi) {
            return Err(Error::param("contamination fraction must lie in [0, 1)"));
        }
        self.signal.validate()?;
        self.noise.validate()
    }

    pub fn signal_count(&self) -> usize {
        round(self.n as f64 * (1.0 - self.pi)) as usize
    }
}

/// `round(n (1 - π))` signal points, the rest uniform noise.
pub fn sample(spec: &MixtureSpec) -> Result<LabeledSample> {
    sample_with(spec, &mut rng_stream(spec.seed, 0))
}

pub fn sample_with(spec: &MixtureSpec, rng: &mut impl Rng) -> Result<LabeledSample> {
    spec.validate()?;
    let n_signal = spec.signal_count().min(spec.n);
    let mut coords = Vec::with_capacity(2 * spec.n);
    for _ in 0..n_signal {
        coords.extend_from_slice(&spec.signal.draw(rng));
    }
    for _ in n_signal..spec.n {
        coords.extend_from_slice(&spec.noise.draw(rng));
    }
    let mut is_noise = vec![false; n_signal];
    is_noise.resize(spec.n, true);
    Ok(LabeledSample {
        points: PointCloud::new(2, coords)?,
        is_noise,
    })
}

/// `count` points uniform on the circle of radius `r` about the origin;
/// `count = 0` means `round(r)` points.
pub fn outlier_ring(r: f64, count: usize, seed: u64) -> Result<PointCloud> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("ring radius must be positive"));
    }
    let count = if count == 0 { round(r) as usize } else { count };
    let mut rng = rng_stream(seed, 1);
    let mut coords = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let t = TAU * rng.random::<f64>();
        coords.push(r * cos(t));
        coords.push(r * sin(t));
    }
    PointCloud::new(2, coords)
}

/// A random number of random circles with uniform background noise.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RandomCirclesSpec {
    /// The circle count is uniform on `1..=max_circles`.
    pub max_circles: usize,
    /// Region holding the centres.
    pub centers: Rect,
    pub radius_range: (f64, f64),
    pub n: usize,
    pub pi: f64,
}

impl Default for RandomCirclesSpec {
    fn default() -> Self {
        Self {
            max_circles: 5,
            centers: Rect::square(0.0, 2.0),
            radius_range: (0.2, 0.5),
            n: 400,
            pi: 0.5,
        }
    }
}

impl RandomCirclesSpec {
    /// The centre region enlarged by the largest radius.
    pub fn enclosing(&self) -> Rect {
        let r = self.radius_range.1;
        Rect {
            lower: [self.centers.lower[0] - r, self.centers.lower[1] - r],
            upper: [self.centers.upper[0] + r, self.centers.upper[1] + r],
        }
    }
}

/// One realization and its circle count.
pub fn random_circles(spec: &RandomCirclesSpec, seed: u64) -> Result<(LabeledSample, usize)> {
    if spec.max_circles == 0 {
        return Err(Error::param("max_circles must be positive"));
    }
    let (r0, r1) = spec.radius_range;
    if !(r0 > 0.0 && r1 >= r0 && r1.is_finite()) {
        return Err(Error::param("radius range must be positive and ordered"));
    }
    spec.centers.validate()?;
    let mut rng = rng_stream(seed, 2);
    let count = rng.random_range(1..=spec.max_circles);
    let circles = (0..count)
        .map(|_| Circle {
            center: spec.centers.draw(&mut rng),
            radius: r0 + (r1 - r0) * rng.random::<f64>(),
        })
        .collect();
    let mix = MixtureSpec {
        signal: Signal::UnionOfCircles(circles),
        noise: spec.enclosing(),
        pi: spec.pi,
        n: spec.n,
        seed,
    };
    Ok((sample_with(&mix, &mut rng)?, count))
}

/// Synthetic stand-ins for three silhouette classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ShapeClass {
    /// Elliptic body with six legs and two antennae.
    Beetle,
    /// Elongated outline pinched in the middle with knobbed ends.
    Bone,
    /// Planar coil with several small loops.
    Spring,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 3] = [ShapeClass::Beetle, ShapeClass::Bone, ShapeClass::Spring];

    pub fn name(&self) -> &'static str {
        match self {
            ShapeClass::Beetle => "beetle",
            ShapeClass::Bone => "bone",
            ShapeClass::Spring => "spring",
        }
    }

    /// Polylines tracing the outline, inside the unit disc.
    fn outline(&self) -> Vec<Vec<[f64; 2]>> {
        const STEPS: usize = 240;
        let closed = |f: &dyn Fn(f64) -> [f64; 2]| -> Vec<[f64; 2]> {
            (0..=STEPS).map(|i| f(TAU * i as f64 / STEPS as f64)).collect()
        };
        match self {
            ShapeClass::Beetle => {
                let mut parts = vec![closed(&|t| [0.3 * cos(t), 0.5 * sin(t)])];
                for (y, dx) in [(0.25, 0.3), (0.0, 0.35), (-0.25, 0.3)] {
                    for s in [-1.0, 1.0] {
                        let x0 = s * 0.3 * sqrt(1.0 - (y / 0.5f64) * (y / 0.5));
                        parts.push(vec![[x0, y], [x0 + s * dx, y + 0.1]]);
                    }
                }
                for s in [-1.0, 1.0] {
                    parts.push(vec![[s * 0.05, 0.5], [s * 0.2, 0.75]]);
                }
                parts
            }
            ShapeClass::Bone => vec![closed(&|t| {
                // superellipse-like body whose width dips at the centre
                let x = 0.75 * cos(t);
                let waist = 0.09 + 0.18 * (x / 0.75) * (x / 0.75) * (x / 0.75) * (x / 0.75);
                [x, waist * sin(t).signum() * sqrt(sin(t).abs())]
            })],
            ShapeClass::Spring => {
                // prolate trochoid: loops where the pen outruns the wheel
                let turns = 4.0;
                let n = 4 * STEPS;
                vec![(0..=n)
                    .map(|i| {
                        let t = TAU * turns * i as f64 / n as f64;
                        [0.055 * t - 0.7 - 0.2 * sin(t), 0.25 * cos(t)]
                    })
                    .collect()]
            }
        }
    }
}

/// Points drawn uniformly by arc length along a set of polylines.
fn sample_polylines(parts: &[Vec<[f64; 2]>], n: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let mut segs: Vec<([f64; 2], [f64; 2])> = Vec::new();
    let mut cum: Vec<f64> = Vec::new();
    let mut total = 0.0;
    for part in parts {
        for w in part.windows(2) {
            let (a, b) = (w[0], w[1]);
            let len = sqrt((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]));
            if len > 0.0 {
                total += len;
                segs.push((a, b));
                cum.push(total);
            }
        }
    }
    (0..n)
        .map(|_| {
            let s = rng.random::<f64>() * total;
            let k = cum.partition_point(|&c| c <= s).min(segs.len() - 1);
            let (a, b) = segs[k];
            let start = if k == 0 { 0.0 } else { cum[k - 1] };
            let t = ((s - start) / (cum[k] - start)).clamp(0.0, 1.0);
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        })
        .collect()
}

/// One noisy silhouette sample: random rotation and scale in `[0.85, 1.15]`,
/// `round(n (1 - π))` outline points, the rest uniform on `[-1, 1]²`.
pub fn sample_shape(class: ShapeClass, n: usize, pi: f64, seed: u64) -> Result<LabeledSample> {
    if !(0.0..1.0).contains(&pi) {
        return Err(Error::param("contamination fraction must lie in [0, 1)"));
    }
    let mut rng = rng_stream(seed, 3);
    let angle = TAU * rng.random::<f64>();
    let scale = 0.85 + 0.3 * rng.random::<f64>();
    let (c, s) = (cos(angle), sin(angle));
    let n_signal = round(n as f64 * (1.0 - pi)) as usize;
    let mut coords = Vec::with_capacity(2 * n);
    for p in sample_polylines(&class.outline(), n_signal, &mut rng) {
        coords.push(scale * (c * p[0] - s * p[1]));
        coords.push(scale * (s * p[0] + c * p[1]));
    }
    let noise = Rect::square(-1.0, 1.0);
    for _ in n_signal..n {
        coords.extend_from_slice(&noise.draw(&mut rng));
    }
    let mut is_noise = vec![false; n_signal];
    is_noise.resize(n, true);
    Ok(LabeledSample {
        points: PointCloud::new(2, coords)?,
        is_noise,
    })
}
