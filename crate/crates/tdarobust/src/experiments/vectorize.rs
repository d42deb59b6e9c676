//! Diagrams → aligned persistence-image features → cross-validated linear models.

use serde::{Deserialize, Serialize};
use tdarobust_core::diagram::{
    normalize_max_persistence, persistence_image, ImageRange, ImageWeight, PersistenceImageSpec,
};
use tdarobust_core::homology::{PersistenceDiagram, PersistencePair};
use tdarobust_core::learn::{evaluate, fit, LinearSpec};

use super::split;
use crate::error::AppResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// One affine map per homology dimension, shared by the whole dataset.
    Dataset,
    /// Each diagram first rescaled to maximal persistence one.
    PerDiagram,
}

const PAD: f64 = 0.05;

/// Maps the finite pairs of every diagram into `[0, 1] × [0, 1]`
/// (birth, persistence) with one affine map per dimension.
fn rescale(diagrams: &[&PersistenceDiagram], scaling: Scaling) -> Vec<PersistenceDiagram> {
    let ds: Vec<PersistenceDiagram> = diagrams
        .iter()
        .map(|d| match scaling {
            Scaling::Dataset => (*d).clone(),
            Scaling::PerDiagram => normalize_max_persistence(d),
        })
        .collect();
    let finite = || ds.iter().flat_map(|d| d.pairs.iter().filter(|q| !q.essential));
    let bmin = finite().map(|q| q.lower).fold(f64::INFINITY, f64::min);
    let bmax = finite().map(|q| q.lower).fold(f64::NEG_INFINITY, f64::max);
    let qmax = finite().map(|q| q.persistence()).fold(0.0, f64::max);
    let bspan = if bmax > bmin { bmax - bmin } else { 1.0 };
    let qspan = if qmax > 0.0 { qmax } else { 1.0 };
    ds.into_iter()
        .map(|d| {
            let pairs = d
                .pairs
                .iter()
                .filter(|q| !q.essential)
                .map(|q| {
                    let b = (q.lower - bmin) / bspan;
                    PersistencePair::finite(b, b + q.persistence() / qspan)
                })
                .collect();
            PersistenceDiagram::new(d.dim, d.direction, pairs)
        })
        .collect()
}

/// Image features: `diagrams[i]` holds the diagrams of sample `i` in the
/// order their images are concatenated.
pub fn image_features(
    diagrams: &[Vec<PersistenceDiagram>],
    scaling: Scaling,
    bandwidth: f64,
    resolution: (usize, usize),
) -> AppResult<Vec<Vec<f64>>> {
    let mut features = vec![Vec::new(); diagrams.len()];
    let blocks = diagrams.first().map(Vec::len).unwrap_or(0);
    let mut spec = PersistenceImageSpec::new(resolution.0, resolution.1, bandwidth);
    spec.weight = ImageWeight::LinearPersistence;
    spec.range = ImageRange::Explicit {
        birth: (-PAD, 1.0 + PAD),
        persistence: (0.0, 1.0 + PAD),
    };
    for j in 0..blocks {
        let column: Vec<&PersistenceDiagram> = diagrams.iter().map(|d| &d[j]).collect();
        for (f, d) in features.iter_mut().zip(rescale(&column, scaling)) {
            f.extend(persistence_image(&d, &spec)?.data);
        }
    }
    Ok(features)
}

/// Mean Euclidean norm of the rows, or 1 if every row is zero.
fn mean_row_norm(rows: &[Vec<f64>]) -> f64 {
    let m = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum::<f64>()
        / rows.len().max(1) as f64;
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Test error of a linear model on each seeded split. Pixel intensities are
/// divided by one common factor, the mean training-row norm, so relative
/// pixel magnitudes are kept.
pub fn split_errors(
    features: &[Vec<f64>],
    targets: &[f64],
    spec: &LinearSpec,
    train_fraction: f64,
    seeds: &[u64],
) -> AppResult<Vec<f64>> {
    seeds
        .iter()
        .map(|&s| {
            let (train, test) = split(features.len(), train_fraction, s);
            let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
                (
                    idx.iter().map(|&i| features[i].clone()).collect(),
                    idx.iter().map(|&i| targets[i]).collect(),
                )
            };
            let (xtr, ytr) = pick(&train);
            let (xte, yte) = pick(&test);
            let scale = mean_row_norm(&xtr);
            let rescale = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                rows.into_iter()
                    .map(|r| r.into_iter().map(|v| v / scale).collect())
                    .collect()
            };
            let model = fit(&rescale(xtr), &ytr, &spec.with_seed(s))?;
            Ok(evaluate(&model, &rescale(xte), &yte)?)
        })
        .collect()
}
