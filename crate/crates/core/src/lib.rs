//! Robust persistence diagrams built from superlevel filtrations of robust
//! kernel density estimates.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numerical piece
//! of the pipeline:
//!
//! * [`loss`]: robust loss profiles (Huber, generalized Charbonnier, Cauchy, Hampel).
//! * [`kernel`]: Gaussian kernel and RKHS geometry of kernel expansions.
//! * [`density`]: KDE, robust KDE via kernelized IRWLS, DTM, kernel distance.
//! * [`grid`] and [`homology`]: scalar fields on regular grids and their cubical
//!   persistent homology (H0 everywhere, H1 in the plane).
//! * [`diagram`]: bottleneck and p-Wasserstein distances, persistence images.
//! * [`robustness`]: persistence-influence diagnostics and confidence radii.
//! * [`synth`]: seeded generators for the experiment geometries.
//! * [`learn`]: linear SVM / SVR trained by primal subgradient descent.
//!
//! IO, file formats and the command-line front-end live in the companion
//! `tdarobust` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod density;
pub mod diagram;
pub mod grid;
pub mod homology;
pub mod kernel;
pub mod learn;
pub mod loss;
pub mod matching;
pub mod points;
pub mod robustness;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use points::PointCloud;
