//! File formats, experiment pipelines and the command-line front-end for
//! robust persistence diagrams. The numerics live in `tdarobust_core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod pipeline;
pub mod svg;

pub use error::{AppError, AppResult};
