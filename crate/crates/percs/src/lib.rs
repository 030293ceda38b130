//! Block-based compressive sensing of grayscale images with perceptual
//! weighting derived from the contrast sensitivity function (CSF).
//!
//! An image is split into `B x B` tiles, each tile is acquired with a seeded
//! Gaussian measurement matrix, and the tiles are recovered independently by
//! sparse solvers operating in an orthonormal 2-D DCT basis. Besides plain
//! basis pursuit the crate ships a non-iterative weighted variant whose
//! weights come from a band-pass model of human contrast sensitivity, an
//! iteratively reweighted l1 baseline, and orthogonal matching pursuit.
//!
//! The main entry points are:
//!
//! - [`imageio`]: PGM load/store and block partitioning,
//! - [`transform`]: the orthonormal 2-D DCT basis over tiles,
//! - [`perceptual`]: CSF weights from viewing geometry,
//! - [`sensing`]: seeded Gaussian acquisition and the measurement container,
//! - [`solvers`]: l1, weighted l1, reweighted l1 and OMP recovery,
//! - [`metrics`]: PSNR and SSIM,
//! - [`pipeline`]: end-to-end reconstruction and ratio/method sweeps.
//!
//! Runnable demos live in the crate's `examples/` directory; the `percs`
//! binary exposes the same pipeline as subcommands (`sense`, `reconstruct`,
//! `evaluate`, `sweep`, `weights`).

pub mod error;
pub mod imageio;
pub mod metrics;
pub mod perceptual;
pub mod pipeline;
pub mod sensing;
pub mod solvers;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};
pub use imageio::{BlockGrid, GrayImage};
pub use metrics::QualityReport;
pub use perceptual::{CsfWeights, ViewingGeometry};
pub use sensing::{MeasurementSet, SensingMatrix};
pub use solvers::{Method, SolveReport, SolverConfig};
pub use transform::Dct2Basis;
