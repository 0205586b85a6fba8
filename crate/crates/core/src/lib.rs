#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN
//! Brownian directed polymers in a Poissonian space-time medium.
//!
//! The crate simulates the medium and importance-samples the polymer
//! measure to estimate free energies, replica overlaps and favourite-path
//! localization, and it evaluates the closed-form phase-diagram bounds.

pub mod analytics;
pub mod environment;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod numfmt;
pub mod polymer;
pub mod rng;

pub use environment::{PointCloud, SpaceTimeBox};
pub use error::{Error, Result};

pub use geometry::BallGeometry;
pub use estimators::{EstimateWithError, ExperimentConfig};
pub use polymer::{GibbsEnsemble, OccupancyField, PolymerPath, TimeGrid};
