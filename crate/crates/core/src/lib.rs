//! Iceberg transformations and their rank-one relatives.
//!
//! The crate builds rotated-word hierarchies, turns a stage into its
//! fat-column geometry, runs the induced map on finite cyclic truncations,
//! and evaluates correlation, spectral and local-rank quantities on top.

pub mod cli;
pub mod correlation;
pub mod dynamics;
pub mod error;
pub mod iceberg;
pub mod rank;
pub mod spectral;
pub mod words;

pub use error::{Error, Result};
