//! Environment-aware joint active/passive beam selection for IRS-aided
//! downlinks.
//!
//! A synthetic site ([`env`]) is traced into multipath components, turned
//! into the BS–IRS matrix, the IRS–UE vector and their cascade
//! ([`channel`]), and searched over DFT codebooks ([`codebook`],
//! [`beamsearch`]). A beam index map ([`bim`]) stores the best pair at
//! training locations and answers location queries by KNN vote. The
//! [`schemes`] module implements the map-based selections and the
//! location-only and two-time-scale benchmarks; [`harness`] runs them
//! over a power sweep.

pub mod beamsearch;
pub mod bim;
pub mod channel;
pub mod codebook;
pub mod env;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod pathfile;
pub mod schemes;

pub use error::{Error, Result};
pub use geometry::Vec3;
