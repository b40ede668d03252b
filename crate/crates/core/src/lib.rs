//! Calibration toolkit for machine-translation metrics: synthesises
//! translations of known MQM quality, assembles pseudo systems from them, and
//! measures how faithfully and how consistently metrics rank them.

pub mod analysis;
pub mod assembly;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod synthesis;
pub mod tsv;

pub use error::{Error, Result};
