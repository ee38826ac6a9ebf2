//! Matrix ingestion, synthetic generators and experiment drivers behind the
//! `rqrcp` command.

pub mod experiment;
pub mod io;
pub mod synth;

pub use experiment::{Algorithm, ExperimentSpec, QualityRecord};
