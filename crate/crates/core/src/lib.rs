//! Contagion and stability indices for max-stable M4 random fields.
//!
//! * [`model`]: lattice coefficient specifications and the two preset fields.
//! * [`exact`]: closed-form extremal coefficients, tail dependence,
//!   contagion, fragility and stability indices.
//! * [`simulate`]: reproducible simulation and threshold oracles.
//! * [`estimate`]: rank-based estimators and Monte Carlo studies.
//! * [`stations`], [`report`], [`cli`]: station data ingestion, report
//!   output and the `m4idx` command line.

pub mod cli;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod lattice;
pub mod model;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod stations;

pub use error::{Error, Result};
pub use lattice::{neighbors, LatticePoint, Region};
pub use model::{build_example_4_1, build_example_4_2, M4Spec};
pub use scalar::{Rational, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
