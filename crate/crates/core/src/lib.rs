//! Two-stage identification of hyperelastic constitutive behavior from
//! full-field measurement data.
//!
//! Stage one ingests displacement/force snapshots of a plane-stress test and
//! identifies a database of stress-strain states without assuming a material
//! law (three finite-strain formulations). Stage two calibrates a convex,
//! invariant-based neural network potential on that database. A synthetic
//! experiment generator and a correlated-noise injector provide verifiable
//! end-to-end inputs.
//!
//! Units are mm / N / MPa throughout; values given in kPa are converted at
//! the configuration boundary.

pub mod continuum;
pub mod dataset;
pub mod ddi;
pub mod eval;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod noise;
pub mod pann;
pub mod pipeline;
pub mod rng;

mod error;
mod textio;

pub use error::{Error, Result};
