//! Small linear-algebra kernels: CSR storage, a MINRES solver for symmetric
//! indefinite systems and a banded LDL^T factorization for the forward solver.

mod banded;
mod minres;
mod sparse;

pub use banded::BandedSym;
pub use minres::{minres, MinresOptions, MinresOutcome};
pub use sparse::CsrMatrix;
