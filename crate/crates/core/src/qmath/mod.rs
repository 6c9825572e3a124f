//! Dense linear algebra on small Hermitian matrices and entropy primitives.

mod eigen;
mod entropy;
mod matrix;
mod state;

pub use eigen::{hermitian_eigensystem, Eigensystem};
pub(crate) use entropy::shannon_unchecked;
pub use entropy::{binary_entropy, shannon_entropy, ProbabilityVector};
pub use matrix::{c, inner, norm, pauli, CMatrix, C64};
pub use state::{partial_trace, partial_trace_op, purify, von_neumann_entropy, DensityMatrix, Purification, Subsystem};

/// Largest `|M - M†|` entry accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted in a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of a state's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed deviation of a probability vector's sum from 1.
pub const PROB_TOL: f64 = 1e-10;
/// Probabilities at or below this contribute nothing to an entropy.
pub const ENTROPY_FLOOR: f64 = 1e-15;
