//! Numerical toolkit for device-independent quantum key distribution (DIQKD)
//! secured by a CHSH violation against collective attacks.
//!
//! The crate is layered bottom-up:
//!
//! * [`qmath`]: small dense complex matrices, a Jacobi Hermitian eigensolver,
//!   entropies, partial traces and purifications.
//! * [`chsh`]: CHSH correlators, the Horodecki maximal-violation criterion,
//!   Bell-diagonal states, correlation tables and the BB84 counterexample.
//! * [`eve`]: Eve's conditional states, the Holevo quantity of Bell-diagonal
//!   states and the explicit attack that saturates the bound.
//! * [`bounds`]: closed-form Holevo bounds and Devetak-Winter key rates for
//!   the device-independent, standard, detection-efficiency and
//!   partial-setting-knowledge scenarios.
//! * [`verify`]: numerical checks of every reduction step of the security
//!   proof, emitted as machine-readable reports.
//! * [`protocol`]: a seeded Monte-Carlo simulation of protocol rounds.

pub mod bounds;
pub mod chsh;
mod error;
pub mod eve;
pub mod numfmt;
pub mod protocol;
pub mod qmath;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};

/// Tsirelson's bound `2√2`, the largest CHSH value reachable by quantum states.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Slack under which a CHSH value above [`TSIRELSON`] is treated as rounding noise.
pub const CHSH_SLACK: f64 = 1e-9;
