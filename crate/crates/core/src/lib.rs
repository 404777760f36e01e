//! Sparse recovery from partially corrupted partial-Fourier measurements.
//!
//! The crate provides:
//! - a unitary-DFT sensing stack ([`spectral`]): forward/adjoint partial
//!   Fourier maps applied via FFT, Dirac combs, numerical supports, and the
//!   prime-length time/frequency uncertainty check;
//! - seeded problem generation with sparse measurement corruption and
//!   trimming ([`instance`]);
//! - a weighted l1 solver with an independent dense oracle ([`solver`],
//!   [`reference`]);
//! - dual-certificate construction (golfing passes plus a minimum-sup-norm
//!   correction) and verification ([`cert`]);
//! - statistical audits of tail bounds and golfing traces ([`concentration`]);
//! - a reproducible Monte Carlo experiment harness with CSV output
//!   ([`experiment`]) behind the `corrsense` CLI.

pub mod cert;
pub mod concentration;
pub mod cvec;
pub mod error;
pub mod experiment;
pub mod index_set;
pub mod instance;
pub mod reference;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use index_set::IndexSet;
pub use instance::{InstanceParams, ProblemInstance};
pub use solver::{RecoveryResult, SolverOptions};
pub use spectral::PartialFourierOperator;
