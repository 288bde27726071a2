//! Complex joint probabilities, ergodic phase randomization and meter-based
//! state preparation on finite-dimensional Hilbert spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: bases, pure and mixed states, observables and unitaries with
//!   a deterministic phase convention.
//! * [`quasiprob`]: Kirkwood-Dirac joint distributions, weak values, the
//!   unitary transformation kernel and outcome prediction.
//! * [`ergodic`]: phase distributions, phase-averaging channels, dephasing and
//!   state preparation by randomization plus selection.
//! * [`meter`]: a discretized von Neumann pointer coupled to the system, with
//!   partial trace and binned read-out.
//! * [`causality`]: preparation/measurement chains, the determinism matrix and
//!   the action-phase representation of state vectors.
//! * [`scenario`], [`suite`] and [`report`]: the scenario runner, the identity
//!   verification suite and report serialization used by the CLI.

// `!(x > y)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causality;
pub mod ergodic;
pub mod error;
pub mod exec;
pub mod hilbert;
pub mod meter;
pub mod quasiprob;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod serial;
pub mod suite;

pub use error::{Error, Result};
pub use exec::Exec;
pub use hilbert::{BasisKind, BasisSet, DensityOperator, Observable, PureState, UnitaryMap};

pub use num_complex::Complex64 as C64;

pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Numerical tolerances shared across modules.
pub mod tol {
    /// Absolute tolerance for linear-algebra identities.
    pub const LIN: f64 = 1e-10;
    /// Minimum eigenvalue gap accepted by [`crate::hilbert::eigendecompose`].
    pub const DEGEN: f64 = 1e-8;
    /// Minimum `|<b|a>|` for conditioning on a pair of states.
    pub const OVERLAP: f64 = 1e-8;
    /// Bound on spurious imaginary parts of quantities that are real.
    pub const IM: f64 = 1e-10;
}
