//! Transmit waveform design for multi-user, multi-target MIMO integrated
//! sensing and communication (ISAC) downlinks.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: arrays, angle grids, Rician channels, PSK symbols and the
//!   real-valued reformulation of the per-user received signal.
//! * [`metrics`]: closed-form sum rate, beampattern gain and matching MSE,
//!   the optimal beampattern scaling and constructive-interference margins.
//! * [`convex`]: a small log-barrier interior-point engine over one real
//!   vector block and one Hermitian matrix block, with PSD projections and
//!   KKT residual checks.
//! * [`algorithms`]: the sum-rate SCA, the beampattern QSDP, the augmented
//!   Tchebycheff multi-objective SCA, Gaussian randomization, Pareto sweeps
//!   and the comparison baselines.
//! * [`harness`]: configuration files, seeded Monte-Carlo orchestration,
//!   aggregation, CSV/JSON export and the invariant suite behind `validate`.
//!
//! Power quantities are carried in linear milliwatts; internally every
//! optimization is rescaled so that the power budget equals one.

pub mod algorithms;
pub mod convex;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod par;

pub use error::{IsacError, Result};

pub use nalgebra::Complex;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
