//! Beamspace channel estimation for millimeter-wave massive MIMO with a lens
//! antenna array.
//!
//! The crate covers the full link-level pipeline:
//!
//! * [`channel`]: Saleh-Valenzuela spatial channels, the lens DFT transform and
//!   beamspace channels with their per-path components.
//! * [`measurement`]: orthogonal pilots, Bernoulli combiners, mutual coherence
//!   and the uplink pilot pipeline that produces per-user measurement vectors.
//! * [`estimators`]: support-detection (SD) estimation together with the OMP
//!   and sparsity-mask-detection (SMD) baselines.
//! * [`beam_selection`]: interference-aware beam selection, dimension-reduced
//!   zero-forcing and downlink sum-rate.
//! * [`analysis`]: closed-form power-ratio and detection-probability bounds.
//! * [`experiments`]: seeded Monte Carlo sweeps and CSV/JSON result tables.
//!
//! Beam indices exposed by the public API are 1-based (`1..=N`).

// `!(x > 0.0)` is used on purpose so NaN is rejected along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod beam_selection;
pub mod channel;
mod error;
pub mod estimators;
pub mod experiments;
mod linalg;
pub mod measurement;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex column vector used for channels, measurements and estimates.
pub type CVector = nalgebra::DVector<Complex64>;
/// Complex dense matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
