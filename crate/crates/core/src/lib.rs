//! Dark states in driven, lossy N-atom M-mode Jaynes–Cummings (Tavis–Cummings) cavities.
//!
//! - [`model`]: parameters, coupling generators, collective-mode decomposition.
//! - [`weaksolver`]: single-excitation master equation and detuning sweeps.
//! - [`analytic`]: closed-form populations, the dark state, observability conditions.
//! - [`fockoracle`]: truncated-Fock reference model.
//! - [`lindblad`]: vectorized Liouvillians and the stationary solve they share.

pub mod analytic;
pub mod error;
pub mod fockoracle;
pub mod lindblad;
pub mod linalg;
pub mod model;
pub mod weaksolver;

pub use error::{Error, Result};
pub use model::{decompose, CollectiveDecomposition, SystemParams, DEFAULT_RANK_TOLERANCE};
