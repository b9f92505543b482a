//! Precision limits of noisy quantum metrology from the single-particle channel.
//!
//! The crate computes quantum Fisher information of states and channels and
//! the asymptotic / finite-copy precision bounds that follow from a single
//! particle's Kraus representation: the right-logarithmic-derivative bound,
//! the classical-simulation bound from the tangent line through the channel
//! manifold, the quantum-simulation bound, and the channel-extension bound
//! evaluated both in closed form and as a small semidefinite program. On top
//! of these sit full frequentist and Bayesian analyses of the lossy
//! Mach-Zehnder interferometer.
//!
//! Design notes:
//! - all dense linear algebra is deterministic pure f64 (cyclic Jacobi
//!   eigensolver, log-barrier SDP solver), so outputs are reproducible
//!   bit-for-bit across runs;
//! - bounds report applicability explicitly instead of erroring when a
//!   method does not apply at the probed channel;
//! - scalar special functions (Lambert W, Poisson-weighted sqrt sums) are
//!   implemented locally with frozen tolerances.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod channels;
pub mod error;
pub mod fisher;
pub mod geometry;
pub mod interferometer;
pub mod numerics;
pub mod scenarios;
pub mod sdp;

pub use error::{MetroError, Result};
