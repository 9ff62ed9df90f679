//! Tools for a Gaussian solid-on-solid interface on a periodic lattice,
//! evolved by heat-bath dynamics: either checkerboard (sub-lattice parallel)
//! half-sweeps or random-sequential single-site updates.
//!
//! The crate has five parts:
//!
//! * [`correlations`] — closed forms and large-time asymptotics for the four
//!   space-time gradient correlation kernels, plus an independent quadrature
//!   oracle for the space-space kernel.
//! * [`spectral`] — Fourier-side computations: the space-time eigenvalue of
//!   the update quadratic form, mode variances, equal-time covariance sums,
//!   and exact equilibrium sampling of the interface measure.
//! * [`oracle`] — brute-force ground truth: dense assembly and inversion of
//!   the space-time quadratic forms on small tori.
//! * [`sim`] — the two stochastic dynamics at production scale.
//! * [`estimators`] — empirical correlation estimation with batch-means
//!   error bars.
//!
//! All correlation conventions use the update-round count `t` (lattice time
//! separation `2t` for the checkerboard dynamics) and the spatial offset `j`.

pub mod correlations;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod rng;
pub mod sim;
pub mod spectral;
pub mod util;

pub use error::{Error, Result};
