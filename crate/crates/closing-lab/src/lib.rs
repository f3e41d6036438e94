//! A desk-scale numerical laboratory for one-dimensional return dynamics of
//! surface flows: piecewise-smooth Poincaré return maps on a transversal
//! segment, interval exchange transformations, contraction and Lyapunov
//! analysis of the return dynamics, empirical transverse measures, an explicit
//! one-parameter twist family acting on return maps, a bisection search for
//! the twist parameter that closes a recurrent orbit through a marked point,
//! and an ODE verification that the twist is realized by a localized
//! perturbation of the unit horizontal field in a flow box.
//!
//! The crate is organized around six modules:
//!
//! - [`segment_map`]: return maps as finite collections of smooth monotone
//!   branches on open subintervals, with iteration, iterated-domain
//!   computation, derivative tracking and contraction certificates.
//! - [`iet`]: interval exchange transformations (with flips) on the circle,
//!   as exact-derivative model dynamics and as embeddable return maps.
//! - [`ergodic`]: empirical measures along orbits, invariance defects,
//!   Birkhoff averages, Lyapunov estimates, log-derivative integrals,
//!   continuous majorants and uniform Birkhoff bounds.
//! - [`twist`]: the twist family `E_lambda` with plateau displacement
//!   `lambda * delta`, perturbed iteration of `E_lambda ∘ P`, the drift
//!   bound, the closing search and boundary-event scans.
//! - [`flowbox`]: bump functions, the perturbed field on a rectangle,
//!   shooting calibration of the drift constant, transit maps and their
//!   comparison against the twist family, and a C^r-norm estimator.
//! - [`cli`]: scenario files, experiment orchestration and reports; the
//!   `closing-lab` binary is a thin wrapper around [`cli::run`].
//!
//! Start with the `examples/` directory for runnable entry points, one per
//! capability.

pub mod cli;
pub mod ergodic;
pub mod flowbox;
pub mod iet;
pub mod interval;
pub mod ode;
pub mod profile;
pub mod segment_map;
pub mod twist;

mod error;

pub use error::Error;
pub use interval::Interval;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
