//! Overflow probabilities for tandem queues.
//!
//! A stable Jackson tandem network with arrival rate `λ` and service rates
//! `μ1, μ2[, μ3]` overflows a shared buffer of size `n` before emptying
//! with a probability `p_n(x)` that decays exponentially in `n`. This crate
//! computes it three ways:
//!
//! * [`exactsolve`]: the finite linear system for `p_n` on the simplex
//!   `A_n`, solved by Gauss-Seidel, plus finite-horizon dynamic programming
//!   for the limit walk.
//! * [`harmonic`]: the closed form `W*(y) = P_y(τ < ∞)` for the walk seen
//!   from the exit corner, assembled from conjugate points on the
//!   characteristic surface ([`charsurface`]).
//! * [`montecarlo`]: seeded, reproducible plain Monte Carlo.
//!
//! [`report`] ties them together (relative-error sweeps, large-deviation
//! rates, the verification suite) and backs the `tandem` binary.

pub mod charsurface;
pub mod error;
pub mod exactsolve;
pub mod harmonic;
pub mod model;
pub mod montecarlo;
pub mod report;

pub use error::{Error, Result};
pub use model::{LatticePoint, Rates, WalkKind};

/// Complex scalar used throughout the harmonic-function machinery.
pub type C64 = num_complex::Complex64;
