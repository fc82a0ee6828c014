//! Numerical toolkit for finite-dimensional tracially symmetric quantum Markov
//! semigroups: Lindblad generators and their first-order differential
//! calculus, operator-mean metrics, gradient estimates `GE(K,∞)` and
//! `CGE(K,∞)`, entropy and Fisher information functionals, and discretized
//! transport-distance bounds.

pub mod algebra;
pub mod calculus;
pub mod descent;
pub mod entfun;
pub mod error;
pub mod linalg;
pub mod gradest;
pub mod means;
pub mod qms;
pub mod reproduce;
pub mod sampling;
pub mod transport;
pub mod zoo;

pub use error::{Error, Result};
