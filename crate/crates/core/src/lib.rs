//! Randomized joint eigenvalue approximation for nearly commuting matrix
//! families, with perturbation bounds, a synthetic experiment harness, a
//! multiparameter eigenvalue solver and polynomial root extraction.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, with `…32` variants for single precision.

pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mep;
pub mod perturbation;
pub mod polyroots;
pub mod random;
pub mod rjea;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use mep::Strategy;
pub use rjea::Mode;
pub use scalar::Real;

pub type Matrix = linalg::Matrix<f64>;
pub type CommutingFamily = rjea::CommutingFamily<f64>;
pub type JointEigenResult = rjea::JointEigenResult<f64>;
pub type RandomCombination = rjea::RandomCombination<f64>;
pub type MepProblem = mep::MepProblem<f64>;
pub type MepSolution = mep::MepSolution<f64>;
pub type MultiplicationFamily = polyroots::MultiplicationFamily<f64>;

pub type Matrix32 = linalg::Matrix<f32>;
pub type CommutingFamily32 = rjea::CommutingFamily<f32>;
pub type JointEigenResult32 = rjea::JointEigenResult<f32>;
pub type MepProblem32 = mep::MepProblem<f32>;
pub type MepSolution32 = mep::MepSolution<f32>;
