//! Velocity-averaging regularity laboratory.
//!
//! Symbols of kinetic formulations, degeneracy fits, averaging-lemma exponents,
//! Littlewood-Paley regularity estimators, entropy solvers and experiment drivers.

pub mod degeneracy;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod lp;
pub mod regression;
pub mod solvers;
pub mod symbol;

pub use error::{Error, Result};
