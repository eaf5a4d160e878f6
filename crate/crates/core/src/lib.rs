//! Logarithmic and small-order fractional Laplacians on bounded intervals.
//!
//! Piecewise-constant Galerkin discretization, principal eigenpairs,
//! least-energy solutions on the Nehari manifold and machine checks of the
//! functional inequalities that connect the two operators as s → 0.

pub mod assembly;
pub mod asymptotics;
pub mod error;
pub mod grid;
pub mod numerics;
pub mod orlicz;
pub mod solvers;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
