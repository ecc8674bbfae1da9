//! Hybrid-spectral free-surface Navier–Stokes solver for nonlinear water
//! waves in a vertical (x–z) plane.
//!
//! The horizontal direction is periodic and discretised with a Fourier basis;
//! the vertical direction is mapped to the fixed interval `σ ∈ [0, 1]` and
//! discretised with Chebyshev Gauss–Lobatto collocation. Each stage of the
//! low-storage Runge–Kutta integrator solves a pressure Poisson problem with
//! GMRES preconditioned by a geometric p-multigrid cycle.

pub mod dynamics;
pub mod error;
pub mod poisson;
pub mod sigma;
pub mod spectral;
pub mod tank;
pub mod time_integration;
pub mod waves;

pub use error::{Error, Result};
