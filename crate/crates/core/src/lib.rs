//! Pseudo-spectral engine for the Nash iteration of the stationary 2D
//! Navier-Stokes equations on the unit torus.
//!
//! Fields are Fourier series on `[0,1]^2`; products are dealiased by zero
//! padding, so every operation on trigonometric polynomials is exact up to
//! rounding.

pub mod error;
pub mod fourier;
pub mod geometry;
pub mod harness;
pub mod lattice;
pub mod mikado;
pub mod nash;
pub mod norms;
pub mod parallel;

pub use error::{Error, Result};
pub use fourier::{Arity, Grid2, SpectralField};
