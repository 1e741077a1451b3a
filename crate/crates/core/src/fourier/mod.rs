//! Fourier representation of fields on the unit torus.
//!
//! Convention: `f(x) = sum_k fhat(k) e^{2 pi i k.x}` with
//! `fhat(k) = int_{[0,1]^2} e^{-2 pi i k.x} f(x) dx`, i.e. the forward DFT
//! divided by `n^2`. Axis 1 is `x1`, axis 2 is `x2`.

mod cutoff;
mod fft;
mod field;
mod grid;
mod ops;
pub mod sf2;

pub use cutoff::{chi, lowpass_multiplier, phi, smooth_step, CutoffProfile, ShellCutoff, PLATEAU_HI, SUPPORT_HI, SUPPORT_LO};
pub use fft::{forward_real_2d, inverse_real_2d};
pub(crate) use fft::fft2;
pub use field::{Arity, SpectralField};
pub use grid::Grid2;
pub use ops::{
    add, axpy, curl, deformation, dilate, divergence, gradient, highpass, laplacian, lowpass, lowpass_inclusive, multiply,
    perp_gradient, project_mean_zero, sample_plane_wave, scale, shell_project, sub, WaveKind,
};
