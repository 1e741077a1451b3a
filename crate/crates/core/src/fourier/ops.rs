use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::cutoff::{chi, ShellCutoff};
use super::field::{Arity, SpectralField};
use super::grid::Grid2;
use crate::error::{Error, Result};
use crate::geometry::Direction;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn same_arity(f: &SpectralField, g: &SpectralField) -> Result<()> {
    if f.arity() != g.arity() {
        return Err(Error::Arity { expected: f.arity(), got: g.arity() });
    }
    Ok(())
}

fn expect(f: &SpectralField, a: Arity) -> Result<()> {
    if f.arity() != a {
        return Err(Error::Arity { expected: a, got: f.arity() });
    }
    Ok(())
}

/// `a f + b g`, on the finer of the two grids.
fn combine(a: f64, f: &SpectralField, b: f64, g: &SpectralField) -> Result<SpectralField> {
    same_arity(f, g)?;
    let grid = f.grid().max(g.grid());
    let fr = f.resample(grid)?;
    let gr = g.resample(grid)?;
    let comps = fr
        .comps()
        .iter()
        .zip(gr.comps())
        .map(|(x, y)| x.par_iter().zip(y.par_iter()).map(|(u, v)| *u * a + *v * b).collect())
        .collect();
    SpectralField::from_half_spectrum(f.arity(), grid, comps)
}

pub fn add(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    combine(1.0, f, 1.0, g)
}

pub fn sub(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    combine(1.0, f, -1.0, g)
}

/// `a f + g`.
pub fn axpy(a: f64, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    combine(a, f, 1.0, g)
}

pub fn scale(a: f64, f: &SpectralField) -> SpectralField {
    f.map_modes(|_, _, _, z| z * a)
}

/// Remove the `k = 0` mode.
pub fn project_mean_zero(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    for comp in out.comps_mut().iter_mut() {
        comp[0] = ZERO;
    }
    out
}

fn real_multiplier<F>(f: &SpectralField, band: usize, m: F) -> SpectralField
where
    F: Fn(i64, i64) -> f64 + Sync,
{
    let b = band.min(f.band());
    let bi = b as i64;
    let mut out = f.map_modes(|_, k1, k2, z| if k1.abs() > bi || k2 > bi || z == ZERO { ZERO } else { z * m(k1, k2) });
    out.set_band_unchecked(b);
    out
}

fn largest_below(x: f64) -> usize {
    // largest integer strictly below x (x > 0)
    let c = x.ceil() as usize;
    c.saturating_sub(1)
}

/// Dyadic block `P_{2^j}`: symbol `phi(|k|/2^j)`.
pub fn shell_project(f: &SpectralField, j: u32) -> SpectralField {
    let s = ShellCutoff::new(j);
    real_multiplier(f, largest_below(2.0 * s.scale()), |k1, k2| s.multiplier(k1, k2))
}

fn dyadic(lambda: u64) -> Result<()> {
    if lambda == 0 || !lambda.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("cutoff {lambda} is not a power of two")));
    }
    Ok(())
}

/// `P_{<=lambda}`: symbol `chi(|k|/lambda)` for `k != 0`, mean removed.
pub fn lowpass(f: &SpectralField, lambda: u64) -> Result<SpectralField> {
    dyadic(lambda)?;
    let l = lambda as f64;
    Ok(real_multiplier(f, largest_below(2.0 * l), |k1, k2| {
        if k1 == 0 && k2 == 0 {
            0.0
        } else {
            chi(((k1 * k1 + k2 * k2) as f64).sqrt() / l)
        }
    }))
}

/// `P_{>lambda} = I - P_0 - P_{<=lambda}`.
pub fn highpass(f: &SpectralField, lambda: u64) -> Result<SpectralField> {
    dyadic(lambda)?;
    let l = lambda as f64;
    Ok(real_multiplier(f, f.band(), |k1, k2| {
        if k1 == 0 && k2 == 0 {
            0.0
        } else {
            1.0 - chi(((k1 * k1 + k2 * k2) as f64).sqrt() / l)
        }
    }))
}

/// Mean-inclusive truncation: symbol `chi(|k|/lambda)` at every `k`.
pub fn lowpass_inclusive(f: &SpectralField, lambda: f64) -> SpectralField {
    real_multiplier(f, largest_below(2.0 * lambda), |k1, k2| chi(((k1 * k1 + k2 * k2) as f64).sqrt() / lambda))
}

/// Symbol of `d/dx_j` on stored entries; Nyquist entries map to zero.
fn deriv(grid: Grid2, j: usize, k1: i64, k2: i64) -> Complex64 {
    let h = (grid.n() / 2) as i64;
    if k1 == -h || k2 == h {
        return ZERO;
    }
    let k = if j == 0 { k1 } else { k2 };
    Complex64::new(0.0, 2.0 * PI * k as f64)
}

fn derivative(f: &SpectralField, c: usize, j: usize) -> SpectralField {
    let grid = f.grid();
    let comp = f.component(c);
    comp.map_modes(|_, k1, k2, z| z * deriv(grid, j, k1, k2))
}

/// `grad f` of a scalar field.
pub fn gradient(f: &SpectralField) -> Result<SpectralField> {
    expect(f, Arity::Scalar)?;
    SpectralField::from_components(Arity::Vector2, &[derivative(f, 0, 0), derivative(f, 0, 1)])
}

/// `grad^perp psi = (-d2 psi, d1 psi)`.
pub fn perp_gradient(psi: &SpectralField) -> Result<SpectralField> {
    expect(psi, Arity::Scalar)?;
    SpectralField::from_components(Arity::Vector2, &[scale(-1.0, &derivative(psi, 0, 1)), derivative(psi, 0, 0)])
}

/// Divergence of a vector (to scalar) or symmetric tensor (to vector, row-wise).
pub fn divergence(f: &SpectralField) -> Result<SpectralField> {
    match f.arity() {
        Arity::Vector2 => add(&derivative(f, 0, 0), &derivative(f, 1, 1)),
        Arity::SymTensor2 => {
            let r1 = add(&derivative(f, 0, 0), &derivative(f, 1, 1))?;
            let r2 = add(&derivative(f, 1, 0), &derivative(f, 2, 1))?;
            SpectralField::from_components(Arity::Vector2, &[r1, r2])
        }
        Arity::Scalar => Err(Error::Arity { expected: Arity::Vector2, got: Arity::Scalar }),
    }
}

/// Componentwise Laplacian.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.map_modes(|_, k1, k2, z| z * (-4.0 * PI * PI * (k1 * k1 + k2 * k2) as f64))
}

/// Scalar vorticity `d1 f2 - d2 f1`.
pub fn curl(f: &SpectralField) -> Result<SpectralField> {
    expect(f, Arity::Vector2)?;
    sub(&derivative(f, 1, 0), &derivative(f, 0, 1))
}

/// Symmetric tensor `grad w + grad w^T`.
pub fn deformation(w: &SpectralField) -> Result<SpectralField> {
    expect(w, Arity::Vector2)?;
    let d11 = scale(2.0, &derivative(w, 0, 0));
    let d12 = add(&derivative(w, 0, 1), &derivative(w, 1, 0))?;
    let d22 = scale(2.0, &derivative(w, 1, 1));
    SpectralField::from_components(Arity::SymTensor2, &[d11, d12, d22])
}

/// Dealiased product. Scalars multiply anything; two vectors give the
/// symmetrized outer product `(f1 g1, (f1 g2 + f2 g1)/2, f2 g2)`.
pub fn multiply(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    use Arity::*;
    let out_arity = match (f.arity(), g.arity()) {
        (Scalar, a) | (a, Scalar) => a,
        (Vector2, Vector2) => SymTensor2,
        (a, b) => return Err(Error::Arity { expected: a, got: b }),
    };
    let (f, g) = if g.arity() == Scalar && f.arity() != Scalar { (g, f) } else { (f, g) };
    let band = f.band() + g.band();
    let grid = Grid2::dealias(f.band(), g.band());
    let fs = f.samples_on(grid);
    let gs = g.samples_on(grid);
    let pointwise = |a: &[f64], b: &[f64]| -> Vec<f64> { a.par_iter().zip(b.par_iter()).map(|(x, y)| x * y).collect() };
    let samples: Vec<Vec<f64>> = match (f.arity(), g.arity()) {
        (Scalar, _) => gs.iter().map(|c| pointwise(&fs[0], c)).collect(),
        (Vector2, Vector2) => {
            let c12: Vec<f64> = (0..fs[0].len()).into_par_iter().map(|i| 0.5 * (fs[0][i] * gs[1][i] + fs[1][i] * gs[0][i])).collect();
            vec![pointwise(&fs[0], &gs[0]), c12, pointwise(&fs[1], &gs[1])]
        }
        _ => unreachable!(),
    };
    drop(fs);
    drop(gs);
    let mut out = SpectralField::from_samples(out_arity, grid, &samples)?;
    out.set_band_unchecked(band);
    out.truncate_to_band();
    Ok(out)
}

/// `f(m x)` for a positive integer `m`: coefficient at `k` moves to `m k`.
pub fn dilate(f: &SpectralField, m: u64) -> Result<SpectralField> {
    if m == 0 {
        return Err(Error::InvalidArgument("dilation factor must be positive".into()));
    }
    let mi = m as i64;
    let band = f.band() * m as usize;
    let grid = Grid2::for_band(band);
    let mut out = SpectralField::zeros(f.arity(), grid);
    let b = f.band() as i64;
    for c in 0..f.arity().components() {
        for k2 in 0..=b {
            for k1 in -b..=b {
                let z = f.coeff(c, k1, k2);
                if z != ZERO {
                    let i = out.index(mi * k1, mi * k2);
                    out.comp_mut(c)[i] = z;
                }
            }
        }
    }
    out.set_band_unchecked(band);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveKind {
    Sin,
    Cos,
}

/// `sin` or `cos` of `(5 pi / 2) mu k.x` for a direction `k` of the frame,
/// i.e. wavenumber `mu (5k) / 4`, which must be an integer vector.
pub fn sample_plane_wave(kind: WaveKind, mu: u64, dir: &Direction, grid: Grid2) -> Result<SpectralField> {
    let num = [mu as i64 * dir.k5[0], mu as i64 * dir.k5[1]];
    if num[0] % 4 != 0 || num[1] % 4 != 0 {
        return Err(Error::NonIntegerWavenumber(format!("mu = {mu} times 5k/4 = ({}/4, {}/4)", num[0], num[1])));
    }
    let k = [num[0] / 4, num[1] / 4];
    let mut f = SpectralField::zeros(Arity::Scalar, grid);
    let v = match kind {
        WaveKind::Sin => Complex64::new(0.0, -0.5),
        WaveKind::Cos => Complex64::new(0.5, 0.0),
    };
    f.add_mode(0, k, v)?;
    Ok(f)
}
