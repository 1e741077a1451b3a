use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fft::{forward_real_2d, inverse_real_2d};
use super::grid::Grid2;
use crate::error::{Error, Result};

/// Tensor type of a field. Symmetric tensors store `(11, 12, 22)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arity {
    Scalar,
    Vector2,
    SymTensor2,
}

impl Arity {
    pub fn components(self) -> usize {
        match self {
            Arity::Scalar => 1,
            Arity::Vector2 => 2,
            Arity::SymTensor2 => 3,
        }
    }

    pub fn from_components(c: usize) -> Option<Arity> {
        match c {
            1 => Some(Arity::Scalar),
            2 => Some(Arity::Vector2),
            3 => Some(Arity::SymTensor2),
            _ => None,
        }
    }

    /// Weight of component `c` in Frobenius sums (off-diagonal counted twice).
    pub fn frobenius_weight(self, c: usize) -> f64 {
        if self == Arity::SymTensor2 && c == 1 {
            2.0
        } else {
            1.0
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real field stored by its half spectrum on a grid, with a tracked
/// sup-norm bandwidth: every coefficient with `max(|k1|,|k2|) > band` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    arity: Arity,
    grid: Grid2,
    band: usize,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(arity: Arity, grid: Grid2) -> Self {
        let len = grid.n() * grid.half();
        SpectralField { arity, grid, band: 0, comps: vec![vec![ZERO; len]; arity.components()] }
    }

    /// Build from half-spectrum component data. The bandwidth is computed.
    pub fn from_half_spectrum(arity: Arity, grid: Grid2, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        let len = grid.n() * grid.half();
        if comps.len() != arity.components() || comps.iter().any(|c| c.len() != len) {
            return Err(Error::DimensionMismatch("half-spectrum data does not match arity/grid".into()));
        }
        let mut f = SpectralField { arity, grid, band: grid.n() / 2, comps };
        f.recompute_band();
        Ok(f)
    }

    /// Forward transform of physical samples (row-major `[i1][i2]`).
    pub fn from_samples(arity: Arity, grid: Grid2, samples: &[Vec<f64>]) -> Result<Self> {
        let n = grid.n();
        if samples.len() != arity.components() || samples.iter().any(|s| s.len() != n * n) {
            return Err(Error::DimensionMismatch(format!("expected {} components of {} samples", arity.components(), n * n)));
        }
        let comps = samples.iter().map(|s| forward_real_2d(s, n)).collect();
        Ok(SpectralField { arity, grid, band: n / 2, comps })
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn grid(&self) -> Grid2 {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn comps(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub(crate) fn set_band_unchecked(&mut self, band: usize) {
        self.band = band.min(self.grid.n() / 2);
    }

    /// Storage index of `(k1, k2)` with `k2 >= 0`.
    #[inline]
    pub fn index(&self, k1: i64, k2: i64) -> usize {
        k2 as usize * self.grid.n() + self.grid.index(k1)
    }

    /// Full-plane coefficient, zero outside the grid's wavenumber range.
    pub fn coeff(&self, c: usize, k1: i64, k2: i64) -> Complex64 {
        let h = (self.grid.n() / 2) as i64;
        if k1 < -h || k1 >= h || k2 < -h || k2 >= h {
            return ZERO;
        }
        if k2 >= 0 {
            self.comps[c][self.index(k1, k2)]
        } else if k2 == -h {
            self.comps[c][self.index(-k1, h)].conj()
        } else {
            self.comps[c][self.index(-k1, -k2)].conj()
        }
    }

    /// Add `v e^{2 pi i k.x} + conj(v) e^{-2 pi i k.x}` (only `Re v` at `k = 0`).
    pub fn add_mode(&mut self, c: usize, k: [i64; 2], v: Complex64) -> Result<()> {
        let h = (self.grid.n() / 2) as i64;
        let (k1, k2) = (k[0], k[1]);
        if k1.abs() >= h || k2.abs() >= h {
            return Err(Error::GridOverflow(format!("mode ({k1},{k2}) not resolved on n = {}", self.grid.n())));
        }
        if k1 == 0 && k2 == 0 {
            let i = self.index(0, 0);
            self.comps[c][i] += Complex64::new(v.re, 0.0);
            return Ok(());
        }
        let (p1, p2, pv) = if k2 > 0 || (k2 == 0 && k1 > 0) { (k1, k2, v) } else { (-k1, -k2, v.conj()) };
        let i = self.index(p1, p2);
        self.comps[c][i] += pv;
        if p2 == 0 {
            let j = self.index(-p1, 0);
            self.comps[c][j] += pv.conj();
        }
        self.band = self.band.max(k1.unsigned_abs() as usize).max(k2.unsigned_abs() as usize);
        Ok(())
    }

    /// Iterate stored entries as `(storage index, k1, k2, multiplicity)`;
    /// multiplicity counts the conjugate mirror in full-plane sums.
    pub fn stored_modes(&self) -> impl Iterator<Item = (usize, i64, i64, f64)> + '_ {
        let n = self.grid.n();
        let h = n / 2;
        (0..=h).flat_map(move |k2| {
            (0..n).map(move |i1| {
                let mult = if k2 == 0 || k2 == h { 1.0 } else { 2.0 };
                (k2 * n + i1, self.grid.wavenumber(i1), k2 as i64, mult)
            })
        })
    }

    /// Zero every coefficient beyond the tracked bandwidth.
    pub fn truncate_to_band(&mut self) {
        let b = self.band as i64;
        let n = self.grid.n();
        let grid = self.grid;
        for comp in self.comps.iter_mut() {
            comp.par_chunks_mut(n).enumerate().for_each(|(k2, row)| {
                if k2 as i64 > b {
                    row.iter_mut().for_each(|c| *c = ZERO);
                } else {
                    for (i1, c) in row.iter_mut().enumerate() {
                        if grid.wavenumber(i1).abs() > b {
                            *c = ZERO;
                        }
                    }
                }
            });
        }
    }

    /// Restrict to bandwidth `band` (zeroing higher modes).
    pub fn with_band(mut self, band: usize) -> Self {
        if band < self.band {
            self.band = band;
            self.truncate_to_band();
        }
        self
    }

    /// Recompute the bandwidth from the nonzero coefficients.
    pub fn recompute_band(&mut self) {
        let n = self.grid.n();
        let mut b = 0usize;
        for comp in &self.comps {
            for (k2, row) in comp.chunks(n).enumerate() {
                for (i1, c) in row.iter().enumerate() {
                    if *c != ZERO {
                        b = b.max(k2).max(self.grid.wavenumber(i1).unsigned_abs() as usize);
                    }
                }
            }
        }
        self.band = b;
    }

    /// Same field on another grid; fails if the bandwidth is not resolved.
    pub fn resample(&self, grid: Grid2) -> Result<SpectralField> {
        if grid == self.grid {
            return Ok(self.clone());
        }
        if !grid.fits(self.band) {
            return Err(Error::GridOverflow(format!("bandwidth {} does not fit grid {}", self.band, grid.n())));
        }
        let mut out = SpectralField::zeros(self.arity, grid);
        out.band = self.band;
        let b = self.band as i64;
        for (c, comp) in self.comps.iter().enumerate() {
            for k2 in 0..=b {
                for k1 in -b..=b {
                    let i = out.index(k1, k2);
                    out.comps[c][i] = comp[self.index(k1, k2)];
                }
            }
        }
        Ok(out)
    }

    /// Resample to the smallest grid that resolves the bandwidth.
    pub fn compact(&self) -> SpectralField {
        let g = Grid2::for_band(self.band);
        if g.n() < self.grid.n() {
            self.resample(g).expect("compact grid fits band")
        } else {
            self.clone()
        }
    }

    /// Physical samples on the field's own grid.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| inverse_real_2d(c, self.grid.n())).collect()
    }

    /// Physical samples on `grid`: zero padding when finer, truncation when
    /// the bandwidth fits, subsampling of the own samples otherwise.
    pub fn samples_on(&self, grid: Grid2) -> Vec<Vec<f64>> {
        if grid.n() >= self.grid.n() || grid.fits(self.band) {
            return self.resample(grid).expect("resample checked").samples();
        }
        let stride = self.grid.n() / grid.n();
        let n = self.grid.n();
        let m = grid.n();
        self.samples()
            .into_iter()
            .map(|s| {
                let mut out = vec![0.0; m * m];
                for i1 in 0..m {
                    for i2 in 0..m {
                        out[i1 * m + i2] = s[i1 * stride * n + i2 * stride];
                    }
                }
                out
            })
            .collect()
    }

    /// Extract one component as a scalar field.
    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField { arity: Arity::Scalar, grid: self.grid, band: self.band, comps: vec![self.comps[c].clone()] }
    }

    /// Assemble scalar fields into a field of the given arity on a common grid.
    pub fn from_components(arity: Arity, parts: &[SpectralField]) -> Result<SpectralField> {
        if parts.len() != arity.components() {
            return Err(Error::DimensionMismatch("component count".into()));
        }
        let grid = parts.iter().fold(parts[0].grid, |g, p| g.max(p.grid));
        let mut comps = Vec::with_capacity(parts.len());
        let mut band = 0;
        for p in parts {
            if p.arity != Arity::Scalar {
                return Err(Error::Arity { expected: Arity::Scalar, got: p.arity });
            }
            band = band.max(p.band);
            comps.push(p.resample(grid)?.comps.remove(0));
        }
        Ok(SpectralField { arity, grid, band, comps })
    }

    pub fn mean(&self, c: usize) -> f64 {
        self.comps[c][0].re
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter()).fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|z| *z == ZERO))
    }

    /// Map every stored coefficient through `f(c, k1, k2, value)`.
    pub(crate) fn map_modes<F>(&self, f: F) -> SpectralField
    where
        F: Fn(usize, i64, i64, Complex64) -> Complex64 + Sync,
    {
        let n = self.grid.n();
        let grid = self.grid;
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(c, comp)| {
                let mut out = comp.clone();
                out.par_chunks_mut(n).enumerate().for_each(|(k2, row)| {
                    for (i1, z) in row.iter_mut().enumerate() {
                        *z = f(c, grid.wavenumber(i1), k2 as i64, *z);
                    }
                });
                out
            })
            .collect();
        SpectralField { arity: self.arity, grid: self.grid, band: self.band, comps }
    }

    pub(crate) fn comps_mut(&mut self) -> &mut Vec<Vec<Complex64>> {
        &mut self.comps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn add_mode_sin() {
        let g = Grid2::new(8).unwrap();
        let mut f = SpectralField::zeros(Arity::Scalar, g);
        f.add_mode(0, [0, 1], Complex64::new(0.0, -0.5)).unwrap();
        assert_eq!(f.band(), 1);
        assert_eq!(f.coeff(0, 0, -1), Complex64::new(0.0, 0.5));
        let s = f.samples();
        for i2 in 0..8 {
            assert!((s[0][3 * 8 + i2] - (2.0 * PI * i2 as f64 / 8.0).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn add_mode_on_k2_zero_line() {
        let g = Grid2::new(8).unwrap();
        let mut f = SpectralField::zeros(Arity::Scalar, g);
        f.add_mode(0, [-2, 0], Complex64::new(0.25, 0.0)).unwrap();
        assert_eq!(f.coeff(0, 2, 0), Complex64::new(0.25, 0.0));
        assert_eq!(f.coeff(0, -2, 0), Complex64::new(0.25, 0.0));
        let s = f.samples();
        assert!((s[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn resample_and_subsample_agree() {
        let g = Grid2::new(16).unwrap();
        let mut f = SpectralField::zeros(Arity::Scalar, g);
        f.add_mode(0, [3, -5], Complex64::new(0.2, 0.7)).unwrap();
        let fine = f.samples_on(Grid2::new(64).unwrap());
        let own = f.samples();
        for i1 in 0..16 {
            for i2 in 0..16 {
                assert!((fine[0][(4 * i1) * 64 + 4 * i2] - own[0][i1 * 16 + i2]).abs() < 1e-14);
            }
        }
        let coarse = f.samples_on(Grid2::new(8).unwrap());
        for i1 in 0..8 {
            for i2 in 0..8 {
                assert!((coarse[0][i1 * 8 + i2] - own[0][(2 * i1) * 16 + 2 * i2]).abs() < 1e-14);
            }
        }
        assert!(f.resample(Grid2::new(8).unwrap()).is_err());
    }

    #[test]
    fn stored_mode_multiplicities_give_parseval() {
        let g = Grid2::new(16).unwrap();
        let mut f = SpectralField::zeros(Arity::Scalar, g);
        f.add_mode(0, [2, 3], Complex64::new(0.5, 0.0)).unwrap();
        f.add_mode(0, [4, 0], Complex64::new(0.0, 0.5)).unwrap();
        let sum: f64 = f.stored_modes().map(|(i, _, _, m)| m * f.comp(0)[i].norm_sqr()).sum();
        let s = f.samples();
        let l2: f64 = s[0].iter().map(|v| v * v).sum::<f64>() / 256.0;
        assert!((sum - l2).abs() < 1e-15);
        assert!((sum - 1.0).abs() < 1e-15);
    }
}
