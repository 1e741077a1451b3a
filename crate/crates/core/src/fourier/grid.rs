use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform `n x n` grid on the unit torus, `n` a power of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid2 {
    n: usize,
}

impl Grid2 {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("grid size {n} is not a power of two >= 2")));
        }
        Ok(Grid2 { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored `k2` columns of the half spectrum.
    pub fn half(&self) -> usize {
        self.n / 2 + 1
    }

    /// True when a field of sup-norm bandwidth `band` is resolved.
    pub fn fits(&self, band: usize) -> bool {
        band < self.n / 2
    }

    /// Smallest grid (at least 4) resolving bandwidth `band`.
    pub fn for_band(band: usize) -> Grid2 {
        Grid2 { n: (2 * band + 2).next_power_of_two().max(4) }
    }

    /// Smallest grid on which the product of fields with bandwidths `bf`
    /// and `bg` is computed without aliasing: `n >= 2 (bf + bg) + 2`.
    pub fn dealias(bf: usize, bg: usize) -> Grid2 {
        Grid2::for_band(bf + bg)
    }

    /// Signed wavenumber of FFT index `idx`; index `n/2` maps to `-n/2`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// FFT index of a signed wavenumber.
    pub fn index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn max(self, other: Grid2) -> Grid2 {
        if self.n >= other.n {
            self
        } else {
            other
        }
    }
}
