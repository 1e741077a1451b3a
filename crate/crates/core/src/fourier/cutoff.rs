//! Littlewood-Paley cutoff profiles.
//!
//! `chi` equals 1 on `[0, 12/7]`, vanishes on `[2, inf)` and is built from the
//! `exp(-1/t)` smooth step; `phi(r) = chi(r) - chi(2r)` is supported in
//! `[6/7, 2]` and the dyadic dilates sum to 1 away from the origin.

use serde::Serialize;

pub const SUPPORT_LO: f64 = 6.0 / 7.0;
pub const PLATEAU_HI: f64 = 12.0 / 7.0;
pub const SUPPORT_HI: f64 = 2.0;

fn e(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `C^inf` step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = e(t);
        a / (a + e(1.0 - t))
    }
}

pub fn chi(r: f64) -> f64 {
    smooth_step((SUPPORT_HI - r) / (SUPPORT_HI - PLATEAU_HI))
}

pub fn phi(r: f64) -> f64 {
    chi(r) - chi(2.0 * r)
}

/// Literal lowpass symbol `chi(|k|/lambda)` with the mean removed.
pub fn lowpass_multiplier(k1: i64, k2: i64, lambda: f64) -> f64 {
    if k1 == 0 && k2 == 0 {
        0.0
    } else {
        chi(((k1 * k1 + k2 * k2) as f64).sqrt() / lambda)
    }
}

/// Dyadic shell `j`: symbol `phi(|k| / 2^j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShellCutoff {
    pub j: u32,
}

impl ShellCutoff {
    pub fn new(j: u32) -> Self {
        ShellCutoff { j }
    }

    pub fn scale(&self) -> f64 {
        (1u64 << self.j) as f64
    }

    pub fn multiplier(&self, k1: i64, k2: i64) -> f64 {
        if k1 == 0 && k2 == 0 {
            return 0.0;
        }
        phi(((k1 * k1 + k2 * k2) as f64).sqrt() / self.scale())
    }

    /// True when every wavenumber of modulus in `[lo, hi]` lies in the
    /// plateau where the symbol is exactly 1.
    pub fn plateau_contains(&self, lo: f64, hi: f64) -> bool {
        lo >= self.scale() && hi <= PLATEAU_HI * self.scale()
    }

    /// Largest shell index whose support meets `|k| <= kmax`.
    pub fn last_shell(kmax: f64) -> u32 {
        let mut j = 0;
        while SUPPORT_LO * ((1u64 << (j + 1)) as f64) < kmax {
            j += 1;
        }
        j
    }
}

/// Serializable description of the profile, stored with norm tables.
#[derive(Clone, Debug, Serialize)]
pub struct CutoffProfile {
    pub kind: &'static str,
    pub support: [f64; 2],
    pub plateau: [f64; 2],
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile { kind: "exp(-1/t) smooth step, phi(r) = chi(r) - chi(2r)", support: [SUPPORT_LO, SUPPORT_HI], plateau: [1.0, PLATEAU_HI] }
    }
}
