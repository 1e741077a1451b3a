//! Decay of `||a(.) V(lambda .)||_{H^-2}` and of its Mikado-weighted version
//! `||alpha(.) beta_lambda(.) V(lambda^beta .)||_{H^-2}` along frequency sweeps.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use super::increment::mikado_cutoff;
use super::structured::line_patch;
use crate::error::{Error, Result};
use crate::fourier::{dilate, multiply, Arity, SpectralField};
use crate::lattice::{pairing, product, sobolev_sq_of_sum, Patch, Planned};
use crate::mikado::{tail_mass, MikadoFamily};
use crate::norms::sobolev_norm;

/// Slack allowed for ripples in a nonincreasing table.
pub const RIPPLE: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub lambda: u64,
    pub value: f64,
    /// Dense grid, or the largest lattice box.
    pub size: usize,
    /// `||beta_lambda||_{L^1}` (Mikado probe only).
    pub beta_l1: Option<f64>,
    /// `||P_{>lambda^2}(W (x) W)||_{L^1}` (Mikado probe only).
    pub beta_tail_l1: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Every value at most `(1 + RIPPLE)` times its predecessor.
    pub nonincreasing: bool,
    pub strictly_decreasing: bool,
    pub final_over_initial: f64,
}

impl ProbeTable {
    fn new(rows: Vec<ProbeRow>) -> Self {
        let nonincreasing = rows.windows(2).all(|w| w[1].value <= (1.0 + RIPPLE) * w[0].value);
        let strictly_decreasing = rows.windows(2).all(|w| w[1].value < w[0].value);
        let final_over_initial = match (rows.first(), rows.last()) {
            (Some(a), Some(b)) if a.value > 0.0 => b.value / a.value,
            _ => 0.0,
        };
        ProbeTable { rows, nonincreasing, strictly_decreasing, final_over_initial }
    }
}

fn scalar(f: &SpectralField, what: &str) -> Result<()> {
    if f.arity() != Arity::Scalar {
        return Err(Error::InvalidArgument(format!("{what} must be a scalar field")));
    }
    Ok(())
}

/// `||a(.) V(lambda .)||_{H^-2}` on dense grids.
pub fn decay_probe_hl(a: &SpectralField, v: &SpectralField, lambdas: &[u64]) -> Result<ProbeTable> {
    scalar(a, "a")?;
    scalar(v, "V")?;
    let rows = lambdas
        .iter()
        .map(|&l| {
            let prod = multiply(a, &dilate(v, l)?)?;
            Ok(ProbeRow { lambda: l, value: sobolev_norm(&prod, -2.0).value, size: prod.n(), beta_l1: None, beta_tail_l1: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeTable::new(rows))
}

/// The weight `beta_lambda` of the Mikado probe.
#[derive(Clone, Copy, Debug)]
pub enum BetaWeight {
    One,
    /// `(P_{<=lambda^2} rho_k)^2` for direction 0 at concentration `eps`.
    Mikado { eps: Ratio<i64> },
}

fn dilated_patch(v: &SpectralField, m: i64) -> Patch {
    let p = Patch::from_field(v);
    let s = |x: [i64; 2]| [x[0] * m, x[1] * m];
    Patch::new(s(p.origin), [s(p.basis[0]), s(p.basis[1])], p.dims, p.comps)
}

/// `||alpha(.) beta_lambda(.) V(lambda^beta .)||_{H^-2}` from lattice patches.
pub fn decay_probe_hhl(alpha: &SpectralField, weight: BetaWeight, v: &SpectralField, lambdas: &[u64], beta: u32) -> Result<ProbeTable> {
    scalar(alpha, "alpha")?;
    scalar(v, "V")?;
    let one = [pairing(0, 0, 0, 1.0)];
    let ap = Patch::from_field(alpha);
    let rows = lambdas
        .iter()
        .map(|&l| {
            let (weighted, beta_l1, beta_tail_l1) = match weight {
                BetaWeight::One => (ap.clone(), None, None),
                BetaWeight::Mikado { eps } => {
                    let fam = MikadoFamily::build(l, eps)?;
                    let spec = fam.line_spectrum(0, Some(mikado_cutoff(l)));
                    // (P rho)^2 >= 0, so its L^1 norm is its mean, sum |c_m|^2
                    let l1: f64 = spec.iter().map(|(_, c)| c.norm_sqr()).sum();
                    let tail = tail_mass(&fam, mikado_cutoff(l)).ok().map(|t| t[0]);
                    let rho = line_patch(&spec, fam.wave_vector(0));
                    let b = product(&rho, &rho, &one, 1)?;
                    (product(&ap, &b, &one, 1)?, Some(l1), tail)
                }
            };
            let scale = l.checked_pow(beta).and_then(|x| i64::try_from(x).ok()).ok_or_else(|| Error::GridOverflow(format!("{l}^{beta} overflows")))?;
            let vp = dilated_patch(v, scale);
            let (w, vp) = (&weighted, &vp);
            let term = [Planned { bbox: w.bbox().plus(&vp.bbox()), build: Box::new(move || product(w, vp, &one, 1)) }];
            let (sq, stats) = sobolev_sq_of_sum(&term, -2.0, &[1.0])?;
            Ok(ProbeRow { lambda: l, value: sq.sqrt(), size: stats.largest_box, beta_l1, beta_tail_l1 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeTable::new(rows))
}

/// `1 + cos(2 pi x1) / 2`.
pub fn probe_amplitude() -> SpectralField {
    let mut a = SpectralField::zeros(Arity::Scalar, crate::fourier::Grid2::for_band(1));
    a.add_mode(0, [0, 0], Complex64::new(1.0, 0.0)).expect("fits");
    a.add_mode(0, [1, 0], Complex64::new(0.25, 0.0)).expect("fits");
    a
}

/// `sin(2 pi x2)`.
pub fn probe_oscillation() -> SpectralField {
    let mut v = SpectralField::zeros(Arity::Scalar, crate::fourier::Grid2::for_band(1));
    v.add_mode(0, [0, 1], Complex64::new(0.0, -0.5)).expect("fits");
    v
}

pub fn constant(c: f64) -> SpectralField {
    let mut f = SpectralField::zeros(Arity::Scalar, crate::fourier::Grid2::for_band(1));
    f.add_mode(0, [0, 0], Complex64::new(c, 0.0)).expect("fits");
    f
}
