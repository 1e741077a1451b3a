//! `||R_{q+1}||_{H^-2}` from sparse patches, for frequencies whose dense
//! grids are out of reach.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use super::increment::IncrementPlan;
use crate::error::{Error, Result};
use crate::fourier::SpectralField;
use crate::lattice::{pairing, product, sobolev_sq_of_sum, Pairing, Patch, Planned, SumStats};
use crate::mikado::{admissible_exponent, LineSpectrum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative level below which FFT-computed coefficients are dropped before
/// building patches.
pub const NOISE_FLOOR: f64 = 1e-14;

pub const TENSOR_WEIGHTS: [f64; 3] = [1.0, 2.0, 1.0];

/// Patch of a field after dropping coefficients below `rel_floor` times the peak.
pub fn clean_patch(f: &SpectralField, rel_floor: f64) -> Patch {
    let thr = rel_floor * f.max_abs_coeff();
    let mut g = f.map_modes(|_, _, _, z| if z.norm() <= thr { ZERO } else { z });
    g.recompute_band();
    Patch::from_field(&g)
}

/// Line patch `sum_m c_m e^{2 pi i m v.x}`.
pub fn line_patch(spec: &LineSpectrum, v: [i64; 2]) -> Patch {
    let lo = spec.first().map(|s| s.0).unwrap_or(0);
    let hi = spec.last().map(|s| s.0).unwrap_or(0);
    let mut vals = vec![ZERO; (hi - lo + 1) as usize];
    for &(m, c) in spec {
        vals[(m - lo) as usize] += c;
    }
    Patch::line([lo * v[0], lo * v[1]], v, vec![vals])
}

fn two_pi_i(x: i64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * x as f64)
}

/// `w_k^+` and `w_k^-`, the two modulated halves of each direction's
/// contribution to `w = grad^perp psi`.
pub fn increment_patches(plan: &IncrementPlan) -> Result<Vec<Patch>> {
    let mut out = Vec::with_capacity(6);
    for k in 0..3 {
        let a = clean_patch(&plan.truncated[k], NOISE_FLOOR);
        let p = line_patch(&plan.mikado[k], plan.family.wave_vector(k));
        let phi = product(&a, &p, &[pairing(0, 0, 0, 1.0)], 1)?;
        let c = plan.centers[k];
        for (sign, coef) in [(1i64, Complex64::new(0.0, -0.5)), (-1, Complex64::new(0.0, 0.5))] {
            let psi = phi.shifted([sign * c[0], sign * c[1]]).scaled(coef * plan.prefactor);
            out.push(psi.map(2, |xi, i, o| {
                o[0] = -two_pi_i(xi[1]) * i[0];
                o[1] = two_pi_i(xi[0]) * i[0];
            }));
        }
    }
    Ok(out)
}

/// `-(grad w + grad w^T)` of a vector patch.
pub fn dissipation_patch(w: &Patch) -> Patch {
    w.map(3, |xi, i, o| {
        o[0] = -two_pi_i(xi[0]) * i[0] * 2.0;
        o[1] = -(two_pi_i(xi[1]) * i[0] + two_pi_i(xi[0]) * i[1]);
        o[2] = -two_pi_i(xi[1]) * i[1] * 2.0;
    })
}

/// `a (x) b + b (x) a` in (11, 12, 22) storage.
pub const SYM_PAIR: [Pairing; 4] = [pairing(0, 0, 0, 2.0), pairing(1, 0, 1, 1.0), pairing(1, 1, 0, 1.0), pairing(2, 1, 1, 2.0)];
/// `a (x) a`.
pub const SELF_PAIR: [Pairing; 3] = [pairing(0, 0, 0, 1.0), pairing(1, 0, 1, 1.0), pairing(2, 1, 1, 1.0)];

/// `||R_q + w (x) w + w (x) u + u (x) w - (grad w + grad w^T)||_{H^-2}`.
pub fn structured_norm(plan: &IncrementPlan, u: &SpectralField, r: &SpectralField) -> Result<(f64, SumStats)> {
    let w = increment_patches(plan)?;
    let up = clean_patch(u, NOISE_FLOOR);
    let rp = clean_patch(r, NOISE_FLOOR);
    let mut terms: Vec<Planned> = Vec::new();
    terms.push(Planned { bbox: rp.bbox(), build: Box::new(|| Ok(rp.clone())) });
    for wp in &w {
        terms.push(Planned { bbox: wp.bbox(), build: Box::new(move || Ok(dissipation_patch(wp))) });
    }
    for wp in &w {
        let up = &up;
        terms.push(Planned { bbox: wp.bbox().plus(&up.bbox()), build: Box::new(move || product(wp, up, &SYM_PAIR, 3)) });
    }
    for a in 0..w.len() {
        for b in a..w.len() {
            let (pa, pb) = (&w[a], &w[b]);
            let pairs: &'static [Pairing] = if a == b { &SELF_PAIR } else { &SYM_PAIR };
            terms.push(Planned { bbox: pa.bbox().plus(&pb.bbox()), build: Box::new(move || product(pa, pb, pairs, 3)) });
        }
    }
    let (sq, stats) = sobolev_sq_of_sum(&terms, -2.0, &TENSOR_WEIGHTS)?;
    Ok((sq.sqrt(), stats))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendRow {
    pub lambda: u64,
    pub eps: String,
    pub value: f64,
    pub terms: usize,
    pub clusters: usize,
    pub largest_box: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendReport {
    pub rows: Vec<TrendRow>,
    pub strictly_decreasing: bool,
    /// Dense and structured values at the step's own frequency.
    pub dense_value: Option<f64>,
    pub structured_value: Option<f64>,
    pub cross_check_rel: Option<f64>,
}

/// Concentration exponent used for a sweep frequency: the smallest
/// admissible exponent not below the configured one.
pub fn sweep_exponent(lambda: u64, eps: Ratio<i64>) -> Result<Ratio<i64>> {
    admissible_exponent(lambda, eps).ok_or_else(|| Error::Parameter(format!("no admissible exponent >= {eps} for lambda = {lambda}")))
}

pub fn lambda_trend(u: &SpectralField, r: &SpectralField, sweep: &[u64], beta: u32, eps: Ratio<i64>, grid_max: usize) -> Result<Vec<TrendRow>> {
    sweep
        .iter()
        .map(|&lambda| {
            let e = sweep_exponent(lambda, eps)?;
            let plan = IncrementPlan::new(r, lambda, beta, e, grid_max)?;
            let (value, stats) = structured_norm(&plan, u, r)?;
            Ok(TrendRow { lambda, eps: e.to_string(), value, terms: stats.terms, clusters: stats.clusters, largest_box: stats.largest_box })
        })
        .collect()
}

pub fn strictly_decreasing(rows: &[TrendRow]) -> bool {
    rows.len() >= 2 && rows.windows(2).all(|w| w[1].value < w[0].value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::add;
    use crate::nash::increment::build_increment;
    use crate::nash::reynolds::reynolds_update;
    use crate::nash::state::{base_stress, base_velocity};
    use crate::norms::sobolev_norm;

    #[test]
    fn matches_dense_update_at_small_lambda() {
        let (u, r) = (base_velocity(1e-4), base_stress(1e-4));
        let inc = build_increment(&r, 4, 3, Ratio::new(1, 2), 1024).unwrap();
        let r1 = reynolds_update(&u, &r, &inc.w).unwrap();
        let dense = sobolev_norm(&r1, -2.0).value;
        let (s, stats) = structured_norm(&inc.plan, &u, &r).unwrap();
        assert!((s - dense).abs() < 1e-9 * dense, "{s} {dense}");
        assert_eq!(stats.terms, 1 + 6 + 6 + 21);
        let _ = add(&u, &inc.w).unwrap();
    }

    #[test]
    fn sweep_exponents() {
        let third = Ratio::new(1, 3);
        assert_eq!(sweep_exponent(8, third).unwrap(), Ratio::new(1, 3));
        assert_eq!(sweep_exponent(16, third).unwrap(), Ratio::new(1, 2));
        assert_eq!(sweep_exponent(32, third).unwrap(), Ratio::new(2, 5));
    }
}
