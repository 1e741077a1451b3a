use serde::Serialize;

use crate::error::Result;
use crate::fourier::{add, axpy, deformation, divergence, laplacian, multiply, sub, SpectralField};

/// `R_{q+1} = R_q + w (x) w + w (x) u + u (x) w - (grad w + grad w^T)`.
pub fn reynolds_update(u: &SpectralField, r: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    let ww = multiply(w, w)?;
    let wu = multiply(w, u)?;
    let out = add(r, &ww)?;
    drop(ww);
    let out = axpy(2.0, &wu, &out)?;
    drop(wu);
    sub(&out, &deformation(w)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// Max coefficient of `div(u (x) u) - Delta u - div R`.
    pub residual: f64,
    /// Largest max coefficient among the three terms.
    pub scale: f64,
    pub relative: f64,
    pub pass: bool,
}

/// Spectral residual of `div(u (x) u) - Delta u + grad p = div R` with constant `p`.
pub fn euler_reynolds_residual(u: &SpectralField, r: &SpectralField, tol: f64) -> Result<ResidualReport> {
    let t1 = divergence(&multiply(u, u)?)?;
    let t2 = laplacian(u);
    let t3 = divergence(r)?;
    let scale = t1.max_abs_coeff().max(t2.max_abs_coeff()).max(t3.max_abs_coeff());
    let res = sub(&sub(&t1, &t2)?, &t3)?;
    let residual = res.max_abs_coeff();
    let relative = if scale > 0.0 { residual / scale } else { 0.0 };
    Ok(ResidualReport { residual, scale, relative, pass: relative <= tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{perp_gradient, Arity, Grid2};
    use crate::nash::state::{base_stress, base_velocity};
    use num_complex::Complex64;

    #[test]
    fn zero_increment_keeps_stress() {
        let u = base_velocity(1e-4);
        let r = base_stress(1e-4);
        let w = SpectralField::zeros(Arity::Vector2, Grid2::new(8).unwrap());
        let r1 = reynolds_update(&u, &r, &w).unwrap();
        assert_eq!(sub(&r1, &r).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn update_preserves_residual_for_generic_divergence_free_w() {
        let u = base_velocity(1e-3);
        let r = base_stress(1e-3);
        let mut psi = SpectralField::zeros(Arity::Scalar, Grid2::new(32).unwrap());
        psi.add_mode(0, [3, 5], Complex64::new(0.01, 0.02)).unwrap();
        psi.add_mode(0, [-7, 2], Complex64::new(-0.03, 0.005)).unwrap();
        psi.add_mode(0, [1, 0], Complex64::new(0.004, 0.0)).unwrap();
        let w = perp_gradient(&psi).unwrap();
        let r1 = reynolds_update(&u, &r, &w).unwrap();
        let u1 = add(&u, &w).unwrap();
        let rep = euler_reynolds_residual(&u1, &r1, 1e-9).unwrap();
        assert!(rep.pass, "{}", rep.relative);
        assert!(rep.relative < 1e-14);
        assert!(euler_reynolds_residual(&u, &r, 1e-9).unwrap().residual < 1e-20);
    }
}
