//! Weak form of the Euler-Reynolds system tested against divergence-free
//! trigonometric fields: `int d_i phi^j u^i u^j + int Delta phi . u = int d_i phi^j R^ij`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{divergence, multiply, Arity, Grid2, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Cos,
    Sin,
}

/// `grad^perp` of `cos(2 pi m.x)` or `sin(2 pi m.x)`.
pub fn test_field(m: [i64; 2], kind: ModeKind) -> Result<SpectralField> {
    let b = m[0].unsigned_abs().max(m[1].unsigned_abs()) as usize;
    let mut phi = SpectralField::zeros(Arity::Vector2, Grid2::for_band(b.max(1)));
    if m == [0, 0] {
        return Ok(phi);
    }
    let psi = match kind {
        ModeKind::Cos => Complex64::new(0.5, 0.0),
        ModeKind::Sin => Complex64::new(0.0, -0.5),
    };
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    phi.add_mode(0, m, -i2pi * m[1] as f64 * psi)?;
    phi.add_mode(1, m, i2pi * m[0] as f64 * psi)?;
    Ok(phi)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakFormRow {
    pub mode: [i64; 2],
    pub kind: ModeKind,
    /// `int d_i phi^j u^i u^j`
    pub nonlinear: f64,
    /// `int Delta phi . u`
    pub viscous: f64,
    /// `int d_i phi^j R^ij`
    pub stress: f64,
    pub residual: f64,
    /// Largest of the three terms in this row.
    pub scale: f64,
    pub pass: bool,
}

/// `int f g` over the stored modes of `f` (real fields).
fn pair(f: &SpectralField, fc: usize, g: &SpectralField, gc: usize, sym: impl Fn([i64; 2]) -> Complex64) -> f64 {
    let v = f.comp(fc);
    let mut s = 0.0;
    for (idx, k1, k2, mult) in f.stored_modes() {
        let a = v[idx];
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        s += mult * (sym([k1, k2]) * a * g.coeff(gc, k1, k2).conj()).re;
    }
    s
}

/// Residual of the weak identity for each test field. Rows pass when the
/// residual is below `tol` times the largest term in the table, since
/// pairings that vanish exactly come out at round-off level.
pub fn weak_form_rows(u: &SpectralField, r: &SpectralField, tests: &[([i64; 2], ModeKind, SpectralField)], tol: f64) -> Result<Vec<WeakFormRow>> {
    let uu = multiply(u, u)?;
    let mut rows = tests.iter().map(|(m, kind, phi)| weak_form_row(u, &uu, r, *m, *kind, phi)).collect::<Result<Vec<_>>>()?;
    let scale = rows.iter().fold(0.0f64, |m, r| m.max(r.scale));
    for row in &mut rows {
        row.pass = row.residual <= tol * scale;
    }
    Ok(rows)
}

fn weak_form_row(u: &SpectralField, uu: &SpectralField, r: &SpectralField, mode: [i64; 2], kind: ModeKind, phi: &SpectralField) -> Result<WeakFormRow> {
    if phi.arity() != Arity::Vector2 {
        return Err(Error::Arity { expected: Arity::Vector2, got: phi.arity() });
    }
    let div = divergence(phi)?.max_abs_coeff();
    let size = phi.max_abs_coeff();
    if div > 1e-12 * size.max(1.0) {
        return Err(Error::NotDivergenceFree(div));
    }
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    let d = |i: usize| move |k: [i64; 2]| i2pi * k[i] as f64;
    let lap = |k: [i64; 2]| Complex64::new(-4.0 * PI * PI * (k[0] * k[0] + k[1] * k[1]) as f64, 0.0);
    // (11, 12, 22) storage: the off-diagonal pairs with d_1 phi^2 + d_2 phi^1
    let tensor = |t: &SpectralField| pair(phi, 0, t, 0, d(0)) + pair(phi, 1, t, 1, d(0)) + pair(phi, 0, t, 1, d(1)) + pair(phi, 1, t, 2, d(1));
    let nonlinear = tensor(uu);
    let stress = tensor(r);
    let viscous = pair(phi, 0, u, 0, lap) + pair(phi, 1, u, 1, lap);
    let residual = (nonlinear + viscous - stress).abs();
    let scale = nonlinear.abs().max(viscous.abs()).max(stress.abs());
    Ok(WeakFormRow { mode, kind, nonlinear, viscous, stress, residual, scale, pass: false })
}

/// Test fields for `m` in `[-m_max, m_max]^2`, one half plane, both kinds.
pub fn default_tests(m_max: i64) -> Result<Vec<([i64; 2], ModeKind, SpectralField)>> {
    let mut out = Vec::new();
    for m2 in 0..=m_max {
        for m1 in -m_max..=m_max {
            if m2 == 0 && m1 <= 0 {
                continue;
            }
            for kind in [ModeKind::Cos, ModeKind::Sin] {
                out.push(([m1, m2], kind, test_field([m1, m2], kind)?));
            }
        }
    }
    Ok(out)
}

pub fn weak_form_residual(u: &SpectralField, r: &SpectralField, m_max: i64, tol: f64) -> Result<Vec<WeakFormRow>> {
    weak_form_rows(u, r, &default_tests(m_max)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nash::state::{base_stress, base_velocity};

    #[test]
    fn base_state_cosine_mode() {
        let (u, r) = (base_velocity(1e-4), base_stress(1e-4));
        let phi = test_field([0, 1], ModeKind::Cos).unwrap();
        let rows = weak_form_rows(&u, &r, &[([0, 1], ModeKind::Cos, phi)], 1e-10).unwrap();
        assert!(rows[0].pass, "{:?}", rows[0]);
        let rows = weak_form_residual(&u, &r, 2, 1e-10).unwrap();
        assert!(rows.iter().all(|x| x.pass));
        // grad^perp cos(2 pi x2) = 2 pi sin(2 pi x2) e1 pairs with u_0
        let s = rows.iter().find(|x| x.mode == [0, 1] && x.kind == ModeKind::Cos).unwrap();
        assert!(s.viscous.abs() > 0.0 && s.stress.abs() > 0.0);
    }

    #[test]
    fn grad_perp_cos_x1() {
        let (u, r) = (base_velocity(1e-4), base_stress(1e-4));
        let rows = weak_form_rows(&u, &r, &[([1, 0], ModeKind::Cos, test_field([1, 0], ModeKind::Cos).unwrap())], 1e-10).unwrap();
        assert!(rows[0].pass);
    }

    #[test]
    fn constant_field_gives_zero() {
        let (u, r) = (base_velocity(1e-4), base_stress(1e-4));
        let mut phi = SpectralField::zeros(Arity::Vector2, Grid2::new(4).unwrap());
        phi.add_mode(0, [0, 0], Complex64::new(1.0, 0.0)).unwrap();
        let row = &weak_form_rows(&u, &r, &[([0, 0], ModeKind::Cos, phi)], 1e-10).unwrap()[0];
        assert_eq!((row.nonlinear, row.viscous, row.stress), (0.0, 0.0, 0.0));
        assert!(row.pass);
    }

    #[test]
    fn scaling_in_amplitude() {
        let rows = |a: f64| weak_form_residual(&base_velocity(a), &base_stress(a), 1, 1e-10).unwrap();
        let (x, y) = (rows(1e-4), rows(2e-4));
        for (p, q) in x.iter().zip(&y) {
            assert!((q.viscous - 2.0 * p.viscous).abs() <= 1e-15);
            assert!((q.nonlinear - 4.0 * p.nonlinear).abs() <= 1e-15);
            assert!(q.pass);
        }
    }

    #[test]
    fn rejects_compressible_field() {
        let mut phi = SpectralField::zeros(Arity::Vector2, Grid2::new(8).unwrap());
        phi.add_mode(0, [1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let (u, r) = (base_velocity(1e-4), base_stress(1e-4));
        assert!(matches!(weak_form_rows(&u, &r, &[([1, 0], ModeKind::Cos, phi)], 1e-10), Err(Error::NotDivergenceFree(_))));
    }

    #[test]
    fn quadrature_oracle() {
        // direct sample sums of d_i phi^j u^i u^j etc. against the spectral pairing
        let (u, r) = (base_velocity(1e-3), base_stress(1e-3));
        let mut u2 = u.resample(Grid2::new(16).unwrap()).unwrap();
        u2.add_mode(1, [2, 0], Complex64::new(3e-4, 1e-4)).unwrap();
        let phi = test_field([2, 1], ModeKind::Sin).unwrap();
        let row = &weak_form_rows(&u2, &r, &[([2, 1], ModeKind::Sin, phi.clone())], 1.0).unwrap()[0];
        let g = Grid2::new(32).unwrap();
        let us = u2.resample(g).unwrap().samples();
        let n = g.n();
        let mut grad = Vec::new();
        for i in 0..2 {
            let mut d = phi.resample(g).unwrap();
            for c in 0..2 {
                let v = d.comp_mut(c);
                for k2 in 0..=n / 2 {
                    for i1 in 0..n {
                        let k = [g.wavenumber(i1), k2 as i64];
                        v[k2 * n + i1] *= Complex64::new(0.0, 2.0 * PI * k[i] as f64);
                    }
                }
            }
            grad.push(d.samples());
        }
        let mut t1 = 0.0;
        for p in 0..n * n {
            for i in 0..2 {
                for j in 0..2 {
                    t1 += grad[i][j][p] * us[i][p] * us[j][p];
                }
            }
        }
        t1 /= (n * n) as f64;
        assert!((t1 - row.nonlinear).abs() < 1e-12 * t1.abs().max(1e-30) + 1e-22, "{t1} {}", row.nonlinear);
    }
}
