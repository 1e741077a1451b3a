//! Geometric decomposition of symmetric matrices near the identity along
//! the fixed frame `k1 = (1,0)`, `k2 = (3/5, 4/5)`, `k3 = (3/5, -4/5)`:
//! `R = sum_k (1/2) gamma_k(R)^2 k_perp (x) k_perp`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{Arity, Grid2, SpectralField};
use crate::parallel::ordered_max;

/// One frame direction with exact integer representations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Direction {
    pub index: usize,
    pub k: [f64; 2],
    /// `5 k`, an integer vector.
    pub k5: [i64; 2],
    /// `k_perp = (-k_y, k_x)`.
    pub perp: [f64; 2],
    pub perp5: [i64; 2],
    /// Primitive integer vector parallel to `k`.
    pub primitive: [i64; 2],
}

impl Direction {
    fn new(index: usize, k5: [i64; 2]) -> Self {
        let g = gcd(k5[0].abs(), k5[1].abs());
        Direction {
            index,
            k: [k5[0] as f64 / 5.0, k5[1] as f64 / 5.0],
            k5,
            perp: [-k5[1] as f64 / 5.0, k5[0] as f64 / 5.0],
            perp5: [-k5[1], k5[0]],
            primitive: [k5[0] / g, k5[1] / g],
        }
    }

    /// `k_perp (x) k_perp`.
    pub fn frame_tensor(&self) -> SymMatrix2 {
        let p = self.perp;
        SymMatrix2::new(p[0] * p[0], p[0] * p[1], p[1] * p[1])
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionSet {
    pub dirs: [Direction; 3],
}

impl DirectionSet {
    pub fn standard() -> Self {
        DirectionSet { dirs: [Direction::new(0, [5, 0]), Direction::new(1, [3, 4]), Direction::new(2, [3, -4])] }
    }
}

/// Symmetric 2x2 matrix `[[r11, r12], [r12, r22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymMatrix2 {
    pub r11: f64,
    pub r12: f64,
    pub r22: f64,
}

impl SymMatrix2 {
    pub const fn new(r11: f64, r12: f64, r22: f64) -> Self {
        SymMatrix2 { r11, r12, r22 }
    }

    pub const fn identity() -> Self {
        SymMatrix2::new(1.0, 0.0, 1.0)
    }

    pub fn add(&self, o: &SymMatrix2) -> SymMatrix2 {
        SymMatrix2::new(self.r11 + o.r11, self.r12 + o.r12, self.r22 + o.r22)
    }

    pub fn scale(&self, a: f64) -> SymMatrix2 {
        SymMatrix2::new(a * self.r11, a * self.r12, a * self.r22)
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * (self.r11 + self.r22);
        let d = (0.25 * (self.r11 - self.r22).powi(2) + self.r12 * self.r12).sqrt();
        [m - d, m + d]
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        let e = self.eigenvalues();
        e[0].abs().max(e[1].abs())
    }

    pub fn frobenius(&self) -> f64 {
        (self.r11 * self.r11 + 2.0 * self.r12 * self.r12 + self.r22 * self.r22).sqrt()
    }

    pub fn max_abs_diff(&self, o: &SymMatrix2) -> f64 {
        (self.r11 - o.r11).abs().max((self.r12 - o.r12).abs()).max((self.r22 - o.r22).abs())
    }
}

/// Frame coefficients `c_k = gamma_k^2` together with the reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaSolution {
    pub c: [f64; 3],
}

impl GammaSolution {
    pub fn gamma(&self) -> [f64; 3] {
        [self.c[0].sqrt(), self.c[1].sqrt(), self.c[2].sqrt()]
    }

    /// `sum_k (1/2) c_k k_perp (x) k_perp`.
    pub fn reconstruct(&self, dirs: &DirectionSet) -> SymMatrix2 {
        let mut r = SymMatrix2::new(0.0, 0.0, 0.0);
        for (d, c) in dirs.dirs.iter().zip(self.c) {
            r = r.add(&d.frame_tensor().scale(0.5 * c));
        }
        r
    }
}

fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (a0, a1) = ((j + 1) % 3, (j + 2) % 3);
            let (b0, b1) = ((i + 1) % 3, (i + 2) % 3);
            *v = (m[a0][b0] * m[a1][b1] - m[a0][b1] * m[a1][b0]) / det;
        }
    }
    inv
}

fn frame_inverse() -> &'static [[f64; 3]; 3] {
    static INV: OnceLock<[[f64; 3]; 3]> = OnceLock::new();
    INV.get_or_init(|| {
        let dirs = DirectionSet::standard();
        let mut m = [[0.0; 3]; 3];
        for (k, d) in dirs.dirs.iter().enumerate() {
            let t = d.frame_tensor();
            m[0][k] = 0.5 * t.r11;
            m[1][k] = 0.5 * t.r12;
            m[2][k] = 0.5 * t.r22;
        }
        invert3(m)
    })
}

/// Solve `R = sum_k (1/2) c_k k_perp (x) k_perp` for `c`, with no sign check.
pub fn frame_coefficients(r: &SymMatrix2) -> [f64; 3] {
    let inv = frame_inverse();
    let v = [r.r11, r.r12, r.r22];
    let mut c = [0.0; 3];
    for (i, ci) in c.iter_mut().enumerate() {
        *ci = inv[i][0] * v[0] + inv[i][1] * v[1] + inv[i][2] * v[2];
    }
    c
}

/// `gamma_k(R)^2`; fails with `NotPositive` if any coefficient is `<= 0`.
pub fn gamma_squared(r: &SymMatrix2) -> Result<GammaSolution> {
    let c = frame_coefficients(r);
    if c.iter().any(|&x| x <= 0.0) {
        return Err(Error::NotPositive(format!("frame coefficients {c:?} at R = {r:?}")));
    }
    Ok(GammaSolution { c })
}

/// Largest `eps` such that all coefficients stay positive on the operator
/// norm ball `|R - I| <= eps`.
///
/// The coefficients are affine in `R`, so the worst perturbation lies on the
/// extreme points `Q diag(+-1, +-1) Q^T`; the slope is maximized over the
/// rotation angle by dense sampling followed by golden-section refinement.
pub fn admissible_radius() -> f64 {
    static R: OnceLock<f64> = OnceLock::new();
    *R.get_or_init(|| {
        let base = frame_coefficients(&SymMatrix2::identity());
        let drop = |k: usize, th: f64, s: (f64, f64)| -> f64 {
            let (c, sn) = (th.cos(), th.sin());
            let e = SymMatrix2::new(s.0 * c * c + s.1 * sn * sn, (s.0 - s.1) * c * sn, s.0 * sn * sn + s.1 * c * c);
            let id = SymMatrix2::identity();
            base[k] - frame_coefficients(&id.add(&e))[k]
        };
        let mut radius = f64::INFINITY;
        for (k, &b) in base.iter().enumerate() {
            let mut slope = 0.0f64;
            for s in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let samples = 4096;
                let h = std::f64::consts::PI / samples as f64;
                let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
                for i in 0..samples {
                    let th = i as f64 * h;
                    let v = drop(k, th, s);
                    if v > best {
                        best = v;
                        arg = th;
                    }
                }
                let (mut lo, mut hi) = (arg - h, arg + h);
                let g = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..100 {
                    let a = hi - g * (hi - lo);
                    let bb = lo + g * (hi - lo);
                    if drop(k, a, s) > drop(k, bb, s) {
                        hi = bb;
                    } else {
                        lo = a;
                    }
                }
                best = best.max(drop(k, 0.5 * (lo + hi), s));
                slope = slope.max(best);
            }
            if slope > 0.0 {
                radius = radius.min(b / slope);
            }
        }
        radius
    })
}

/// Pointwise amplitude map `a_k = sqrt(eps^{-1} |R|_inf gamma_k^2(I - eps R/|R|_inf))`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AmplitudeMap {
    pub eps: f64,
    pub r_sup: f64,
}

impl AmplitudeMap {
    /// Returns `(a_k, c_k)`; `NotPositive` if the matrix argument leaves the
    /// positive cone.
    pub fn eval(&self, r: &SymMatrix2) -> Result<([f64; 3], [f64; 3])> {
        let m = SymMatrix2::identity().add(&r.scale(-self.eps / self.r_sup));
        let g = gamma_squared(&m)?;
        let s = self.r_sup / self.eps;
        Ok(([(s * g.c[0]).sqrt(), (s * g.c[1]).sqrt(), (s * g.c[2]).sqrt()], g.c))
    }
}

/// Amplitude fields sampled on a grid fine enough that the retained modes
/// (`|m| < retain`) are free of aliasing to the reported level.
#[derive(Clone, Debug)]
pub struct AmplitudeFields {
    pub a: Vec<SpectralField>,
    pub map: AmplitudeMap,
    pub grid: usize,
    /// Max coefficient change over retained modes between `grid/2` and `grid`, relative.
    pub aliasing: f64,
    /// Smallest geometric coefficient over the samples.
    pub min_c: f64,
    pub eps_admissible: f64,
}

pub(crate) fn tensor_sup(samples: &[Vec<f64>]) -> f64 {
    ordered_max(samples[0].len(), 4096, |i| SymMatrix2::new(samples[0][i], samples[1][i], samples[2][i]).op_norm())
}

fn eval_amplitudes(map: &AmplitudeMap, s: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let len = s[0].len();
    let mut out = vec![vec![0.0; len]; 3];
    let mut min_c = f64::INFINITY;
    for i in 0..len {
        let (a, c) = map.eval(&SymMatrix2::new(s[0][i], s[1][i], s[2][i]))?;
        for k in 0..3 {
            out[k][i] = a[k];
        }
        min_c = min_c.min(c[0]).min(c[1]).min(c[2]);
    }
    Ok((out, min_c))
}

/// Build `a_k` from `R_q`. `retain` is the modulus below which coefficients
/// are later used (`2 lambda` for the increment's truncation).
pub fn amplitude_fields(r_q: &SpectralField, eps: f64, retain: f64, grid_max: usize) -> Result<AmplitudeFields> {
    if r_q.arity() != Arity::SymTensor2 {
        return Err(Error::Arity { expected: Arity::SymTensor2, got: r_q.arity() });
    }
    if r_q.is_zero() {
        return Err(Error::ZeroStress);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps_gamma = {eps} outside (0, 1)")));
    }
    let rb = retain.ceil() as usize;
    let mut n = (4 * (2 * r_q.band() + 2)).max(8 * rb).next_power_of_two();
    loop {
        let fine = 2 * n;
        if fine > grid_max.max(4 * (2 * r_q.band() + 2)) {
            return Err(Error::GridOverflow(format!("amplitude grid {fine} exceeds limit {grid_max}")));
        }
        let gf = Grid2::new(fine)?;
        let s = r_q.samples_on(gf);
        let map = AmplitudeMap { eps, r_sup: tensor_sup(&s) };
        let (af, min_c) = eval_amplitudes(&map, &s)?;
        drop(s);
        let ac: Vec<Vec<f64>> = af
            .iter()
            .map(|v| {
                let mut out = vec![0.0; n * n];
                for i1 in 0..n {
                    for i2 in 0..n {
                        out[i1 * n + i2] = v[2 * i1 * fine + 2 * i2];
                    }
                }
                out
            })
            .collect();
        let gc = Grid2::new(n)?;
        let mut a = Vec::with_capacity(3);
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..3 {
            let f = SpectralField::from_samples(Arity::Scalar, gf, &af[k..k + 1])?;
            let c = SpectralField::from_samples(Arity::Scalar, gc, &ac[k..k + 1])?;
            let r = rb as i64;
            for k2 in 0..=r {
                for k1 in -r..=r {
                    if ((k1 * k1 + k2 * k2) as f64).sqrt() < retain {
                        diff = diff.max((f.coeff(0, k1, k2) - c.coeff(0, k1, k2)).norm());
                    }
                }
            }
            scale = scale.max(f.max_abs_coeff());
            a.push(f);
        }
        let aliasing = diff / scale;
        if aliasing <= 1e-13 {
            return Ok(AmplitudeFields { a, map, grid: fine, aliasing, min_c, eps_admissible: admissible_radius() });
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn closed_form(r: &SymMatrix2) -> [f64; 3] {
        [
            2.0 * r.r22 - 9.0 * r.r11 / 8.0,
            25.0 * r.r11 / 16.0 - 25.0 * r.r12 / 12.0,
            25.0 * r.r11 / 16.0 + 25.0 * r.r12 / 12.0,
        ]
    }

    #[test]
    fn identity_coefficients() {
        let g = gamma_squared(&SymMatrix2::identity()).unwrap();
        let want = [7.0 / 8.0, 25.0 / 16.0, 25.0 / 16.0];
        for k in 0..3 {
            assert!((g.c[k] - want[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_closed_form_and_reconstructs() {
        let dirs = DirectionSet::standard();
        for i in 0..200 {
            let t = i as f64 * 0.173;
            let r = SymMatrix2::new(1.0 + 0.2 * t.sin(), 0.15 * (2.0 * t).cos(), 1.0 - 0.1 * (3.0 * t).sin());
            let c = frame_coefficients(&r);
            let cf = closed_form(&r);
            for k in 0..3 {
                assert!((c[k] - cf[k]).abs() < 1e-14);
            }
            let back = GammaSolution { c }.reconstruct(&dirs);
            assert!(back.max_abs_diff(&r) < 1e-14);
        }
    }

    #[test]
    fn boundary_case_is_flagged() {
        let d = DirectionSet::standard();
        let r = d.dirs[0].frame_tensor().scale(0.5);
        let c = frame_coefficients(&r);
        assert!((c[0] - 1.0).abs() < 1e-15 && c[1].abs() < 1e-15 && c[2].abs() < 1e-15);
        assert!(matches!(gamma_squared(&r), Err(Error::NotPositive(_))));
    }

    #[test]
    fn admissible_radius_matches_nuclear_norm_oracle() {
        // c_1 has gradient diag(-9/8, 2) with nuclear norm 25/8; c_2, c_3 have
        // 25/16 diag(1,0) -+ 25/24 offdiag, eigenvalues with nuclear norm 125/48.
        let oracle = (7.0 / 8.0) / (25.0 / 8.0f64);
        let other = (25.0 / 16.0) / (125.0 / 48.0f64);
        assert!(oracle < other);
        assert!((admissible_radius() - oracle).abs() < 1e-10, "{}", admissible_radius());
    }

    #[test]
    fn perpendicular_is_rotation() {
        let d = DirectionSet::standard();
        assert_eq!(d.dirs[1].perp5, [-4, 3]);
        assert_eq!(d.dirs[0].primitive, [1, 0]);
        assert_eq!(d.dirs[2].primitive, [3, -4]);
    }

    #[test]
    fn base_stress_amplitudes() {
        // R_0 = -2 pi A cos(2 pi x2) (e1 (x) e2 + e2 (x) e1)
        let a_amp = 1e-4;
        let g = Grid2::new(8).unwrap();
        let zero = SpectralField::zeros(Arity::Scalar, g);
        let mut r12 = zero.clone();
        r12.add_mode(0, [0, 1], Complex64::new(-std::f64::consts::PI * a_amp, 0.0)).unwrap();
        let r = SpectralField::from_components(Arity::SymTensor2, &[zero.clone(), r12, zero]).unwrap();
        let eps = 1.0 / 3.0;
        let amp = amplitude_fields(&r, eps, 16.0, 4096).unwrap();
        let sup = 2.0 * std::f64::consts::PI * a_amp;
        assert!((amp.map.r_sup - sup).abs() < 1e-18);
        assert!(amp.aliasing < 1e-13);
        // pointwise oracle at x2 = 0: R = -sup offdiag
        let s = amp.a[0].samples();
        let oracle = ((sup / eps) * closed_form(&SymMatrix2::new(1.0, eps, 1.0))[0]).sqrt();
        assert!((s[0][0] - oracle).abs() < 1e-14 * oracle);
        // off-diagonal-only stress: c_1 constant 7/8
        let a1 = &amp.a[0];
        assert!((a1.mean(0) - ((sup / eps) * 7.0 / 8.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_stress_rejected() {
        let g = Grid2::new(8).unwrap();
        let r = SpectralField::zeros(Arity::SymTensor2, g);
        assert!(matches!(amplitude_fields(&r, 0.25, 4.0, 1024), Err(Error::ZeroStress)));
    }
}
