//! The increment `w = grad^perp sum_k (2/(5 pi)) P(a_k) P(rho_k) sin(2 pi c_k.x) / mu`
//! with `mu = lambda^beta` and `c_k = (5/4) mu k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{divergence, lowpass_inclusive, perp_gradient, sub, Arity, Grid2, SpectralField};
use crate::geometry::{amplitude_fields, AmplitudeFields, AmplitudeMap, SymMatrix2};
use crate::mikado::{LineSpectrum, MikadoFamily, DEFAULT_GAP};
use crate::norms::lp_norm;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Radius of the amplitude truncation `P(a_k)`: symbol `chi(2|m|/lambda)`,
/// vanishing for `|m| >= lambda`.
pub fn amplitude_radius(lambda: u64) -> f64 {
    lambda as f64
}

/// Scale of the Mikado truncation: symbol `chi(|m v_k| / lambda^2)`.
pub fn mikado_cutoff(lambda: u64) -> f64 {
    (lambda * lambda) as f64
}

/// `c_k = (5/4) lambda^beta k`.
pub fn centers(lambda: u64, beta: u32) -> Result<[[i64; 2]; 3]> {
    let mu = lambda
        .checked_pow(beta)
        .filter(|m| *m <= i64::MAX as u64 / 8)
        .ok_or_else(|| Error::Parameter(format!("lambda^beta = {lambda}^{beta} overflows")))?;
    if mu % 4 != 0 {
        return Err(Error::NonIntegerWavenumber(format!("(5/4) {mu} k is not an integer vector")));
    }
    let q = (mu / 4) as i64;
    let d = crate::geometry::DirectionSet::standard();
    Ok([0, 1, 2].map(|k| [q * d.dirs[k].k5[0], q * d.dirs[k].k5[1]]))
}

/// Full-plane nonzero coefficients of a scalar field.
pub(crate) fn sparse_modes(f: &SpectralField) -> Vec<([i64; 2], Complex64)> {
    let b = f.band() as i64;
    let mut out = Vec::new();
    for k1 in -b..=b {
        for k2 in -b..=b {
            let z = f.coeff(0, k1, k2);
            if z != ZERO {
                out.push(([k1, k2], z));
            }
        }
    }
    out
}

/// Ingredients shared by the dense and the structured constructions.
#[derive(Clone, Debug)]
pub struct IncrementPlan {
    pub lambda: u64,
    pub beta: u32,
    pub eps: Ratio<i64>,
    pub family: MikadoFamily,
    pub amplitudes: AmplitudeFields,
    /// `P(a_k)`.
    pub truncated: Vec<SpectralField>,
    /// `P(rho_k)` along `v_k`.
    pub mikado: Vec<LineSpectrum>,
    pub centers: [[i64; 2]; 3],
    /// `2 / (5 pi mu)`.
    pub prefactor: f64,
}

impl IncrementPlan {
    pub fn new(r_q: &SpectralField, lambda: u64, beta: u32, eps: Ratio<i64>, grid_max: usize) -> Result<Self> {
        let centers = centers(lambda, beta)?;
        let family = MikadoFamily::build_with_gap(lambda, eps, DEFAULT_GAP)?;
        let eps_f = *eps.numer() as f64 / *eps.denom() as f64;
        let radius = amplitude_radius(lambda);
        let amplitudes = amplitude_fields(r_q, eps_f, radius, grid_max)?;
        let truncated = amplitudes.a.iter().map(|a| lowpass_inclusive(a, radius / 2.0).compact()).collect();
        let mikado = (0..3).map(|k| family.line_spectrum(k, Some(mikado_cutoff(lambda)))).collect();
        let mu = (lambda as f64).powi(beta as i32);
        Ok(IncrementPlan { lambda, beta, eps, family, amplitudes, truncated, mikado, centers, prefactor: 2.0 / (5.0 * PI * mu) })
    }

    pub fn eps_f64(&self) -> f64 {
        *self.eps.numer() as f64 / *self.eps.denom() as f64
    }

    /// Nonzero modes `zeta` of `P(a_k) P(rho_k)` with coefficients.
    pub fn product_modes(&self, k: usize) -> Vec<([i64; 2], Complex64)> {
        let v = self.family.wave_vector(k);
        let a = sparse_modes(&self.truncated[k]);
        let mut out = Vec::with_capacity(a.len() * self.mikado[k].len());
        for (za, ca) in &a {
            for &(m, cp) in &self.mikado[k] {
                out.push(([za[0] + m * v[0], za[1] + m * v[1]], ca * cp));
            }
        }
        out
    }

    /// Sup-norm bandwidth of the increment.
    pub fn band(&self) -> usize {
        let mut b = 0i64;
        for k in 0..3 {
            let c = self.centers[k];
            for (z, _) in self.product_modes(k) {
                for s in [-1, 1] {
                    b = b.max((s * c[0] + z[0]).abs()).max((s * c[1] + z[1]).abs());
                }
            }
        }
        b as usize
    }

    /// Smallest and largest `|xi|` over the modes of the increment.
    pub fn radial_extent(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for k in 0..3 {
            let c = self.centers[k];
            for (z, _) in self.product_modes(k) {
                let r = (((c[0] + z[0]) * (c[0] + z[0]) + (c[1] + z[1]) * (c[1] + z[1])) as f64).sqrt();
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        (lo, hi)
    }
}

/// Add a full-plane contribution at `xi` to half-spectrum storage.
#[inline]
fn deposit(buf: &mut [Complex64], n: usize, xi: [i64; 2], v: Complex64) {
    if xi[1] < 0 {
        return;
    }
    buf[xi[1] as usize * n + xi[0].rem_euclid(n as i64) as usize] += v;
}

/// The dense increment and its corrector/principal split.
#[derive(Clone, Debug)]
pub struct Increment {
    pub plan: IncrementPlan,
    pub grid: Grid2,
    pub psi: SpectralField,
    pub w: SpectralField,
    pub w_c: SpectralField,
    pub w_p: SpectralField,
}

pub fn build_increment(r_q: &SpectralField, lambda: u64, beta: u32, eps: Ratio<i64>, grid_max: usize) -> Result<Increment> {
    let plan = IncrementPlan::new(r_q, lambda, beta, eps, grid_max)?;
    let band = plan.band();
    let grid = Grid2::for_band(band);
    if grid.n() > grid_max {
        return Err(Error::GridOverflow(format!("increment bandwidth {band} needs grid {} > {grid_max}", grid.n())));
    }
    let n = grid.n();
    let len = n * grid.half();
    let mut psi = vec![ZERO; len];
    let mut wc = [vec![ZERO; len], vec![ZERO; len]];
    let mut wp = [vec![ZERO; len], vec![ZERO; len]];
    let s = plan.prefactor;
    let half_i = Complex64::new(0.0, 0.5);
    for k in 0..3 {
        let c = plan.centers[k];
        let perp = plan.family.direction(k).perp;
        for (z, phi) in plan.product_modes(k) {
            let grad = [Complex64::new(0.0, -2.0 * PI * z[1] as f64) * phi, Complex64::new(0.0, 2.0 * PI * z[0] as f64) * phi];
            for (sign, sin_c) in [(1i64, -half_i), (-1, half_i)] {
                let xi = [sign * c[0] + z[0], sign * c[1] + z[1]];
                deposit(&mut psi, n, xi, phi * sin_c * s);
                for d in 0..2 {
                    deposit(&mut wc[d], n, xi, grad[d] * sin_c * s);
                    deposit(&mut wp[d], n, xi, phi * 0.5 * perp[d]);
                }
            }
        }
    }
    let psi = SpectralField::from_half_spectrum(Arity::Scalar, grid, vec![psi])?;
    let w = perp_gradient(&psi)?;
    let [wc1, wc2] = wc;
    let [wp1, wp2] = wp;
    let w_c = SpectralField::from_half_spectrum(Arity::Vector2, grid, vec![wc1, wc2])?;
    let w_p = SpectralField::from_half_spectrum(Arity::Vector2, grid, vec![wp1, wp2])?;
    Ok(Increment { plan, grid, psi, w, w_c, w_p })
}

/// Pointwise values of the construction's factors on a uniform grid.
pub struct PointwiseFactors {
    pub n: usize,
    r: Vec<Vec<f64>>,
    at: Vec<Vec<f64>>,
    h: Vec<f64>,
    ptab: Vec<Vec<f64>>,
    cos: Vec<f64>,
    map: AmplitudeMap,
    v: [[i64; 2]; 3],
    c: [[i64; 2]; 3],
    pub perp: [[f64; 2]; 3],
}

/// Factor values at one point for one direction.
#[derive(Clone, Copy, Debug)]
pub struct FactorValues {
    pub a: f64,
    pub a_trunc: f64,
    pub rho: f64,
    pub rho_trunc: f64,
    pub cos: f64,
    pub cos2: f64,
}

impl PointwiseFactors {
    pub fn new(plan: &IncrementPlan, r_q: &SpectralField, grid: Grid2) -> Result<Self> {
        let n = grid.n();
        let ptab = plan.mikado.iter().map(|s| MikadoFamily::line_table(s, n)).collect::<Result<Vec<_>>>()?;
        let at = plan.truncated.iter().map(|a| a.samples_on(grid).remove(0)).collect();
        let cos = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).cos()).collect();
        Ok(PointwiseFactors {
            n,
            r: r_q.samples_on(grid),
            at,
            h: plan.family.profile.tabulate(n),
            ptab,
            cos,
            map: plan.amplitudes.map,
            v: [0, 1, 2].map(|k| plan.family.wave_vector(k)),
            c: plan.centers,
            perp: [0, 1, 2].map(|k| plan.family.direction(k).perp),
        })
    }

    pub fn r_at(&self, idx: usize) -> SymMatrix2 {
        SymMatrix2::new(self.r[0][idx], self.r[1][idx], self.r[2][idx])
    }

    pub fn r_sup(&self) -> f64 {
        self.map.r_sup
    }

    pub fn eps(&self) -> f64 {
        self.map.eps
    }

    pub fn at(&self, i1: usize, i2: usize) -> Result<[FactorValues; 3]> {
        let n = self.n as i64;
        let idx = i1 * self.n + i2;
        let (a, _) = self.map.eval(&self.r_at(idx))?;
        let (x1, x2) = (i1 as i64, i2 as i64);
        Ok([0, 1, 2].map(|k| {
            let ph = (self.v[k][0] * x1 + self.v[k][1] * x2).rem_euclid(n) as usize;
            let th = (self.c[k][0] * x1 + self.c[k][1] * x2).rem_euclid(n) as usize;
            FactorValues {
                a: a[k],
                a_trunc: self.at[k][idx],
                rho: self.h[ph],
                rho_trunc: self.ptab[k][ph],
                cos: self.cos[th],
                cos2: self.cos[(2 * th) % self.n],
            }
        }))
    }
}

/// Samples of `w^(p,1)`, `w^(p,2)`, `w^(p,3)` on `grid`:
/// `w^(p,3) = sum a_k rho_k cos k_perp`, `w^(p,1) = -sum (a_k - P a_k) P rho_k cos k_perp`,
/// `w^(p,2) = -sum a_k (rho_k - P rho_k) cos k_perp`.
pub fn principal_parts(factors: &PointwiseFactors) -> Result<[Vec<Vec<f64>>; 3]> {
    let n = factors.n;
    let rows: Vec<Vec<[f64; 6]>> = (0..n)
        .into_par_iter()
        .map(|i1| {
            (0..n)
                .map(|i2| {
                    let f = factors.at(i1, i2)?;
                    let mut out = [0.0; 6];
                    for (k, fv) in f.iter().enumerate() {
                        let p = factors.perp[k];
                        let s3 = fv.a * fv.rho * fv.cos;
                        let s1 = -(fv.a - fv.a_trunc) * fv.rho_trunc * fv.cos;
                        let s2 = -fv.a * (fv.rho - fv.rho_trunc) * fv.cos;
                        for d in 0..2 {
                            out[d] += s1 * p[d];
                            out[2 + d] += s2 * p[d];
                            out[4 + d] += s3 * p[d];
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let take = |j: usize| -> Vec<Vec<f64>> { (0..2).map(|d| rows.iter().flat_map(|r| r.iter().map(move |v| v[2 * j + d])).collect()).collect() };
    Ok([take(0), take(1), take(2)])
}

#[derive(Clone, Debug, Serialize)]
pub struct IncrementLpRow {
    pub p: String,
    pub corrector: f64,
    /// `||w^(c)||_{L^p} lambda^{beta-1}`.
    pub corrector_scaled: f64,
    pub principal: f64,
    pub principal_predicted: f64,
    pub principal_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IncrementReport {
    pub lambda: u64,
    pub eps: String,
    pub beta: u32,
    pub grid: usize,
    pub band: usize,
    pub centers: [[i64; 2]; 3],
    pub amplitude_grid: usize,
    pub amplitude_aliasing: f64,
    pub amplitude_min_c: f64,
    pub eps_admissible: f64,
    pub r_sup: f64,
    pub div_w_rel: f64,
    pub div_pass: bool,
    pub reassembly_cp_rel: f64,
    pub reassembly_parts_rel: f64,
    pub reassembly_pass: bool,
    pub corrector_linf: f64,
    pub principal_linf: f64,
    pub linf_ratio: f64,
    pub linf_bound: f64,
    pub linf_pass: bool,
    pub lp: Vec<IncrementLpRow>,
}

pub fn increment_report(inc: &Increment, factors: &PointwiseFactors) -> Result<IncrementReport> {
    let plan = &inc.plan;
    let lam = plan.lambda as f64;
    let div = divergence(&inc.w)?;
    let wmax = inc.w.max_abs_coeff();
    let div_scale = 2.0 * PI * inc.w.band().max(1) as f64 * wmax;
    let div_w_rel = if div_scale > 0.0 { div.max_abs_coeff() / div_scale } else { 0.0 };
    let d = sub(&inc.w, &crate::fourier::add(&inc.w_c, &inc.w_p)?)?;
    let reassembly_cp_rel = if wmax > 0.0 { d.max_abs_coeff() / wmax } else { 0.0 };
    let parts = principal_parts(factors)?;
    let wp = inc.w_p.samples_on(Grid2::new(factors.n)?);
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for dd in 0..2 {
        for i in 0..wp[dd].len() {
            let s = parts[0][dd][i] + parts[1][dd][i] + parts[2][dd][i];
            diff = diff.max((wp[dd][i] - s).abs());
            scale = scale.max(wp[dd][i].abs());
        }
    }
    let reassembly_parts_rel = if scale > 0.0 { diff / scale } else { 0.0 };
    let mut lp = Vec::new();
    let (mut c_inf, mut p_inf) = (0.0, 0.0);
    for p in [1.0, 2.0, f64::INFINITY] {
        let c = lp_norm(&inc.w_c, p)?.value;
        let w = lp_norm(&inc.w_p, p)?.value;
        let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
        let predicted = lam.powf((plan.eps_f64() - 1.0) * (inv_p - 0.5));
        if p.is_infinite() {
            c_inf = c;
            p_inf = w;
        }
        lp.push(IncrementLpRow {
            p: if p.is_infinite() { "inf".into() } else { format!("{p}") },
            corrector: c,
            corrector_scaled: c * lam.powi(plan.beta as i32 - 1),
            principal: w,
            principal_predicted: predicted,
            principal_ratio: w / predicted,
        });
    }
    let linf_ratio = c_inf / p_inf;
    let linf_bound = 8.0 * lam.powi(-(plan.beta as i32 - 1));
    Ok(IncrementReport {
        lambda: plan.lambda,
        eps: plan.eps.to_string(),
        beta: plan.beta,
        grid: inc.grid.n(),
        band: inc.w.band(),
        centers: plan.centers,
        amplitude_grid: plan.amplitudes.grid,
        amplitude_aliasing: plan.amplitudes.aliasing,
        amplitude_min_c: plan.amplitudes.min_c,
        eps_admissible: plan.amplitudes.eps_admissible,
        r_sup: plan.amplitudes.map.r_sup,
        div_w_rel,
        div_pass: div_w_rel <= 1e-12,
        reassembly_cp_rel,
        reassembly_parts_rel,
        reassembly_pass: reassembly_cp_rel <= 1e-10 && reassembly_parts_rel <= 1e-10,
        corrector_linf: c_inf,
        principal_linf: p_inf,
        linf_ratio,
        linf_bound,
        linf_pass: linf_ratio <= linf_bound,
        lp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nash::state::base_stress;

    #[test]
    fn centers_are_integer_and_exact() {
        let c = centers(8, 3).unwrap();
        assert_eq!(c, [[640, 0], [384, 512], [384, -512]]);
        let c = centers(4, 3).unwrap();
        assert_eq!(c[0], [80, 0]);
        assert!(centers(2, 1).is_err());
    }

    #[test]
    fn small_increment_structure() {
        // lambda = 4, eps = 1/2: band (5/4) 64 + 16 + 4 fits 256
        let r = base_stress(1e-4);
        let inc = build_increment(&r, 4, 3, Ratio::new(1, 2), 512).unwrap();
        let f = PointwiseFactors::new(&inc.plan, &r, inc.grid).unwrap();
        let rep = increment_report(&inc, &f).unwrap();
        assert!(rep.div_pass, "{}", rep.div_w_rel);
        assert!(rep.reassembly_pass, "{} {}", rep.reassembly_cp_rel, rep.reassembly_parts_rel);
        // the stream function is real: its samples reproduce its coefficients
        let back = SpectralField::from_samples(Arity::Scalar, inc.grid, &inc.psi.samples()).unwrap();
        assert!(sub(&back, &inc.psi).unwrap().max_abs_coeff() < 1e-12 * inc.psi.max_abs_coeff());
    }

    #[test]
    fn radial_extent_of_lambda_8_sits_in_shell_9() {
        let r = base_stress(1e-4);
        let plan = IncrementPlan::new(&r, 8, 3, Ratio::new(1, 3), 4096).unwrap();
        let (lo, hi) = plan.radial_extent();
        assert!(lo >= 512.0 && hi <= 12.0 / 7.0 * 512.0, "{lo} {hi}");
        assert!(plan.band() < 1024);
    }
}
