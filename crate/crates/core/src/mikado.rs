//! Mikado building blocks `W_k = rho_k k_perp` with `rho_k(x) = H(v_k . x)`.
//!
//! `H` is one 1-periodic profile: a single antisymmetric pulse (the
//! derivative of the standard bump) occupying a fraction `lambda^(eps-1)` of
//! the period, centered in the period and normalized to `mean(H^2) = 1`.
//! `v_k = lambda^eps p_k` with `p_k` the primitive integer vector along `k`,
//! so `div W_k = 0` and `div(W_k (x) W_k) = 0` hold exactly.

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{chi, Arity, Grid2, SpectralField};
use crate::geometry::{Direction, DirectionSet};
use crate::parallel::{ordered_max, ordered_sum};

/// `lambda^eps` if it is an integer (`lambda` a power of two).
pub fn exact_power(lambda: u64, eps: Ratio<i64>) -> Option<u64> {
    if lambda < 2 || !lambda.is_power_of_two() || *eps.numer() < 0 {
        return None;
    }
    let e = lambda.trailing_zeros() as i64;
    let num = e * eps.numer();
    if num % eps.denom() != 0 {
        return None;
    }
    let k = num / eps.denom();
    if k >= 63 {
        return None;
    }
    Some(1u64 << k)
}

/// Smallest exponent `>= eps` with `lambda^exponent` an integer, below 1.
pub fn admissible_exponent(lambda: u64, eps: Ratio<i64>) -> Option<Ratio<i64>> {
    if lambda < 2 || !lambda.is_power_of_two() {
        return None;
    }
    let e = lambda.trailing_zeros() as i64;
    let i = (eps * e).ceil().to_integer().max(1);
    if i >= e {
        None
    } else {
        Some(Ratio::new(i, e))
    }
}

pub fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Derivative of `exp(-1/(s(1-s)))` written in `u = s - 1/2`; odd in `u`.
pub fn bump_derivative(u: f64) -> f64 {
    if u.abs() >= 0.5 {
        return 0.0;
    }
    let q = 0.25 - u * u;
    -2.0 * u * (-1.0 / q).exp() / (q * q)
}

fn int_g_pow(p: f64) -> f64 {
    let n = 1 << 15;
    let h = 1.0 / n as f64;
    ordered_sum(n, 1024, |i| bump_derivative(-0.5 + (i as f64 + 0.5) * h).abs().powf(p)) * h
}

/// Relative level below which profile coefficients are rounding noise.
const COEFF_FLOOR: f64 = 1e-15;
const TAIL_TOL: f64 = 4e-16;

/// Single-pulse profile with its Fourier coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct PulseProfile {
    /// Pulse width as a fraction of the period.
    pub fraction: f64,
    pub alpha: f64,
    /// Size of the sampling used for the coefficients.
    pub quad_n: usize,
    /// `sum |Hhat(m)|^2`, the mean of `H^2`.
    pub mean_square: f64,
    #[serde(skip)]
    coeffs: Vec<Complex64>,
}

impl PulseProfile {
    pub fn new(fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Parameter(format!("pulse fraction {fraction} outside (0, 1]")));
        }
        let alpha = 1.0 / (fraction * int_g_pow(2.0)).sqrt();
        let mut n = ((1024.0 / fraction).ceil() as usize).next_power_of_two();
        loop {
            let mut buf: Vec<Complex64> = (0..n)
                .into_par_iter()
                .map(|i| Complex64::new(alpha * bump_derivative((i as f64 / n as f64 - 0.5) / fraction), 0.0))
                .collect();
            FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
            let inv = 1.0 / n as f64;
            let mut coeffs: Vec<Complex64> = buf[..n / 2].iter().map(|z| Complex64::new(0.0, z.im * inv)).collect();
            coeffs[0] = Complex64::new(0.0, 0.0);
            let peak = coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let tail = coeffs[n / 4..].iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if tail <= TAIL_TOL * peak || n >= 1 << 24 {
                if tail > TAIL_TOL * peak {
                    return Err(Error::GridOverflow("pulse profile not resolved at 2^24 samples".into()));
                }
                let last = coeffs.iter().rposition(|z| z.norm() > COEFF_FLOOR * peak).unwrap_or(0);
                coeffs.truncate(last + 1);
                let mean_square = 2.0 * coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>();
                return Ok(PulseProfile { fraction, alpha, quad_n: n, mean_square, coeffs });
            }
            n *= 2;
        }
    }

    pub fn value(&self, sigma: f64) -> f64 {
        let s = sigma - sigma.floor();
        self.alpha * bump_derivative((s - 0.5) / self.fraction)
    }

    /// Values at `sigma = i/n`.
    pub fn tabulate(&self, n: usize) -> Vec<f64> {
        (0..n).into_par_iter().map(|i| self.alpha * bump_derivative((i as f64 / n as f64 - 0.5) / self.fraction)).collect()
    }

    /// Largest `m` with a retained coefficient.
    pub fn m_max(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        let a = m.unsigned_abs() as usize;
        if a >= self.coeffs.len() {
            return Complex64::new(0.0, 0.0);
        }
        if m >= 0 {
            self.coeffs[a]
        } else {
            self.coeffs[a].conj()
        }
    }

    /// `||H||_{L^p[0,1]}` by rectangle rule resolving the pulse.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let n = ((1 << 14) as f64 / self.fraction).ceil() as usize;
        let n = n.next_power_of_two();
        let t = self.tabulate(n);
        if p.is_infinite() {
            ordered_max(n, 4096, |i| t[i].abs())
        } else {
            (ordered_sum(n, 4096, |i| t[i].abs().powf(p)) / n as f64).powf(1.0 / p)
        }
    }

    /// Fraction of the period where `H != 0` in floating point.
    pub fn support_fraction(&self) -> f64 {
        let n = (((1 << 14) as f64 / self.fraction).ceil() as usize).next_power_of_two();
        let t = self.tabulate(n);
        t.iter().filter(|v| **v != 0.0).count() as f64 / n as f64
    }
}

/// Lowpassed line spectrum: `(m, coefficient)` pairs of `P rho` along `v`.
pub type LineSpectrum = Vec<(i64, Complex64)>;

#[derive(Clone, Debug, Serialize)]
pub struct MikadoFamily {
    pub lambda: u64,
    pub eps: (i64, i64),
    /// `lambda^eps`, the number of pulses per period along each direction.
    pub pulses: u64,
    pub gap: f64,
    pub profile: PulseProfile,
    pub dirs: DirectionSet,
}

pub const DEFAULT_GAP: f64 = 0.25;

impl MikadoFamily {
    pub fn build(lambda: u64, eps: Ratio<i64>) -> Result<Self> {
        Self::build_with_gap(lambda, eps, DEFAULT_GAP)
    }

    pub fn build_with_gap(lambda: u64, eps: Ratio<i64>, gap: f64) -> Result<Self> {
        if eps <= Ratio::from_integer(0) || eps >= Ratio::from_integer(1) {
            return Err(Error::Parameter(format!("eps_gamma = {eps} outside (0, 1)")));
        }
        let pulses = exact_power(lambda, eps)
            .ok_or_else(|| Error::Parameter(format!("lambda^eps_gamma = {lambda}^({eps}) is not an integer")))?;
        let fraction = pulses as f64 / lambda as f64;
        if 1.0 - fraction < gap {
            return Err(Error::PulseOverlap(format!("pulse fraction {fraction} leaves less than gap {gap} of the slot")));
        }
        Ok(MikadoFamily { lambda, eps: (*eps.numer(), *eps.denom()), pulses, gap, profile: PulseProfile::new(fraction)?, dirs: DirectionSet::standard() })
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps.0 as f64 / self.eps.1 as f64
    }

    pub fn direction(&self, k: usize) -> &Direction {
        &self.dirs.dirs[k]
    }

    /// `v_k = lambda^eps p_k`.
    pub fn wave_vector(&self, k: usize) -> [i64; 2] {
        let p = self.dirs.dirs[k].primitive;
        [self.pulses as i64 * p[0], self.pulses as i64 * p[1]]
    }

    pub fn wave_norm(&self, k: usize) -> f64 {
        let v = self.wave_vector(k);
        ((v[0] * v[0] + v[1] * v[1]) as f64).sqrt()
    }

    pub fn rho_at(&self, k: usize, x: [f64; 2]) -> f64 {
        let v = self.wave_vector(k);
        self.profile.value(v[0] as f64 * x[0] + v[1] as f64 * x[1])
    }

    /// Index `r` with `v_k . (i1, i2)/n = r/n mod 1`.
    #[inline]
    pub fn phase_index(&self, k: usize, i1: usize, i2: usize, n: usize) -> usize {
        let v = self.wave_vector(k);
        (v[0] * i1 as i64 + v[1] * i2 as i64).rem_euclid(n as i64) as usize
    }

    /// Coefficients of `P rho_k` with symbol `chi(|m v_k| / cutoff)`
    /// (`None`: the full profile).
    pub fn line_spectrum(&self, k: usize, cutoff: Option<f64>) -> LineSpectrum {
        let vn = self.wave_norm(k);
        let mut out = Vec::new();
        let mm = self.profile.m_max();
        for m in -mm..=mm {
            let c = self.profile.coeff(m);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let s = match cutoff {
                Some(l) => chi(m.unsigned_abs() as f64 * vn / l),
                None => 1.0,
            };
            if s > 0.0 {
                out.push((m, c * s));
            }
        }
        out
    }

    /// Values of a line spectrum at `sigma = i/n`.
    pub fn line_table(spec: &LineSpectrum, n: usize) -> Result<Vec<f64>> {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for &(m, c) in spec {
            if m.unsigned_abs() as usize >= n / 2 {
                return Err(Error::GridOverflow(format!("line mode {m} not resolved by {n} samples")));
            }
            buf[m.rem_euclid(n as i64) as usize] += c;
        }
        FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut buf);
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// `rho_k` (optionally lowpassed) as a dense scalar field.
    pub fn rho_field(&self, k: usize, cutoff: Option<f64>, grid: Grid2) -> Result<SpectralField> {
        let v = self.wave_vector(k);
        let mut f = SpectralField::zeros(Arity::Scalar, grid);
        for (m, c) in self.line_spectrum(k, cutoff) {
            if m > 0 {
                f.add_mode(0, [m * v[0], m * v[1]], c)?;
            }
        }
        Ok(f)
    }

    /// `W_k = rho_k k_perp` as a dense vector field.
    pub fn w_field(&self, k: usize, cutoff: Option<f64>, grid: Grid2) -> Result<SpectralField> {
        let rho = self.rho_field(k, cutoff, grid)?;
        let p = self.dirs.dirs[k].perp;
        SpectralField::from_components(Arity::Vector2, &[crate::fourier::scale(p[0], &rho), crate::fourier::scale(p[1], &rho)])
    }

    /// Per-direction checks of the building-block properties.
    pub fn verify(&self) -> MikadoCheck {
        let mut dirs = Vec::new();
        for k in 0..3 {
            let d = &self.dirs.dirs[k];
            let v = self.wave_vector(k);
            // divergence symbol (m v) . k_perp in exact integers (times 5)
            let dot = v[0] * d.perp5[0] + v[1] * d.perp5[1];
            let div_max = self.line_spectrum(k, None).iter().fold(0.0f64, |a, &(m, c)| a.max((m * dot) as f64 * c.norm()));
            dirs.push(MikadoDirectionCheck {
                direction: k,
                wave_vector: v,
                div_w_max: div_max,
                div_ww_max: div_max,
                mean_w: self.profile.coeff(0).norm(),
                mean_ww_minus_one: self.profile.mean_square - 1.0,
                periodic: v[0] % self.pulses as i64 == 0 && v[1] % self.pulses as i64 == 0,
            });
        }
        let predicted = self.profile.fraction;
        let measured = self.profile.support_fraction();
        MikadoCheck {
            lambda: self.lambda,
            eps: self.eps,
            directions: dirs,
            support_fraction: measured,
            support_predicted: predicted,
            support_within_10pct: (measured / predicted - 1.0).abs() <= 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MikadoDirectionCheck {
    pub direction: usize,
    pub wave_vector: [i64; 2],
    pub div_w_max: f64,
    pub div_ww_max: f64,
    pub mean_w: f64,
    pub mean_ww_minus_one: f64,
    pub periodic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MikadoCheck {
    pub lambda: u64,
    pub eps: (i64, i64),
    pub directions: Vec<MikadoDirectionCheck>,
    pub support_fraction: f64,
    pub support_predicted: f64,
    pub support_within_10pct: bool,
}

impl MikadoCheck {
    pub fn pass(&self, tol: f64) -> bool {
        self.support_within_10pct
            && self.directions.iter().all(|d| d.div_w_max == 0.0 && d.div_ww_max == 0.0 && d.mean_w == 0.0 && d.mean_ww_minus_one.abs() <= tol && d.periodic)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LpScalingRow {
    pub lambda: u64,
    pub eps: (i64, i64),
    pub p: String,
    pub measured: f64,
    pub predicted: f64,
    pub ratio: f64,
}

/// Measured `||W_k||_{L^p}` against `lambda^{(eps-1)(1/p - 1/2)}`.
///
/// `|W_k| = |rho_k|` and `x -> v_k . x mod 1` pushes Lebesgue measure on the
/// torus to Lebesgue measure on `[0,1]`, so the norm is the 1D norm of `H`.
pub fn lp_scaling_check(family: &MikadoFamily, ps: &[f64]) -> Vec<LpScalingRow> {
    let l = family.lambda as f64;
    let e = family.eps_f64();
    ps.iter()
        .map(|&p| {
            let measured = family.profile.lp_norm(p);
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            let predicted = l.powf((e - 1.0) * (inv_p - 0.5));
            LpScalingRow {
                lambda: family.lambda,
                eps: family.eps,
                p: if p.is_infinite() { "inf".into() } else { format!("{p}") },
                measured,
                predicted,
                ratio: measured / predicted,
            }
        })
        .collect()
}

/// `||W_k (x) W_k'||_{L^1}` for `k != k'`, equal to `||H||_{L^1}^2` because
/// `x -> (v_k . x, v_k' . x)` pushes Lebesgue measure to Lebesgue measure.
pub fn cross_l1(family: &MikadoFamily) -> f64 {
    family.profile.lp_norm(1.0).powi(2)
}

/// `||P_{>cutoff}(W_k (x) W_k)||_{L^1}` per direction.
pub fn tail_mass(family: &MikadoFamily, cutoff: f64) -> Result<[f64; 3]> {
    let n = 2 * family.profile.quad_n;
    let h = family.profile.tabulate(n);
    let mut buf: Vec<Complex64> = h.iter().map(|v| Complex64::new(v * v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    let peak = buf.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let edge = buf[n / 4..3 * n / 4].iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if edge > 1e-15 * peak {
        return Err(Error::GridOverflow(format!("insufficient grid for the squared profile ({edge:e})")));
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let vn = family.wave_norm(k);
        let mut b: Vec<Complex64> = buf
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
                if m == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    *z * (1.0 - chi(m.unsigned_abs() as f64 * vn / cutoff))
                }
            })
            .collect();
        planner.plan_fft_inverse(n).process(&mut b);
        *o = ordered_sum(n, 4096, |i| b[i].re.abs()) / n as f64;
    }
    Ok(out)
}
