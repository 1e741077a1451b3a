//! 2D real transforms in the half-spectrum layout `[k2][k1]`.
//!
//! Physical samples are row-major `[i1][i2]` with `x = (i1/n, i2/n)`.
//! Spectral data hold `k2 = 0..=n/2` rows of length `n` indexed by the FFT
//! index of `k1`.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

struct Plans {
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static PLANS: LazyLock<Mutex<HashMap<usize, Arc<Plans>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

fn plans(n: usize) -> Arc<Plans> {
    let mut map = PLANS.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut rp = RealFftPlanner::<f64>::new();
            let mut cp = FftPlanner::<f64>::new();
            Arc::new(Plans {
                r2c: rp.plan_fft_forward(n),
                c2r: rp.plan_fft_inverse(n),
                fwd: cp.plan_fft_forward(n),
                inv: cp.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// In-place 2D complex FFT of a row-major `n0 x n1` array (unnormalized).
pub(crate) fn fft2(data: &mut Vec<Complex64>, n0: usize, n1: usize, inverse: bool) {
    let mut cp = FftPlanner::<f64>::new();
    let (p1, p0) = if inverse { (cp.plan_fft_inverse(n1), cp.plan_fft_inverse(n0)) } else { (cp.plan_fft_forward(n1), cp.plan_fft_forward(n0)) };
    if n1 > 1 {
        data.par_chunks_mut(n1).for_each_init(|| vec![Complex64::new(0.0, 0.0); p1.get_inplace_scratch_len()], |s, row| p1.process_with_scratch(row, s));
    }
    if n0 > 1 {
        let mut t = vec![Complex64::new(0.0, 0.0); n0 * n1];
        transpose(data, n0, n1, &mut t);
        t.par_chunks_mut(n0).for_each_init(|| vec![Complex64::new(0.0, 0.0); p0.get_inplace_scratch_len()], |s, row| p0.process_with_scratch(row, s));
        transpose(&t, n1, n0, data);
    }
}

const BLOCK: usize = 32;

/// Blocked transpose of a `rows x cols` matrix into `cols x rows`.
pub(crate) fn transpose(src: &[Complex64], rows: usize, cols: usize, dst: &mut [Complex64]) {
    dst.par_chunks_mut(BLOCK * rows).enumerate().for_each(|(cb, out)| {
        let c0 = cb * BLOCK;
        let c1 = (c0 + BLOCK).min(cols);
        for r0 in (0..rows).step_by(BLOCK) {
            let r1 = (r0 + BLOCK).min(rows);
            for c in c0..c1 {
                let o = &mut out[(c - c0) * rows..(c - c0 + 1) * rows];
                for r in r0..r1 {
                    o[r] = src[r * cols + c];
                }
            }
        }
    });
}

/// Forward transform of real samples; returns normalized coefficients.
pub fn forward_real_2d(phys: &[f64], n: usize) -> Vec<Complex64> {
    assert_eq!(phys.len(), n * n);
    let h = n / 2 + 1;
    let p = plans(n);
    let mut rows = vec![Complex64::new(0.0, 0.0); n * h];
    rows.par_chunks_mut(h).zip(phys.par_chunks(n)).for_each_init(
        || (p.r2c.make_input_vec(), p.r2c.make_scratch_vec()),
        |(inp, scratch), (out, row)| {
            inp.copy_from_slice(row);
            p.r2c.process_with_scratch(inp, out, scratch).expect("r2c length");
        },
    );
    let mut spec = vec![Complex64::new(0.0, 0.0); n * h];
    transpose(&rows, n, h, &mut spec);
    drop(rows);
    let norm = 1.0 / (n as f64 * n as f64);
    spec.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); p.fwd.get_inplace_scratch_len()],
        |scratch, col| {
            p.fwd.process_with_scratch(col, scratch);
            for c in col.iter_mut() {
                *c *= norm;
            }
        },
    );
    spec
}

/// Inverse transform of half-spectrum coefficients to real samples.
pub fn inverse_real_2d(spec: &[Complex64], n: usize) -> Vec<f64> {
    let h = n / 2 + 1;
    assert_eq!(spec.len(), n * h);
    let p = plans(n);
    let mut cols = spec.to_vec();
    cols.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); p.inv.get_inplace_scratch_len()],
        |scratch, col| p.inv.process_with_scratch(col, scratch),
    );
    let mut rows = vec![Complex64::new(0.0, 0.0); n * h];
    transpose(&cols, h, n, &mut rows);
    drop(cols);
    let mut phys = vec![0.0; n * n];
    phys.par_chunks_mut(n).zip(rows.par_chunks_mut(h)).for_each_init(
        || p.c2r.make_scratch_vec(),
        |scratch, (out, row)| {
            row[0].im = 0.0;
            row[h - 1].im = 0.0;
            p.c2r.process_with_scratch(row, out, scratch).expect("c2r length");
        },
    );
    phys
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_coefficients() {
        let n = 16;
        let mut phys = vec![0.0; n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                let x1 = i1 as f64 / n as f64;
                let x2 = i2 as f64 / n as f64;
                phys[i1 * n + i2] = (2.0 * PI * (3.0 * x1 + 2.0 * x2)).cos();
            }
        }
        let spec = forward_real_2d(&phys, n);
        // k = (3, 2): row k2 = 2, column index 3.
        let c = spec[2 * n + 3];
        assert!((c.re - 0.5).abs() < 1e-14 && c.im.abs() < 1e-14);
        // k = (-3, -2) is stored as conj at k = (3, 2); k = (-3, 2) must vanish.
        assert!(spec[2 * n + (n - 3)].norm() < 1e-14);
        let back = inverse_real_2d(&spec, n);
        for (a, b) in back.iter().zip(phys.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn roundtrip_random() {
        let n = 32;
        let phys: Vec<f64> = (0..n * n).map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.5).collect();
        let back = inverse_real_2d(&forward_real_2d(&phys, n), n);
        for (a, b) in back.iter().zip(phys.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
