//! Norms of spectral fields: Lebesgue norms by quadrature, homogeneous
//! Sobolev norms from coefficients, Besov norms from dyadic blocks, and
//! paraproduct tables.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{forward_real_2d, shell_project, Arity, CutoffProfile, Grid2, ShellCutoff, SpectralField};
use crate::parallel::{ordered_max, ordered_sum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Lp,
    Sobolev,
    Besov,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEntry {
    pub label: String,
    pub kind: NormKind,
    /// `p` for Lebesgue norms (`"inf"` for the sup norm), `s` otherwise.
    pub param: String,
    pub value: f64,
    /// Quadrature grid (Lebesgue/Besov) or coefficient grid (Sobolev).
    pub grid: usize,
    /// Difference between the two finest quadratures evaluated; zero for
    /// coefficient-exact norms.
    pub error_estimate: f64,
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

/// Largest quadrature grid used for Lebesgue norms.
pub const QUADRATURE_MAX: usize = 4096;

/// Pointwise magnitude `|f(x)|` (Euclidean, or Frobenius with the
/// off-diagonal entry counted twice) on `grid`.
pub fn magnitude_samples(f: &SpectralField, grid: Grid2) -> Vec<f64> {
    let s = f.samples_on(grid);
    match f.arity() {
        Arity::Scalar => s.into_iter().next().unwrap().into_par_iter().map(f64::abs).collect(),
        Arity::Vector2 => (0..s[0].len()).into_par_iter().map(|i| s[0][i].hypot(s[1][i])).collect(),
        Arity::SymTensor2 => {
            (0..s[0].len()).into_par_iter().map(|i| (s[0][i].powi(2) + 2.0 * s[1][i].powi(2) + s[2][i].powi(2)).sqrt()).collect()
        }
    }
}

/// Rectangle-rule value of `||f||_{L^p}` on `grid`.
pub fn lp_value_on(f: &SpectralField, p: f64, grid: Grid2) -> f64 {
    let m = magnitude_samples(f, grid);
    lp_of_samples(&m, p)
}

pub(crate) fn lp_of_samples(m: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return ordered_max(m.len(), 1 << 14, |i| m[i]).max(0.0);
    }
    let s = if p == 2.0 { ordered_sum(m.len(), 1 << 14, |i| m[i] * m[i]) } else { ordered_sum(m.len(), 1 << 14, |i| m[i].powf(p)) };
    (s / m.len() as f64).powf(1.0 / p)
}

fn is_even_integer(p: f64) -> bool {
    p.is_finite() && p >= 2.0 && p.fract() == 0.0 && (p as u64) % 2 == 0
}

/// Quadrature grid for `||f||_{L^p}`: exact for even integer `p` on
/// trigonometric polynomials, otherwise at least 1024 and twice the
/// resolving grid, capped at `QUADRATURE_MAX` unless the field needs more.
pub fn quadrature_grid(band: usize, p: f64) -> Grid2 {
    let resolving = Grid2::for_band(band);
    if is_even_integer(p) {
        let need = (p as usize * band + 1).next_power_of_two().max(4);
        return Grid2::new(need).unwrap().max(resolving);
    }
    let n = (2 * resolving.n()).max(1024).min(QUADRATURE_MAX).max(resolving.n());
    Grid2::new(n).unwrap()
}

pub fn lp_norm(f: &SpectralField, p: f64) -> Result<NormEntry> {
    lp_norm_labeled(f, p, "")
}

pub fn lp_norm_labeled(f: &SpectralField, p: f64, label: &str) -> Result<NormEntry> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("L^p exponent {p} < 1")));
    }
    let g = quadrature_grid(f.band(), p);
    let value = lp_value_on(f, p, g);
    let error_estimate = if is_even_integer(p) {
        0.0
    } else if 2 * g.n() <= QUADRATURE_MAX {
        (lp_value_on(f, p, Grid2::new(2 * g.n())?) - value).abs()
    } else {
        (lp_value_on(f, p, Grid2::new(g.n() / 2)?) - value).abs()
    };
    Ok(NormEntry { label: label.into(), kind: NormKind::Lp, param: fmt_p(p), value, grid: g.n(), error_estimate })
}

/// `sum_{k != 0} |k|^{2s} |fhat(k)|^2` with Frobenius aggregation.
pub fn sobolev_sq(f: &SpectralField, s: f64) -> f64 {
    let n = f.n();
    let h = n / 2;
    let b = f.band().min(h);
    let arity = f.arity();
    let rows: Vec<f64> = (0..=b)
        .into_par_iter()
        .map(|k2| {
            let mult = if k2 == 0 || k2 == h { 1.0 } else { 2.0 };
            let mut acc = 0.0;
            for i1 in 0..n {
                let k1 = f.grid().wavenumber(i1);
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                let mut e = 0.0;
                for (c, comp) in f.comps().iter().enumerate() {
                    e += arity.frobenius_weight(c) * comp[k2 * n + i1].norm_sqr();
                }
                if e != 0.0 {
                    let k = (k1 * k1 + (k2 * k2) as i64) as f64;
                    acc += mult * e * k.powf(s);
                }
            }
            acc
        })
        .collect();
    rows.iter().sum()
}

pub fn sobolev_norm(f: &SpectralField, s: f64) -> NormEntry {
    sobolev_norm_labeled(f, s, "")
}

pub fn sobolev_norm_labeled(f: &SpectralField, s: f64, label: &str) -> NormEntry {
    NormEntry { label: label.into(), kind: NormKind::Sobolev, param: format!("{s}"), value: sobolev_sq(f, s).sqrt(), grid: f.n(), error_estimate: 0.0 }
}

/// Shells `0..=J` whose support meets the field's bandwidth.
pub fn shell_range(band: usize) -> u32 {
    ShellCutoff::last_shell(std::f64::consts::SQRT_2 * band as f64)
}

/// `sup_j 2^{js} ||P_{2^j} f||_{L^inf}` over the shells meeting the bandwidth.
pub fn besov_norm(f: &SpectralField, s: f64) -> Result<NormEntry> {
    let mut best = 0.0f64;
    let mut grid = 0;
    let mut err = 0.0f64;
    for j in 0..=shell_range(f.band()) {
        let pj = shell_project(f, j);
        if pj.is_zero() {
            continue;
        }
        let e = lp_norm(&pj, f64::INFINITY)?;
        let w = 2f64.powf(j as f64 * s);
        if w * e.value > best {
            best = w * e.value;
            err = w * e.error_estimate;
        }
        grid = grid.max(e.grid);
    }
    Ok(NormEntry { label: String::new(), kind: NormKind::Besov, param: format!("{s}"), value: best, grid, error_estimate: err })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormTable {
    pub profile: CutoffProfile,
    pub entries: Vec<NormEntry>,
}

impl NormTable {
    pub fn new() -> Self {
        NormTable { profile: CutoffProfile::default(), entries: Vec::new() }
    }

    pub fn push(&mut self, e: NormEntry) {
        self.entries.push(e);
    }

    /// CSV rows plus a JSON sidecar (`<path>.json`) with the profile.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["label", "kind", "param", "value", "grid", "error_estimate"]).map_err(csv_err)?;
        for e in &self.entries {
            let kind = serde_json::to_value(e.kind)?.as_str().unwrap_or_default().to_string();
            w.write_record([e.label.clone(), kind, e.param.clone(), format!("{:e}", e.value), e.grid.to_string(), format!("{:e}", e.error_estimate)])
                .map_err(csv_err)?;
        }
        w.flush()?;
        std::fs::write(sidecar(path), serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

impl Default for NormTable {
    fn default() -> Self {
        Self::new()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Pairwise dyadic interaction table
/// `cells[j][j'] = ||P_{!=0}(P_{2^j} f (x) P_{2^j'} g)||_{H^s}`.
#[derive(Clone, Debug, Serialize)]
pub struct ParaproductTable {
    pub s: f64,
    pub j_max: u32,
    pub cells: Vec<Vec<f64>>,
    /// `S_J = sum_{j, j' <= J} cells[j][j']`.
    pub partial_sums: Vec<f64>,
    pub grid: usize,
    pub profile: CutoffProfile,
}

impl ParaproductTable {
    pub fn nonzero_cells(&self) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::new();
        for (j, row) in self.cells.iter().enumerate() {
            for (jp, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    out.push((j as u32, jp as u32, *v));
                }
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["j", "jp", "value"]).map_err(csv_err)?;
        for (j, row) in self.cells.iter().enumerate() {
            for (jp, v) in row.iter().enumerate() {
                w.write_record([j.to_string(), jp.to_string(), format!("{v:e}")]).map_err(csv_err)?;
            }
        }
        w.flush()?;
        std::fs::write(sidecar(path), serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

/// Sobolev value of the mean-free part of the product of two sampled
/// scalar components on `grid` (which must dealias the product).
fn product_component_sq(a: &[f64], b: &[f64], grid: Grid2, s: f64) -> Result<f64> {
    let prod: Vec<f64> = a.par_iter().zip(b.par_iter()).map(|(x, y)| x * y).collect();
    let spec = forward_real_2d(&prod, grid.n());
    let mut f = SpectralField::from_half_spectrum(Arity::Scalar, grid, vec![spec])?;
    f.comp_mut(0)[0] = Complex64::new(0.0, 0.0);
    Ok(sobolev_sq(&f, s))
}

/// Paraproduct table of two scalar or two vector fields (vectors use the
/// full, unsymmetrized outer product with Frobenius aggregation).
pub fn paraproduct_table(f: &SpectralField, g: &SpectralField, s: f64, j_max: u32) -> Result<ParaproductTable> {
    if f.arity() != g.arity() || f.arity() == Arity::SymTensor2 {
        return Err(Error::Arity { expected: f.arity(), got: g.arity() });
    }
    let blocks = |h: &SpectralField| -> Vec<Option<SpectralField>> {
        (0..=j_max)
            .map(|j| {
                let p = shell_project(h, j);
                if p.is_zero() {
                    None
                } else {
                    Some(p)
                }
            })
            .collect()
    };
    let fb = blocks(f);
    let gb = blocks(g);
    let bmax = |v: &[Option<SpectralField>]| v.iter().flatten().map(|p| p.band()).max().unwrap_or(0);
    let grid = Grid2::dealias(bmax(&fb), bmax(&gb));
    let samples = |v: &[Option<SpectralField>]| -> Vec<Option<Vec<Vec<f64>>>> { v.iter().map(|p| p.as_ref().map(|p| p.samples_on(grid))).collect() };
    let fs = samples(&fb);
    let gs = samples(&gb);
    let nj = (j_max + 1) as usize;
    let mut cells = vec![vec![0.0; nj]; nj];
    for j in 0..nj {
        for jp in 0..nj {
            if let (Some(a), Some(b)) = (&fs[j], &gs[jp]) {
                let mut sq = 0.0;
                for ca in a {
                    for cb in b {
                        sq += product_component_sq(ca, cb, grid, s)?;
                    }
                }
                cells[j][jp] = sq.sqrt();
            }
        }
    }
    let partial_sums = (0..nj).map(|jj| cells[..=jj].iter().map(|row| row[..=jj].iter().sum::<f64>()).sum()).collect();
    Ok(ParaproductTable { s, j_max, cells, partial_sums, grid: grid.n(), profile: CutoffProfile::default() })
}
