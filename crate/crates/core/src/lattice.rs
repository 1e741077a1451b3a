//! Sparse Fourier data on affine sub-lattices of `Z^2`.
//!
//! A [`Patch`] stores coefficients at the modes `origin + i b0 + j b1` for
//! `i < dims[0]`, `j < dims[1]`. Products of patches are convolutions in
//! index space on a common lattice, computed with FFTs; sums of many patches
//! are reduced cluster by cluster, so the total never has to be stored on a
//! dense grid of the full bandwidth.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::SpectralField;
use crate::geometry::gcd;
use crate::parallel::ordered_sum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest dense box (entries per component) used when merging a cluster.
pub const MAX_BOX: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BBox {
    pub lo: [i64; 2],
    pub hi: [i64; 2],
}

impl BBox {
    pub fn overlaps(&self, o: &BBox) -> bool {
        self.lo[0] <= o.hi[0] && o.lo[0] <= self.hi[0] && self.lo[1] <= o.hi[1] && o.lo[1] <= self.hi[1]
    }

    /// Minkowski sum.
    pub fn plus(&self, o: &BBox) -> BBox {
        BBox { lo: [self.lo[0] + o.lo[0], self.lo[1] + o.lo[1]], hi: [self.hi[0] + o.hi[0], self.hi[1] + o.hi[1]] }
    }

    pub fn shifted(&self, c: [i64; 2]) -> BBox {
        BBox { lo: [self.lo[0] + c[0], self.lo[1] + c[1]], hi: [self.hi[0] + c[0], self.hi[1] + c[1]] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub origin: [i64; 2],
    pub basis: [[i64; 2]; 2],
    pub dims: [usize; 2],
    pub comps: Vec<Vec<Complex64>>,
}

impl Patch {
    pub fn new(origin: [i64; 2], basis: [[i64; 2]; 2], dims: [usize; 2], comps: Vec<Vec<Complex64>>) -> Self {
        assert!(comps.iter().all(|c| c.len() == dims[0] * dims[1]));
        Patch { origin, basis, dims, comps }
    }

    /// One-dimensional patch `origin + i dir`.
    pub fn line(origin: [i64; 2], dir: [i64; 2], comps: Vec<Vec<Complex64>>) -> Self {
        let n = comps[0].len();
        Patch::new(origin, [dir, [0, 0]], [n, 1], comps)
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn is_line(&self) -> bool {
        self.dims[1] == 1
    }

    #[inline]
    pub fn mode(&self, i: usize, j: usize) -> [i64; 2] {
        let (i, j) = (i as i64, j as i64);
        [self.origin[0] + i * self.basis[0][0] + j * self.basis[1][0], self.origin[1] + i * self.basis[0][1] + j * self.basis[1][1]]
    }

    pub fn bbox(&self) -> BBox {
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for i in [0, self.dims[0] - 1] {
            for j in [0, self.dims[1] - 1] {
                let m = self.mode(i, j);
                for a in 0..2 {
                    lo[a] = lo[a].min(m[a]);
                    hi[a] = hi[a].max(m[a]);
                }
            }
        }
        BBox { lo, hi }
    }

    pub fn shifted(&self, c: [i64; 2]) -> Patch {
        Patch { origin: [self.origin[0] + c[0], self.origin[1] + c[1]], ..self.clone() }
    }

    pub fn scaled(&self, a: Complex64) -> Patch {
        Patch { comps: self.comps.iter().map(|c| c.iter().map(|z| z * a).collect()).collect(), ..self.clone() }
    }

    /// Pointwise map over modes: `f(xi, input comps, output comps)`.
    pub fn map<F>(&self, ncomp_out: usize, f: F) -> Patch
    where
        F: Fn([i64; 2], &[Complex64], &mut [Complex64]) + Sync,
    {
        let len = self.dims[0] * self.dims[1];
        let vals: Vec<Vec<Complex64>> = (0..len)
            .into_par_iter()
            .map(|idx| {
                let input: Vec<Complex64> = self.comps.iter().map(|c| c[idx]).collect();
                let mut out = vec![ZERO; ncomp_out];
                f(self.mode(idx / self.dims[1], idx % self.dims[1]), &input, &mut out);
                out
            })
            .collect();
        let comps = (0..ncomp_out).map(|c| vals.iter().map(|v| v[c]).collect()).collect();
        Patch { origin: self.origin, basis: self.basis, dims: self.dims, comps }
    }

    /// Full-plane coefficients of a dense field as a patch; fields depending
    /// on one coordinate only become lines.
    pub fn from_field(f: &SpectralField) -> Patch {
        let b = f.band() as i64;
        let nc = f.arity().components();
        let only_x2 = (0..nc).all(|c| (0..=b).all(|k2| (-b..=b).all(|k1| k1 == 0 || f.coeff(c, k1, k2) == ZERO)));
        if only_x2 {
            let comps = (0..nc).map(|c| (-b..=b).map(|k2| f.coeff(c, 0, k2)).collect()).collect();
            return Patch::line([0, -b], [0, 1], comps);
        }
        let only_x1 = (0..nc).all(|c| (1..=b).all(|k2| (-b..=b).all(|k1| f.coeff(c, k1, k2) == ZERO)));
        if only_x1 {
            let comps = (0..nc).map(|c| (-b..=b).map(|k1| f.coeff(c, k1, 0)).collect()).collect();
            return Patch::line([-b, 0], [1, 0], comps);
        }
        let d = (2 * b + 1) as usize;
        let comps = (0..nc).map(|c| (-b..=b).flat_map(|k1| (-b..=b).map(move |k2| (k1, k2))).map(|(k1, k2)| f.coeff(c, k1, k2)).collect()).collect();
        Patch::new([-b, -b], [[1, 0], [0, 1]], [d, d], comps)
    }

    /// `sum_{xi != 0} |xi|^{2s} sum_c w_c |c(xi)|^2`; modes must be distinct.
    pub fn sobolev_sq(&self, s: f64, weights: &[f64]) -> f64 {
        let d1 = self.dims[1];
        ordered_sum(self.dims[0] * d1, 4096, |idx| {
            let xi = self.mode(idx / d1, idx % d1);
            if xi == [0, 0] {
                return 0.0;
            }
            let e: f64 = self.comps.iter().zip(weights).map(|(c, w)| w * c[idx].norm_sqr()).sum();
            if e == 0.0 {
                0.0
            } else {
                e * ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).powf(s)
            }
        })
    }
}

/// Lattice generated by a set of integer vectors, in Hermite normal form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub rank: u8,
    pub h0: [i64; 2],
    pub h1: [i64; 2],
}

impl Lattice {
    pub fn generated_by(gens: &[[i64; 2]]) -> Lattice {
        let mut rows: Vec<[i64; 2]> = gens.iter().copied().filter(|v| *v != [0, 0]).collect();
        // Euclid on the first column
        let mut pivot: Option<[i64; 2]> = None;
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][0] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&i) = nz.first() {
                    let mut p = rows.remove(i);
                    if p[0] < 0 {
                        p = [-p[0], -p[1]];
                    }
                    pivot = Some(p);
                }
                break;
            }
            let &best = nz.iter().min_by_key(|&&i| rows[i][0].abs()).unwrap();
            let p = rows[best];
            for &i in &nz {
                if i != best {
                    let q = rows[i][0] / p[0];
                    rows[i] = [rows[i][0] - q * p[0], rows[i][1] - q * p[1]];
                }
            }
        }
        let d = rows.iter().fold(0i64, |g, r| gcd(g, r[1]));
        match (pivot, d) {
            (None, 0) => Lattice { rank: 0, h0: [0, 0], h1: [0, 0] },
            (None, d) => Lattice { rank: 1, h0: [0, d], h1: [0, 0] },
            (Some(p), 0) => Lattice { rank: 1, h0: p, h1: [0, 0] },
            (Some(p), d) => Lattice { rank: 2, h0: [p[0], p[1].rem_euclid(d)], h1: [0, d] },
        }
    }

    /// Integer coordinates of a lattice vector.
    pub fn coords(&self, v: [i64; 2]) -> Option<[i64; 2]> {
        match self.rank {
            0 => (v == [0, 0]).then_some([0, 0]),
            1 => {
                let h = self.h0;
                let a = if h[0] != 0 { v[0] / h[0] } else { v[1] / h[1] };
                (a * h[0] == v[0] && a * h[1] == v[1]).then_some([a, 0])
            }
            _ => {
                if v[0] % self.h0[0] != 0 {
                    return None;
                }
                let a = v[0] / self.h0[0];
                let r = v[1] - a * self.h0[1];
                (r % self.h1[1] == 0).then_some([a, r / self.h1[1]])
            }
        }
    }

    pub fn point(&self, c: [i64; 2]) -> [i64; 2] {
        [c[0] * self.h0[0] + c[1] * self.h1[0], c[0] * self.h0[1] + c[1] * self.h1[1]]
    }
}

fn independent(a: [i64; 2], b: [i64; 2]) -> bool {
    a[0] * b[1] - a[1] * b[0] != 0
}

/// Bilinear combination rule for products: `out[o] += w a[i] b[j]`.
#[derive(Clone, Copy, Debug)]
pub struct Pairing {
    pub out: usize,
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

pub const fn pairing(out: usize, a: usize, b: usize, w: f64) -> Pairing {
    Pairing { out, a, b, w }
}

/// Placement of a patch in a lattice coordinate box.
struct Placement {
    c0: [i64; 2],
    c1: [i64; 2],
    off: [i64; 2],
    lo: [i64; 2],
    hi: [i64; 2],
}

fn place(p: &Patch, lat: &Lattice, reference: [i64; 2]) -> Result<Placement> {
    let err = || Error::InvalidArgument("patch not contained in the common lattice".into());
    let c0 = lat.coords(p.basis[0]).ok_or_else(err)?;
    let c1 = lat.coords(p.basis[1]).ok_or_else(err)?;
    let off = lat.coords([p.origin[0] - reference[0], p.origin[1] - reference[1]]).ok_or_else(err)?;
    let mut lo = [i64::MAX; 2];
    let mut hi = [i64::MIN; 2];
    for i in [0, p.dims[0] as i64 - 1] {
        for j in [0, p.dims[1] as i64 - 1] {
            for a in 0..2 {
                let v = off[a] + i * c0[a] + j * c1[a];
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
    }
    Ok(Placement { c0, c1, off, lo, hi })
}

/// Scatter (adding) a patch into dense arrays of shape `dims` with row
/// stride `dims[1]`, at offset `base` in lattice coordinates.
fn scatter(p: &Patch, pl: &Placement, base: [i64; 2], dims: [usize; 2], comps: &[usize], out: &mut [Vec<Complex64>]) {
    for (slot, &c) in comps.iter().enumerate() {
        let src = &p.comps[c];
        let dst = &mut out[slot];
        for i in 0..p.dims[0] {
            for j in 0..p.dims[1] {
                let z = src[i * p.dims[1] + j];
                if z == ZERO {
                    continue;
                }
                let (ii, jj) = (i as i64, j as i64);
                let a = (pl.off[0] + ii * pl.c0[0] + jj * pl.c1[0] - base[0]) as usize;
                let b = (pl.off[1] + ii * pl.c0[1] + jj * pl.c1[1] - base[1]) as usize;
                dst[a * dims[1] + b] += z;
            }
        }
    }
}

/// Product of two patches with the given component pairings.
pub fn product(p: &Patch, q: &Patch, pairs: &[Pairing], ncomp_out: usize) -> Result<Patch> {
    if p.is_line() && q.is_line() && independent(p.basis[0], q.basis[0]) {
        let (n0, n1) = (p.dims[0], q.dims[0]);
        let comps = (0..ncomp_out)
            .map(|o| {
                let mut out = vec![ZERO; n0 * n1];
                for pr in pairs.iter().filter(|pr| pr.out == o) {
                    let (a, b) = (&p.comps[pr.a], &q.comps[pr.b]);
                    out.par_chunks_mut(n1).enumerate().for_each(|(i, row)| {
                        let ai = a[i] * pr.w;
                        if ai != ZERO {
                            for (r, bk) in row.iter_mut().zip(b) {
                                *r += ai * bk;
                            }
                        }
                    });
                }
                out
            })
            .collect();
        return Ok(Patch::new([p.origin[0] + q.origin[0], p.origin[1] + q.origin[1]], [p.basis[0], q.basis[0]], [n0, n1], comps));
    }
    let gens = [p.basis[0], p.basis[1], q.basis[0], q.basis[1]];
    let lat = Lattice::generated_by(&gens);
    let pp = place(p, &lat, p.origin)?;
    let pq = place(q, &lat, q.origin)?;
    let dp = [(pp.hi[0] - pp.lo[0] + 1) as usize, (pp.hi[1] - pp.lo[1] + 1) as usize];
    let dq = [(pq.hi[0] - pq.lo[0] + 1) as usize, (pq.hi[1] - pq.lo[1] + 1) as usize];
    let dr = [dp[0] + dq[0] - 1, dp[1] + dq[1] - 1];
    let nn = [dr[0].next_power_of_two(), dr[1].next_power_of_two()];
    if nn[0] * nn[1] > MAX_BOX {
        return Err(Error::GridOverflow(format!("product box {}x{} exceeds limit", nn[0], nn[1])));
    }
    let used = |first: bool| -> Vec<usize> {
        let mut v: Vec<usize> = pairs.iter().map(|pr| if first { pr.a } else { pr.b }).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (ua, ub) = (used(true), used(false));
    let spectra = |pt: &Patch, pl: &Placement, comps: &[usize]| -> Vec<Vec<Complex64>> {
        let mut bufs = vec![vec![ZERO; nn[0] * nn[1]]; comps.len()];
        scatter(pt, pl, pl.lo, nn, comps, &mut bufs);
        for b in bufs.iter_mut() {
            crate::fourier::fft2(b, nn[0], nn[1], false);
        }
        bufs
    };
    let sa = spectra(p, &pp, &ua);
    let sb = spectra(q, &pq, &ub);
    let norm = 1.0 / (nn[0] * nn[1]) as f64;
    let mut comps = Vec::with_capacity(ncomp_out);
    for o in 0..ncomp_out {
        let mut acc = vec![ZERO; nn[0] * nn[1]];
        for pr in pairs.iter().filter(|pr| pr.out == o) {
            let a = &sa[ua.binary_search(&pr.a).unwrap()];
            let b = &sb[ub.binary_search(&pr.b).unwrap()];
            let w = pr.w * norm;
            acc.par_iter_mut().zip(a.par_iter().zip(b.par_iter())).for_each(|(r, (x, y))| *r += x * y * w);
        }
        crate::fourier::fft2(&mut acc, nn[0], nn[1], true);
        let mut out = vec![ZERO; dr[0] * dr[1]];
        for i in 0..dr[0] {
            out[i * dr[1]..(i + 1) * dr[1]].copy_from_slice(&acc[i * nn[1]..i * nn[1] + dr[1]]);
        }
        comps.push(out);
    }
    let start = lat.point([pp.lo[0] + pq.lo[0], pp.lo[1] + pq.lo[1]]);
    let origin = [p.origin[0] + q.origin[0] + start[0], p.origin[1] + q.origin[1] + start[1]];
    let basis = [lat.h0, if lat.rank == 2 { lat.h1 } else { [0, 0] }];
    Ok(Patch::new(origin, basis, dr, comps))
}

/// A term whose patch is built on demand; `bbox` must contain its modes.
pub struct Planned<'a> {
    pub bbox: BBox,
    pub build: Box<dyn Fn() -> Result<Patch> + Sync + 'a>,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct SumStats {
    pub terms: usize,
    pub clusters: usize,
    pub largest_box: usize,
}

/// `||P_{!=0} sum_t f_t||_{H^s}^2` for planned terms, merging overlapping
/// terms cluster by cluster on their common lattice.
pub fn sobolev_sq_of_sum(terms: &[Planned], s: f64, weights: &[f64]) -> Result<(f64, SumStats)> {
    let n = terms.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if terms[i].bbox.overlaps(&terms[j].bbox) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[root_slot[r]].push(i);
    }
    let mut stats = SumStats { terms: n, clusters: clusters.len(), largest_box: 0 };
    let mut total = 0.0;
    for cl in &clusters {
        let patches: Vec<Patch> = cl.iter().map(|&i| (terms[i].build)()).collect::<Result<_>>()?;
        if patches.len() == 1 {
            stats.largest_box = stats.largest_box.max(patches[0].dims[0] * patches[0].dims[1]);
            total += patches[0].sobolev_sq(s, weights);
            continue;
        }
        let reference = patches[0].origin;
        let mut gens = Vec::new();
        for p in &patches {
            gens.extend_from_slice(&p.basis);
            gens.push([p.origin[0] - reference[0], p.origin[1] - reference[1]]);
        }
        let lat = Lattice::generated_by(&gens);
        let placements: Vec<Placement> = patches.iter().map(|p| place(p, &lat, reference)).collect::<Result<_>>()?;
        let lo = [placements.iter().map(|p| p.lo[0]).min().unwrap(), placements.iter().map(|p| p.lo[1]).min().unwrap()];
        let hi = [placements.iter().map(|p| p.hi[0]).max().unwrap(), placements.iter().map(|p| p.hi[1]).max().unwrap()];
        let dims = [(hi[0] - lo[0] + 1) as usize, (hi[1] - lo[1] + 1) as usize];
        if dims[0] * dims[1] > MAX_BOX {
            return Err(Error::GridOverflow(format!("cluster box {}x{} exceeds limit", dims[0], dims[1])));
        }
        stats.largest_box = stats.largest_box.max(dims[0] * dims[1]);
        let nc = weights.len();
        let all: Vec<usize> = (0..nc).collect();
        let mut dense = vec![vec![ZERO; dims[0] * dims[1]]; nc];
        for (p, pl) in patches.iter().zip(&placements) {
            scatter(p, pl, lo, dims, &all, &mut dense);
        }
        drop(patches);
        total += ordered_sum(dims[0] * dims[1], 4096, |idx| {
            let e: f64 = dense.iter().zip(weights).map(|(c, w)| w * c[idx].norm_sqr()).sum();
            if e == 0.0 {
                return 0.0;
            }
            let c = [lo[0] + (idx / dims[1]) as i64, lo[1] + (idx % dims[1]) as i64];
            let d = lat.point(c);
            let xi = [reference[0] + d[0], reference[1] + d[1]];
            if xi == [0, 0] {
                0.0
            } else {
                e * ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).powf(s)
            }
        });
    }
    Ok((total, stats))
}
