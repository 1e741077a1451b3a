use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::{amp_limit, p_of, IterationParams};
use crate::error::{Error, Result};
use crate::fourier::{sf2, Arity, Grid2, SpectralField};
use crate::norms::lp_norm;

/// `(u_q, R_q)` with the increment history `w_0 = u_0, w_1, ..., w_q`.
#[derive(Clone, Debug)]
pub struct IterationState {
    pub q: u32,
    pub u: SpectralField,
    pub r: SpectralField,
    /// Constant pressure; the iteration never changes it.
    pub p: f64,
    /// `lambda_1, ..., lambda_q`.
    pub lambdas: Vec<u64>,
    /// Concentration exponent used at each step.
    pub eps_used: Vec<(i64, i64)>,
    pub c: f64,
    pub params: IterationParams,
    pub increments: Vec<SpectralField>,
    /// Shell index of each increment.
    pub shells: Vec<u32>,
}

/// `u_0 = A sin(2 pi x2) e1`.
pub fn base_velocity(amp: f64) -> SpectralField {
    let mut u = SpectralField::zeros(Arity::Vector2, Grid2::for_band(1));
    u.add_mode(0, [0, 1], Complex64::new(0.0, -0.5 * amp)).expect("mode fits");
    u
}

/// `R_0` with off-diagonal entries `-2 pi A cos(2 pi x2)`.
pub fn base_stress(amp: f64) -> SpectralField {
    let mut r = SpectralField::zeros(Arity::SymTensor2, Grid2::for_band(1));
    r.add_mode(1, [0, 1], Complex64::new(-PI * amp, 0.0)).expect("mode fits");
    r
}

pub fn base_step(params: &IterationParams) -> Result<IterationState> {
    params.validate()?;
    let amp = params.amp_f64();
    if amp >= amp_limit() {
        return Err(Error::Parameter(format!("amplitude {amp:e} violates ||R_0||_H^-2 < 2^-10")));
    }
    let u = base_velocity(amp);
    let r = base_stress(amp);
    let norm = lp_norm(&u, p_of(0))?.value;
    let c = (4.0 / norm).max(2.0);
    Ok(IterationState {
        q: 0,
        u: u.clone(),
        r,
        p: 0.0,
        lambdas: Vec::new(),
        eps_used: Vec::new(),
        c,
        params: params.clone(),
        increments: vec![u],
        shells: vec![0],
    })
}

#[derive(Serialize, Deserialize)]
struct StateMeta {
    format: String,
    q: u32,
    p: f64,
    c: f64,
    lambdas: Vec<u64>,
    eps_used: Vec<(i64, i64)>,
    shells: Vec<u32>,
    params: IterationParams,
}

impl IterationState {
    /// Write `state.json`, `u.sf2`, `R.sf2` and `w_<q>.sf2` into `dir`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let meta = StateMeta {
            format: "nsforge-state".into(),
            q: self.q,
            p: self.p,
            c: self.c,
            lambdas: self.lambdas.clone(),
            eps_used: self.eps_used.clone(),
            shells: self.shells.clone(),
            params: self.params.clone(),
        };
        std::fs::write(dir.join("state.json"), serde_json::to_vec_pretty(&meta)?)?;
        sf2::save(&self.u, &dir.join("u.sf2"))?;
        sf2::save(&self.r, &dir.join("R.sf2"))?;
        for (i, w) in self.increments.iter().enumerate() {
            sf2::save(w, &dir.join(format!("w_{i}.sf2")))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<IterationState> {
        let meta: StateMeta = serde_json::from_slice(&std::fs::read(dir.join("state.json"))?)?;
        if meta.format != "nsforge-state" {
            return Err(Error::Integrity(format!("unknown state format '{}'", meta.format)));
        }
        let n = meta.q as usize;
        if meta.lambdas.len() != n || meta.eps_used.len() != n || meta.shells.len() != n + 1 {
            return Err(Error::Integrity("state history lengths do not match q".into()));
        }
        let u = sf2::load(&dir.join("u.sf2"))?;
        let r = sf2::load(&dir.join("R.sf2"))?;
        if u.arity() != Arity::Vector2 || r.arity() != Arity::SymTensor2 {
            return Err(Error::Integrity("dumped u/R have the wrong arity".into()));
        }
        let increments = (0..=n).map(|i| sf2::load(&dir.join(format!("w_{i}.sf2")))).collect::<Result<Vec<_>>>()?;
        Ok(IterationState {
            q: meta.q,
            u,
            r,
            p: meta.p,
            lambdas: meta.lambdas,
            eps_used: meta.eps_used,
            c: meta.c,
            params: meta.params,
            increments,
            shells: meta.shells,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{divergence, laplacian, multiply};
    use crate::norms::sobolev_norm;

    #[test]
    fn base_residual_vanishes() {
        let a = 1e-4;
        let u = base_velocity(a);
        let r = base_stress(a);
        let duu = divergence(&multiply(&u, &u).unwrap()).unwrap();
        assert!(duu.max_abs_coeff() < 1e-24);
        let lhs = laplacian(&u);
        let rhs = divergence(&r).unwrap();
        // -Delta u_0 = div R_0 = (4 pi^2 A sin(2 pi x2), 0)
        for k2 in -2..=2i64 {
            for k1 in -2..=2i64 {
                let d = -lhs.coeff(0, k1, k2) - rhs.coeff(0, k1, k2);
                assert!(d.norm() < 1e-18);
                assert_eq!(rhs.coeff(1, k1, k2), Complex64::new(0.0, 0.0));
            }
        }
        assert!((rhs.coeff(0, 0, 1) - Complex64::new(0.0, -2.0 * PI * PI * a)).norm() < 1e-18);
    }

    #[test]
    fn base_stress_norm_is_two_pi_a() {
        let a = 1e-4;
        let v = sobolev_norm(&base_stress(a), -2.0).value;
        assert!((v - 2.0 * PI * a).abs() < 1e-10 * 2.0 * PI * a);
    }

    #[test]
    fn base_state_is_mean_zero_with_constant() {
        let s = base_step(&IterationParams::default()).unwrap();
        assert_eq!(s.u.mean(0), 0.0);
        assert_eq!(s.u.mean(1), 0.0);
        let norm = lp_norm(&s.u, p_of(0)).unwrap().value;
        assert!(norm > 1.0 / s.c * 2.0);
    }

    #[test]
    fn dump_round_trip() {
        let s = base_step(&IterationParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        s.dump(dir.path()).unwrap();
        let t = IterationState::load(dir.path()).unwrap();
        assert_eq!(t.u, s.u);
        assert_eq!(t.r, s.r);
        assert_eq!(t.c, s.c);
        assert_eq!(t.shells, s.shells);
    }
}
