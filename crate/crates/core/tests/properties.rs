use num_complex::Complex64;
use proptest::prelude::*;

use nsforge::fourier::{add, dilate, divergence, highpass, lowpass, multiply, perp_gradient, shell_project, sub};
use nsforge::geometry::{admissible_radius, gamma_squared, DirectionSet, SymMatrix2};
use nsforge::norms::{lp_norm, sobolev_norm};
use nsforge::{Arity, Grid2, SpectralField};

/// Random real scalar trigonometric polynomial with modes `|k_i| <= band`.
fn scalar(band: usize) -> impl Strategy<Value = SpectralField> {
    let b = band as i64;
    prop::collection::vec(((-b..=b), (0..=b), -1.0f64..1.0, -1.0f64..1.0), 1..6).prop_map(move |modes| {
        let mut f = SpectralField::zeros(Arity::Scalar, Grid2::for_band(band));
        for (k1, k2, re, im) in modes {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            f.add_mode(0, [k1, k2], Complex64::new(re, im)).unwrap();
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn perp_gradient_is_divergence_free(psi in scalar(6)) {
        let u = perp_gradient(&psi).unwrap();
        let d = divergence(&u).unwrap();
        prop_assert!(d.max_abs_coeff() <= 1e-12 * u.max_abs_coeff().max(1.0));
    }

    #[test]
    fn products_commute(f in scalar(5), g in scalar(5)) {
        let a = multiply(&f, &g).unwrap();
        let b = multiply(&g, &f).unwrap();
        prop_assert!(sub(&a, &b).unwrap().max_abs_coeff() <= 1e-15);
    }

    #[test]
    fn low_and_high_pass_split(f in scalar(12), e in 0u32..5) {
        let lo = lowpass(&f, 1 << e).unwrap();
        let hi = highpass(&f, 1 << e).unwrap();
        prop_assert!(sub(&add(&lo, &hi).unwrap(), &f).unwrap().max_abs_coeff() <= 1e-14);
    }

    #[test]
    fn shells_sum_to_field(f in scalar(12)) {
        let mut acc = SpectralField::zeros(Arity::Scalar, f.grid());
        for j in 0..6 {
            acc = add(&acc, &shell_project(&f, j)).unwrap();
        }
        prop_assert!(sub(&acc, &f).unwrap().max_abs_coeff() <= 1e-14);
    }

    #[test]
    fn dilation_scales_sobolev_norm(f in scalar(4), m in 1u64..5, s in -2.0f64..1.0) {
        let g = dilate(&f, m).unwrap();
        let want = sobolev_norm(&f, s).value * (m as f64).powf(s);
        prop_assert!((sobolev_norm(&g, s).value - want).abs() <= 1e-12 * want.max(1e-300));
        let l2 = lp_norm(&f, 2.0).unwrap().value;
        prop_assert!((lp_norm(&g, 2.0).unwrap().value - l2).abs() <= 1e-12 * l2);
    }

    #[test]
    fn gamma_reconstructs(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, t in 0.0f64..1.0) {
        let e = SymMatrix2::new(a, b, c);
        prop_assume!(e.op_norm() > 0.0);
        let r = SymMatrix2::new(1.0, 0.0, 1.0).add(&e.scale(t * admissible_radius() / e.op_norm()));
        let g = gamma_squared(&r).unwrap();
        prop_assert!(g.c.iter().all(|x| *x > 0.0));
        prop_assert!(g.reconstruct(&DirectionSet::standard()).max_abs_diff(&r) <= 1e-12);
    }
}
