use core::f64::consts::{PI, SQRT_2};

use dulac_core::diffeo::DiffeoGerm;
use dulac_core::saddlenum::*;
use dulac_core::{Cx, Error, Prec};
use num_complex::Complex64 as C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn opts() -> LiftOptions {
    LiftOptions::default()
}

/// `K = (ε/B) x y`, so `|K| ≤ ε` on `U_{A,B}`.
fn perturbed(lambda: f64, n: u32, eps: f64) -> PreparedSaddle {
    let k = BiPoly::new(vec![(1, 1, c(eps / 2.0, 0.0))]);
    PreparedSaddle::new(lambda, n, k, eps, 2.0, 2.0).unwrap()
}

#[test]
fn construction_checks() {
    assert!(PreparedSaddle::linear(1.3).is_ok());
    let k = BiPoly::new(vec![(0, 0, c(0.1, 0.0))]);
    assert!(matches!(PreparedSaddle::new(1.0, 1, k.clone(), 0.1, 1.0, 20.0), Err(Error::BadParameters(_))));
    assert!(matches!(PreparedSaddle::new(1.0, 1, k.clone(), 0.05, 1.0, 1.0), Err(Error::BadParameters(_))));
    assert!(matches!(PreparedSaddle::new(3.5, 2, k.clone(), 0.2, 1.0, 1.0), Err(Error::BadParameters(_))));
    assert!(PreparedSaddle::new(1.0, 1, k, 0.1, 1.0, 1.0).is_ok());
}

#[test]
fn linear_conserves_quasi_integral() {
    for lambda in [0.7, 1.0, SQRT_2] {
        let s = PreparedSaddle::linear(lambda).unwrap();
        let paths = [
            PathSpec::Radial { z0: c(0.0, 0.3), t: 6.0 },
            PathSpec::Circular { z0: c(0.5, 0.0), t: -12.0 },
            PathSpec::Exponential { alpha: 0.5 * lambda, c: 1, t: 6.0, backward: true },
        ];
        for p in &paths {
            let w0 = if matches!(p, PathSpec::Radial { .. }) { c(10.0, 0.2) } else { c(1.0, 0.2) };
            let r = lift_path(&s, p, w0, &opts()).unwrap();
            assert!(r.exit.is_none(), "{p:?} {:?}", r.exit);
            assert!(r.quasi_integral_drift() < 1e-8);
        }
    }
}

#[test]
fn radial_estimate_holds() {
    let s = perturbed(1.0, 1, 0.05);
    let r = lift_path(&s, &PathSpec::Radial { z0: c(0.0, 0.4), t: 8.0 }, c(9.0, 0.0), &opts()).unwrap();
    assert!(r.exit.is_none(), "{:?}", r.exit);
    assert!(r.estimate.applicable && r.estimate.holds, "{:?}", r.estimate);
    assert!(r.estimate.checked >= 1);
    assert!((r.length - 8.0).abs() < 1e-8);
}

#[test]
fn circular_lap_bound() {
    let (lambda, eps) = (1.0, 0.05);
    let k = BiPoly::new(vec![(1, 1, c(eps, 0.0))]);
    let s = PreparedSaddle::new(lambda, 1, k, eps, 1.0, 1.0).unwrap();
    let w0 = c(0.3, 0.0);
    let tmax = (libm::exp(w0.re) - 1.0) / (lambda * eps);
    let r = lift_path(&s, &PathSpec::Circular { z0: c(0.0, 0.0), t: 0.999 * tmax }, w0, &opts()).unwrap();
    assert!(r.exit.is_none(), "{:?}", r.exit);
    assert!(r.estimate.holds);
    // past the bound the length test fires
    let r = lift_path(&s, &PathSpec::Circular { z0: c(0.0, 0.0), t: 1.5 * tmax }, w0, &opts()).unwrap();
    assert_eq!(r.predicted_exit.map(|e| e.clause), Some(ExitClause::Predicted));
}

#[test]
fn reactive_exit_on_left_half_plane() {
    let s = PreparedSaddle::linear(1.0).unwrap();
    let path = PathSpec::Polyline(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
    let mut o = opts();
    o.predictive = false;
    let r = lift_path(&s, &path, c(2.0, 0.0), &o).unwrap();
    assert_eq!(r.exit.map(|e| e.clause), Some(ExitClause::LeftHalfPlane));
}

#[test]
fn exponential_path_parameters() {
    let s = PreparedSaddle::linear(1.0).unwrap();
    let bad = PathSpec::Exponential { alpha: 1.0, c: 1, t: 1.0, backward: false };
    assert!(matches!(lift_path(&s, &bad, c(1.0, 0.0), &opts()), Err(Error::BadParameters(_))));
    let bad = PathSpec::Exponential { alpha: 0.5, c: 0, t: 1.0, backward: false };
    assert!(matches!(lift_path(&s, &bad, c(1.0, 0.0), &opts()), Err(Error::BadParameters(_))));
}

#[test]
fn linear_corner_map() {
    let zs = [c(3.0, 0.0), c(4.0, 1.5), c(6.0, -2.5), c(5.0, 30.0)];
    for lambda in [0.7, 1.0, SQRT_2] {
        let s = PreparedSaddle::linear(lambda).unwrap();
        for (z, d) in corner_map_numeric(&s, &zs, &opts()).unwrap() {
            assert!((d - z * lambda).norm() < 1e-6, "{lambda} {z} {d}");
        }
    }
}

#[test]
fn perturbed_corner_tends_to_linear() {
    let s = perturbed(1.0, 1, 0.05);
    let errs: Vec<f64> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&re| (corner_point(&s, c(re, 0.7), &opts()).unwrap() - c(re, 0.7)).norm())
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn corner_requires_sigma_bound() {
    let s = perturbed(1.0, 1, 0.05).with_sigma(c(1.9, 0.0));
    assert!(matches!(corner_point(&s, c(3.0, 0.0), &opts()), Err(Error::PreconditionFailed(_))));
    let s = PreparedSaddle::linear(1.0).unwrap();
    assert!(matches!(corner_point(&s, c(1.0, 100.0), &opts()), Err(Error::PreconditionFailed(_))));
}

#[test]
fn linear_holonomies() {
    for lambda in [0.7, 1.0, SQRT_2] {
        let s = PreparedSaddle::linear(lambda).unwrap();
        let y0 = c(0.01, 0.02);
        let h = holonomy_numeric(&s, Transversal::Omega, y0, &opts()).unwrap();
        assert!((h - y0 * c(0.0, -2.0 * PI * lambda).exp()).norm() < 1e-10 * y0.norm());
        let x0 = c(0.05, -0.01);
        let h = holonomy_numeric(&s, Transversal::Sigma, x0, &opts()).unwrap();
        assert!((h - x0 * c(0.0, -2.0 * PI / lambda).exp()).norm() < 1e-10 * x0.norm());
    }
}

#[test]
fn perturbed_holonomy_linear_part() {
    let s = perturbed(SQRT_2, 2, 0.05);
    let mut prev = f64::INFINITY;
    for r in [1e-1, 1e-2, 1e-3] {
        let x0 = c(r, 0.0);
        let h = holonomy_numeric(&s, Transversal::Sigma, x0, &opts()).unwrap();
        let dev = (h / x0 - c(0.0, -2.0 * PI / SQRT_2).exp()).norm();
        assert!(dev < prev, "{dev} {prev}");
        prev = dev;
        let y0 = c(r, 0.0);
        let h = holonomy_numeric(&s, Transversal::Omega, y0, &opts()).unwrap();
        assert!((h / y0 - c(0.0, -2.0 * PI * SQRT_2).exp()).norm() < 10.0 * r);
    }
}

#[test]
fn linear_determinations() {
    let lambda = 0.7;
    let s = PreparedSaddle::linear(lambda).unwrap();
    let z = c(4.0, 0.3);
    for n in -2..=2 {
        let d = determination_shift(&s, n, &[z], &opts()).unwrap()[0];
        let want = z * lambda + c(0.0, 2.0 * PI * n as f64 * (lambda - 1.0));
        assert!((d.via_omega - want).norm() < 1e-8, "{n} {d:?}");
        assert!(d.residual < 1e-8);
    }
    let d0 = determination_shift(&s, 0, &[z], &opts()).unwrap()[0];
    assert!((d0.via_omega - corner_point(&s, z, &opts()).unwrap()).norm() < 1e-14);
}

/// Constant `K` with `|K| = ε`, large enough that `d_0 - λz` is visible at `Re z ≈ 2`.
fn strong() -> PreparedSaddle {
    let k = BiPoly::new(vec![(0, 0, c(0.3, 0.1))]);
    PreparedSaddle::new(1.3, 2, k, 0.3163, 2.0, 3.0).unwrap()
}

#[test]
fn perturbed_determinations_agree() {
    let s = strong();
    let zs = [c(2.0, 0.2), c(4.0, -0.5)];
    let d0 = corner_point(&s, zs[0], &opts()).unwrap();
    assert!((d0 - zs[0] * 1.3).norm() > 1e-2);
    for n in -2..=2 {
        for d in determination_shift(&s, n, &zs, &opts()).unwrap() {
            assert!(d.residual < 1e-8, "{n} {d:?}");
        }
    }
}

#[test]
fn monodromy_relation() {
    let s = strong();
    for z in [c(2.0, 0.2), c(4.0, -0.5)] {
        let r = monodromy_residual(&s, z, &opts()).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}

#[test]
fn poincare_identity_gluing() {
    let s = PreparedSaddle::linear(1.0).unwrap();
    let id = DiffeoGerm::identity(8, Prec::default());
    let xs = [c(0.01, 0.0), c(0.02, 0.01), c(-0.01, 0.005)];
    for (x, p) in poincare_numeric(&s, &id, &xs, 0.5, &opts()).unwrap() {
        assert!((p - x).norm() < 1e-10 * x.norm());
    }
    let big = DiffeoGerm::new(vec![Cx::ONE, Cx::ONE], 3, Prec::default()).unwrap();
    let r = reliability_radius(&big, 1e-10);
    assert!(matches!(poincare_numeric(&s, &big, &[c(0.5, 0.0)], r, &opts()), Err(Error::RadiusExceeded { .. })));
}
