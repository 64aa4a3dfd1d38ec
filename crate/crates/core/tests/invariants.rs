use std::f64::consts::PI;

use ghostlet_core::encoding::GhostCodebook;
use ghostlet_core::finite::{generalization_bound, mollify, FiniteModel, LayerSpec, NascentDelta, DeltaShape, NormChoice};
use ghostlet_core::fourier::{fourier_forward, fourier_inverse};
use ghostlet_core::grid::{integrate, l2_inner};
use ghostlet_core::nullspace::{admissibility, project};
use ghostlet_core::profiles::{dawson_basis, gaussian_derivative, hermite_basis, make_rho_family, rho0_derivative, tanh_profile};
use ghostlet_core::transforms::{l2m_norm, pairing, ridgelet, ridgelet_fourier, AdjointMode, NetworkOperator};
use ghostlet_core::{Grid, ParamDistribution, QuadratureScheme, SampledFunction, C64};
use proptest::prelude::*;

fn xgrid() -> Grid {
    Grid::line(-8.0, 8.0, 81).unwrap()
}

fn pgrid() -> Grid {
    Grid::new(vec![-4.0, -20.0], vec![4.0, 20.0], vec![41, 81]).unwrap()
}

fn bump(g: &Grid, c: f64, w: f64, amp: f64) -> SampledFunction {
    SampledFunction::from_fn(g.clone(), |x| C64::new(amp * (-(x[0] - c).powi(2) / w).exp(), 0.0)).unwrap()
}

fn gamma(g: &Grid, a: f64, b: f64, w: f64) -> ParamDistribution {
    ParamDistribution::from_fn(g.clone(), |q| C64::new((-((q[0] - a).powi(2) + (q[1] - b).powi(2) / 4.0) / w).exp(), 0.0)).unwrap()
}

fn close(u: &ParamDistribution, v: &ParamDistribution, tol: f64) -> bool {
    u.sub(v).unwrap().norm() <= tol * (1.0 + v.norm())
}

fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn admissibility_pattern_for_tanh() {
    let family = make_rho_family(4).unwrap();
    for (k, rho) in family.iter().enumerate().skip(1) {
        let r = admissibility(&tanh_profile(), rho, 1).unwrap();
        assert_eq!(r.is_admissible(), k % 2 == 0, "k = {k}: {:?}", r.pairing);
    }
}

#[test]
fn dawson_basis_is_orthonormal() {
    let b = dawson_basis(&[1, 2, 3, 4, 5, 6], 1).unwrap();
    assert!(b.gram_residual().unwrap() < 1e-8);
}

#[test]
fn hermite_basis_is_orthonormal() {
    let b = hermite_basis(12, &Grid::line(-10.0, 10.0, 201).unwrap()).unwrap();
    assert!(b.gram_residual().unwrap() < 1e-8);
}

#[test]
fn codebook_ghost_slots_pair_to_zero() {
    let x = Grid::line(-10.0, 10.0, 201).unwrap();
    let p = Grid::new(vec![-6.0, -50.0], vec![6.0, 50.0], vec![121, 251]).unwrap();
    let op = NetworkOperator::plain_l2(gaussian_derivative(4), p, x).unwrap();
    let book = GhostCodebook::build(op.sigma(), &[2, 3, 4], 1).unwrap();
    let pairs = book.pairings().unwrap();
    assert!((pairs[0].norm() - 1.0).abs() < 1e-8);
    assert!(pairs[1..].iter().all(|p| p.norm() < 1e-10));
}

#[test]
fn gaussian_is_its_own_transform_up_to_scale() {
    // ∫ e^{−x²/2} e^{−ixξ} dx = √(2π) e^{−ξ²/2}.
    let x = Grid::line(-12.0, 12.0, 241).unwrap();
    let u = SampledFunction::from_fn(x.clone(), |x| cx((-x[0] * x[0] / 2.0).exp(), 0.0)).unwrap();
    let xi = Grid::line(-6.0, 6.0, 121).unwrap();
    let s = fourier_forward(&u, &xi).unwrap();
    for (i, v) in s.values().iter().enumerate() {
        let w = xi.coord(0, i);
        assert!((v - cx((2.0 * PI).sqrt() * (-w * w / 2.0).exp(), 0.0)).norm() < 1e-10);
    }
}

#[test]
fn plancherel_norm_identity() {
    // ‖R[f;ρ]‖² = ‖f‖²‖ρ‖²_{L²ₘ} once the parameter box holds the transform.
    let x = Grid::line(-10.0, 10.0, 201).unwrap();
    let p = Grid::new(vec![-6.0, -50.0], vec![6.0, 50.0], vec![121, 251]).unwrap();
    let f = bump(&x, 0.5, 1.0, 1.0);
    let rho = gaussian_derivative(4);
    let r = ridgelet_fourier(&f, &rho, &p).unwrap();
    let n = l2m_norm(&rho, 1).unwrap();
    let ratio = r.norm().powi(2) / (f.norm().powi(2) * n * n);
    assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
}

#[test]
fn monte_carlo_is_seed_deterministic() {
    let f = bump(&xgrid(), 0.0, 1.0, 1.0);
    let p = Grid::new(vec![-2.0, -4.0], vec![2.0, 4.0], vec![5, 9]).unwrap();
    let run = |seed| ridgelet(&f, &gaussian_derivative(2), &p, QuadratureScheme::MonteCarlo { samples: 256, seed }).unwrap();
    assert_eq!(run(7), run(7));
    assert_ne!(run(7), run(8));
}

#[test]
fn mollified_point_mass_keeps_unit_mass() {
    let g = Grid::new(vec![-4.0, -8.0], vec![4.0, 8.0], vec![81, 161]).unwrap();
    let delta = NascentDelta::for_grid(DeltaShape::Gaussian, &g, 4.0).unwrap();
    let model = FiniteModel::new(vec![vec![0.3, 0.1]], vec![cx(1.0, 0.0)]).unwrap();
    let mass = integrate(&mollify(&model, &delta, &g).unwrap().gamma, QuadratureScheme::Trapezoid).unwrap();
    assert!((mass - cx(1.0, 0.0)).norm() < 1e-6, "mass {mass}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ridgelet_is_linear_in_f(c in -3.0f64..3.0, s in 0.5f64..2.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let (x, p) = (xgrid(), pgrid());
        let rho = gaussian_derivative(2);
        let f = bump(&x, c, s, 1.0);
        let g = bump(&x, -c, 1.0, 0.5);
        let alpha = cx(re, im);
        let lhs = ridgelet_fourier(&f.scaled(alpha).add(&g).unwrap(), &rho, &p).unwrap();
        let rhs = ridgelet_fourier(&f, &rho, &p).unwrap().scaled(alpha).add(&ridgelet_fourier(&g, &rho, &p).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn ridgelet_is_conjugate_linear_in_rho(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let (x, p) = (xgrid(), pgrid());
        let f = bump(&x, 0.5, 1.0, 1.0);
        let rho = gaussian_derivative(3);
        let c = cx(re, im);
        let lhs = ridgelet(&f, &rho.scaled(c), &p, QuadratureScheme::Trapezoid).unwrap();
        let rhs = ridgelet(&f, &rho, &p, QuadratureScheme::Trapezoid).unwrap().scaled(c.conj());
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn pairing_is_sesquilinear(re in -2.0f64..2.0, im in -2.0f64..2.0, k in 2usize..6) {
        let sigma = gaussian_derivative(4);
        let rho = rho0_derivative(k);
        let c = cx(re, im);
        let base = pairing(&sigma, &rho, 1).unwrap();
        let right = pairing(&sigma, &rho.scaled(c), 1).unwrap();
        let left = pairing(&sigma.scaled(c), &rho, 1).unwrap();
        let tol = 1e-12 * (1.0 + base.norm() * c.norm());
        prop_assert!((right - c.conj() * base).norm() <= tol);
        prop_assert!((left - c * base).norm() <= tol);
    }

    #[test]
    fn network_is_linear(a in -2.0f64..2.0, b in -8.0f64..8.0, re in -2.0f64..2.0) {
        let (x, p) = (xgrid(), pgrid());
        let op = NetworkOperator::new(gaussian_derivative(2), p.clone(), x, QuadratureScheme::Trapezoid).unwrap();
        let (g, h) = (gamma(&p, a, b, 1.0), gamma(&p, -a, 0.0, 2.0));
        let c = cx(re, 0.5);
        let lhs = op.forward_s(&g.scaled(c).add(&h).unwrap()).unwrap();
        let rhs = op.forward_s(&g).unwrap().scaled(c).add(&op.forward_s(&h).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn plain_adjoint_duality(c in -3.0f64..3.0, a in -2.0f64..2.0, b in -8.0f64..8.0) {
        let (x, p) = (xgrid(), pgrid());
        let op = NetworkOperator::plain_l2(gaussian_derivative(4), p.clone(), x.clone()).unwrap();
        let f = bump(&x, c, 1.0, 1.0);
        let g = gamma(&p, a, b, 1.0);
        let lhs = l2_inner(&f, &op.forward_s(&g).unwrap()).unwrap();
        let rhs = l2_inner(&op.adjoint(&f, AdjointMode::PlainL2).unwrap(), &g).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn projection_splits_orthogonally(a in -2.0f64..2.0, b in -6.0f64..6.0, w in 0.5f64..2.0) {
        let x = Grid::line(-10.0, 10.0, 201).unwrap();
        let p = Grid::new(vec![-6.0, -50.0], vec![6.0, 50.0], vec![121, 251]).unwrap();
        let op = NetworkOperator::plain_l2(gaussian_derivative(4), p.clone(), x).unwrap();
        let g = gamma(&p, a, b, w);
        let (pr, gh) = project(&op, &g, AdjointMode::PlainL2).unwrap();
        prop_assert!(close(&pr.add(&gh).unwrap(), &g, 1e-14));
        let n2 = g.norm().powi(2);
        prop_assert!((n2 - pr.norm().powi(2) - gh.norm().powi(2)).abs() <= 1e-2 * n2);
        let (ppr, _) = project(&op, &pr, AdjointMode::PlainL2).unwrap();
        prop_assert!(ppr.sub(&pr).unwrap().norm() <= 1e-3 * pr.norm());
    }

    #[test]
    fn fourier_round_trip(c in -2.0f64..2.0, w in 0.5f64..2.0) {
        let x = Grid::line(-12.0, 12.0, 241).unwrap();
        let u = bump(&x, c, w, 1.0);
        let xi = Grid::line(-4.0 * PI, 4.0 * PI, 401).unwrap();
        let back = fourier_inverse(&fourier_forward(&u, &xi).unwrap(), &x).unwrap();
        prop_assert!(back.sub(&u).unwrap().norm() <= 1e-6 * u.norm());
    }

    #[test]
    fn exclusive_bound_never_exceeds_inclusive(
        layers in prop::collection::vec((0.1f64..50.0, 0.1f64..1e3, 0.01f64..10.0, 0.0f64..1.0), 1..5),
        n in 1usize..10_000,
    ) {
        let specs: Vec<LayerSpec> = layers.iter().map(|&(m, v, g, r)| LayerSpec::new(m, v, g, g * r).unwrap()).collect();
        let d = specs.len();
        let inc = generalization_bound(&specs, 1.0, n, d, NormChoice::Inclusive).unwrap();
        let exc = generalization_bound(&specs, 1.0, n, d, NormChoice::Exclusive).unwrap();
        prop_assert!(exc <= inc);
        let ratio: f64 = layers.iter().map(|l| l.3).product();
        prop_assert!((exc / inc - ratio).abs() <= 1e-12 * ratio.max(1e-300) + 1e-300);
    }
}
