use std::sync::Arc;

use approx::assert_relative_eq;
use gapfield::auxfields::{ubar, ubar0, vbar, BoundaryData, ConstantFn, CoordinateFn};
use gapfield::geometry::{FlatProfile, FnProfile, GapGeometry, OuterDomain, RadialProfile};

fn std_geom(n: u32, m: u32, lambda: f64, eps: f64) -> GapGeometry {
    GapGeometry::standard(n, m, lambda, eps).unwrap()
}

#[test]
fn gap_width_examples() {
    let g = std_geom(2, 2, 1.0, 0.01);
    assert_relative_eq!(g.gap_delta(&[0.1]).unwrap(), 0.02, max_relative = 1e-14);
    assert_eq!(g.gap_delta(&[0.0]).unwrap(), 0.01);
    let outer = OuterDomain { center_height: 2.5, ..OuterDomain::default() };
    let h1 = RadialProfile::new(2.0, 4).unwrap();
    let g = GapGeometry::new(2, 4, 1e-4, 0.5, 2.0, Arc::new(FlatProfile), Arc::new(h1), outer).unwrap();
    assert_relative_eq!(g.gap_delta(&[0.1]).unwrap(), 3e-4, max_relative = 1e-12);
    assert!(g.gap_delta(&[2.5 * g.patch_radius]).is_err());
}

#[test]
fn normal_examples() {
    let g = std_geom(2, 2, 1.0, 0.01);
    assert_eq!(g.boundary_normal(&[0.0]).unwrap(), vec![0.0, -1.0]);
    let nu = g.boundary_normal(&[0.5]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert_relative_eq!(nu[0], s, max_relative = 1e-14);
    assert_relative_eq!(nu[1], -s, max_relative = 1e-14);
    let g = std_geom(2, 3, 1.0, 0.01);
    let nu = g.boundary_normal(&[0.1]).unwrap();
    let norm = (1.0f64 + 0.0009).sqrt();
    assert_relative_eq!(nu[0], 0.03 / norm, max_relative = 1e-12);
    assert_relative_eq!(nu[1], -1.0 / norm, max_relative = 1e-12);
}

#[test]
fn narrow_region_membership() {
    let eps = 0.01;
    let g = std_geom(2, 2, 1.0, eps);
    let r = g.patch_radius;
    assert!(g.in_gap(&[0.0, eps / 2.0], r));
    assert!(!g.in_gap(&[0.0, 2.0 * eps], r));
    assert!(!g.in_gap(&[1.5 * r, eps / 2.0], r));
}

#[test]
fn exact_profile_passes_hypotheses() {
    let rep = std_geom(2, 3, 1.0, 1e-3).check_hypotheses(64).unwrap();
    assert!(rep.all_pass());
    assert!(rep.correction_residual < 1e-14);
}

#[test]
fn quartic_correction_is_bounded_by_r_squared() {
    let h1 = RadialProfile::with_correction(1.0, 2, vec![0.0, 1.0]).unwrap();
    let outer = OuterDomain { center_height: 2.5, ..OuterDomain::default() };
    let g = GapGeometry::new(2, 2, 1e-3, 0.5, 1.0, Arc::new(FlatProfile), Arc::new(h1), outer).unwrap();
    let rep = g.check_hypotheses(64).unwrap();
    assert!(rep.leading_term.pass);
    assert!(rep.correction_residual <= g.two_r().powi(2) * (1.0 + 1e-12));
}

#[test]
fn wrong_convexity_order_fails() {
    let h1 = FnProfile::new(|r| r.powf(1.5));
    let g =
        GapGeometry::new(2, 2, 1e-3, 0.5, 1.0, Arc::new(FlatProfile), Arc::new(h1), OuterDomain::default()).unwrap();
    assert!(!g.check_hypotheses(64).unwrap().leading_term.pass);
}

#[test]
fn ubar_examples() {
    let eps = 0.01;
    let g = std_geom(2, 2, 1.0, eps);
    let s = ubar(&g, &[0.0, eps / 2.0]).unwrap();
    assert_relative_eq!(s.value, 0.5, max_relative = 1e-14);
    assert_eq!(s.gradient[0], 0.0);
    assert_relative_eq!(s.gradient[1], 1.0 / eps, max_relative = 1e-14);
    assert_eq!(ubar(&g, &[0.3, 0.0]).unwrap().value, 0.0);
    let s = ubar(&g, &[0.1, 0.01]).unwrap();
    assert_relative_eq!(s.value, 0.5, max_relative = 1e-12);
    assert_relative_eq!(s.gradient[1], 50.0, max_relative = 1e-12);
}

#[test]
fn ubar0_examples() {
    let eps = 0.01;
    let g = std_geom(2, 2, 1.0, eps);
    let phi = BoundaryData::growth(1.0, 2);
    let top = eps + g.h1.value(0.2);
    assert!(ubar0(&g, &phi, &[0.2, top]).unwrap().value.abs() < 1e-14);
    assert_relative_eq!(ubar0(&g, &phi, &[0.1, 0.0]).unwrap().value, 0.01, max_relative = 1e-12);
    let z = ubar0(&g, &BoundaryData::zero(), &[0.1, 0.005]).unwrap();
    assert_eq!(z.value, 0.0);
    assert!(z.gradient.iter().all(|c| *c == 0.0));
}

#[test]
fn vbar_examples() {
    let eps = 0.01;
    let g = std_geom(2, 2, 1.0, eps);
    for x in [[0.0, 0.004], [0.3, 0.05], [0.8, 0.3]] {
        let v = vbar(&g, &ConstantFn(1.0), None, &x).unwrap();
        let u = ubar(&g, &x).unwrap();
        assert_relative_eq!(v.value, u.value, max_relative = 1e-14);
        assert_eq!(vbar(&g, &ConstantFn(0.0), None, &x).unwrap().value, 0.0);
    }
    let top = eps + g.h1.value(0.1);
    assert_relative_eq!(vbar(&g, &CoordinateFn(1), None, &[0.1, top]).unwrap().value, 0.1, max_relative = 1e-12);
}

#[test]
fn ubar_beyond_patch_needs_an_extension() {
    let g = std_geom(2, 2, 1.0, 0.01);
    assert!(ubar(&g, &[2.5 * g.patch_radius, 0.1]).is_err());
}
