mod common;

use gapfield::asymptotics::{expand_a11, expand_q, gradient_asymptotic, predicted_max_location, MaxTag};
use gapfield::auxfields::{ubar, ubar0, vbar, BoundaryData, CoordinateFn, FieldSample};
use gapfield::geometry::GapGeometry;
use gapfield::regimes::RatePower;
use gapfield::regimes::{
    classify_class, gamma_const, remainder_rate, remainder_rate_odd, rho, rho_power, BoundaryClass, Branch,
};
use gapfield::validate::{fit_series, FitModel};
use proptest::prelude::*;
use std::f64::consts::PI;

fn geom(n: u32, m: u32, lambda: f64, eps: f64) -> GapGeometry {
    GapGeometry::standard(n, m, lambda, eps).unwrap()
}

/// Point in the gap at radius fraction `a` of `2R`, height fraction `t`, angle `phi` (n = 3).
fn gap_point(g: &GapGeometry, a: f64, t: f64, phi: f64) -> Vec<f64> {
    let r = a * g.two_r();
    let xn = g.h.value(r) + t * g.delta_radial(r);
    if g.n == 2 {
        vec![r, xn]
    } else {
        vec![r * phi.cos(), r * phi.sin(), xn]
    }
}

fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let (mut p, mut q) = (x.to_vec(), x.to_vec());
            p[i] += h;
            q[i] -= h;
            (f(&p) - f(&q)) / (2.0 * h)
        })
        .collect()
}

fn assert_gradient(sample: &FieldSample, fd: &[f64]) -> Result<(), TestCaseError> {
    let scale = sample.gradient.iter().map(|g| g * g).sum::<f64>().sqrt().max(1e-12);
    for (a, b) in sample.gradient.iter().zip(fd) {
        prop_assert!((a - b).abs() <= 1e-6 * scale, "analytic {a} vs fd {b}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_width_invariants(m in 2u32..8, lambda in 0.2f64..0.9, le in -6.0f64..-1.5, a in 0.0f64..1.0) {
        let eps = 10f64.powf(le);
        let g = geom(2, m, lambda, eps);
        prop_assert_eq!(g.gap_delta(&[0.0]).unwrap(), eps);
        let z = a * g.patch_radius;
        let d = g.gap_delta(&[z]).unwrap();
        prop_assert!(d >= eps * (1.0 - 1e-12));
        prop_assert!((d - eps - lambda * z.powi(m as i32)).abs() <= 1e-15 * (1.0 + d));
    }

    #[test]
    fn normal_is_unit_and_points_down(m in 2u32..8, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let g2 = geom(2, m, 1.0, 1e-3);
        let g3 = geom(3, m, 1.0, 1e-3);
        for nu in [g2.boundary_normal(&[a * g2.two_r()]).unwrap(), g3.boundary_normal(&[0.7 * a, 0.7 * b]).unwrap()] {
            let len = nu.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((len - 1.0).abs() < 1e-12);
            prop_assert!(*nu.last().unwrap() < 0.0);
        }
    }

    #[test]
    fn keystone_gradients_match_differences(
        n in 2u32..4, m in 2u32..6, le in -4.0f64..-1.5, a in 0.01f64..0.95, t in 0.05f64..0.95, phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let eps = 10f64.powf(le);
        let g = geom(n, m, 1.0, eps);
        let x = gap_point(&g, a, t, phi);
        let r = a * g.two_r();
        let h = 1e-6 * g.delta_radial(r);
        let data = BoundaryData::growth(1.3, 2);
        assert_gradient(&ubar(&g, &x).unwrap(), &fd_gradient(&|p| ubar(&g, p).unwrap().value, &x, h))?;
        assert_gradient(&ubar0(&g, &data, &x).unwrap(), &fd_gradient(&|p| ubar0(&g, &data, p).unwrap().value, &x, h))?;
        let psi = CoordinateFn(1);
        assert_gradient(
            &vbar(&g, &psi, None, &x).unwrap(),
            &fd_gradient(&|p| vbar(&g, &psi, None, p).unwrap().value, &x, h),
        )?;
    }

    #[test]
    fn ubar_interpolates_the_boundaries(n in 2u32..4, m in 2u32..7, le in -6.0f64..-1.5, a in 0.0f64..1.0) {
        let eps = 10f64.powf(le);
        let g = geom(n, m, 1.0, eps);
        let bottom = gap_point(&g, a, 0.0, 0.3);
        let top = gap_point(&g, a, 1.0, 0.3);
        prop_assert!(ubar(&g, &bottom).unwrap().value.abs() < 1e-12);
        prop_assert!((ubar(&g, &top).unwrap().value - 1.0).abs() < 1e-12);
        let axis = gap_point(&g, 0.0, 0.5, 0.0);
        let grad = ubar(&g, &axis).unwrap().gradient;
        prop_assert!((grad.last().unwrap() - 1.0 / eps).abs() <= 1e-12 / eps);
    }

    #[test]
    fn ubar0_is_linear_in_the_data(alpha in -3.0f64..3.0, a in 0.0f64..0.95, t in 0.0f64..1.0, k in 2u32..5) {
        let g = geom(2, 3, 1.0, 1e-3);
        let x = gap_point(&g, a, t, 0.0);
        let phi = BoundaryData::growth(1.0, k);
        let base = ubar0(&g, &phi, &x).unwrap();
        let scaled = ubar0(&g, &phi.scaled(alpha), &x).unwrap();
        prop_assert!((scaled.value - alpha * base.value).abs() <= 1e-14 * (1.0 + base.value.abs()));
        for (s, b) in scaled.gradient.iter().zip(&base.gradient) {
            prop_assert!((s - alpha * b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn vbar_is_continuous_at_the_cutoff_start(t in 0.0f64..1.0, m in 2u32..5) {
        let g = geom(2, m, 1.0, 1e-3);
        let r0 = 1.5 * g.patch_radius;
        let psi = CoordinateFn(1);
        let at = |r: f64| {
            let x = [r, g.h.value(r) + t * g.delta_radial(r)];
            vbar(&g, &psi, None, &x).unwrap().value
        };
        prop_assert!((at(r0 * (1.0 - 1e-12)) - at(r0 * (1.0 + 1e-12))).abs() <= 1e-8);
        prop_assert!((at(g.two_r() * (1.0 - 1e-13)) - at(g.two_r())).abs() <= 1e-8);
    }

    #[test]
    fn gamma_constant_is_the_reflection_formula(n in 2u32..7, i in 0u32..6, extra in 1u32..8) {
        let m = n + i - 1 + extra;
        let s = (n + i - 1) as f64 / m as f64;
        let expect = PI / (PI * s).sin();
        prop_assert!((gamma_const(n, m, i).unwrap() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho_is_monotone_within_a_branch(n in 2u32..6, i in 0u32..4, extra in 1u32..6, le in -8.0f64..-1.0) {
        let m = n + i - 1 + extra;
        let (e1, e2) = (10f64.powf(le), 10f64.powf(le + 0.5));
        let (a, b) = (rho(n, m, i, e1).unwrap().1, rho(n, m, i, e2).unwrap().1);
        // exponent (n+i-1)/m - 1 < 0 here, so ρ decreases as ε grows
        prop_assert!(b < a);
    }

    #[test]
    fn remainders_are_positive_and_vanish(n in 2u32..7, m in 2u32..11, k in 2u32..6) {
        let grid = common::log_grid(-3.0, -300.0, 12);
        for rate in [
            grid.iter().map(|e| remainder_rate(n, m, k, *e).unwrap().1).collect::<Vec<_>>(),
            grid.iter().map(|e| remainder_rate_odd(n, m, *e).unwrap().1).collect::<Vec<_>>(),
        ] {
            prop_assert!(rate.iter().all(|v| *v > 0.0 && v.is_finite()));
            prop_assert!(rate.windows(2).all(|w| w[1] < w[0]));
            prop_assert!(*rate.last().unwrap() < 0.2);
        }
    }

    #[test]
    fn classification_partitions_the_lattice(n in 2u32..7, m in 2u32..12, k in 2u32..6) {
        let case = classify_class(n, m, BoundaryClass::Growth { eta: 1.0, k }).unwrap();
        let expect = if m >= n + k - 1 {
            Branch::SingularFlux
        } else if m >= n - 1 {
            Branch::SingularEnergy
        } else {
            Branch::Regular
        };
        prop_assert_eq!(case.branch, expect);
        let odd = classify_class(n, m, BoundaryClass::Odd { odd_index: 1 }).unwrap();
        prop_assert_eq!(odd.branch, if m >= n - 1 { Branch::SingularEnergy } else { Branch::Regular });
        let loc = predicted_max_location(&case, n, m).tag;
        prop_assert_eq!(loc, if m < n + k { MaxTag::AxisOnly } else { MaxTag::Both });
    }

    #[test]
    fn symbolic_rate_quotient_matches_numbers(n in 2u32..6, m in 2u32..10, k in 0u32..5, le in -10.0f64..-1.0) {
        let eps = 10f64.powf(le);
        let q = rho_power(n, m, k).div(rho_power(n, m, 0)).value(eps);
        let num = rho(n, m, k, eps).unwrap().1 / rho(n, m, 0, eps).unwrap().1;
        prop_assert!((q / num - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansions_are_linear_in_eta(n in 2u32..4, k in 2u32..4, extra in 0u32..4, eta in 0.1f64..5.0) {
        let m = n + k - 1 + extra;
        let one = expand_q(n, m, BoundaryClass::Growth { eta: 1.0, k }, 1.0, None).unwrap();
        let e = expand_q(n, m, BoundaryClass::Growth { eta, k }, 1.0, None).unwrap();
        prop_assert!((e.coefficient - eta * one.coefficient).abs() <= 1e-12 * e.coefficient.abs());
        let g = geom(n, m, 1.0, 1e-3);
        let x = gap_point(&g, 0.1, 0.5, 0.0);
        let case = classify_class(n, m, BoundaryClass::Growth { eta: 1.0, k }).unwrap();
        let p1 = gradient_asymptotic(&g, &BoundaryData::growth(1.0, k), &case, None, &x).unwrap();
        let case = classify_class(n, m, BoundaryClass::Growth { eta, k }).unwrap();
        let pe = gradient_asymptotic(&g, &BoundaryData::growth(eta, k), &case, None, &x).unwrap();
        for (a, b) in pe.sample.gradient.iter().zip(&p1.sample.gradient) {
            prop_assert!((a - eta * b).abs() <= 1e-10 * (1.0 + (eta * b).abs()));
        }
    }

    #[test]
    fn expansion_remainders_match_the_tables(n in 2u32..6, k in 2u32..5, extra in 0u32..5) {
        let m = n + k - 1 + extra;
        let e = expand_q(n, m, BoundaryClass::Growth { eta: 1.0, k }, 1.0, None).unwrap();
        for eps in common::log_grid(-2.0, -12.0, 6) {
            prop_assert_eq!(e.remainder.value(eps), remainder_rate(n, m, k, eps).unwrap().1);
        }
        let a = expand_a11(n, m.max(n - 1), 1.0, None).unwrap();
        let vals: Vec<f64> = common::log_grid(-2.0, -30.0, 8).iter().map(|e| a.remainder.value(*e)).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn power_fit_recovers_exact_exponents(num in -12i64..12, den in 1i64..12, c in 0.1f64..10.0) {
        let target = RatePower::eps(num, den);
        let eps = common::log_grid(-1.0, -8.0, 9);
        let vals: Vec<f64> = eps.iter().map(|e| c * target.value(*e)).collect();
        let fit = fit_series(&eps, &vals, FitModel::Power, target, 0.05).unwrap();
        prop_assert!((fit.slope - target.eps_f64()).abs() < 1e-10);
        prop_assert!(fit.pass && (0.0..=1.0).contains(&fit.r_squared));
    }
}
