mod common;

use approx::assert_relative_eq;
use common::{gamma_by_quadrature, half_line, r_table, r_tilde_table, simpson, unit_sphere_surface};
use gapfield::asymptotics::{
    expand_a11, expand_q, field_coefficient, gradient_asymptotic, predicted_max_location, LimitUse, MaxTag,
};
use gapfield::auxfields::BoundaryData;
use gapfield::geometry::GapGeometry;
use gapfield::refsolver::LimitQuantities;
use gapfield::regimes::{
    classify, gamma_const, remainder_power, remainder_power_odd, remainder_rate, remainder_rate_odd, rho, rho_power,
    sphere_factor, BoundaryClass, Branch, RatePower,
};
use gapfield::Error;
use std::f64::consts::PI;

fn growth(k: u32) -> BoundaryClass {
    BoundaryClass::Growth { eta: 1.0, k }
}

#[test]
fn gamma_constant_examples() {
    assert_relative_eq!(gamma_const(2, 2, 0).unwrap(), PI, max_relative = 1e-12);
    assert_eq!(gamma_const(3, 2, 0).unwrap(), 1.0);
    assert_relative_eq!(gamma_const(2, 4, 2).unwrap(), PI * 2f64.sqrt(), max_relative = 1e-12);
    assert_relative_eq!(gamma_const(2, 4, 2).unwrap(), 4.442883, epsilon = 1e-6);
    assert!(gamma_const(5, 2, 0).is_err());
}

#[test]
fn gamma_constant_matches_quadrature_of_gamma() {
    for (n, m, i) in [(2, 2, 0), (2, 4, 2), (2, 3, 0), (3, 5, 1), (2, 7, 3), (4, 9, 0)] {
        let s = (n + i - 1) as f64 / m as f64;
        let oracle = gamma_by_quadrature(s) * gamma_by_quadrature(1.0 - s);
        assert_relative_eq!(gamma_const(n, m, i).unwrap(), oracle, max_relative = 1e-8);
    }
}

#[test]
fn sphere_factor_examples() {
    assert_relative_eq!(sphere_factor(2), 2.0, max_relative = 1e-14);
    assert_relative_eq!(sphere_factor(3), 2.0 * PI, max_relative = 1e-14);
    assert_relative_eq!(sphere_factor(4), 4.0 * PI, max_relative = 1e-14);
    for n in 2..=9 {
        assert_relative_eq!(sphere_factor(n), unit_sphere_surface(n - 1), max_relative = 1e-12);
    }
}

#[test]
fn rho_examples() {
    assert_relative_eq!(rho(2, 2, 0, 1e-4).unwrap().1, 100.0, max_relative = 1e-12);
    assert_relative_eq!(rho(3, 2, 0, (-10f64).exp()).unwrap().1, 10.0, max_relative = 1e-12);
    assert_eq!(rho(5, 2, 0, 0.37).unwrap().1, 1.0);
    assert!(rho(2, 2, 0, 1.5).is_err());
}

#[test]
fn growth_remainder_examples() {
    let eps = 1e-6;
    assert_eq!(remainder_rate(2, 7, 2, eps).unwrap().0, RatePower::eps(1, 7));
    assert_eq!(remainder_rate(2, 3, 2, eps).unwrap().0, RatePower::log(-1));
    let (p, v) = remainder_rate(4, 2, 2, eps).unwrap();
    assert_eq!(p, RatePower::eps(1, 6));
    assert_relative_eq!(v, 0.1, max_relative = 1e-12);
}

#[test]
fn odd_remainder_examples() {
    // (m+n-2)/((m+1)(2m+n-2)) at (n, m) = (2, 3) is 3/24
    assert_eq!(remainder_rate_odd(2, 3, 1e-3).unwrap().0, RatePower::eps(1, 8));
    assert_eq!(remainder_rate_odd(3, 2, 1e-3).unwrap().0, RatePower::log(-1));
    // 5/21 > 1/6, so the max is ε^{1/6}
    assert_eq!(remainder_rate_odd(5, 2, 1e-6).unwrap().0, RatePower::eps(1, 6));
}

#[test]
fn classify_examples() {
    let g2 = BoundaryData::growth(1.0, 2);
    assert_eq!(classify(2, 5, &g2).unwrap().branch, Branch::SingularFlux);
    assert_eq!(classify(5, 2, &g2).unwrap().branch, Branch::Regular);
    assert_eq!(classify(3, 3, &BoundaryData::odd(1.0, 1)).unwrap().branch, Branch::SingularEnergy);
    assert!(matches!(classify(2, 2, &BoundaryData::constant(1.0)), Err(Error::Unclassifiable(_))));
}

/// `∫_{R^{n-1}} |x'|^k / (ε + λ|x'|^m) dx'` by quadrature.
fn patch_integral(n: u32, m: u32, k: u32, lambda: f64, eps: f64) -> f64 {
    let f = |s: f64| s.powi((n - 2 + k) as i32) / (eps + lambda * s.powi(m as i32));
    unit_sphere_surface(n - 1) * half_line(&f, 1e-12)
}

#[test]
fn flux_coefficient_matches_quadrature() {
    // 2∫_0^∞ s²/(ε+s⁴) ds = (π/√2) ε^{-1/4}
    let e = expand_q(2, 4, growth(2), 1.0, None).unwrap();
    assert_relative_eq!(e.coefficient, PI / 2f64.sqrt(), max_relative = 1e-12);
    assert_eq!(e.power, RatePower::eps(-1, 4));
    for eps in [1e-2, 1e-4] {
        assert_relative_eq!(patch_integral(2, 4, 2, 1.0, eps), e.value(eps), max_relative = 1e-8);
    }
    for (n, k) in [(2, 2), (2, 3), (3, 2), (4, 2)] {
        for m in (n + k)..=(n + k + 4) {
            for lambda in [0.5, 2.0] {
                let e = expand_q(n, m, BoundaryClass::Growth { eta: 1.5, k }, lambda, None).unwrap();
                let oracle = 1.5 * patch_integral(n, m, k, lambda, 1e-3);
                assert_relative_eq!(e.value(1e-3), oracle, max_relative = 1e-7);
            }
        }
    }
}

#[test]
fn energy_coefficient_matches_quadrature() {
    let e = expand_a11(2, 2, 1.0, None).unwrap();
    assert_relative_eq!(e.coefficient, PI, max_relative = 1e-12);
    assert_eq!(e.power, RatePower::eps(-1, 2));
    for n in 2..=4 {
        for m in n..=n + 5 {
            let e = expand_a11(n, m, 0.7, None).unwrap();
            assert_relative_eq!(e.value(1e-3), patch_integral(n, m, 0, 0.7, 1e-3), max_relative = 1e-7);
        }
    }
}

#[test]
fn energy_log_case() {
    let e = expand_a11(3, 2, 1.0, None).unwrap();
    assert_relative_eq!(e.coefficient, PI, max_relative = 1e-12);
    assert_eq!(e.power, RatePower::log(1));
    // 2π∫_0^R s/(ε+s²) ds = π ln(1+R²/ε): leading term π|ln ε| up to O(1)
    let r = 0.5f64;
    for eps in [1e-4, 1e-8, 1e-12] {
        let f = |s: f64| 2.0 * PI * s / (eps + s * s);
        let quad = simpson(&f, 0.0, r, 1e-12);
        assert_relative_eq!(quad, PI * (1.0 + r * r / eps).ln(), max_relative = 1e-9);
        assert!((quad - e.value(eps)).abs() <= PI * (r * r).ln().abs() + 1e-6);
    }
}

#[test]
fn flux_tie_and_limit_branches() {
    let tie = expand_q(2, 3, growth(2), 1.0, None).unwrap();
    assert_eq!(tie.power, RatePower::log(1));
    assert_eq!(tie.remainder, RatePower::log(-1));

    let lim = LimitQuantities::given(Some(0.8), None);
    let e = expand_q(2, 2, growth(2), 1.0, Some(&lim)).unwrap();
    assert_eq!(e.coefficient, 0.8);
    assert!(e.power.is_one());
    assert_eq!(e.remainder, RatePower::eps(1, 9));
    assert_eq!(e.uses_limit_quantity, Some(LimitUse::QStar));
    assert!(matches!(expand_q(2, 2, growth(2), 1.0, None), Err(Error::MissingLimit("Q*"))));
}

#[test]
fn energy_regular_branch() {
    let lim = LimitQuantities::given(None, Some(2.5));
    let e = expand_a11(5, 2, 1.0, Some(&lim)).unwrap();
    assert_eq!(e.coefficient, 2.5);
    assert_eq!(e.remainder, RatePower::eps(1, 6));
    assert!(expand_a11(5, 2, 1.0, None).is_err());
}

#[test]
fn field_prediction_on_the_axis() {
    let eps = 1e-4;
    let geom = GapGeometry::standard(2, 4, 1.0, eps).unwrap();
    let phi = BoundaryData::growth(1.0, 2);
    let regime = classify(2, 4, &phi).unwrap();
    let p = gradient_asymptotic(&geom, &phi, &regime, None, &[0.0, eps / 2.0]).unwrap();
    assert_relative_eq!(p.coefficient, eps.sqrt(), max_relative = 1e-10);
    assert!(p.sample.gradient[0].abs() < 1e-12);
    assert_relative_eq!(p.sample.gradient[1], eps.powf(-0.5), max_relative = 1e-10);
}

#[test]
fn field_prediction_for_zero_data_vanishes() {
    let geom = GapGeometry::standard(2, 4, 1.0, 1e-3).unwrap();
    let phi = BoundaryData::growth(0.0, 2);
    let regime = classify(2, 4, &phi).unwrap();
    let p = gradient_asymptotic(&geom, &phi, &regime, None, &[0.05, 1e-3]).unwrap();
    assert_eq!(p.coefficient, 0.0);
    assert!(p.sample.gradient.iter().all(|g| *g == 0.0));
}

#[test]
fn field_prediction_log_energy_branch() {
    let (eps, q) = (1e-3, 1.7);
    let geom = GapGeometry::standard(3, 2, 1.0, eps).unwrap();
    let phi = BoundaryData::growth(1.0, 2);
    let regime = classify(3, 2, &phi).unwrap();
    assert_eq!(regime.branch, Branch::SingularEnergy);
    let lim = LimitQuantities::given(Some(q), None);
    let p = gradient_asymptotic(&geom, &phi, &regime, Some(&lim), &[0.0, 0.0, eps / 2.0]).unwrap();
    assert_relative_eq!(p.sample.gradient[2], q / (PI * eps * eps.ln().abs()), max_relative = 1e-10);
    assert!(matches!(
        gradient_asymptotic(&geom, &phi, &regime, None, &[0.0, 0.0, eps / 2.0]),
        Err(Error::MissingLimit("Q*"))
    ));
}

#[test]
fn vanishing_limit_is_degenerate() {
    let geom = GapGeometry::standard(2, 2, 1.0, 1e-3).unwrap();
    let regime = classify(2, 2, &BoundaryData::odd(1.0, 1)).unwrap();
    let lim = LimitQuantities::given(Some(0.0), None);
    let (_, degenerate) = field_coefficient(&geom, &regime, Some(&lim)).unwrap();
    assert!(degenerate);
}

#[test]
fn max_location_examples() {
    let tag = |n, m, phi: BoundaryData| predicted_max_location(&classify(n, m, &phi).unwrap(), n, m);
    assert_eq!(tag(2, 3, BoundaryData::growth(1.0, 2)).tag, MaxTag::AxisOnly);
    let both = tag(2, 5, BoundaryData::growth(1.0, 2));
    assert_eq!(both.tag, MaxTag::Both);
    assert_eq!(both.ring_radius_scale, Some(RatePower::eps(1, 5)));
    let ring = tag(3, 4, BoundaryData::odd(1.0, 1));
    assert_eq!(ring.tag, MaxTag::RingOnly);
    assert_eq!(ring.ring_radius_scale, Some(RatePower::eps(1, 4)));
    assert_eq!(tag(3, 3, BoundaryData::odd(1.0, 2)).tag, MaxTag::Both);
    assert_eq!(tag(3, 2, BoundaryData::odd(1.0, 2)).tag, MaxTag::AxisOnly);
}

#[test]
fn field_coefficient_is_the_expansion_quotient() {
    for n in 2..=4u32 {
        for k in 2..=4u32 {
            for m in (n + k - 1)..=(n + k + 4) {
                let eps = 1e-3;
                let geom = GapGeometry::standard(n, m, 0.8, eps).unwrap();
                let phi = BoundaryData::growth(0.9, k);
                let regime = classify(n, m, &phi).unwrap();
                let (c, _) = field_coefficient(&geom, &regime, None).unwrap();
                let q = expand_q(n, m, phi.class().unwrap(), 0.8, None).unwrap();
                let a = expand_a11(n, m, 0.8, None).unwrap();
                let ratio = q.value(eps) / a.value(eps);
                assert_relative_eq!(c, ratio, max_relative = 1e-10);
                let symbolic = rho_power(n, m, k).div(rho_power(n, m, 0));
                assert_relative_eq!(
                    symbolic.value(eps),
                    rho(n, m, k, eps).unwrap().1 / rho(n, m, 0, eps).unwrap().1,
                    max_relative = 1e-12
                );
            }
        }
    }
}

#[test]
fn lambda_scaling_of_coefficients() {
    let (n, m, k) = (2u32, 5u32, 2u32);
    let a1 = expand_a11(n, m, 1.0, None).unwrap().coefficient;
    let q1 = expand_q(n, m, growth(k), 1.0, None).unwrap().coefficient;
    for lambda in [0.5, 2.0] {
        let a = expand_a11(n, m, lambda, None).unwrap().coefficient;
        let q = expand_q(n, m, growth(k), lambda, None).unwrap().coefficient;
        assert_relative_eq!(a / a1, lambda.powf(-((n - 1) as f64) / m as f64), max_relative = 1e-12);
        assert_relative_eq!(q / q1, lambda.powf(-((n + k - 1) as f64) / m as f64), max_relative = 1e-12);
    }
}

#[test]
fn rate_tables_on_exhaustive_grid() {
    for n in 2..=6u32 {
        for m in 2..=10u32 {
            let p = remainder_power_odd(n, m);
            let (e, l) = r_tilde_table(n as i64, m as i64);
            assert!((p.eps_f64() - e).abs() < 1e-15 && p.log_exponent == l, "odd ({n},{m})");
            for k in 2..=5u32 {
                let p = remainder_power(n, m, k);
                let (e, l) = r_table(n as i64, m as i64, k as i64);
                assert!((p.eps_f64() - e).abs() < 1e-15 && p.log_exponent == l, "({n},{m},{k})");
            }
        }
    }
}
