//! Closed-form predictions for `Q[φ]`, `a11`, the field `∇u` and the location
//! of its maximum.

use serde::{Deserialize, Serialize};

use crate::auxfields::{ubar, ubar0, BoundaryData, FieldSample};
use crate::error::{Error, Result};
use crate::geometry::GapGeometry;
use crate::refsolver::LimitQuantities;
use crate::regimes::{
    gamma_const, remainder_power, remainder_power_odd, rho, rho_power, sphere_factor, BoundaryClass, Branch, RatePower,
    RegimeCase,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitUse {
    QStar,
    A11Star,
}

/// `coefficient · ε^p |ln ε|^q · (1 + O(remainder))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub coefficient: f64,
    pub power: RatePower,
    pub remainder: RatePower,
    pub uses_limit_quantity: Option<LimitUse>,
    /// The branch needs a nonzero limit quantity and got zero.
    pub degenerate: bool,
}

impl Expansion {
    pub fn value(&self, eps: f64) -> f64 {
        self.coefficient * self.power.value(eps)
    }
}

fn q_star(limits: Option<&LimitQuantities>) -> Result<f64> {
    limits.and_then(|l| l.q_star).ok_or(Error::MissingLimit("Q*"))
}

/// Leading term of `Q[φ]`.
pub fn expand_q(
    n: u32,
    m: u32,
    class: BoundaryClass,
    lambda: f64,
    limits: Option<&LimitQuantities>,
) -> Result<Expansion> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    match class {
        BoundaryClass::Growth { eta, k } if m >= n + k - 1 => {
            let coefficient = sphere_factor(n) * eta * gamma_const(n, m, k)?
                / (m as f64 * lambda.powf((n + k - 1) as f64 / m as f64));
            Ok(Expansion {
                coefficient,
                power: rho_power(n, m, k),
                remainder: remainder_power(n, m, k),
                uses_limit_quantity: None,
                degenerate: false,
            })
        }
        BoundaryClass::Growth { k, .. } => {
            let q = q_star(limits)?;
            let (n, m, k) = (n as i64, m as i64, k as i64);
            Ok(Expansion {
                coefficient: q,
                power: RatePower::one(),
                remainder: RatePower::eps(n + k - 1 - m, (n + k - 1) * (m + 1)),
                uses_limit_quantity: Some(LimitUse::QStar),
                degenerate: q == 0.0,
            })
        }
        BoundaryClass::Odd { .. } => {
            let q = q_star(limits)?;
            let (n, m) = (n as i64, m as i64);
            Ok(Expansion {
                coefficient: q,
                power: RatePower::one(),
                remainder: RatePower::eps(m + n - 2, (m + 1) * (2 * m + n - 2)),
                uses_limit_quantity: Some(LimitUse::QStar),
                degenerate: q == 0.0,
            })
        }
    }
}

/// Leading term of `a11`.
pub fn expand_a11(n: u32, m: u32, lambda: f64, limits: Option<&LimitQuantities>) -> Result<Expansion> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if m + 1 >= n {
        let coefficient =
            sphere_factor(n) * gamma_const(n, m, 0)? / (m as f64 * lambda.powf((n - 1) as f64 / m as f64));
        let mi = m as i64;
        let remainder = if m > n {
            RatePower::eps(1, mi)
        } else if m == n {
            RatePower::new(RatePower::eps(1, mi).eps_exponent, 1)
        } else {
            RatePower::log(-1)
        };
        Ok(Expansion {
            coefficient,
            power: rho_power(n, m, 0),
            remainder,
            uses_limit_quantity: None,
            degenerate: false,
        })
    } else {
        let a = limits.and_then(|l| l.a11_star).ok_or(Error::MissingLimit("a11*"))?;
        Ok(Expansion {
            coefficient: a,
            power: RatePower::one(),
            remainder: RatePower::eps(1, 6),
            uses_limit_quantity: Some(LimitUse::A11Star),
            degenerate: false,
        })
    }
}

/// Leading-order field at a point of `Ω_R`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientPrediction {
    /// `value = c·ū + ū₀`, `gradient = c·∇ū + ∇ū₀`.
    pub sample: FieldSample,
    /// Coefficient `c` of `∇ū`.
    pub coefficient: f64,
    /// `δ(x')^{1-2/m}·‖φ‖_{C²}`, the size of the absolute remainder.
    pub remainder_bound: f64,
    /// Relative remainder of the coefficient (`r_ε` or `r̃_ε`).
    pub relative_factor: f64,
    pub degenerate: bool,
    pub note: Option<String>,
}

/// Coefficient of `∇ū` in the field expansion.
pub fn field_coefficient(
    geom: &GapGeometry,
    regime: &RegimeCase,
    limits: Option<&LimitQuantities>,
) -> Result<(f64, bool)> {
    let (n, m, eps) = (geom.n, geom.m, geom.epsilon);
    let lambda = geom.lambda;
    match (regime.branch, regime.boundary_class) {
        (Branch::SingularFlux, BoundaryClass::Growth { eta, k }) => {
            let (_, rk) = rho(n, m, k, eps)?;
            let (_, r0) = rho(n, m, 0, eps)?;
            let c = eta * gamma_const(n, m, k)? / (lambda.powf(k as f64 / m as f64) * gamma_const(n, m, 0)?);
            Ok((c * rk / r0, false))
        }
        (Branch::SingularFlux, BoundaryClass::Odd { .. }) => {
            Err(Error::Regime("odd data has no singular-flux branch".into()))
        }
        (Branch::SingularEnergy, _) => {
            let q = q_star(limits)?;
            let (_, r0) = rho(n, m, 0, eps)?;
            let c = m as f64 * lambda.powf((n - 1) as f64 / m as f64) * q / (sphere_factor(n) * gamma_const(n, m, 0)?);
            Ok((c / r0, q == 0.0))
        }
        (Branch::Regular, _) => {
            let q = q_star(limits)?;
            let a = limits.and_then(|l| l.a11_star).ok_or(Error::MissingLimit("a11*"))?;
            if !(a > 0.0) {
                return Err(Error::Domain(format!("a11* must be positive, got {a}")));
            }
            Ok((q / a, q == 0.0))
        }
    }
}

/// `∇u ≈ c·∇ū + ∇ū₀` at `x ∈ Ω_R`.
pub fn gradient_asymptotic(
    geom: &GapGeometry,
    phi: &BoundaryData,
    regime: &RegimeCase,
    limits: Option<&LimitQuantities>,
    x: &[f64],
) -> Result<GradientPrediction> {
    let n = geom.n as usize;
    if x.len() != n {
        return Err(Error::Domain(format!("point has {} coordinates, expected {n}", x.len())));
    }
    let r = x[..n - 1].iter().map(|c| c * c).sum::<f64>().sqrt();
    if r > geom.patch_radius {
        return Err(Error::Domain(format!("|x'| = {r} outside Ω_R")));
    }
    if phi.class() != Some(regime.boundary_class) {
        return Err(Error::Regime("boundary data does not match the regime".into()));
    }
    let (mut coefficient, degenerate) = field_coefficient(geom, regime, limits)?;
    let note = if degenerate {
        coefficient = 0.0;
        Some("outside theorem hypotheses: Q* = 0, reporting the ū₀ term only".to_string())
    } else {
        None
    };
    let u = ubar(geom, x)?;
    let u0 = ubar0(geom, phi, x)?;
    let gradient = u.gradient.iter().zip(&u0.gradient).map(|(a, b)| coefficient * a + b).collect();
    let delta = geom.delta_radial(r);
    let relative_factor = regime.remainder(geom.n, geom.m).value(geom.epsilon);
    Ok(GradientPrediction {
        sample: FieldSample { point: x.to_vec(), value: coefficient * u.value + u0.value, gradient },
        coefficient,
        remainder_bound: delta.powf(1.0 - 2.0 / geom.m as f64) * phi.c2_norm(geom),
        relative_factor,
        degenerate,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxTag {
    AxisOnly,
    RingOnly,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxLocation {
    pub tag: MaxTag,
    /// `ε^{1/m}` when a ring is predicted.
    pub ring_radius_scale: Option<RatePower>,
}

/// Where `|∇u|` peaks: on the axis `x' = 0`, on the ring `|x'| ≈ ε^{1/m}`, or both.
pub fn predicted_max_location(regime: &RegimeCase, n: u32, m: u32) -> MaxLocation {
    let tag = match regime.boundary_class {
        BoundaryClass::Growth { k, .. } => {
            if m < n + k {
                MaxTag::AxisOnly
            } else {
                MaxTag::Both
            }
        }
        BoundaryClass::Odd { .. } => {
            if m < n {
                MaxTag::AxisOnly
            } else if m == n {
                MaxTag::Both
            } else {
                MaxTag::RingOnly
            }
        }
    };
    let ring_radius_scale = match tag {
        MaxTag::AxisOnly => None,
        _ => Some(RatePower::eps(1, m as i64)),
    };
    MaxLocation { tag, ring_radius_scale }
}

/// Remainder of the coefficient for the data class, independent of branch.
pub fn coefficient_remainder(n: u32, m: u32, class: BoundaryClass) -> RatePower {
    match class {
        BoundaryClass::Growth { k, .. } => remainder_power(n, m, k),
        BoundaryClass::Odd { .. } => remainder_power_odd(n, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regimes::classify_class;
    use std::f64::consts::PI;

    fn growth(k: u32) -> BoundaryClass {
        BoundaryClass::Growth { eta: 1.0, k }
    }

    #[test]
    fn expand_q_examples() {
        let e = expand_q(2, 4, growth(2), 1.0, None).unwrap();
        assert!((e.coefficient - PI / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(e.power, RatePower::eps(-1, 4));
        let e = expand_q(2, 3, growth(2), 1.0, None).unwrap();
        assert_eq!(e.power, RatePower::log(1));
        assert_eq!(e.remainder, RatePower::log(-1));
        let lim = LimitQuantities::given(Some(0.7), None);
        let e = expand_q(2, 2, growth(2), 1.0, Some(&lim)).unwrap();
        assert_eq!((e.coefficient, e.power, e.remainder), (0.7, RatePower::one(), RatePower::eps(1, 9)));
        assert!(matches!(expand_q(2, 2, growth(2), 1.0, None), Err(Error::MissingLimit("Q*"))));
    }

    #[test]
    fn expand_a11_examples() {
        let e = expand_a11(2, 2, 1.0, None).unwrap();
        assert!((e.coefficient - PI).abs() < 1e-12);
        assert_eq!(e.power, RatePower::eps(-1, 2));
        let e = expand_a11(3, 2, 1.0, None).unwrap();
        assert!((e.coefficient - PI).abs() < 1e-12);
        assert_eq!(e.power, RatePower::log(1));
        let lim = LimitQuantities::given(None, Some(2.5));
        let e = expand_a11(5, 2, 1.0, Some(&lim)).unwrap();
        assert_eq!((e.coefficient, e.remainder), (2.5, RatePower::eps(1, 6)));
    }

    #[test]
    fn axis_prediction_for_quartic() {
        let eps = 1e-4;
        let g = GapGeometry::standard(2, 4, 1.0, eps).unwrap();
        let phi = BoundaryData::growth(1.0, 2);
        let regime = classify_class(2, 4, growth(2)).unwrap();
        let p = gradient_asymptotic(&g, &phi, &regime, None, &[0.0, eps / 2.0]).unwrap();
        assert!((p.coefficient - eps.sqrt()).abs() < 1e-12 * eps.sqrt());
        assert!((p.sample.gradient[1] - eps.powf(-0.5)).abs() < 1e-9 * eps.powf(-0.5));
        assert!(p.sample.gradient[0].abs() < 1e-15);
    }

    #[test]
    fn odd_log_prediction() {
        let eps = (-10.0f64).exp();
        let g = GapGeometry::standard(3, 2, 1.0, eps).unwrap();
        let phi = BoundaryData::growth(1.0, 2);
        let regime = classify_class(3, 2, growth(2)).unwrap();
        let lim = LimitQuantities::given(Some(1.5), None);
        let (c, degenerate) = field_coefficient(&g, &regime, Some(&lim)).unwrap();
        assert!(!degenerate);
        assert!((c - 1.5 / (PI * 10.0)).abs() < 1e-12);
        let p = gradient_asymptotic(&g, &phi, &regime, Some(&lim), &[0.0, 0.0, eps / 2.0]).unwrap();
        assert!((p.sample.gradient[2] - 1.5 / (PI * eps * 10.0) + 0.0).abs() < 1e-9 * p.sample.gradient[2]);
    }

    #[test]
    fn zero_q_star_is_degenerate() {
        let g = GapGeometry::standard(2, 3, 1.0, 1e-3).unwrap();
        let phi = BoundaryData::odd(1.0, 1);
        let regime = classify_class(2, 3, BoundaryClass::Odd { odd_index: 1 }).unwrap();
        let lim = LimitQuantities::given(Some(0.0), None);
        let p = gradient_asymptotic(&g, &phi, &regime, Some(&lim), &[0.1, 0.0005]).unwrap();
        assert!(p.degenerate && p.note.is_some() && p.coefficient == 0.0);
    }

    #[test]
    fn max_location_examples() {
        let loc = |n, m, class| predicted_max_location(&classify_class(n, m, class).unwrap(), n, m).tag;
        assert_eq!(loc(2, 3, growth(2)), MaxTag::AxisOnly);
        assert_eq!(loc(2, 5, growth(2)), MaxTag::Both);
        assert_eq!(loc(3, 4, BoundaryClass::Odd { odd_index: 1 }), MaxTag::RingOnly);
        assert_eq!(loc(3, 3, BoundaryClass::Odd { odd_index: 2 }), MaxTag::Both);
    }
}
