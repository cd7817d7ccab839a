//! Closed-form rate functions and constants, and the regime classifier.
//!
//! Everything here is a pure function of the integers `(n, m, k)` and, for
//! the rate values, of the gap offset `ε ∈ (0, 1)`. Exponents are kept as
//! exact rationals so fitted slopes can be compared against exact targets.

use std::f64::consts::PI;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// `ε^p · |ln ε|^q` with `p` rational and `q` integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "RatePowerRepr", try_from = "RatePowerRepr")]
pub struct RatePower {
    pub eps_exponent: Ratio<i64>,
    pub log_exponent: i32,
}

#[derive(Serialize, Deserialize)]
struct RatePowerRepr {
    eps_num: i64,
    eps_den: i64,
    log_power: i32,
}

impl From<RatePower> for RatePowerRepr {
    fn from(p: RatePower) -> Self {
        Self { eps_num: *p.eps_exponent.numer(), eps_den: *p.eps_exponent.denom(), log_power: p.log_exponent }
    }
}

impl TryFrom<RatePowerRepr> for RatePower {
    type Error = String;

    fn try_from(r: RatePowerRepr) -> std::result::Result<Self, String> {
        if r.eps_den == 0 {
            return Err("zero denominator in rate exponent".into());
        }
        Ok(RatePower::new(Ratio::new(r.eps_num, r.eps_den), r.log_power))
    }
}

impl RatePower {
    pub fn new(eps_exponent: Ratio<i64>, log_exponent: i32) -> Self {
        Self { eps_exponent, log_exponent }
    }

    pub fn one() -> Self {
        Self::new(Ratio::from_integer(0), 0)
    }

    pub fn eps(num: i64, den: i64) -> Self {
        Self::new(Ratio::new(num, den), 0)
    }

    /// `|ln ε|^q`
    pub fn log(q: i32) -> Self {
        Self::new(Ratio::from_integer(0), q)
    }

    pub fn eps_f64(&self) -> f64 {
        *self.eps_exponent.numer() as f64 / *self.eps_exponent.denom() as f64
    }

    pub fn is_one(&self) -> bool {
        *self.eps_exponent.numer() == 0 && self.log_exponent == 0
    }

    /// Numeric value at `eps`.
    pub fn value(&self, eps: f64) -> f64 {
        let mut v = eps.powf(self.eps_f64());
        if self.log_exponent != 0 {
            v *= eps.ln().abs().powi(self.log_exponent);
        }
        v
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: RatePower) -> RatePower {
        RatePower::new(self.eps_exponent + other.eps_exponent, self.log_exponent + other.log_exponent)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, other: RatePower) -> RatePower {
        RatePower::new(self.eps_exponent - other.eps_exponent, self.log_exponent - other.log_exponent)
    }

    pub fn recip(self) -> RatePower {
        RatePower::one().div(self)
    }
}

impl fmt::Display for RatePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        if *self.eps_exponent.numer() != 0 {
            parts.push(format!("eps^({})", self.eps_exponent));
        }
        if self.log_exponent != 0 {
            parts.push(format!("|ln eps|^({})", self.log_exponent));
        }
        write!(f, "{}", parts.join(" * "))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn check_nm(n: u32, m: u32) -> Result<()> {
    if n < 2 || m < 2 {
        return Err(Error::Domain(format!("need n >= 2 and m >= 2, got n={n}, m={m}")));
    }
    Ok(())
}

/// Symbolic `ρ_i(n, m; ε)` without evaluating it.
pub fn rho_power(n: u32, m: u32, i: u32) -> RatePower {
    let d = (n + i - 1) as i64;
    let m = m as i64;
    match m.cmp(&d) {
        std::cmp::Ordering::Greater => RatePower::eps(d - m, m),
        std::cmp::Ordering::Equal => RatePower::log(1),
        std::cmp::Ordering::Less => RatePower::one(),
    }
}

/// Blow-up rate `ρ_i(n, m; ε)`: `ε^{(n+i-1)/m - 1}` above the threshold
/// `m = n+i-1`, `|ln ε|` on it and `1` below it.
pub fn rho(n: u32, m: u32, i: u32, eps: f64) -> Result<(RatePower, f64)> {
    check_nm(n, m)?;
    check_eps(eps)?;
    let p = rho_power(n, m, i);
    Ok((p, p.value(eps)))
}

/// `Γ(1-s)Γ(s)` with `s = (n+i-1)/m`, or exactly 1 when `m = n+i-1`.
pub fn gamma_const(n: u32, m: u32, i: u32) -> Result<f64> {
    check_nm(n, m)?;
    let d = n + i - 1;
    if m < d {
        return Err(Error::Domain(format!("gamma constant undefined for m={m} < n+i-1={d}")));
    }
    if m == d {
        return Ok(1.0);
    }
    let s = d as f64 / m as f64;
    Ok(gamma(1.0 - s) * gamma(s))
}

/// Surface measure of the unit sphere in `R^{n-1}`, i.e. the factor with
/// `∫_{|x'|<R} f(|x'|) dx' = sphere_factor(n) ∫_0^R f(s) s^{n-2} ds`.
pub fn sphere_factor(n: u32) -> f64 {
    assert!(n >= 2, "sphere_factor needs n >= 2");
    let d = (n - 1) as f64;
    2.0 * PI.powf(d / 2.0) / gamma(d / 2.0)
}

/// Relative remainder for the growth-data expansion of the field.
pub fn remainder_power(n: u32, m: u32, k: u32) -> RatePower {
    let (n, m, k) = (n as i64, m as i64, k as i64);
    let mixed = RatePower::eps(n + k - 1 - m, (n + k - 1) * (m + 1));
    if m > n + k {
        RatePower::eps(1, m)
    } else if m == n + k {
        RatePower::new(Ratio::new(1, m), 1)
    } else if m == n + k - 1 {
        RatePower::log(-1)
    } else if m > n - 1 {
        mixed
    } else if m == n - 1 {
        RatePower::log(-1)
    } else {
        // max{ε^a, ε^b} for ε < 1 is the power with the smaller exponent
        let sixth = RatePower::eps(1, 6);
        if mixed.eps_exponent <= sixth.eps_exponent {
            mixed
        } else {
            sixth
        }
    }
}

/// `r_ε` for growth data of order `k`.
pub fn remainder_rate(n: u32, m: u32, k: u32, eps: f64) -> Result<(RatePower, f64)> {
    check_nm(n, m)?;
    check_eps(eps)?;
    if k < 2 {
        return Err(Error::Domain(format!("growth order k must exceed 1, got {k}")));
    }
    let p = remainder_power(n, m, k);
    Ok((p, p.value(eps)))
}

/// Relative remainder for odd data.
pub fn remainder_power_odd(n: u32, m: u32) -> RatePower {
    let (n, m) = (n as i64, m as i64);
    let base = RatePower::eps(m + n - 2, (m + 1) * (2 * m + n - 2));
    if m > n - 1 {
        base
    } else if m == n - 1 {
        RatePower::log(-1)
    } else {
        let sixth = RatePower::eps(1, 6);
        if base.eps_exponent <= sixth.eps_exponent {
            base
        } else {
            sixth
        }
    }
}

/// `r̃_ε` for odd boundary data.
pub fn remainder_rate_odd(n: u32, m: u32, eps: f64) -> Result<(RatePower, f64)> {
    check_nm(n, m)?;
    check_eps(eps)?;
    let p = remainder_power_odd(n, m);
    Ok((p, p.value(eps)))
}

/// The two boundary-data classes covered by the closed-form results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum BoundaryClass {
    /// `φ = η|x'|^k` on the bottom patch.
    Growth { eta: f64, k: u32 },
    /// `φ` odd in the coordinate `x_{i0}`.
    Odd { odd_index: usize },
}

/// Which family of results applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GrowthData,
    OddData,
}

/// Branch of the field expansion, named by which of `Q[φ]`, `a11` blows up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `Q[φ]` and `a11` both blow up; coefficient is a closed-form ratio.
    SingularFlux,
    /// `Q[φ] → Q*[φ]` stays bounded, `a11` blows up.
    SingularEnergy,
    /// Both converge to their touching-domain limits.
    Regular,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::SingularFlux => "singular-flux",
            Branch::SingularEnergy => "singular-energy",
            Branch::Regular => "regular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCase {
    pub family: Family,
    pub branch: Branch,
    pub boundary_class: BoundaryClass,
    /// `m` sits exactly on one of the branch thresholds.
    pub tie: bool,
}

impl RegimeCase {
    pub fn label(&self) -> String {
        let fam = match self.family {
            Family::GrowthData => "growth-data",
            Family::OddData => "odd-data",
        };
        format!("{fam}/{}", self.branch.label())
    }

    /// Relative remainder power of the field coefficient.
    pub fn remainder(&self, n: u32, m: u32) -> RatePower {
        match self.boundary_class {
            BoundaryClass::Growth { k, .. } => remainder_power(n, m, k),
            BoundaryClass::Odd { .. } => remainder_power_odd(n, m),
        }
    }

    /// Whether the branch needs `Q*[φ] ≠ 0`.
    pub fn needs_q_star(&self) -> bool {
        !matches!(self.branch, Branch::SingularFlux)
    }

    pub fn needs_a11_star(&self) -> bool {
        matches!(self.branch, Branch::Regular)
    }
}

/// Picks the branch for the given dimension, convexity order and data class.
pub fn classify_class(n: u32, m: u32, class: BoundaryClass) -> Result<RegimeCase> {
    check_nm(n, m)?;
    let case = match class {
        BoundaryClass::Growth { k, .. } => {
            if k < 2 {
                return Err(Error::Domain(format!("growth order k must exceed 1, got {k}")));
            }
            let upper = n + k - 1;
            let branch = if m >= upper {
                Branch::SingularFlux
            } else if m >= n - 1 {
                Branch::SingularEnergy
            } else {
                Branch::Regular
            };
            RegimeCase { family: Family::GrowthData, branch, boundary_class: class, tie: m == upper || m == n - 1 }
        }
        BoundaryClass::Odd { odd_index } => {
            if odd_index == 0 || odd_index > (n - 1) as usize {
                return Err(Error::Domain(format!("odd axis index must lie in 1..={}, got {odd_index}", n - 1)));
            }
            let branch = if m >= n - 1 { Branch::SingularEnergy } else { Branch::Regular };
            RegimeCase { family: Family::OddData, branch, boundary_class: class, tie: m == n - 1 }
        }
    };
    Ok(case)
}

/// Classifies boundary data; tabulated or constant data has no branch.
pub fn classify(n: u32, m: u32, boundary: &crate::auxfields::BoundaryData) -> Result<RegimeCase> {
    let class = boundary
        .class()
        .ok_or_else(|| Error::Unclassifiable("expansions cover growth-order or odd boundary data only".to_string()))?;
    classify_class(n, m, class)
}
