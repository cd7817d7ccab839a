//! Explicit auxiliary fields in the gap: `ū`, `ū₀` and the `ψ`-weighted `v̄`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GapGeometry;
use crate::regimes::BoundaryClass;

/// Value and gradient of a scalar field at a point of `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub point: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Anything that can be sampled with a gradient, e.g. a discrete extension.
pub trait FieldEvaluator: Send + Sync {
    fn sample(&self, x: &[f64]) -> Result<FieldSample>;
}

/// Smooth function on `R^n` with an analytic gradient.
pub trait BoundaryFunction: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// `ψ ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFn(pub f64);

impl BoundaryFunction for ConstantFn {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }
}

/// `ψ(x) = x_i` (1-based).
#[derive(Debug, Clone, Copy)]
pub struct CoordinateFn(pub usize);

impl BoundaryFunction for CoordinateFn {
    fn value(&self, x: &[f64]) -> f64 {
        x[self.0 - 1]
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        g[self.0 - 1] = 1.0;
        g
    }
}

/// Natural cubic spline through `(xs, ys)`, constant beyond the end knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(Error::Config("spline needs at least 3 matching knots".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("spline knots must be strictly increasing".into()));
        }
        // tridiagonal system for the interior second derivatives
        let mut second = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        for i in 2..n - 1 {
            let h = xs[i] - xs[i - 1];
            let w = h / diag[i - 1];
            diag[i] -= w * h;
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            let upper = if i + 1 < n - 1 { (xs[i + 1] - xs[i]) * second[i + 1] } else { 0.0 };
            second[i] = (rhs[i] - upper) / diag[i];
        }
        Ok(Self { xs, ys, second })
    }

    fn locate(&self, x: f64) -> usize {
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= self.xs.len() => self.xs.len() - 2,
            i => i - 1,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let x = x.clamp(self.xs[0], self.xs[self.xs.len() - 1]);
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x < self.xs[0] || x > self.xs[self.xs.len() - 1] {
            return 0.0;
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((1.0 - 3.0 * a * a) * self.second[i] + (3.0 * b * b - 1.0) * self.second[i + 1]) * h / 6.0
    }
}

fn default_center_height() -> f64 {
    1.5
}

/// Dirichlet datum `φ` on the matrix boundary `∂D`.
///
/// The closed-form variants are evaluated at every point of `R^n`, which also
/// serves as their extension into the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    /// `φ = η|x'|^k`, optionally switched off smoothly on `|x'| ∈ [c, 2c]`.
    Growth {
        eta: f64,
        k: u32,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    /// `φ = η·x_{i0}`.
    Odd {
        eta: f64,
        odd_index: usize,
    },
    Constant {
        value: f64,
    },
    /// Samples against the polar angle about `(0, center_height)` in the
    /// meridian plane, interpolated by a natural cubic spline.
    Tabulated {
        angles: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "default_center_height")]
        center_height: f64,
    },
}

/// `1` on `[0, a]`, `0` beyond `b`, quintic in between (C²).
pub fn cutoff_profile(r: f64, a: f64, b: f64) -> (f64, f64) {
    if r <= a {
        return (1.0, 0.0);
    }
    if r >= b {
        return (0.0, 0.0);
    }
    let w = b - a;
    let s = (r - a) / w;
    let p = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    let dp = 30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
    (1.0 - p, -dp)
}

impl BoundaryData {
    pub fn growth(eta: f64, k: u32) -> Self {
        BoundaryData::Growth { eta, k, cutoff: None }
    }

    pub fn odd(eta: f64, odd_index: usize) -> Self {
        BoundaryData::Odd { eta, odd_index }
    }

    pub fn constant(value: f64) -> Self {
        BoundaryData::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Class used by the regime classifier; `None` for constant or tabulated data.
    pub fn class(&self) -> Option<BoundaryClass> {
        match *self {
            BoundaryData::Growth { eta, k, .. } => Some(BoundaryClass::Growth { eta, k }),
            BoundaryData::Odd { odd_index, .. } => Some(BoundaryClass::Odd { odd_index }),
            _ => None,
        }
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        match self {
            BoundaryData::Growth { eta, k, cutoff } => {
                if !(*eta >= 0.0) || *k < 2 {
                    return Err(Error::Config(format!("growth data needs eta >= 0 and k >= 2, got ({eta}, {k})")));
                }
                if let Some(c) = cutoff {
                    if !(*c > 0.0) {
                        return Err(Error::Config("growth cutoff must be positive".into()));
                    }
                }
            }
            BoundaryData::Odd { odd_index, .. } => {
                if *odd_index == 0 || *odd_index > (n - 1) as usize {
                    return Err(Error::Config(format!("odd_index must lie in 1..={}", n - 1)));
                }
            }
            BoundaryData::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::Config("constant datum must be finite".into()));
                }
            }
            BoundaryData::Tabulated { angles, values, .. } => {
                CubicSpline::new(angles.clone(), values.clone())?;
            }
        }
        Ok(())
    }

    /// `α·φ`.
    pub fn scaled(&self, alpha: f64) -> Self {
        match self.clone() {
            BoundaryData::Growth { eta, k, cutoff } => BoundaryData::Growth { eta: alpha * eta, k, cutoff },
            BoundaryData::Odd { eta, odd_index } => BoundaryData::Odd { eta: alpha * eta, odd_index },
            BoundaryData::Constant { value } => BoundaryData::Constant { value: alpha * value },
            BoundaryData::Tabulated { angles, values, center_height } => BoundaryData::Tabulated {
                angles,
                values: values.into_iter().map(|v| alpha * v).collect(),
                center_height,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BoundaryData::Growth { eta, .. } | BoundaryData::Odd { eta, .. } => *eta == 0.0,
            BoundaryData::Constant { value } => *value == 0.0,
            BoundaryData::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// Whether the datum is constant in the horizontal variables (axisymmetric).
    pub fn is_radial(&self) -> bool {
        !matches!(self, BoundaryData::Odd { .. })
    }

    /// Value and gradient at a point of `R^n`.
    pub fn value_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let n = x.len();
        let mut grad = vec![0.0; n];
        match self {
            BoundaryData::Growth { eta, k, cutoff } => {
                let r = x[..n - 1].iter().map(|c| c * c).sum::<f64>().sqrt();
                let k = *k as i32;
                let (chi, dchi) = match cutoff {
                    Some(c) => cutoff_profile(r, *c, 2.0 * c),
                    None => (1.0, 0.0),
                };
                let v = eta * r.powi(k);
                if r > 0.0 {
                    let dv = eta * k as f64 * r.powi(k - 1);
                    let d = (dv * chi + v * dchi) / r;
                    for i in 0..n - 1 {
                        grad[i] = d * x[i];
                    }
                }
                (v * chi, grad)
            }
            BoundaryData::Odd { eta, odd_index } => {
                grad[odd_index - 1] = *eta;
                (eta * x[odd_index - 1], grad)
            }
            BoundaryData::Constant { value } => (*value, grad),
            BoundaryData::Tabulated { angles, values, center_height } => {
                // never fails: validated at construction by callers
                let spline = CubicSpline::new(angles.clone(), values.clone()).expect("validated table");
                let r = x[..n - 1].iter().map(|c| c * c).sum::<f64>().sqrt();
                let sx = if x[0] < 0.0 { -r } else { r };
                let q = [sx, x[n - 1] - center_height];
                let theta = q[0].atan2(-q[1]);
                let rr = q[0] * q[0] + q[1] * q[1];
                let ds = spline.derivative(theta);
                if rr > 0.0 {
                    let dth_ds = -q[1] / rr;
                    let dth_dn = q[0] / rr;
                    if r > 0.0 {
                        let sign = if x[0] < 0.0 { -1.0 } else { 1.0 };
                        for i in 0..n - 1 {
                            grad[i] = ds * dth_ds * sign * x[i] / r;
                        }
                    }
                    grad[n - 1] = ds * dth_dn;
                }
                (spline.value(theta), grad)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_gradient(x).0
    }

    /// Sampled `C²` size of `φ` on the patch `|x'| ≤ 2R` of the matrix boundary.
    pub fn c2_norm(&self, geom: &GapGeometry) -> f64 {
        let two_r = geom.two_r();
        match self {
            BoundaryData::Growth { eta, k, .. } => {
                let k = *k as i32;
                eta.abs() * (two_r.powi(k) + k as f64 * two_r.powi(k - 1) + (k * (k - 1)) as f64 * two_r.powi(k - 2))
            }
            BoundaryData::Odd { eta, .. } => eta.abs() * (two_r + 1.0),
            BoundaryData::Constant { value } => value.abs(),
            BoundaryData::Tabulated { .. } => {
                let n = geom.n as usize;
                let samples = 200;
                let step = 2.0 * two_r / samples as f64;
                let trace: Vec<f64> = (0..=samples)
                    .map(|j| {
                        let s = -two_r + j as f64 * step;
                        let mut x = vec![0.0; n];
                        x[0] = s;
                        x[n - 1] = geom.h.value(s.abs());
                        self.value(&x)
                    })
                    .collect();
                let sup0 = trace.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let sup1 = trace.windows(2).fold(0.0f64, |a, w| a.max(((w[1] - w[0]) / step).abs()));
                let sup2 =
                    trace.windows(3).fold(0.0f64, |a, w| a.max(((w[2] - 2.0 * w[1] + w[0]) / (step * step)).abs()));
                sup0 + sup1 + sup2
            }
        }
    }
}

impl BoundaryFunction for BoundaryData {
    fn value(&self, x: &[f64]) -> f64 {
        self.value_gradient(x).0
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_gradient(x).1
    }
}

fn split(geom: &GapGeometry, x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != geom.n as usize {
        return Err(Error::Domain(format!("point has {} coordinates, geometry is {}-dimensional", x.len(), geom.n)));
    }
    let r = x[..x.len() - 1].iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok((r, x[x.len() - 1]))
}

/// `ū` in radial form: `(value, ∂_r ū, ∂_n ū)` at radius `r`, height `x_n`.
pub fn ubar_radial(geom: &GapGeometry, r: f64, xn: f64) -> Result<(f64, f64, f64)> {
    let delta = geom.delta_radial(r);
    if !(delta > 0.0) {
        return Err(Error::SingularGeometry(format!("gap width {delta} at |x'| = {r}")));
    }
    let hb = geom.h.value(r);
    let dh = geom.h.derivative(r);
    let dd = geom.h1.derivative(r) - dh;
    let num = xn - hb;
    Ok((num / delta, (-dh * delta - num * dd) / (delta * delta), 1.0 / delta))
}

fn radial_to_cartesian(x: &[f64], r: f64, d_r: f64, d_n: f64) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    if r > 0.0 {
        for i in 0..n - 1 {
            g[i] = d_r * x[i] / r;
        }
    }
    g[n - 1] = d_n;
    g
}

/// Patch formula `ū = (x_n - h)/δ`; beyond `2R` the extension is needed.
pub fn ubar(geom: &GapGeometry, x: &[f64]) -> Result<FieldSample> {
    ubar_with(geom, None, x)
}

/// `ū` with an optional extension used outside the patch `|x'| ≤ 2R`.
pub fn ubar_with(geom: &GapGeometry, extension: Option<&dyn FieldEvaluator>, x: &[f64]) -> Result<FieldSample> {
    let (r, xn) = split(geom, x)?;
    if r > geom.two_r() {
        return match extension {
            Some(e) => e.sample(x),
            None => Err(Error::Domain(format!("|x'| = {r} beyond the patch and no extension supplied"))),
        };
    }
    let (value, d_r, d_n) = ubar_radial(geom, r, xn)?;
    Ok(FieldSample { point: x.to_vec(), value, gradient: radial_to_cartesian(x, r, d_r, d_n) })
}

/// Trace `φ(x', h(x'))` on the bottom patch and its `x'`-gradient.
pub fn bottom_trace(geom: &GapGeometry, phi: &BoundaryData, x_prime: &[f64]) -> (f64, Vec<f64>) {
    let r = x_prime.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut y = x_prime.to_vec();
    y.push(geom.h.value(r));
    let (v, g) = phi.value_gradient(&y);
    let dh = GapGeometry::profile_gradient(geom.h.as_ref(), x_prime);
    let gn = g[g.len() - 1];
    let grad = (0..x_prime.len()).map(|i| g[i] + gn * dh[i]).collect();
    (v, grad)
}

/// `ū₀ = φ(x', h(x'))·(1 - ū)` in the patch.
pub fn ubar0(geom: &GapGeometry, phi: &BoundaryData, x: &[f64]) -> Result<FieldSample> {
    let (r, _) = split(geom, x)?;
    if r > geom.two_r() {
        return Err(Error::Domain(format!("|x'| = {r} beyond the patch")));
    }
    let u = ubar(geom, x)?;
    let n = x.len();
    let (f, gf) = bottom_trace(geom, phi, &x[..n - 1]);
    let mut gradient: Vec<f64> = u.gradient.iter().map(|g| -f * g).collect();
    for i in 0..n - 1 {
        gradient[i] += gf[i] * (1.0 - u.value);
    }
    Ok(FieldSample { point: x.to_vec(), value: f * (1.0 - u.value), gradient })
}

/// `v̄ = [ρψ(x', ε + h1(x')) + (1 - ρ)ψ(x)]·ū` with the cutoff `ρ` switching
/// off on `|x'| ∈ [3R/2, 2R]`.
pub fn vbar(
    geom: &GapGeometry,
    psi: &dyn BoundaryFunction,
    extension: Option<&dyn FieldEvaluator>,
    x: &[f64],
) -> Result<FieldSample> {
    let (r, _) = split(geom, x)?;
    let n = x.len();
    let u = ubar_with(geom, extension, x)?;
    let (rho, drho) = cutoff_profile(r, 1.5 * geom.patch_radius, geom.two_r());

    let mut weight = 0.0;
    let mut weight_grad = vec![0.0; n];
    if rho > 0.0 {
        let xp = &x[..n - 1];
        let mut top = xp.to_vec();
        top.push(geom.epsilon + geom.h1.value(r));
        let pv = psi.value(&top);
        let pg = psi.gradient(&top);
        let dh1 = GapGeometry::profile_gradient(geom.h1.as_ref(), xp);
        // tangential gradient of ψ(x', ε + h1(x'))
        for i in 0..n - 1 {
            weight_grad[i] += rho * (pg[i] + pg[n - 1] * dh1[i]);
            if r > 0.0 {
                weight_grad[i] += drho * x[i] / r * pv;
            }
        }
        weight += rho * pv;
    }
    if rho < 1.0 {
        let pv = psi.value(x);
        let pg = psi.gradient(x);
        for i in 0..n {
            weight_grad[i] += (1.0 - rho) * pg[i];
        }
        if r > 0.0 {
            for i in 0..n - 1 {
                weight_grad[i] -= drho * x[i] / r * pv;
            }
        }
        weight += (1.0 - rho) * pv;
    }
    let gradient = (0..n).map(|i| weight_grad[i] * u.value + weight * u.gradient[i]).collect();
    Ok(FieldSample { point: x.to_vec(), value: weight * u.value, gradient })
}
