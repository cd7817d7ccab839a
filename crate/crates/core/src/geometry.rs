//! Inclusion/matrix geometry near the contact point.
//!
//! Near the origin the matrix boundary is the graph `x_n = h(x')` and the
//! inclusion boundary is `x_n = ε + h1(x')`, both for `|x'| ≤ 2R`. Away from
//! this patch the two boundaries are closed curves described in polar form in
//! the meridian plane `(|x'|, x_n)`; the same curves generate the planar domain
//! for `n = 2` and a body of revolution for `n = 3`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A profile `f(|x'|)` with `f(0) = 0`, evaluated on radii `r ≥ 0`.
pub trait Profile: Send + Sync + fmt::Debug {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
    fn second_derivative(&self, r: f64) -> f64;
}

/// `a·r^m + Σ_j c_j r^{m+1+j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub leading_coefficient: f64,
    pub order: u32,
    #[serde(default)]
    pub correction: Vec<f64>,
}

impl RadialProfile {
    pub fn new(leading_coefficient: f64, order: u32) -> Result<Self> {
        Self::with_correction(leading_coefficient, order, Vec::new())
    }

    pub fn with_correction(leading_coefficient: f64, order: u32, correction: Vec<f64>) -> Result<Self> {
        if !(leading_coefficient > 0.0) || order < 2 {
            return Err(Error::Config(format!(
                "radial profile needs a positive leading coefficient and order >= 2, got ({leading_coefficient}, {order})"
            )));
        }
        Ok(Self { leading_coefficient, order, correction })
    }

    fn terms(&self) -> impl Iterator<Item = (f64, i32)> + '_ {
        std::iter::once((self.leading_coefficient, self.order as i32))
            .chain(self.correction.iter().enumerate().map(move |(j, c)| (*c, self.order as i32 + 1 + j as i32)))
    }
}

impl Profile for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        self.terms().map(|(c, p)| c * r.powi(p)).sum()
    }

    fn derivative(&self, r: f64) -> f64 {
        self.terms().map(|(c, p)| c * p as f64 * r.powi(p - 1)).sum()
    }

    fn second_derivative(&self, r: f64) -> f64 {
        self.terms().map(|(c, p)| c * (p * (p - 1)) as f64 * r.powi(p - 2)).sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FlatProfile;

impl Profile for FlatProfile {
    fn value(&self, _r: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _r: f64) -> f64 {
        0.0
    }
    fn second_derivative(&self, _r: f64) -> f64 {
        0.0
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Profile given by a closure; derivatives by central differences.
#[derive(Clone)]
pub struct FnProfile {
    f: RealFn,
    step: f64,
}

impl FnProfile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), step: 1e-5 }
    }
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile").field("step", &self.step).finish()
    }
}

impl Profile for FnProfile {
    fn value(&self, r: f64) -> f64 {
        (self.f)(r.abs())
    }

    fn derivative(&self, r: f64) -> f64 {
        let h = self.step * r.abs().max(1e-3);
        (self.value(r + h) - self.value((r - h).max(0.0))) / (r + h - (r - h).max(0.0))
    }

    fn second_derivative(&self, r: f64) -> f64 {
        let h = self.step * r.abs().max(1e-3) * 10.0;
        let lo = (r - h).max(0.0);
        let hi = lo + 2.0 * h;
        let mid = lo + h;
        (self.value(hi) - 2.0 * self.value(mid) + self.value(lo)) / (h * h)
    }
}

/// JSON descriptor of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    Flat,
    Radial(RadialProfile),
}

impl ProfileSpec {
    fn build(&self) -> Result<Arc<dyn Profile>> {
        Ok(match self {
            ProfileSpec::Flat => Arc::new(FlatProfile),
            ProfileSpec::Radial(p) => {
                Arc::new(RadialProfile::with_correction(p.leading_coefficient, p.order, p.correction.clone())?)
            }
        })
    }
}

/// Far-field shape of the matrix and the inclusion, in the meridian plane.
///
/// Both boundaries are polar curves about the point at height `center_height`
/// above the contact point (the inclusion's centre moves with it by `ε`).
/// Inside the patch they coincide with the graphs of `h1` and `h`; beyond it
/// they blend over `blend_width_deg` degrees into circles of radius
/// `inclusion_radius` and `outer_radius`. The matrix boundary keeps its
/// graph form out to `|x'| = flat_extent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OuterDomain {
    pub center_height: f64,
    pub inclusion_radius: f64,
    pub outer_radius: f64,
    pub blend_width_deg: f64,
    pub flat_extent: f64,
}

impl Default for OuterDomain {
    fn default() -> Self {
        Self { center_height: 1.5, inclusion_radius: 1.2, outer_radius: 3.0, blend_width_deg: 20.0, flat_extent: 1.5 }
    }
}

/// Twice the second-derivative constant `m(m-1)λ` of the exact profile, at least 10.
pub fn default_kappa1(m: u32, lambda: f64) -> f64 {
    (2.0 * (m * (m - 1)) as f64 * lambda).max(10.0)
}

fn default_kappa2() -> f64 {
    100.0
}

fn default_patch_radius() -> f64 {
    0.5
}

/// Geometry section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub n: u32,
    pub m: u32,
    pub epsilon: f64,
    #[serde(rename = "R", default = "default_patch_radius")]
    pub patch_radius: f64,
    pub lambda: f64,
    /// Defaults to [`default_kappa1`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa1: Option<f64>,
    #[serde(default = "default_kappa2")]
    pub kappa2: f64,
    /// Defaults to a flat matrix boundary.
    #[serde(default)]
    pub h_profile: Option<ProfileSpec>,
    /// Defaults to `λ|x'|^m`.
    #[serde(default)]
    pub h1_profile: Option<ProfileSpec>,
    #[serde(default)]
    pub outer_domain: OuterDomain,
}

impl GeometryConfig {
    pub fn new(n: u32, m: u32, lambda: f64, epsilon: f64) -> Self {
        Self {
            n,
            m,
            epsilon,
            patch_radius: default_patch_radius(),
            lambda,
            kappa1: None,
            kappa2: default_kappa2(),
            h_profile: None,
            h1_profile: None,
            outer_domain: OuterDomain::default(),
        }
    }

    pub fn build(&self) -> Result<GapGeometry> {
        GapGeometry::from_config(self)
    }
}

/// Full geometry: patch profiles, gap offset and far-field shape.
#[derive(Debug, Clone)]
pub struct GapGeometry {
    pub n: u32,
    pub m: u32,
    pub epsilon: f64,
    pub patch_radius: f64,
    pub lambda: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub h: Arc<dyn Profile>,
    pub h1: Arc<dyn Profile>,
    pub outer: OuterDomain,
}

fn smooth_step_down(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        return 1.0;
    }
    if x >= b {
        return 0.0;
    }
    let s = (x - a) / (b - a);
    1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Worst-case sampled ratio for one structural hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub worst_ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `sup |h1 - h - λr^m| / r^{m+1}` against `κ1`.
    pub leading_term: HypothesisCheck,
    /// `sup |∇^i h|, |∇^i h1|` over `r^{m-i}`, `i = 1, 2`, against `κ1`.
    pub derivative_bounds: HypothesisCheck,
    /// Sampled `C^{2,1/2}` norm proxy of both profiles against `κ2`.
    pub holder_norm: HypothesisCheck,
    /// `sup |(h1 - h)/(λ r^m) - 1|` over the samples.
    pub correction_residual: f64,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.leading_term.pass && self.derivative_bounds.pass && self.holder_norm.pass
    }
}

impl GapGeometry {
    pub fn from_config(cfg: &GeometryConfig) -> Result<Self> {
        let h = cfg.h_profile.as_ref().map(|p| p.build()).transpose()?;
        let h1 = match &cfg.h1_profile {
            Some(p) => p.build()?,
            None => Arc::new(RadialProfile::new(cfg.lambda, cfg.m)?),
        };
        Self::new(
            cfg.n,
            cfg.m,
            cfg.epsilon,
            cfg.patch_radius,
            cfg.lambda,
            h.unwrap_or_else(|| Arc::new(FlatProfile)),
            h1,
            cfg.outer_domain.clone(),
        )
        .map(|g| {
            let k1 = cfg.kappa1.unwrap_or(g.kappa1);
            g.with_kappas(k1, cfg.kappa2)
        })
    }

    /// Builds and validates a geometry with `ε > 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: u32,
        m: u32,
        epsilon: f64,
        patch_radius: f64,
        lambda: f64,
        h: Arc<dyn Profile>,
        h1: Arc<dyn Profile>,
        outer: OuterDomain,
    ) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(Error::Config(format!("need n >= 2 and m >= 2, got n={n}, m={m}")));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(patch_radius > 0.0) || epsilon >= patch_radius {
            return Err(Error::Config(format!("need 0 < epsilon < R, got epsilon={epsilon}, R={patch_radius}")));
        }
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        let g = Self {
            n,
            m,
            epsilon,
            patch_radius,
            lambda,
            kappa1: default_kappa1(m, lambda),
            kappa2: default_kappa2(),
            h,
            h1,
            outer,
        };
        g.validate_outer()?;
        Ok(g)
    }

    /// Plain `h ≡ 0`, `h1 = λ|x'|^m` geometry with the default far field.
    pub fn standard(n: u32, m: u32, lambda: f64, epsilon: f64) -> Result<Self> {
        GeometryConfig::new(n, m, lambda, epsilon).build()
    }

    pub fn with_kappas(mut self, kappa1: f64, kappa2: f64) -> Self {
        self.kappa1 = kappa1;
        self.kappa2 = kappa2;
        self
    }

    /// Same shapes at another gap offset.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || epsilon >= self.patch_radius {
            return Err(Error::Config(format!("epsilon must lie in (0, R), got {epsilon}")));
        }
        let mut g = self.clone();
        g.epsilon = epsilon;
        Ok(g)
    }

    /// Touching configuration `ε = 0`; gap-width routines reject the contact point.
    pub fn touching(&self) -> Self {
        let mut g = self.clone();
        g.epsilon = 0.0;
        g
    }

    pub fn is_touching(&self) -> bool {
        self.epsilon == 0.0
    }

    fn validate_outer(&self) -> Result<()> {
        let o = &self.outer;
        let two_r = 2.0 * self.patch_radius;
        if !(o.center_height > 0.0 && o.inclusion_radius > 0.0 && o.outer_radius > 0.0) {
            return Err(Error::Config("outer domain radii must be positive".into()));
        }
        if o.flat_extent < two_r {
            return Err(Error::Config(format!(
                "outer_domain.flat_extent ({}) must cover the patch 2R = {two_r}",
                o.flat_extent
            )));
        }
        if self.h1.value(two_r) >= o.center_height {
            return Err(Error::Config(format!(
                "inclusion profile reaches h1(2R) = {} above center_height = {}",
                self.h1.value(two_r),
                o.center_height
            )));
        }
        let width = o.blend_width_deg.to_radians();
        if !(width > 0.0) {
            return Err(Error::Config("blend_width_deg must be positive".into()));
        }
        if self.inclusion_blend().1 >= 0.5 * PI || self.outer_blend().1 >= 0.5 * PI {
            return Err(Error::Config(
                "patch plus blend window must stay below the horizontal through the centre".into(),
            ));
        }
        if o.outer_radius <= o.inclusion_radius + self.patch_radius {
            return Err(Error::Config("outer_radius too small to contain the inclusion".into()));
        }
        Ok(())
    }

    pub fn two_r(&self) -> f64 {
        2.0 * self.patch_radius
    }

    fn split(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.n as usize {
            return Err(Error::Domain(format!(
                "point has {} coordinates, geometry is {}-dimensional",
                x.len(),
                self.n
            )));
        }
        let r = norm(&x[..x.len() - 1]);
        Ok((r, x[x.len() - 1]))
    }

    fn tangential_radius(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.n as usize - 1 {
            return Err(Error::Domain(format!(
                "tangential point has {} coordinates, expected {}",
                z.len(),
                self.n - 1
            )));
        }
        Ok(norm(z))
    }

    /// `δ(r) = ε + h1(r) - h(r)` for a radius `r = |x'|`.
    pub fn delta_radial(&self, r: f64) -> f64 {
        self.epsilon + self.h1.value(r) - self.h.value(r)
    }

    /// Gap width `δ(z') = ε + h1(z') - h(z')`.
    pub fn gap_delta(&self, z_prime: &[f64]) -> Result<f64> {
        let r = self.tangential_radius(z_prime)?;
        if r > self.two_r() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|z'| = {r} outside the patch 2R = {}", self.two_r())));
        }
        let d = self.delta_radial(r);
        if !(d > 0.0) {
            return Err(Error::SingularGeometry(format!("gap width {d} at |z'| = {r}")));
        }
        Ok(d)
    }

    /// Gradient in `x'` of a radial profile.
    pub fn profile_gradient(profile: &dyn Profile, z: &[f64]) -> Vec<f64> {
        let r = norm(z);
        if r == 0.0 {
            return vec![0.0; z.len()];
        }
        let d = profile.derivative(r) / r;
        z.iter().map(|c| c * d).collect()
    }

    /// Unit outward normal of the inclusion at `(x', ε + h1(x'))`.
    pub fn boundary_normal(&self, x_prime: &[f64]) -> Result<Vec<f64>> {
        let r = self.tangential_radius(x_prime)?;
        if r > self.two_r() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|x'| = {r} outside the patch")));
        }
        let mut g = Self::profile_gradient(self.h1.as_ref(), x_prime);
        g.push(-1.0);
        let s = norm(&g);
        Ok(g.into_iter().map(|c| c / s).collect())
    }

    /// Whether `x` lies in the narrow region `Ω_t`.
    pub fn in_gap(&self, x: &[f64], t: f64) -> bool {
        let Ok((r, xn)) = self.split(x) else {
            return false;
        };
        let t = t.min(self.two_r());
        r < t && self.h.value(r) < xn && xn < self.epsilon + self.h1.value(r)
    }

    /// Samples the structural hypotheses on `sample_count` radii in `(0, 2R]`.
    pub fn check_hypotheses(&self, sample_count: usize) -> Result<HypothesisReport> {
        if sample_count < 8 {
            return Err(Error::Domain(format!("need at least 8 samples, got {sample_count}")));
        }
        let two_r = self.two_r();
        let m = self.m as i32;
        // geometric radii from 2R·1e-6 to 2R for the pointwise ratios
        let geo: Vec<f64> = (0..sample_count)
            .map(|j| two_r * 10f64.powf(-6.0 * (1.0 - j as f64 / (sample_count - 1) as f64)))
            .collect();

        let mut lead = 0.0f64;
        let mut corr = 0.0f64;
        let mut deriv = 0.0f64;
        for &r in &geo {
            let d = self.h1.value(r) - self.h.value(r);
            let lam = self.lambda * r.powi(m);
            if !d.is_finite() {
                return Err(Error::Profile(format!("non-finite profile value at r = {r}")));
            }
            lead = lead.max((d - lam).abs() / r.powi(m + 1));
            corr = corr.max((d / lam - 1.0).abs());
            for p in [&self.h, &self.h1] {
                let d1 = p.derivative(r).abs();
                let d2 =
                    if self.n >= 3 { p.second_derivative(r).abs().max(d1 / r) } else { p.second_derivative(r).abs() };
                deriv = deriv.max(d1 / r.powi(m - 1)).max(d2 / r.powi(m - 2));
            }
        }

        // uniform radii for the norm proxy; second differences of values only
        let count = sample_count.max(64);
        let step = two_r / count as f64;
        let mut proxy = 0.0;
        for p in [&self.h, &self.h1] {
            let vals: Vec<f64> = (0..=count + 2).map(|j| p.value(j as f64 * step)).collect();
            let mut sup0 = 0.0f64;
            let mut sup1 = 0.0f64;
            let mut sup2 = 0.0f64;
            let mut second = Vec::with_capacity(count);
            for j in 1..=count {
                sup0 = sup0.max(vals[j].abs());
                sup1 = sup1.max(((vals[j + 1] - vals[j - 1]) / (2.0 * step)).abs());
                let s2 = (vals[j + 1] - 2.0 * vals[j] + vals[j - 1]) / (step * step);
                sup2 = sup2.max(s2.abs());
                second.push(s2);
            }
            let holder = second.windows(2).map(|w| (w[1] - w[0]).abs() / step.sqrt()).fold(0.0, f64::max);
            proxy += sup0 + sup1 + sup2 + holder;
        }

        let check = |worst: f64, bound: f64| HypothesisCheck {
            worst_ratio: worst,
            bound,
            pass: worst.is_finite() && worst <= bound,
        };
        Ok(HypothesisReport {
            leading_term: check(lead, self.kappa1),
            derivative_bounds: check(deriv, self.kappa1),
            holder_norm: check(proxy, self.kappa2),
            correction_residual: corr,
            samples: sample_count,
        })
    }

    // ---- meridian-plane boundary curves -------------------------------------------------

    /// Centre of the inclusion's polar description, `(0, ε + H)`.
    pub fn inclusion_center(&self) -> [f64; 2] {
        [0.0, self.epsilon + self.outer.center_height]
    }

    fn outer_center(&self) -> [f64; 2] {
        [0.0, self.outer.center_height]
    }

    /// Root `ρ` of `H - ρ cos θ = f(ρ sin θ)`: polar radius of a graph boundary.
    fn graph_polar_radius(&self, profile: &dyn Profile, theta: f64) -> Result<f64> {
        let hgt = self.outer.center_height;
        let (s, c) = theta.sin_cos();
        let g = |rho: f64| hgt - rho * c - profile.value(rho * s);
        let mut lo = 0.0;
        let mut hi = hgt.max(1e-3);
        let mut tries = 0;
        while g(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return Err(Error::Mesh(format!("no graph intersection at angle {theta}")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `(start, end)` of the inclusion blend window in polar angle.
    pub fn inclusion_blend(&self) -> (f64, f64) {
        let two_r = self.two_r();
        let a = two_r.atan2(self.outer.center_height - self.h1.value(two_r));
        (a, a + self.outer.blend_width_deg.to_radians())
    }

    fn outer_blend(&self) -> (f64, f64) {
        let x = self.outer.flat_extent;
        let a = x.atan2(self.outer.center_height - self.h.value(x));
        (a, a + self.outer.blend_width_deg.to_radians())
    }

    /// Polar radius of the inclusion boundary about its centre, `θ ∈ [0, π]`.
    pub fn inclusion_polar_radius(&self, theta: f64) -> Result<f64> {
        let theta = theta.abs();
        let (a, b) = self.inclusion_blend();
        let w = smooth_step_down(theta, a, b);
        if w == 0.0 {
            return Ok(self.outer.inclusion_radius);
        }
        let rp = self.graph_polar_radius(self.h1.as_ref(), theta)?;
        Ok(w * rp + (1.0 - w) * self.outer.inclusion_radius)
    }

    fn outer_polar_radius(&self, theta: f64) -> Result<f64> {
        let theta = theta.abs();
        let (a, b) = self.outer_blend();
        let w = smooth_step_down(theta, a, b);
        if w == 0.0 {
            return Ok(self.outer.outer_radius);
        }
        let rp = self.graph_polar_radius(self.h.as_ref(), theta)?;
        Ok(w * rp + (1.0 - w) * self.outer.outer_radius)
    }

    /// Meridian point of the inclusion boundary at signed polar angle `θ`
    /// (`θ = 0` points straight down at the contact point).
    pub fn inclusion_point(&self, theta: f64) -> Result<[f64; 2]> {
        let rho = self.inclusion_polar_radius(theta)?;
        let c = self.inclusion_center();
        Ok([c[0] + rho * theta.sin(), c[1] - rho * theta.cos()])
    }

    /// Signed level function of the matrix boundary: negative inside `D`.
    pub fn outer_level(&self, p: [f64; 2]) -> Result<f64> {
        let c = self.outer_center();
        let q = [p[0] - c[0], p[1] - c[1]];
        let theta = q[0].atan2(-q[1]);
        Ok((q[0] * q[0] + q[1] * q[1]).sqrt() - self.outer_polar_radius(theta)?)
    }

    /// Direction of the mesh fibre leaving the inclusion at angle `θ`:
    /// straight down inside the patch, radial beyond the blend window.
    pub fn fiber_direction(&self, theta: f64) -> [f64; 2] {
        let (a, b) = self.inclusion_blend();
        let w = smooth_step_down(theta.abs(), a, b);
        let d = [(1.0 - w) * theta.sin(), -w - (1.0 - w) * theta.cos()];
        let s = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[0] / s, d[1] / s]
    }

    /// First exit of the ray `origin + s·dir` from `D`.
    pub fn outer_hit(&self, origin: [f64; 2], dir: [f64; 2]) -> Result<[f64; 2]> {
        let at = |s: f64| [origin[0] + s * dir[0], origin[1] + s * dir[1]];
        if self.outer_level(origin)? >= 0.0 {
            return Err(Error::Mesh(format!("point {origin:?} is not inside the matrix domain")));
        }
        let step = 0.01 * self.outer.center_height.min(self.outer.outer_radius);
        let limit = 4.0 * (self.outer.outer_radius + self.outer.center_height);
        let mut lo = 0.0;
        let mut hi = step;
        while self.outer_level(at(hi))? < 0.0 {
            lo = hi;
            hi += step;
            if hi > limit {
                return Err(Error::Mesh("fibre never leaves the matrix domain".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.outer_level(at(mid))? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        Ok(at(0.5 * (lo + hi)))
    }

    /// Fibre endpoints `(matrix side, inclusion side)` above the signed
    /// abscissa `x` of the patch.
    pub fn patch_station(&self, x: f64) -> Result<([f64; 2], [f64; 2])> {
        let r = x.abs();
        if r > self.two_r() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|x'| = {r} outside the patch")));
        }
        Ok(([x, self.h.value(r)], [x, self.epsilon + self.h1.value(r)]))
    }

    /// Fibre endpoints for a signed polar angle beyond the patch.
    pub fn angular_station(&self, theta: f64) -> Result<([f64; 2], [f64; 2])> {
        let inner = self.inclusion_point(theta)?;
        let outer = self.outer_hit(inner, self.fiber_direction(theta))?;
        Ok((outer, inner))
    }
}
