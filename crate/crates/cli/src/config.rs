//! Run configuration (JSON).

use gapfield::auxfields::BoundaryData;
use gapfield::geometry::{GapGeometry, GeometryConfig};
use gapfield::refsolver::{LimitQuantities, Resolution};
use gapfield::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub boundary_data: BoundaryData,
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub resolution: Resolution,
    /// Externally known limit quantities.
    #[serde(default)]
    pub limits: Option<LimitsConfig>,
    /// Solve the touching-domain problem for any limit the regime needs.
    #[serde(default)]
    pub compute_limits: bool,
    /// Excision radius for touching-domain solves; defaults to `10⁻³ R`.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Evaluation points for `asym`, each with `n` coordinates.
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub checks: Checks,
    /// Write the nodal field CSV from `solve`.
    #[serde(default = "yes")]
    pub write_field: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    #[serde(rename = "Q_star", default)]
    pub q_star: Option<f64>,
    #[serde(default)]
    pub a11_star: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub residual_v1: bool,
    pub residual_v0: bool,
    pub max_location: bool,
    pub slope_tolerance: f64,
    pub constant_tolerance: f64,
    pub log_constant_tolerance: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            residual_v1: false,
            residual_v0: false,
            max_location: false,
            slope_tolerance: 0.05,
            constant_tolerance: 0.10,
            log_constant_tolerance: 0.15,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.build()?;
        self.resolution.validate()?;
        self.boundary_data.validate(self.geometry.n)?;
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::Config(format!("eps_list entries must lie in (0, 1), got {e}")));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s < 0.5 * self.geometry.patch_radius) {
                return Err(Error::Config(format!("sigma must lie in (0, R/2), got {s}")));
            }
        }
        let n = self.geometry.n as usize;
        if let Some(p) = self.points.iter().find(|p| p.len() != n) {
            return Err(Error::Config(format!("point {p:?} needs {n} coordinates")));
        }
        let c = &self.checks;
        if [c.slope_tolerance, c.constant_tolerance, c.log_constant_tolerance].iter().any(|t| !(*t > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<GapGeometry> {
        self.geometry.build()
    }

    pub fn given_limits(&self) -> Option<LimitQuantities> {
        self.limits.map(|l| LimitQuantities::given(l.q_star, l.a11_star))
    }
}
