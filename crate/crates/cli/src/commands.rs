use gapfield::asymptotics::{
    expand_a11, expand_q, field_coefficient, gradient_asymptotic, predicted_max_location, Expansion,
    GradientPrediction, MaxLocation,
};
use gapfield::auxfields::{BoundaryData, FieldSample};
use gapfield::geometry::{GapGeometry, HypothesisReport};
use gapfield::refsolver::{self, default_sigma, LimitQuantities, LimitTarget, SolveSummary};
use gapfield::regimes::{classify, rho_power, BoundaryClass, Branch, RatePower, RegimeCase};
use gapfield::validate::{
    self, check_limit_approach, check_max_location, fit_rate, gradient_profile, leading_constant, Column, FitModel,
    LimitApproach, MaxLocationReport, RateFit, ResidualReport,
};
use gapfield::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{write_profile_csv, write_sweep_csv, RunDir};

/// Limit quantities from the config, completed by touching-domain solves when requested.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ResolvedLimits {
    pub limits: LimitQuantities,
    pub studies: Vec<LimitQuantities>,
}

fn resolve_limits(cfg: &RunConfig, geom: &GapGeometry, regime: Option<&RegimeCase>) -> Result<ResolvedLimits> {
    let mut out = ResolvedLimits { limits: cfg.given_limits().unwrap_or_default(), studies: Vec::new() };
    let Some(regime) = regime else { return Ok(out) };
    if !cfg.compute_limits {
        return Ok(out);
    }
    let sigma = cfg.sigma.unwrap_or_else(|| default_sigma(geom));
    if regime.needs_q_star() && out.limits.q_star.is_none() {
        let study =
            refsolver::solve_touching(geom, &LimitTarget::Flux(cfg.boundary_data.clone()), sigma, &cfg.resolution)?;
        eprintln!("Q* = {:e} (excision change {:.2e})", study.q_star.unwrap_or(f64::NAN), study.relative_change);
        out.limits.q_star = study.q_star;
        out.studies.push(study);
    }
    if regime.needs_a11_star() && out.limits.a11_star.is_none() {
        let study = refsolver::solve_touching(geom, &LimitTarget::Energy, sigma, &cfg.resolution)?;
        eprintln!("a11* = {:e} (excision change {:.2e})", study.a11_star.unwrap_or(f64::NAN), study.relative_change);
        out.limits.a11_star = study.a11_star;
        out.studies.push(study);
    }
    Ok(out)
}

fn regime_of(cfg: &RunConfig) -> Result<Option<RegimeCase>> {
    if cfg.boundary_data.class().is_none() {
        return Ok(None);
    }
    classify(cfg.geometry.n, cfg.geometry.m, &cfg.boundary_data).map(Some)
}

/// ε-dependence of the field coefficient relative to `∇ū`.
fn coefficient_rate(n: u32, m: u32, regime: &RegimeCase) -> RatePower {
    match (regime.branch, regime.boundary_class) {
        (Branch::SingularFlux, BoundaryClass::Growth { k, .. }) => rho_power(n, m, k).div(rho_power(n, m, 0)),
        (Branch::SingularEnergy, _) => rho_power(n, m, 0).recip(),
        _ => RatePower::one(),
    }
}

fn default_points(geom: &GapGeometry) -> Vec<Vec<f64>> {
    let n = geom.n as usize;
    let ell = geom.epsilon.powf(1.0 / geom.m as f64).min(geom.patch_radius);
    [0.0, ell]
        .iter()
        .map(|&r| {
            let mut p = vec![0.0; n];
            p[0] = r;
            p[n - 1] = geom.h.value(r) + 0.5 * geom.delta_radial(r);
            p
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct AsymReport {
    pub regime: Option<String>,
    pub branch: Option<&'static str>,
    pub tie: bool,
    pub zero_field: bool,
    /// Field coefficient `c(ε)` of `∇ū`.
    pub field_coefficient: f64,
    /// `c(ε) / rate(ε)`.
    pub coefficient_prefactor: f64,
    pub rate: RatePower,
    pub remainder: Option<RatePower>,
    pub degenerate: bool,
    #[serde(rename = "Q_expansion")]
    pub q_expansion: Option<Expansion>,
    pub a11_expansion: Option<Expansion>,
    pub notes: Vec<String>,
    pub max_location: Option<MaxLocation>,
    pub limits: ResolvedLimits,
    pub samples: Vec<GradientPrediction>,
}

pub fn asym(cfg: &RunConfig) -> Result<AsymReport> {
    let geom = cfg.geometry()?;
    let (n, m, eps) = (geom.n, geom.m, geom.epsilon);
    let points = if cfg.points.is_empty() { default_points(&geom) } else { cfg.points.clone() };
    if cfg.boundary_data.is_zero() {
        let samples = points
            .into_iter()
            .map(|p| GradientPrediction {
                sample: FieldSample { value: 0.0, gradient: vec![0.0; p.len()], point: p },
                coefficient: 0.0,
                remainder_bound: 0.0,
                relative_factor: 0.0,
                degenerate: false,
                note: Some("zero data".into()),
            })
            .collect();
        return Ok(AsymReport {
            regime: None,
            branch: None,
            tie: false,
            zero_field: true,
            field_coefficient: 0.0,
            coefficient_prefactor: 0.0,
            rate: RatePower::one(),
            remainder: None,
            degenerate: false,
            q_expansion: None,
            a11_expansion: None,
            notes: vec!["zero boundary data: u vanishes identically".into()],
            max_location: None,
            limits: ResolvedLimits::default(),
            samples,
        });
    }
    let regime = classify(n, m, &cfg.boundary_data)?;
    let limits = resolve_limits(cfg, &geom, Some(&regime))?;
    let lim = Some(&limits.limits);
    let mut notes = Vec::new();
    let q_expansion = expand_q(n, m, regime.boundary_class, geom.lambda, lim)
        .map_err(|e| notes.push(format!("Q expansion unavailable: {e}")))
        .ok();
    let a11_expansion =
        expand_a11(n, m, geom.lambda, lim).map_err(|e| notes.push(format!("a11 expansion unavailable: {e}"))).ok();
    let (c, degenerate) = field_coefficient(&geom, &regime, lim)?;
    let rate = coefficient_rate(n, m, &regime);
    let samples = points
        .iter()
        .map(|p| gradient_asymptotic(&geom, &cfg.boundary_data, &regime, lim, p))
        .collect::<Result<Vec<_>>>()?;
    if degenerate {
        notes.push("Q* vanishes: outside theorem hypotheses".into());
    }
    Ok(AsymReport {
        regime: Some(regime.label()),
        branch: Some(regime.branch.label()),
        tie: regime.tie,
        zero_field: false,
        field_coefficient: if degenerate { 0.0 } else { c },
        coefficient_prefactor: if degenerate { 0.0 } else { c / rate.value(eps) },
        rate,
        remainder: Some(regime.remainder(n, m)),
        degenerate,
        q_expansion,
        a11_expansion,
        notes,
        max_location: Some(predicted_max_location(&regime, n, m)),
        limits,
        samples,
    })
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    #[serde(flatten)]
    pub summary: SolveSummary,
    /// `Q[1]` from a second solve with unit data.
    #[serde(rename = "Q_unit")]
    pub q_unit: f64,
    /// `|Q[1]/a11 - 1|`.
    pub identity_error: f64,
    pub sup_grad: f64,
    pub argmax_radius: f64,
    pub regime: Option<String>,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-6;

pub fn solve(cfg: &RunConfig, out: Option<&RunDir>) -> Result<SolveReport> {
    let geom = cfg.geometry()?;
    let res = refsolver::solve(&geom, &cfg.boundary_data, &cfg.resolution)?;
    let unit = refsolver::solve(&geom, &BoundaryData::constant(1.0), &cfg.resolution)?;
    let identity_error = (unit.q / unit.a11 - 1.0).abs();
    eprintln!("Q[1]/a11 - 1 = {identity_error:.3e}");
    let profile = gradient_profile(&geom, &res.u)?;
    let (argmax_radius, sup_grad) =
        profile.iter().fold((0.0, 0.0f64), |acc, p| if p.across_gap > acc.1 { (p.radius, p.across_gap) } else { acc });
    if let Some(dir) = out {
        if cfg.write_field {
            res.write_csv(dir.writer("field.csv")?)?;
        }
        write_profile_csv(dir.writer("profiles/solve.csv")?, &profile)?;
    }
    Ok(SolveReport {
        summary: res.summary(),
        q_unit: unit.q,
        identity_error,
        sup_grad,
        argmax_radius,
        regime: regime_of(cfg)?.map(|r| r.label()),
    })
}

impl SolveReport {
    pub fn passed(&self) -> bool {
        self.identity_error <= IDENTITY_TOLERANCE
    }
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub quantity: &'static str,
    pub expansion: Expansion,
    pub fit: RateFit,
    /// `value(ε_min)/rate(ε_min)`, or the `|ln ε|` coefficient of the affine fit.
    pub measured_constant: f64,
    pub constant_relative_error: f64,
    pub constant_tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Default, Serialize)]
pub struct SweepReport {
    pub regime: Option<String>,
    pub fits: Vec<FitReport>,
    #[serde(rename = "Q_limit_approach")]
    pub q_limit_approach: Option<LimitApproach>,
    pub residual_v1: Option<ResidualReport>,
    pub residual_v0: Option<ResidualReport>,
    pub max_location: Option<MaxLocationReport>,
    pub limits: ResolvedLimits,
    pub notes: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.fits.iter().all(|f| f.pass)
            && self.q_limit_approach.as_ref().is_none_or(|a| a.pass)
            && self.residual_v1.as_ref().is_none_or(|r| r.bounded)
            && self.residual_v0.as_ref().is_none_or(|r| r.bounded && r.tangential_bounded != Some(false))
            && self.max_location.as_ref().is_none_or(|r| r.pass)
    }

    pub fn table(&self) -> Vec<String> {
        let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
        let mut rows = Vec::new();
        for f in &self.fits {
            rows.push(format!(
                "{:<22} slope {:>9.5} target {:>9.5}  constant {:>10.5} vs {:>10.5}  {}",
                format!("{} rate", f.quantity),
                f.fit.slope,
                f.fit.target.eps_f64(),
                f.measured_constant,
                f.expansion.coefficient,
                verdict(f.pass)
            ));
        }
        if let Some(a) = &self.q_limit_approach {
            rows.push(format!(
                "{:<22} slope {:>9.5} bound  {:>9.5}  decreasing {}  {}",
                "Q -> Q*",
                a.fit.slope,
                a.fit.target.eps_f64(),
                a.decreasing,
                verdict(a.pass)
            ));
        }
        if let Some(r) = &self.residual_v1 {
            rows.push(format!("{:<22} max/min {:>9.4}  {}", "v1 residual", r.max_over_min, verdict(r.bounded)));
        }
        if let Some(r) = &self.residual_v0 {
            let ok = r.bounded && r.tangential_bounded != Some(false);
            rows.push(format!(
                "{:<22} max/min {:>9.4}  tangential {:>9.4}  {}",
                "v0 residual",
                r.max_over_min,
                r.tangential_max_over_min.unwrap_or(f64::NAN),
                verdict(ok)
            ));
        }
        if let Some(r) = &self.max_location {
            let status = if r.skipped { "SKIPPED" } else { verdict(r.pass) };
            let unresolved = r.entries.iter().filter(|e| !e.resolved).count();
            rows.push(format!("{:<22} {:?}  unresolved {}  {}", "max location", r.predicted.tag, unresolved, status));
        }
        rows
    }
}

fn rate_fit_report(
    quantity: &'static str,
    column: Column,
    expansion: Expansion,
    records: &[validate::SweepRecord],
    cfg: &RunConfig,
) -> Result<FitReport> {
    let checks = &cfg.checks;
    let model = if expansion.power.log_exponent != 0 { FitModel::PowerLog } else { FitModel::Power };
    let fit = fit_rate(records, column, model, expansion.power, checks.slope_tolerance)?;
    let (measured, tolerance) = match model {
        FitModel::PowerLog if expansion.power.eps_f64() == 0.0 && expansion.power.log_exponent == 1 => {
            (fit.log_coefficient.unwrap_or(f64::NAN), checks.log_constant_tolerance)
        }
        _ => (leading_constant(records, column, expansion.power).unwrap_or(f64::NAN), checks.constant_tolerance),
    };
    let err = ((measured - expansion.coefficient) / expansion.coefficient).abs();
    Ok(FitReport {
        quantity,
        pass: fit.pass && err <= tolerance,
        expansion,
        fit,
        measured_constant: measured,
        constant_relative_error: err,
        constant_tolerance: tolerance,
    })
}

pub enum SweepFailure {
    Partial(Vec<validate::SweepRecord>, Error),
    Other(Error),
}

impl From<Error> for SweepFailure {
    fn from(e: Error) -> Self {
        SweepFailure::Other(e)
    }
}

pub fn sweep(cfg: &RunConfig, out: Option<&RunDir>) -> std::result::Result<SweepReport, SweepFailure> {
    let template = cfg.geometry()?;
    let (n, m) = (template.n, template.m);
    let phi = &cfg.boundary_data;
    let detailed = match validate::sweep_with_profiles(&template, phi, &cfg.eps_list, &cfg.resolution) {
        Ok(d) => d,
        Err(p) => {
            if let Some(dir) = out {
                write_sweep_csv(dir.writer("sweep.csv")?, &p.records)?;
            }
            return Err(if p.records.is_empty() && p.failed_epsilon.is_nan() {
                SweepFailure::Other(p.error)
            } else {
                SweepFailure::Partial(p.records, p.error)
            });
        }
    };
    let records: Vec<_> = detailed.iter().map(|(r, _)| r.clone()).collect();
    if let Some(dir) = out {
        write_sweep_csv(dir.writer("sweep.csv")?, &records)?;
        for (i, (_, profile)) in detailed.iter().enumerate() {
            write_profile_csv(dir.writer(&format!("profiles/eps_{i:02}.csv"))?, profile)?;
        }
    }
    let regime = regime_of(cfg)?;
    let mut report = SweepReport { regime: regime.map(|r| r.label()), ..Default::default() };
    report.limits = resolve_limits(cfg, &template, regime.as_ref())?;
    let lim = Some(&report.limits.limits);
    match expand_a11(n, m, template.lambda, lim) {
        Ok(e) if e.uses_limit_quantity.is_none() => {
            report.fits.push(rate_fit_report("a11", Column::A11, e, &records, cfg)?)
        }
        Ok(_) => report.notes.push("a11 tends to a11*: no rate to fit".into()),
        Err(e) => report.notes.push(format!("a11 fit skipped: {e}")),
    }
    if let Some(regime) = &regime {
        match expand_q(n, m, regime.boundary_class, template.lambda, lim) {
            Ok(e) if e.uses_limit_quantity.is_none() => {
                report.fits.push(rate_fit_report("Q", Column::Q, e, &records, cfg)?)
            }
            Ok(e) => {
                report.q_limit_approach =
                    Some(check_limit_approach(&records, e.coefficient, e.remainder, cfg.checks.slope_tolerance)?)
            }
            Err(e) => report.notes.push(format!("Q fit skipped: {e}")),
        }
    } else {
        report.notes.push("boundary data has no growth class: Q fit skipped".into());
    }
    if cfg.checks.residual_v1 {
        report.residual_v1 = Some(validate::check_v1_residual(&template, &cfg.resolution, &cfg.eps_list)?);
    }
    if cfg.checks.residual_v0 {
        report.residual_v0 = Some(validate::check_v0_residual(&template, phi, &cfg.resolution, &cfg.eps_list)?);
    }
    if cfg.checks.max_location {
        match &regime {
            Some(regime) => match field_coefficient(&template, regime, lim) {
                Ok((_, degenerate)) => {
                    let predicted = predicted_max_location(regime, n, m);
                    report.max_location =
                        Some(check_max_location(&records, &predicted, template.patch_radius, degenerate));
                }
                Err(e) => report.notes.push(format!("max location check skipped: {e}")),
            },
            None => report.notes.push("max location check needs classified data".into()),
        }
    }
    Ok(report)
}

pub fn check_geometry(cfg: &RunConfig) -> Result<HypothesisReport> {
    cfg.geometry()?.check_hypotheses(64)
}
