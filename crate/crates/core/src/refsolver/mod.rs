//! Reference solver: bilinear finite elements on the boundary-fitted mesh.
//!
//! `v1` and `v0` share the stiffness matrix and the Dirichlet node set, so one
//! factorization serves both. Fluxes over the inclusion boundary come from the
//! discrete reactions `-(K v)_i` summed over its nodes; a one-sided difference
//! quadrature along the fibres provides an independent check.

pub mod mesh;
pub mod skyline;

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::auxfields::{ubar_radial, BoundaryData, FieldEvaluator, FieldSample};
use crate::error::{Error, Result};
use crate::geometry::GapGeometry;
use crate::regimes::BoundaryClass;

pub use mesh::{Mesh, MeshKind, NodeRole, Resolution, StationKind};
use skyline::{LdlFactor, SkylineMatrix};

/// Relative residual accepted from the direct solve.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Nodal values on a mesh, with gradients of the bilinear interpolant.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
    /// Relative residual `|b - Ax|_∞ / |b|_∞` of the solve that produced it.
    pub residual: f64,
}

impl DiscreteField {
    /// Meridian coordinates of a point of `R^n`.
    fn meridian(&self, x: &[f64]) -> Result<[f64; 2]> {
        match (self.mesh.kind, x.len()) {
            (MeshKind::Planar, 2) => Ok([x[0], x[1]]),
            (MeshKind::Axisymmetric, 3) => Ok([(x[0] * x[0] + x[1] * x[1]).sqrt(), x[2]]),
            (_, d) => Err(Error::Domain(format!("point of dimension {d} does not match the mesh"))),
        }
    }

    /// Value and meridian gradient `(∂_r, ∂_n)` at a meridian point.
    pub fn eval_meridian(&self, p: [f64; 2]) -> Result<(f64, [f64; 2])> {
        let (c, xi, eta) = self
            .mesh
            .locate(p)
            .ok_or_else(|| Error::Domain(format!("point ({:.6e}, {:.6e}) is outside the mesh", p[0], p[1])))?;
        Ok((self.mesh.cell_value(c, xi, eta, &self.values), self.mesh.cell_gradient(c, xi, eta, &self.values)))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)))
    }

    /// Extremes over the Dirichlet nodes only.
    pub fn boundary_min_max(&self) -> (f64, f64) {
        let mut out = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, v) in self.values.iter().enumerate() {
            if self.mesh.role(i) != NodeRole::Interior {
                out = (out.0.min(*v), out.1.max(*v));
            }
        }
        out
    }

    /// `a·self + b·other` on the same mesh.
    pub fn combine(&self, a: f64, other: &DiscreteField, b: f64) -> DiscreteField {
        DiscreteField {
            mesh: self.mesh.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
            residual: self.residual.max(other.residual),
        }
    }
}

impl FieldEvaluator for DiscreteField {
    fn sample(&self, x: &[f64]) -> Result<FieldSample> {
        let p = self.meridian(x)?;
        let (value, g) = self.eval_meridian(p)?;
        let gradient = match self.mesh.kind {
            MeshKind::Planar => vec![g[0], g[1]],
            MeshKind::Axisymmetric => {
                if p[0] > 0.0 {
                    vec![g[0] * x[0] / p[0], g[0] * x[1] / p[0], g[1]]
                } else {
                    vec![0.0, 0.0, g[1]]
                }
            }
        };
        Ok(FieldSample { point: x.to_vec(), value, gradient })
    }
}

/// Mesh plus the factorized stiffness matrix on its free nodes.
pub struct Discretization {
    pub mesh: Arc<Mesh>,
    unknown_of: Vec<Option<usize>>,
    matrix: SkylineMatrix,
    factor: LdlFactor,
    /// Additional nodes held fixed (used for the `ū` extension).
    fixed_extra: Vec<bool>,
}

impl Discretization {
    pub fn new(geom: &GapGeometry, res: &Resolution) -> Result<Self> {
        Self::with_excision(geom, res, None)
    }

    pub fn with_excision(geom: &GapGeometry, res: &Resolution, sigma: Option<f64>) -> Result<Self> {
        let mesh = Arc::new(Mesh::build(geom, res, sigma)?);
        let fixed = vec![false; mesh.nodes.len()];
        Self::from_mesh(mesh, fixed)
    }

    fn from_mesh(mesh: Arc<Mesh>, fixed_extra: Vec<bool>) -> Result<Self> {
        let mut unknown_of = vec![None; mesh.nodes.len()];
        let mut count = 0;
        for i in 0..mesh.nodes.len() {
            if mesh.role(i) == NodeRole::Interior && !fixed_extra[i] {
                unknown_of[i] = Some(count);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::Mesh("mesh has no free nodes".into()));
        }
        let mut first: Vec<usize> = (0..count).collect();
        for ids in &mesh.cells {
            let us: Vec<usize> = ids.iter().filter_map(|&i| unknown_of[i]).collect();
            if let Some(&lo) = us.iter().min() {
                for &u in &us {
                    first[u] = first[u].min(lo);
                }
            }
        }
        let mut matrix = SkylineMatrix::new(first);
        for (ids, k) in mesh.cells.iter().zip(&mesh.element_matrices) {
            for a in 0..4 {
                let Some(ua) = unknown_of[ids[a]] else { continue };
                for b in 0..=a {
                    let Some(ub) = unknown_of[ids[b]] else { continue };
                    if ua == ub && a != b {
                        // periodic wrap can map two corners to one unknown only on degenerate meshes
                        return Err(Error::Mesh("degenerate cell".into()));
                    }
                    matrix.add(ua, ub, k[a][b]);
                }
            }
        }
        let factor = matrix.factor()?;
        Ok(Self { mesh, unknown_of, matrix, factor, fixed_extra })
    }

    pub fn unknowns(&self) -> usize {
        self.matrix.dim()
    }

    /// Solves `K v = 0` at the free nodes with `g` prescribing all other nodes.
    pub fn solve_dirichlet(&self, g: &[f64]) -> Result<DiscreteField> {
        let mesh = &self.mesh;
        if g.len() != mesh.nodes.len() {
            return Err(Error::Solver("boundary vector has the wrong length".into()));
        }
        let mut fixed = g.to_vec();
        for (i, u) in self.unknown_of.iter().enumerate() {
            if u.is_some() {
                fixed[i] = 0.0;
            }
        }
        let kg = mesh.apply_stiffness(&fixed);
        let mut b = vec![0.0; self.unknowns()];
        for (i, u) in self.unknown_of.iter().enumerate() {
            if let Some(u) = u {
                b[*u] = -kg[i];
            }
        }
        let bnorm = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut x = self.factor.solve(&b);
        let mut residual = self.relative_residual(&b, &x, bnorm);
        if residual > SOLVER_TOLERANCE {
            let r: Vec<f64> = b.iter().zip(self.matrix.mul(&x)).map(|(p, q)| p - q).collect();
            let dx = self.factor.solve(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
            residual = self.relative_residual(&b, &x, bnorm);
        }
        if residual > SOLVER_TOLERANCE {
            return Err(Error::Solver(format!("relative residual {residual:.3e} above tolerance")));
        }
        let mut values = g.to_vec();
        for (i, u) in self.unknown_of.iter().enumerate() {
            if let Some(u) = u {
                values[i] = x[*u];
            }
        }
        Ok(DiscreteField { mesh: self.mesh.clone(), values, residual })
    }

    fn relative_residual(&self, b: &[f64], x: &[f64], bnorm: f64) -> f64 {
        if bnorm == 0.0 {
            return x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        }
        let ax = self.matrix.mul(x);
        b.iter().zip(ax).fold(0.0f64, |a, (p, q)| a.max((p - q).abs())) / bnorm
    }

    /// Boundary data of `v1`: one on the inclusion, zero on the matrix,
    /// linear in `t` across excision fibres.
    pub fn unit_data(&self) -> Vec<f64> {
        let mesh = &self.mesh;
        (0..mesh.nodes.len())
            .map(|i| match mesh.role(i) {
                NodeRole::Inclusion => 1.0,
                NodeRole::Excision => mesh.node_t(i),
                _ => 0.0,
            })
            .collect()
    }

    /// Boundary data of `v0`: `φ` on the matrix, zero on the inclusion,
    /// `φ·(1 - t)` across excision fibres.
    pub fn phi_data(&self, phi: &BoundaryData) -> Vec<f64> {
        let mesh = &self.mesh;
        let nt = mesh.fiber_cells();
        (0..mesh.nodes.len())
            .map(|i| match mesh.role(i) {
                NodeRole::Matrix => eval_phi(mesh, phi, mesh.nodes[i]),
                NodeRole::Excision => {
                    let foot = mesh.nodes[i - i % (nt + 1)];
                    eval_phi(mesh, phi, foot) * (1.0 - mesh.node_t(i))
                }
                _ => 0.0,
            })
            .collect()
    }

    pub fn solve_v1(&self) -> Result<DiscreteField> {
        if self.fixed_extra.iter().any(|f| *f) {
            return Err(Error::Solver("extension discretization cannot solve v1".into()));
        }
        self.solve_dirichlet(&self.unit_data())
    }

    pub fn solve_v0(&self, phi: &BoundaryData) -> Result<DiscreteField> {
        self.solve_dirichlet(&self.phi_data(phi))
    }
}

fn eval_phi(mesh: &Mesh, phi: &BoundaryData, p: [f64; 2]) -> f64 {
    match mesh.kind {
        MeshKind::Planar => phi.value(&p),
        MeshKind::Axisymmetric => phi.value(&[p[0], 0.0, p[1]]),
    }
}

fn check_data(geom: &GapGeometry, phi: &BoundaryData) -> Result<()> {
    phi.validate(geom.n)?;
    if geom.n == 3 && !phi.is_radial() {
        return Err(Error::Config("axisymmetric solves need rotationally symmetric data".into()));
    }
    Ok(())
}

/// Discrete `v0` for datum `φ`.
pub fn solve_v0(geom: &GapGeometry, phi: &BoundaryData, res: &Resolution) -> Result<DiscreteField> {
    check_data(geom, phi)?;
    Discretization::new(geom, res)?.solve_v0(phi)
}

/// Discrete `v1`.
pub fn solve_v1(geom: &GapGeometry, res: &Resolution) -> Result<DiscreteField> {
    Discretization::new(geom, res)?.solve_v1()
}

/// `Σ_{inclusion nodes} (K v)_i`: minus the flux `∫ ∂_ν v` over the inclusion boundary.
fn inclusion_reaction(field: &DiscreteField) -> f64 {
    let kv = field.mesh.apply_stiffness(&field.values);
    (0..kv.len()).filter(|&i| field.mesh.role(i) == NodeRole::Inclusion).map(|i| kv[i]).sum()
}

/// `Q[φ] = ∫_{∂D1} ∂_ν v0` (outer normal of the inclusion), from discrete reactions.
pub fn flux_q(v0: &DiscreteField, geom: &GapGeometry) -> Result<f64> {
    if v0.mesh.epsilon != geom.epsilon {
        return Err(Error::Domain("field was computed for a different gap".into()));
    }
    Ok(-inclusion_reaction(v0))
}

/// `∫_{∂D1} ∂_ν v` by one-sided second-order differences along the fibres
/// and the trapezoid rule on the inclusion polygon.
pub fn flux_direct(field: &DiscreteField) -> f64 {
    let mesh = &field.mesh;
    let nt = mesh.fiber_cells();
    let ns = mesh.stations.len();
    let v = &field.values;
    let inner = |s: usize| mesh.nodes[mesh.node_index(s, nt)];
    let density: Vec<f64> = (0..ns)
        .map(|s| {
            let st = &mesh.stations[s];
            let dvdt = (3.0 * v[mesh.node_index(s, nt)] - 4.0 * v[mesh.node_index(s, nt - 1)]
                + v[mesh.node_index(s, nt - 2)])
                * nt as f64
                / 2.0;
            let (prev, next) = match (mesh.periodic, s) {
                (true, _) => ((s + ns - 1) % ns, (s + 1) % ns),
                (false, 0) => (0, 1),
                (false, s) if s == ns - 1 => (s - 1, s),
                (false, s) => (s - 1, s + 1),
            };
            let (a, b) = (inner(prev), inner(next));
            let tan = [b[0] - a[0], b[1] - a[1]];
            let mut nu = [tan[1], -tan[0]];
            let f = [st.inner[0] - st.outer[0], st.inner[1] - st.outer[1]];
            // ν points from the inclusion into the matrix, against the fibre
            if nu[0] * f[0] + nu[1] * f[1] > 0.0 {
                nu = [-nu[0], -nu[1]];
            }
            let len = (nu[0] * nu[0] + nu[1] * nu[1]).sqrt();
            let nf = (nu[0] * f[0] + nu[1] * f[1]) / len;
            dvdt / nf * mesh.weight(st.inner[0])
        })
        .collect();
    let segments = if mesh.periodic { ns } else { ns - 1 };
    (0..segments)
        .map(|s| {
            let s1 = (s + 1) % ns;
            let (a, b) = (inner(s), inner(s1));
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            0.5 * len * (density[s] + density[s1])
        })
        .sum()
}

/// `a11 = ∫_Ω |∇v1|²`.
pub fn energy_a11(v1: &DiscreteField) -> f64 {
    v1.mesh.energy(&v1.values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub nodes: usize,
    pub cells: usize,
    pub unknowns: usize,
    pub stations: usize,
    pub fiber_cells: usize,
    pub min_cell_height: f64,
    pub axis_cell_width: f64,
}

impl MeshStats {
    fn of(mesh: &Mesh, unknowns: usize) -> Self {
        Self {
            nodes: mesh.nodes.len(),
            cells: mesh.cells.len(),
            unknowns,
            stations: mesh.stations.len(),
            fiber_cells: mesh.fiber_cells(),
            min_cell_height: mesh.min_cell_height(),
            axis_cell_width: mesh.axis_cell_width(),
        }
    }
}

/// Discrete solution of the perfect conductivity problem at one gap.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub v0: DiscreteField,
    pub v1: DiscreteField,
    pub u: DiscreteField,
    pub q: f64,
    pub a11: f64,
    pub c1: f64,
    /// `Q` from the direct fibre quadrature.
    pub q_direct: f64,
    /// `∫_{∂D1} ∂_ν u` by direct quadrature (zero for the exact solution).
    pub flux_balance: f64,
    pub mesh_stats: MeshStats,
}

/// Scalar part of a [`SolveResult`], as written to JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub epsilon: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Q_direct")]
    pub q_direct: f64,
    pub a11: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub flux_balance: f64,
    pub solver_residual: f64,
    pub mesh_stats: MeshStats,
}

/// `C1 = Q/a11` and `u = C1 v1 + v0`.
pub fn assemble_u(v0: &DiscreteField, v1: &DiscreteField, q: f64, a11: f64) -> Result<SolveResult> {
    if !(a11 > 0.0) {
        return Err(Error::Solver(format!("non-positive energy a11 = {a11}")));
    }
    if !Arc::ptr_eq(&v0.mesh, &v1.mesh) && v0.mesh.nodes.len() != v1.mesh.nodes.len() {
        return Err(Error::Solver("v0 and v1 live on different meshes".into()));
    }
    let c1 = q / a11;
    let u = v1.combine(c1, v0, 1.0);
    let q_direct = flux_direct(v0);
    let flux_balance = c1 * flux_direct(v1) + q_direct;
    let unknowns = (0..v0.mesh.nodes.len()).filter(|&i| v0.mesh.role(i) == NodeRole::Interior).count();
    Ok(SolveResult {
        mesh_stats: MeshStats::of(&v0.mesh, unknowns),
        v0: v0.clone(),
        v1: v1.clone(),
        u,
        q,
        a11,
        c1,
        q_direct,
        flux_balance,
    })
}

/// Full pipeline at `ε > 0` sharing one factorization.
pub fn solve(geom: &GapGeometry, phi: &BoundaryData, res: &Resolution) -> Result<SolveResult> {
    check_data(geom, phi)?;
    if geom.is_touching() {
        return Err(Error::Config("use solve_touching for the touching geometry".into()));
    }
    let disc = Discretization::new(geom, res)?;
    let v1 = disc.solve_v1()?;
    let v0 = disc.solve_v0(phi)?;
    let q = flux_q(&v0, geom)?;
    let a11 = energy_a11(&v1);
    assemble_u(&v0, &v1, q, a11)
}

impl SolveResult {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            epsilon: self.u.mesh.epsilon,
            q: self.q,
            q_direct: self.q_direct,
            a11: self.a11,
            c1: self.c1,
            flux_balance: self.flux_balance,
            solver_residual: self.v0.residual.max(self.v1.residual),
            mesh_stats: self.mesh_stats,
        }
    }

    /// Nodal CSV: meridian coordinates, `v0`, `v1`, `u`, `|∇u|`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mesh = &self.u.mesh;
        let (a, b) = match mesh.kind {
            MeshKind::Planar => ("x1", "x2"),
            MeshKind::Axisymmetric => ("r", "x3"),
        };
        writeln!(w, "{a},{b},v0,v1,u,grad_u")?;
        let grads = mesh.nodal_gradients(&self.u.values);
        for (i, p) in mesh.nodes.iter().enumerate() {
            let g = (grads[i][0].powi(2) + grads[i][1].powi(2)).sqrt();
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p[0], p[1], self.v0.values[i], self.v1.values[i], self.u.values[i], g
            )?;
        }
        Ok(())
    }
}

/// What a touching-domain solve should produce.
#[derive(Debug, Clone)]
pub enum LimitTarget {
    /// `Q*[φ]`.
    Flux(BoundaryData),
    /// `a11*`.
    Energy,
}

/// Touching-domain limits with their excision study.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitQuantities {
    #[serde(rename = "Q_star")]
    pub q_star: Option<f64>,
    pub a11_star: Option<f64>,
    pub cutoff_sigma: f64,
    /// Value with the contact neighbourhood of radius `σ` excised.
    pub at_sigma: f64,
    /// Same at `σ/2`.
    pub at_half_sigma: f64,
    pub richardson_estimate: Option<f64>,
    /// `|value(σ/2) - value(σ)| / |value(σ/2)|`.
    pub relative_change: f64,
}

impl LimitQuantities {
    /// Externally supplied limits, without an excision study.
    pub fn given(q_star: Option<f64>, a11_star: Option<f64>) -> Self {
        Self { q_star, a11_star, ..Default::default() }
    }
}

/// Default excision radius, `10⁻³ R`.
pub fn default_sigma(geom: &GapGeometry) -> f64 {
    1e-3 * geom.patch_radius
}

/// Solves the touching-domain problem with the contact neighbourhood excised
/// at `σ` and `σ/2`, and extrapolates in `σ`.
pub fn solve_touching(
    geom_star: &GapGeometry,
    target: &LimitTarget,
    sigma: f64,
    res: &Resolution,
) -> Result<LimitQuantities> {
    let (n, m) = (geom_star.n, geom_star.m);
    let geom = geom_star.touching();
    // order of the excision error in σ
    let order = match target {
        LimitTarget::Energy => {
            if m >= n - 1 {
                return Err(Error::Regime(format!("a11* diverges for m >= n - 1 (n = {n}, m = {m})")));
            }
            (n - 1 - m) as f64
        }
        LimitTarget::Flux(phi) => {
            check_data(&geom, phi)?;
            match phi.class() {
                Some(BoundaryClass::Growth { k, .. }) => {
                    if m >= n + k - 1 {
                        return Err(Error::Regime(format!(
                            "Q* is undefined for growth data with m >= n + k - 1 (n = {n}, m = {m}, k = {k})"
                        )));
                    }
                    (n + k - 1 - m) as f64
                }
                Some(BoundaryClass::Odd { .. }) => 1.0,
                None => {
                    let at_contact = eval_phi_contact(&geom, phi);
                    if at_contact != 0.0 && m >= n - 1 {
                        return Err(Error::Regime(
                            "Q* diverges for data that does not vanish at the contact point".into(),
                        ));
                    }
                    1.0
                }
            }
        }
    };
    let run = |s: f64| -> Result<f64> {
        let disc = Discretization::with_excision(&geom, res, Some(s))?;
        match target {
            LimitTarget::Energy => Ok(energy_a11(&disc.solve_v1()?)),
            LimitTarget::Flux(phi) => Ok(-inclusion_reaction(&disc.solve_v0(phi)?)),
        }
    };
    let (a, b) = rayon::join(|| run(sigma), || run(0.5 * sigma));
    let (a, b) = (a?, b?);
    let f = 2f64.powf(order);
    let extrapolated = (f * b - a) / (f - 1.0);
    let relative_change = if b != 0.0 { ((b - a) / b).abs() } else { (b - a).abs() };
    let mut out = LimitQuantities {
        cutoff_sigma: sigma,
        at_sigma: a,
        at_half_sigma: b,
        richardson_estimate: Some(extrapolated),
        relative_change,
        ..Default::default()
    };
    match target {
        LimitTarget::Energy => out.a11_star = Some(extrapolated),
        LimitTarget::Flux(_) => out.q_star = Some(extrapolated),
    }
    Ok(out)
}

fn eval_phi_contact(geom: &GapGeometry, phi: &BoundaryData) -> f64 {
    let mut x = vec![0.0; geom.n as usize];
    x[geom.n as usize - 1] = geom.h.value(0.0);
    phi.value(&x)
}

/// Discrete harmonic extension of `ū` beyond the patch: the patch nodes carry
/// the closed form, the inclusion one and the matrix zero.
pub fn ubar_extension(geom: &GapGeometry, res: &Resolution) -> Result<DiscreteField> {
    let mesh = Arc::new(Mesh::build(geom, res, None)?);
    let nt = mesh.fiber_cells();
    let mut fixed = vec![false; mesh.nodes.len()];
    let mut g = vec![0.0; mesh.nodes.len()];
    for (i, p) in mesh.nodes.iter().enumerate() {
        let s = i / (nt + 1);
        match mesh.role(i) {
            NodeRole::Inclusion => g[i] = 1.0,
            NodeRole::Matrix => g[i] = 0.0,
            _ if mesh.is_patch_station(s) => {
                fixed[i] = true;
                g[i] = ubar_radial(geom, p[0].abs(), p[1])?.0;
            }
            _ => {}
        }
    }
    let disc = Discretization::from_mesh(mesh, fixed)?;
    disc.solve_dirichlet(&g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero_field() {
        let g = GapGeometry::standard(2, 2, 1.0, 1e-2).unwrap();
        let v0 = solve_v0(&g, &BoundaryData::zero(), &Resolution::coarse()).unwrap();
        assert!(v0.values.iter().all(|v| *v == 0.0));
        assert_eq!(flux_q(&v0, &g).unwrap(), 0.0);
    }

    #[test]
    fn unit_data_matches_energy() {
        let g = GapGeometry::standard(2, 2, 1.0, 1e-2).unwrap();
        let r = solve(&g, &BoundaryData::constant(1.0), &Resolution::coarse()).unwrap();
        assert!(((r.q - r.a11) / r.a11).abs() < 1e-9, "{} vs {}", r.q, r.a11);
        assert!((r.c1 - 1.0).abs() < 1e-9);
    }
}
