//! Structured boundary-fitted quadrilateral mesh of the meridian section.
//!
//! The mesh is a sequence of stations. Each station is a straight fibre from a
//! point of the matrix boundary (`t = 0`) to a point of the inclusion boundary
//! (`t = 1`), carrying `fiber_cells + 1` equally spaced nodes. Inside the patch
//! the fibres are vertical, so `t` is exactly the strip coordinate
//! `(x_n - h)/δ`; beyond it they turn to follow the inclusion's normal.

use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GapGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    Planar,
    Axisymmetric,
}

/// Mesh density parameters. Doubling every entry halves all cell sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Cells across the gap along each fibre (at least 8).
    pub fiber_cells: usize,
    /// Patch stations per halving of `|x'|` between `2R` and the core.
    pub per_octave: usize,
    /// Uniform stations inside the core `|x'| < (ε/λ)^{1/m}`.
    pub core_cells: usize,
    /// Stations between the patch edge and the top, per side.
    pub far_cells: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { fiber_cells: 16, per_octave: 16, core_cells: 24, far_cells: 96 }
    }
}

impl Resolution {
    pub fn coarse() -> Self {
        Self { fiber_cells: 8, per_octave: 8, core_cells: 12, far_cells: 48 }
    }

    pub fn refined(&self) -> Self {
        Self {
            fiber_cells: 2 * self.fiber_cells,
            per_octave: 2 * self.per_octave,
            core_cells: 2 * self.core_cells,
            far_cells: 2 * self.far_cells,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fiber_cells < 8 {
            return Err(Error::Config(format!("need at least 8 cells across the gap, got {}", self.fiber_cells)));
        }
        if self.per_octave < 2 || self.core_cells < 2 || self.far_cells < 4 {
            return Err(Error::Config("resolution too coarse".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationKind {
    /// Vertical fibre above the signed abscissa.
    Patch(f64),
    /// Fibre leaving the inclusion at the signed polar angle.
    Angular(f64),
    /// Vertical fibre closing the excised contact neighbourhood.
    Excision(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct Station {
    pub outer: [f64; 2],
    pub inner: [f64; 2],
    pub kind: StationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    /// On the matrix boundary.
    Matrix,
    /// On the inclusion boundary.
    Inclusion,
    /// Interior point of an excision fibre (Dirichlet).
    Excision,
    Interior,
}

const GAUSS: f64 = 0.577_350_269_189_625_8;
const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

fn shape_derivatives(xi: f64, eta: f64) -> [[f64; 4]; 2] {
    let mut d = [[0.0; 4]; 2];
    for (a, c) in CORNERS.iter().enumerate() {
        d[0][a] = 0.25 * c[0] * (1.0 + c[1] * eta);
        d[1][a] = 0.25 * c[1] * (1.0 + c[0] * xi);
    }
    d
}

fn shape_values(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (a, c) in CORNERS.iter().enumerate() {
        n[a] = 0.25 * (1.0 + c[0] * xi) * (1.0 + c[1] * eta);
    }
    n
}

/// Physical shape gradients, Jacobian determinant and mapped point.
fn map_cell(p: &[[f64; 2]; 4], xi: f64, eta: f64) -> ([[f64; 2]; 4], f64, [f64; 2]) {
    let d = shape_derivatives(xi, eta);
    let nv = shape_values(xi, eta);
    let mut j = [[0.0; 2]; 2];
    let mut x = [0.0; 2];
    for a in 0..4 {
        for r in 0..2 {
            j[r][0] += d[r][a] * p[a][0];
            j[r][1] += d[r][a] * p[a][1];
        }
        x[0] += nv[a] * p[a][0];
        x[1] += nv[a] * p[a][1];
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
    let mut g = [[0.0; 2]; 4];
    for a in 0..4 {
        g[a][0] = inv[0][0] * d[0][a] + inv[0][1] * d[1][a];
        g[a][1] = inv[1][0] * d[0][a] + inv[1][1] * d[1][a];
    }
    (g, det, x)
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub kind: MeshKind,
    pub resolution: Resolution,
    pub stations: Vec<Station>,
    pub periodic: bool,
    pub nodes: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 4]>,
    pub element_matrices: Vec<[[f64; 4]; 4]>,
    pub epsilon: f64,
    pub two_r: f64,
    /// Station ranges of vertical patch fibres, each increasing in abscissa.
    patch_runs: Vec<Range<usize>>,
    bbox: Vec<[f64; 4]>,
}

/// Positive patch abscissae in increasing order, ending at `2R`.
fn patch_abscissae(geom: &GapGeometry, res: &Resolution, sigma: Option<f64>) -> Vec<f64> {
    let two_r = geom.two_r();
    let q = 2f64.powf(1.0 / res.per_octave as f64);
    let mut xs = Vec::new();
    match sigma {
        None => {
            let ell = (geom.epsilon / geom.lambda).powf(1.0 / geom.m as f64);
            let mut x = two_r;
            while x / q >= ell {
                xs.push(x);
                x /= q;
            }
            xs.push(x);
            for j in (1..res.core_cells).rev() {
                xs.push(x * j as f64 / res.core_cells as f64);
            }
        }
        Some(s) => {
            let mut x = two_r;
            while x / q > s * q.sqrt() {
                xs.push(x);
                x /= q;
            }
            xs.push(x);
        }
    }
    xs.reverse();
    xs
}

impl Mesh {
    /// Mesh for `ε > 0`, or for the touching geometry with the contact
    /// neighbourhood `|x'| < σ` excised.
    pub fn build(geom: &GapGeometry, res: &Resolution, sigma: Option<f64>) -> Result<Self> {
        res.validate()?;
        let kind = match geom.n {
            2 => MeshKind::Planar,
            3 => MeshKind::Axisymmetric,
            n => return Err(Error::Config(format!("direct solves support n = 2 and axisymmetric n = 3, got n = {n}"))),
        };
        let sigma = if geom.is_touching() {
            let s = sigma.ok_or_else(|| Error::Config("touching geometry needs an excision radius".into()))?;
            if !(s > 0.0 && s < 0.5 * geom.patch_radius) {
                return Err(Error::Config(format!("excision radius {s} must lie in (0, R/2)")));
            }
            Some(s)
        } else {
            None
        };

        let xs = patch_abscissae(geom, res, sigma);
        let (theta_a, _) = geom.inclusion_blend();
        let thetas: Vec<f64> =
            (1..=res.far_cells).map(|k| theta_a + (PI - theta_a) * k as f64 / res.far_cells as f64).collect();

        let mut st: Vec<Station> = Vec::new();
        let mut runs = Vec::new();
        let push_patch = |st: &mut Vec<Station>, x: f64, excision: bool| -> Result<()> {
            let (outer, inner) = geom.patch_station(x)?;
            let kind = if excision { StationKind::Excision(x) } else { StationKind::Patch(x) };
            st.push(Station { outer, inner, kind });
            Ok(())
        };
        let push_angle = |st: &mut Vec<Station>, th: f64| -> Result<()> {
            let (outer, inner) = geom.angular_station(th)?;
            st.push(Station { outer, inner, kind: StationKind::Angular(th) });
            Ok(())
        };

        let periodic;
        match (kind, sigma) {
            (MeshKind::Planar, None) => {
                periodic = true;
                let start = st.len();
                for x in xs.iter().rev() {
                    push_patch(&mut st, -x, false)?;
                }
                push_patch(&mut st, 0.0, false)?;
                for x in &xs {
                    push_patch(&mut st, *x, false)?;
                }
                runs.push(start..st.len());
                for th in &thetas {
                    push_angle(&mut st, *th)?;
                }
                for th in thetas[..thetas.len() - 1].iter().rev() {
                    push_angle(&mut st, -th)?;
                }
            }
            (MeshKind::Planar, Some(s)) => {
                periodic = false;
                let start = st.len();
                push_patch(&mut st, s, true)?;
                for x in &xs {
                    push_patch(&mut st, *x, false)?;
                }
                runs.push(start..st.len());
                for th in &thetas {
                    push_angle(&mut st, *th)?;
                }
                for th in thetas[..thetas.len() - 1].iter().rev() {
                    push_angle(&mut st, -th)?;
                }
                let start = st.len();
                for x in xs.iter().rev() {
                    push_patch(&mut st, -x, false)?;
                }
                push_patch(&mut st, -s, true)?;
                runs.push(start..st.len());
            }
            (MeshKind::Axisymmetric, sig) => {
                periodic = false;
                let start = st.len();
                match sig {
                    None => push_patch(&mut st, 0.0, false)?,
                    Some(s) => push_patch(&mut st, s, true)?,
                }
                for x in &xs {
                    push_patch(&mut st, *x, false)?;
                }
                runs.push(start..st.len());
                for th in &thetas {
                    push_angle(&mut st, *th)?;
                }
            }
        }
        if kind == MeshKind::Axisymmetric {
            // the top fibre lies on the symmetry axis
            let last = st.len() - 1;
            st[last].outer[0] = 0.0;
            st[last].inner[0] = 0.0;
        }

        let nt = res.fiber_cells;
        let mut nodes = Vec::with_capacity(st.len() * (nt + 1));
        for s in &st {
            for j in 0..=nt {
                let t = j as f64 / nt as f64;
                nodes.push([(1.0 - t) * s.outer[0] + t * s.inner[0], (1.0 - t) * s.outer[1] + t * s.inner[1]]);
            }
        }
        let columns = if periodic { st.len() } else { st.len() - 1 };
        let mut cells = Vec::with_capacity(columns * nt);
        for s in 0..columns {
            let s1 = (s + 1) % st.len();
            for j in 0..nt {
                let a = s * (nt + 1) + j;
                let b = s1 * (nt + 1) + j;
                cells.push([a, b, b + 1, a + 1]);
            }
        }

        let mut mesh = Self {
            kind,
            resolution: *res,
            stations: st,
            periodic,
            nodes,
            cells,
            element_matrices: Vec::new(),
            epsilon: geom.epsilon,
            two_r: geom.two_r(),
            patch_runs: runs,
            bbox: Vec::new(),
        };
        mesh.element_matrices = mesh.compute_element_matrices()?;
        mesh.bbox = mesh
            .cells
            .iter()
            .map(|c| {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for &a in c {
                    let p = mesh.nodes[a];
                    b[0] = b[0].min(p[0]);
                    b[1] = b[1].min(p[1]);
                    b[2] = b[2].max(p[0]);
                    b[3] = b[3].max(p[1]);
                }
                b
            })
            .collect();
        Ok(mesh)
    }

    pub fn fiber_cells(&self) -> usize {
        self.resolution.fiber_cells
    }

    pub fn node_index(&self, station: usize, j: usize) -> usize {
        station * (self.fiber_cells() + 1) + j
    }

    pub fn role(&self, node: usize) -> NodeRole {
        let nt = self.fiber_cells();
        let s = node / (nt + 1);
        let j = node % (nt + 1);
        if j == 0 {
            NodeRole::Matrix
        } else if j == nt {
            NodeRole::Inclusion
        } else if matches!(self.stations[s].kind, StationKind::Excision(_)) {
            NodeRole::Excision
        } else {
            NodeRole::Interior
        }
    }

    /// Fibre coordinate `t` of a node.
    pub fn node_t(&self, node: usize) -> f64 {
        let nt = self.fiber_cells();
        (node % (nt + 1)) as f64 / nt as f64
    }

    pub fn cell_points(&self, c: usize) -> [[f64; 2]; 4] {
        let ids = self.cells[c];
        [self.nodes[ids[0]], self.nodes[ids[1]], self.nodes[ids[2]], self.nodes[ids[3]]]
    }

    /// Integration weight: `1` in the plane, `2πr` for the body of revolution.
    pub fn weight(&self, x: f64) -> f64 {
        match self.kind {
            MeshKind::Planar => 1.0,
            MeshKind::Axisymmetric => 2.0 * PI * x,
        }
    }

    fn compute_element_matrices(&self) -> Result<Vec<[[f64; 4]; 4]>> {
        let mut out = Vec::with_capacity(self.cells.len());
        for c in 0..self.cells.len() {
            let p = self.cell_points(c);
            let mut k = [[0.0; 4]; 4];
            for gx in [-GAUSS, GAUSS] {
                for gy in [-GAUSS, GAUSS] {
                    let (g, det, x) = map_cell(&p, gx, gy);
                    if !(det > 0.0) {
                        return Err(Error::Mesh(format!(
                            "cell {c} near ({:.4e}, {:.4e}) is inverted (det {det:.3e})",
                            x[0], x[1]
                        )));
                    }
                    let w = det * self.weight(x[0]);
                    for a in 0..4 {
                        for b in 0..4 {
                            k[a][b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                        }
                    }
                }
            }
            out.push(k);
        }
        Ok(out)
    }

    /// `K v` assembled cell by cell.
    pub fn apply_stiffness(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        for (ids, k) in self.cells.iter().zip(&self.element_matrices) {
            for a in 0..4 {
                let mut s = 0.0;
                for b in 0..4 {
                    s += k[a][b] * v[ids[b]];
                }
                out[ids[a]] += s;
            }
        }
        out
    }

    /// `vᵀ K v`.
    pub fn energy(&self, v: &[f64]) -> f64 {
        self.cells
            .iter()
            .zip(&self.element_matrices)
            .map(|(ids, k)| {
                let mut e = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        e += v[ids[a]] * k[a][b] * v[ids[b]];
                    }
                }
                e
            })
            .sum()
    }

    /// Gradient of the bilinear interpolant of `v` at reference point `(ξ, η)`.
    pub fn cell_gradient(&self, c: usize, xi: f64, eta: f64, v: &[f64]) -> [f64; 2] {
        let p = self.cell_points(c);
        let (g, _, _) = map_cell(&p, xi, eta);
        let ids = self.cells[c];
        let mut out = [0.0; 2];
        for a in 0..4 {
            out[0] += g[a][0] * v[ids[a]];
            out[1] += g[a][1] * v[ids[a]];
        }
        out
    }

    pub fn cell_value(&self, c: usize, xi: f64, eta: f64, v: &[f64]) -> f64 {
        let n = shape_values(xi, eta);
        let ids = self.cells[c];
        (0..4).map(|a| n[a] * v[ids[a]]).sum()
    }

    pub fn map_point(&self, c: usize, xi: f64, eta: f64) -> [f64; 2] {
        map_cell(&self.cell_points(c), xi, eta).2
    }

    /// Average of the corner gradients of the cells sharing each node.
    pub fn nodal_gradients(&self, v: &[f64]) -> Vec<[f64; 2]> {
        let mut acc = vec![[0.0; 2]; self.nodes.len()];
        let mut count = vec![0u32; self.nodes.len()];
        for c in 0..self.cells.len() {
            for (a, corner) in CORNERS.iter().enumerate() {
                let g = self.cell_gradient(c, corner[0], corner[1], v);
                let id = self.cells[c][a];
                acc[id][0] += g[0];
                acc[id][1] += g[1];
                count[id] += 1;
            }
        }
        acc.iter()
            .zip(&count)
            .map(|(g, n)| if *n > 0 { [g[0] / *n as f64, g[1] / *n as f64] } else { [0.0; 2] })
            .collect()
    }

    /// Cell containing the meridian point and its reference coordinates.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, f64, f64)> {
        if let Some(hit) = self.locate_patch(p) {
            return Some(hit);
        }
        let tol = 1e-9;
        for (c, b) in self.bbox.iter().enumerate() {
            let pad = 1e-12 * (b[2] - b[0]).max(b[3] - b[1]).max(1.0);
            if p[0] < b[0] - pad || p[0] > b[2] + pad || p[1] < b[1] - pad || p[1] > b[3] + pad {
                continue;
            }
            if let Some((xi, eta)) = self.invert(c, p) {
                if xi.abs() <= 1.0 + tol && eta.abs() <= 1.0 + tol {
                    return Some((c, xi.clamp(-1.0, 1.0), eta.clamp(-1.0, 1.0)));
                }
            }
        }
        None
    }

    fn invert(&self, c: usize, p: [f64; 2]) -> Option<(f64, f64)> {
        let pts = self.cell_points(c);
        let (mut xi, mut eta) = (0.0, 0.0);
        for _ in 0..30 {
            let d = shape_derivatives(xi, eta);
            let nv = shape_values(xi, eta);
            let mut x = [0.0; 2];
            let mut j = [[0.0; 2]; 2];
            for a in 0..4 {
                x[0] += nv[a] * pts[a][0];
                x[1] += nv[a] * pts[a][1];
                for r in 0..2 {
                    j[0][r] += d[r][a] * pts[a][0];
                    j[1][r] += d[r][a] * pts[a][1];
                }
            }
            let f = [x[0] - p[0], x[1] - p[1]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dxi = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
            let deta = (-j[1][0] * f[0] + j[0][0] * f[1]) / det;
            xi -= dxi;
            eta -= deta;
            if dxi.abs() + deta.abs() < 1e-14 {
                return Some((xi, eta));
            }
            if xi.abs() > 10.0 || eta.abs() > 10.0 {
                return None;
            }
        }
        Some((xi, eta))
    }

    fn locate_patch(&self, p: [f64; 2]) -> Option<(usize, f64, f64)> {
        let nt = self.fiber_cells();
        let x_of = |s: usize| match self.stations[s].kind {
            StationKind::Patch(x) | StationKind::Excision(x) => x,
            StationKind::Angular(_) => f64::NAN,
        };
        for run in &self.patch_runs {
            let (lo, hi) = (run.start, run.end - 1);
            if !(p[0] >= x_of(lo) && p[0] <= x_of(hi)) {
                continue;
            }
            // last station with abscissa <= p.x
            let mut a = lo;
            let mut b = hi;
            while b - a > 1 {
                let mid = (a + b) / 2;
                if x_of(mid) <= p[0] {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            if a == hi {
                a = hi - 1;
            }
            let s0 = &self.stations[a];
            let s1 = &self.stations[a + 1];
            let (x0, x1) = (x_of(a), x_of(a + 1));
            let w = ((p[0] - x0) / (x1 - x0)).clamp(0.0, 1.0);
            let bottom = (1.0 - w) * s0.outer[1] + w * s1.outer[1];
            let top = (1.0 - w) * s0.inner[1] + w * s1.inner[1];
            let t = (p[1] - bottom) / (top - bottom);
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                return None;
            }
            let tt = t.clamp(0.0, 1.0) * nt as f64;
            let j = (tt.floor() as usize).min(nt - 1);
            let local = tt - j as f64;
            let c = a * nt + j;
            return Some((c, 2.0 * w - 1.0, 2.0 * local - 1.0));
        }
        None
    }

    /// Smallest cell height across the gap, `min δ / fiber_cells`.
    pub fn min_cell_height(&self) -> f64 {
        let nt = self.fiber_cells() as f64;
        self.stations
            .iter()
            .map(|s| ((s.inner[0] - s.outer[0]).powi(2) + (s.inner[1] - s.outer[1]).powi(2)).sqrt() / nt)
            .fold(f64::INFINITY, f64::min)
    }

    /// Horizontal spacing of the patch stations next to the axis (or excision).
    pub fn axis_cell_width(&self) -> f64 {
        let run = &self.patch_runs[0];
        let xs: Vec<f64> = run
            .clone()
            .map(|s| match self.stations[s].kind {
                StationKind::Patch(x) | StationKind::Excision(x) => x.abs(),
                StationKind::Angular(_) => f64::INFINITY,
            })
            .collect();
        let mut sorted = xs;
        sorted.sort_by(f64::total_cmp);
        sorted[1] - sorted[0]
    }

    pub fn is_patch_station(&self, s: usize) -> bool {
        matches!(self.stations[s].kind, StationKind::Patch(_) | StationKind::Excision(_))
    }
}
