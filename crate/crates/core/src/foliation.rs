//! Polar and parallel families of 3-surfaces swept out by J-invariant
//! Legendrian disks along the Reeb direction; leaf lookup through a point and
//! signed intersections with transversal Legendrian patches.
//!
//! Points are described by complex coordinates (zeta, z) with respect to J at
//! the origin (see `chart::ComplexFrame`) together with t. The polar leaf of
//! X stacks the disks through (0, s) tangent to V_X ^ J(V_X); the parallel
//! leaf of (P, X) stacks the disks through (P, 0, s) with the same V_X.

use nalgebra::{Matrix2, Matrix4, Matrix5, Vector2, Vector5};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acs::ACSField;
use crate::chart::{ComplexFrame, PlaneChart};
use crate::contact::{alpha_eval, contact_volume, lift_vector, project, HVec, Point5, Vec5};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::lift::LegendrianPatch;
use crate::psi::psi_invert_on_slice;
use crate::solver::{plane_direction, Residuals, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafKind {
    Polar,
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafParams {
    pub kind: LeafKind,
    pub x: PlaneChart,
    /// Base point in {z = 0, t = 0} (zero for polar leaves).
    pub p: Complex64,
}

impl LeafParams {
    pub fn polar(x: PlaneChart) -> Self {
        LeafParams { kind: LeafKind::Polar, x, p: Complex64::new(0.0, 0.0) }
    }

    pub fn parallel(p: Complex64, x: PlaneChart) -> Self {
        LeafParams { kind: LeafKind::Parallel, x, p }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FoliationConfig {
    pub solver: SolverConfig,
    pub t_nodes: usize,
    /// Leaves cover s in [-t_max, t_max].
    pub t_max: f64,
    /// Lookup region: |zeta| <= |z| <= region (polar) or |zeta|, |z| <= region (parallel), |t| <= 1/2.
    pub region: f64,
    pub z_min: f64,
    /// Tolerance for the lookup equations.
    pub tol: f64,
    /// Tolerance of the disk inversion used to build each disk.
    pub disk_tol: f64,
    pub max_iter: usize,
    pub condition_min: f64,
}

impl Default for FoliationConfig {
    fn default() -> Self {
        FoliationConfig {
            solver: SolverConfig { n: 33, ..Default::default() },
            t_nodes: 33,
            t_max: 1.0,
            region: 0.6,
            z_min: 1e-2,
            tol: 1e-10,
            disk_tol: 1e-11,
            max_iter: 30,
            condition_min: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub leaf: String,
    pub patch: String,
    pub ambient: String,
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation {
            leaf: "(v, Jv) of the disk followed by the stacking direction d/ds (alpha > 0)".into(),
            patch: "(w, Jw) for any tangent w".into(),
            ambient: "alpha ^ (d alpha)^2".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafDisk {
    pub s: f64,
    pub base: Point5,
    /// Tangent plane prescribed at the base point.
    pub tangent: PlaneChart,
    /// Patch parameters of the base point.
    pub uv: (f64, f64),
    pub patch: LegendrianPatch,
    pub residuals: Residuals,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Leaf {
    pub params: LeafParams,
    pub t_nodes: Vec<f64>,
    pub disks: Vec<LeafDisk>,
    pub orientation: Orientation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskSummary {
    pub s: f64,
    pub base: Point5,
    pub tangent: PlaneChart,
    pub uv: (f64, f64),
    pub residuals: Residuals,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafManifest {
    pub params: LeafParams,
    pub t_nodes: Vec<f64>,
    pub orientation: Orientation,
    pub disks: Vec<DiskSummary>,
    pub continuity: f64,
}

impl Leaf {
    /// Point and derivatives (d/ds, d/du, d/dv), linear in s between disks.
    pub fn eval(&self, s: f64, u: f64, v: f64) -> Option<(Point5, [Vec5; 3])> {
        let nodes = &self.t_nodes;
        let last = nodes.len() - 1;
        if !(s >= nodes[0] && s <= nodes[last]) {
            return None;
        }
        let k = nodes.partition_point(|&x| x <= s).clamp(1, last) - 1;
        let dt = nodes[k + 1] - nodes[k];
        let lam = (s - nodes[k]) / dt;
        let (p0, du0, dv0) = self.disks[k].patch.eval(u, v)?;
        let (p1, du1, dv1) = self.disks[k + 1].patch.eval(u, v)?;
        let (a, b) = (p0.to_vec(), p1.to_vec());
        let p = a * (1.0 - lam) + b * lam;
        Some((Point5::from_vec(&p), [(b - a) / dt, du0 * (1.0 - lam) + du1 * lam, dv0 * (1.0 - lam) + dv1 * lam]))
    }

    /// max over consecutive disks of sup |patch_{k+1} - patch_k| / dt.
    pub fn continuity(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.disks.len().saturating_sub(1) {
            let (a, b) = (&self.disks[k].patch, &self.disks[k + 1].patch);
            let dt = self.t_nodes[k + 1] - self.t_nodes[k];
            for (i, j) in a.spec().nodes() {
                worst = worst.max(a.point(i, j).dist(&b.point(i, j)) / dt);
            }
        }
        worst
    }

    pub fn manifest(&self) -> LeafManifest {
        LeafManifest {
            params: self.params,
            t_nodes: self.t_nodes.clone(),
            orientation: self.orientation.clone(),
            disks: self
                .disks
                .iter()
                .map(|d| DiskSummary { s: d.s, base: d.base, tangent: d.tangent, uv: d.uv, residuals: d.residuals })
                .collect(),
            continuity: self.continuity(),
        }
    }
}

/// Unit vector V_X of X closest to dx1, with X read at p.
pub fn adapted_direction(x: &PlaneChart, p: &Point5, acs: &ACSField) -> Result<HVec> {
    plane_direction(&acs.j_matrix(p)?.0, x)
}

/// A point of a leaf located by its (z, t) coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafHit {
    pub s: f64,
    pub uv: (f64, f64),
    pub point: Point5,
    pub zeta: Complex64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lookup {
    pub params: LeafParams,
    pub s: f64,
    pub iterations: usize,
    /// |chi_q - Id| (polar) or |Gamma_q - Id| (parallel) at the initial guess.
    pub deviation: f64,
    /// |zeta_leaf(z_q, t_q) - zeta_q| at the returned parameters.
    pub residual: f64,
    pub point: Point5,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRecord {
    pub point: Point5,
    /// +1 / -1, or 0 when the intersection is not transversal.
    pub sign: i32,
    /// |det| of the five unit tangent vectors.
    pub condition: f64,
    pub transversal: bool,
    pub leaf_params: (f64, f64, f64),
    pub patch_params: (f64, f64),
}

/// Affine part H and remainder F of a patch written as a graph
/// zeta - w z = G(z) over the base plane zeta = w z.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Regraph {
    pub center_z: Complex64,
    pub h_value: Complex64,
    /// Real 2x2 matrix of dG at the center (rows: Re, Im of G; columns: Re z, Im z).
    pub h_matrix: [[f64; 2]; 2],
    pub f_re: GridFunction,
    pub f_im: GridFunction,
}

impl Regraph {
    pub fn sup(&self) -> f64 {
        self.f_re.values.iter().zip(&self.f_im.values).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct Foliation {
    pub acs: ACSField,
    pub cfg: FoliationConfig,
    pub frame: ComplexFrame,
    pub j0: Matrix4<f64>,
}

impl Foliation {
    pub fn new(acs: ACSField, cfg: FoliationConfig) -> Result<Self> {
        cfg.solver.validate()?;
        if cfg.t_nodes < 2 || !(cfg.t_max > 0.0) || !(cfg.region > 0.0) {
            return Err(Error::InvalidInput("foliation needs t_nodes >= 2 and positive ranges".into()));
        }
        let j0 = acs.j_matrix(&Point5::ORIGIN)?.0;
        let frame = ComplexFrame::new(&j0)?;
        Ok(Foliation { acs, cfg, frame, j0 })
    }

    /// (zeta, z, t) of a point.
    pub fn coords(&self, q: &Point5) -> (Complex64, Complex64, f64) {
        let (zeta, z) = self.frame.to_complex(&q.q4());
        (zeta, z, q.t)
    }

    pub fn point_from_coords(&self, zeta: Complex64, z: Complex64, t: f64) -> Point5 {
        Point5::from_parts(&self.frame.from_complex(zeta, z), t)
    }

    pub fn base_point(&self, params: &LeafParams, s: f64) -> Point5 {
        match params.kind {
            LeafKind::Polar => Point5::new(0.0, 0.0, 0.0, 0.0, s),
            LeafKind::Parallel => self.point_from_coords(params.p, Complex64::new(0.0, 0.0), s),
        }
    }

    pub fn disk(&self, params: &LeafParams, s: f64) -> Result<LeafDisk> {
        let base = self.base_point(params, s);
        let v = adapted_direction(&params.x, &Point5::ORIGIN, &self.acs)?;
        let j = self.acs.j_matrix(&base)?.0;
        let tangent = PlaneChart::from_plane(&j, &v, &(j * v))?;
        let (inv, sol) = psi_invert_on_slice(&base, &tangent, &self.acs, &self.cfg.solver, self.cfg.disk_tol)?;
        Ok(LeafDisk { s, base, tangent, uv: inv.image.uv, patch: sol.patch, residuals: sol.residuals })
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.cfg.t_nodes;
        (0..n).map(|k| -self.cfg.t_max + 2.0 * self.cfg.t_max * k as f64 / (n - 1) as f64).collect()
    }

    pub fn build_leaf(&self, params: LeafParams) -> Result<Leaf> {
        let t_nodes = self.t_grid();
        let disks = t_nodes.par_iter().map(|&s| self.disk(&params, s)).collect::<Result<Vec<_>>>()?;
        Ok(Leaf { params, t_nodes, disks, orientation: Orientation::default() })
    }

    pub fn build_polar_leaf(&self, x: PlaneChart) -> Result<Leaf> {
        self.build_leaf(LeafParams::polar(x))
    }

    pub fn build_parallel_leaf(&self, p: Complex64, x: PlaneChart) -> Result<Leaf> {
        self.build_leaf(LeafParams::parallel(p, x))
    }

    /// Patch parameters where the z-coordinate equals `z`.
    pub fn locate_z(&self, patch: &LegendrianPatch, z: Complex64, uv0: (f64, f64)) -> Result<((f64, f64), Point5)> {
        let (mut u, mut v) = uv0;
        for _ in 0..40 {
            let (p, du, dv) = patch
                .eval(u, v)
                .ok_or_else(|| Error::Range(format!("z = {z} is not covered by the disk")))?;
            let (_, zz) = self.frame.to_complex(&p.q4());
            let f = zz - z;
            if f.norm() < 1e-13 {
                return Ok(((u, v), p));
            }
            let (_, zu) = self.frame.to_complex(&project(&du));
            let (_, zv) = self.frame.to_complex(&project(&dv));
            let m = Matrix2::new(zu.re, zv.re, zu.im, zv.im);
            let step = m
                .try_inverse()
                .ok_or_else(|| Error::NotGraphLike("disk is not a graph over the z-line".into()))?
                * Vector2::new(f.re, f.im);
            u -= step[0];
            v -= step[1];
        }
        Err(Error::Range(format!("Newton for z = {z} did not converge")))
    }

    /// The point of the leaf with coordinates z and t: solve for the disk
    /// parameter s by secant steps on t.
    pub fn leaf_point(&self, params: &LeafParams, z: Complex64, t: f64, s0: f64) -> Result<LeafHit> {
        let mut s = s0;
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..self.cfg.max_iter {
            if s.abs() > 2.0 * self.cfg.t_max {
                return Err(Error::Range(format!("leaf parameter s = {s:.3} outside the leaf")));
            }
            let disk = self.disk(params, s)?;
            let (uv, point) = self.locate_z(&disk.patch, z, disk.uv)?;
            let g = point.t - t;
            if g.abs() < self.cfg.tol {
                let zeta = self.frame.to_complex(&point.q4()).0;
                return Ok(LeafHit { s, uv, point, zeta });
            }
            let next = match prev {
                Some((sp, gp)) if (g - gp).abs() > 1e-300 => s - g * (s - sp) / (g - gp),
                _ => s - g,
            };
            prev = Some((s, g));
            s = next;
        }
        Err(Error::MaxIterations { iterations: self.cfg.max_iter, increment: f64::NAN })
    }

    /// |zeta of the leaf at (z_q, t_q) - zeta_q|: zero iff q lies on the leaf.
    pub fn leaf_gap(&self, params: &LeafParams, q: &Point5) -> Result<f64> {
        let (zeta, z, t) = self.coords(q);
        Ok((self.leaf_point(params, z, t, t)?.zeta - zeta).norm())
    }

    fn check_region(&self, q: &Point5, polar: bool) -> Result<(Complex64, Complex64, f64)> {
        let (zeta, z, t) = self.coords(q);
        let reg = self.cfg.region * (1.0 + 1e-12);
        if t.abs() > 0.5 + 1e-12 {
            return Err(Error::Range(format!("|t| = {:.3} exceeds 1/2", t.abs())));
        }
        if polar {
            if z.norm() < self.cfg.z_min {
                return Err(Error::Range(format!("|z| = {:.2e} below {:.0e}", z.norm(), self.cfg.z_min)));
            }
            if zeta.norm() > z.norm() * (1.0 + 1e-12) || z.norm() > reg {
                return Err(Error::Range("q outside {|zeta| <= |z| <= region}".into()));
            }
        } else if zeta.norm() > reg || z.norm() > reg {
            return Err(Error::Range("q outside {|zeta|, |z| <= region}".into()));
        }
        Ok((zeta, z, t))
    }

    /// The X whose polar leaf contains q, by fixed-point inversion of
    /// X -> [zeta_leaf(z_q, t_q) : z_q] from the guess [zeta_q : z_q].
    pub fn leaf_through_polar(&self, q: &Point5) -> Result<Lookup> {
        let (zeta, z, t) = self.check_region(q, true)?;
        let mut w = zeta / z;
        let mut s = t;
        let mut deviation = f64::NAN;
        for it in 1..=self.cfg.max_iter {
            let params = LeafParams::polar(PlaneChart::new(w));
            let hit = self.leaf_point(&params, z, t, s)?;
            s = hit.s;
            let g = hit.zeta - zeta;
            if it == 1 {
                deviation = (hit.zeta / z - w).norm();
            }
            if g.norm() < self.cfg.tol {
                return Ok(Lookup { params, s, iterations: it, deviation, residual: g.norm(), point: hit.point });
            }
            w -= g / z;
        }
        Err(Error::MaxIterations { iterations: self.cfg.max_iter, increment: f64::NAN })
    }

    /// The base point P whose parallel leaf (direction X) contains q.
    pub fn leaf_through_parallel(&self, q: &Point5, x: &PlaneChart) -> Result<Lookup> {
        let (zeta, z, t) = self.check_region(q, false)?;
        let mut p = zeta - x.w * z;
        let mut s = t;
        let mut deviation = f64::NAN;
        for it in 1..=self.cfg.max_iter {
            let params = LeafParams::parallel(p, *x);
            let hit = self.leaf_point(&params, z, t, s)?;
            s = hit.s;
            let g = hit.zeta - zeta;
            if it == 1 {
                deviation = g.norm();
            }
            if g.norm() < self.cfg.tol {
                return Ok(Lookup { params, s, iterations: it, deviation, residual: g.norm(), point: hit.point });
            }
            p -= g;
        }
        Err(Error::MaxIterations { iterations: self.cfg.max_iter, increment: f64::NAN })
    }

    /// Sup over disks and nodes of the chart distance of the disk tangent
    /// planes (read with J at the origin) from X.
    pub fn tangent_spread(&self, leaf: &Leaf) -> f64 {
        let mut worst = 0.0f64;
        for d in &leaf.disks {
            let spec = d.patch.spec();
            for (i, j) in spec.nodes() {
                let [a, b] = d.patch.tangents(i, j);
                if let Ok(c) = PlaneChart::from_plane(&self.j0, &project(&a), &project(&b)) {
                    worst = worst.max(c.distance(&leaf.params.x));
                }
            }
        }
        worst
    }

    /// Sign and transversality of a leaf/patch crossing at `point`.
    pub fn crossing_sign(&self, point: &Point5, leaf_du: &Vec5, leaf_ds: &Vec5, patch_da: &Vec5) -> Result<(i32, f64)> {
        let params = self.cfg.solver.params();
        let j = self.acs.j_matrix(point)?.0;
        let q4 = point.q4();
        let lift = |v: &HVec| lift_vector(&q4, point.t, v, &params);
        let e = project(leaf_du);
        let f = project(patch_da);
        let mut ds = *leaf_ds;
        if alpha_eval(point, &ds, &params) < 0.0 {
            ds = -ds;
        }
        let vs = [lift(&e), lift(&(j * e)), ds, lift(&f), lift(&(j * f))];
        let vol = contact_volume(&vs, &params);
        let norms: f64 = vs.iter().map(|v| v.norm()).product();
        let cond = Matrix5::from_columns(&vs).determinant().abs() / norms;
        if cond < self.cfg.condition_min {
            return Ok((0, cond));
        }
        Ok((if vol > 0.0 { 1 } else { -1 }, cond))
    }

    /// All crossings of a leaf with a patch: coarse scan, then Newton on the
    /// five matching equations.
    pub fn intersect(&self, leaf: &Leaf, patch: &LegendrianPatch) -> Result<Vec<IntersectionRecord>> {
        let coarse: Vec<(f64, f64)> = (0..9)
            .flat_map(|a| (0..9).map(move |b| (-0.9 + 0.225 * a as f64, -0.9 + 0.225 * b as f64)))
            .filter(|(u, v)| u * u + v * v <= 0.81 + 1e-12)
            .collect();
        let mut leaf_samples = Vec::new();
        for (k, d) in leaf.disks.iter().enumerate() {
            for &(u, v) in &coarse {
                if let Some((p, _, _)) = d.patch.eval(u, v) {
                    leaf_samples.push((leaf.t_nodes[k], u, v, p));
                }
            }
        }
        let mut seeds = Vec::new();
        for &(a, b) in &coarse {
            let Some((pp, _, _)) = patch.eval(a, b) else { continue };
            let best = leaf_samples
                .iter()
                .map(|(s, u, v, p)| (p.dist(&pp), *s, *u, *v))
                .fold((f64::INFINITY, 0.0, 0.0, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
            if best.0 < 0.3 {
                seeds.push((best.0, [best.1, best.2, best.3, a, b]));
            }
        }
        seeds.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<IntersectionRecord> = Vec::new();
        for (_, seed) in seeds.into_iter().take(12) {
            let Some((x, pt, lds, ldu, pda)) = self.newton_crossing(leaf, patch, seed) else { continue };
            if out.iter().any(|r| r.point.dist(&pt) < 1e-7) {
                continue;
            }
            let (sign, condition) = self.crossing_sign(&pt, &ldu, &lds, &pda)?;
            out.push(IntersectionRecord {
                point: pt,
                sign,
                condition,
                transversal: sign != 0,
                leaf_params: (x[0], x[1], x[2]),
                patch_params: (x[3], x[4]),
            });
        }
        Ok(out)
    }

    #[allow(clippy::type_complexity)]
    fn newton_crossing(
        &self,
        leaf: &Leaf,
        patch: &LegendrianPatch,
        seed: [f64; 5],
    ) -> Option<(Vector5<f64>, Point5, Vec5, Vec5, Vec5)> {
        let mut x = Vector5::from(seed);
        for _ in 0..40 {
            let (lp, [ds, du, dv]) = leaf.eval(x[0], x[1], x[2])?;
            let (pp, da, db) = patch.eval(x[3], x[4])?;
            let f = lp.to_vec() - pp.to_vec();
            if f.norm() < 1e-12 {
                return Some((x, lp, ds, du, da));
            }
            let jac = Matrix5::from_columns(&[ds, du, dv, -da, -db]);
            let step = jac.lu().solve(&f)?;
            x -= step;
        }
        None
    }

    /// Write a patch as a graph over the base plane zeta = w z and split it
    /// into the affine part at the patch center and the remainder, sampled on
    /// the disk of the given radius around the center's z.
    pub fn regraph(&self, patch: &LegendrianPatch, base: &PlaneChart, radius: f64, n: usize) -> Result<Regraph> {
        let w = base.w;
        let spec = patch.spec();
        // graph-likeness: dz has a fixed orientation over the patch
        let mut det_sign = 0.0f64;
        for (i, j) in spec.nodes() {
            let [a, b] = patch.tangents(i, j);
            let (_, za) = self.frame.to_complex(&project(&a));
            let (_, zb) = self.frame.to_complex(&project(&b));
            let det = za.re * zb.im - za.im * zb.re;
            if det.abs() < 1e-6 || (det_sign != 0.0 && det.signum() != det_sign) {
                return Err(Error::NotGraphLike("patch is not a graph over the base plane".into()));
            }
            det_sign = det.signum();
        }
        let (pc, du, dv) = patch.eval(0.0, 0.0).ok_or_else(|| Error::NotGraphLike("no patch center".into()))?;
        let (zeta_c, z_c) = self.frame.to_complex(&pc.q4());
        let (zeta_u, z_u) = self.frame.to_complex(&project(&du));
        let (zeta_v, z_v) = self.frame.to_complex(&project(&dv));
        let (g_u, g_v) = (zeta_u - w * z_u, zeta_v - w * z_v);
        let jz = Matrix2::new(z_u.re, z_v.re, z_u.im, z_v.im);
        let jg = Matrix2::new(g_u.re, g_v.re, g_u.im, g_v.im);
        let dg = jg * jz.try_inverse().ok_or_else(|| Error::NotGraphLike("degenerate center".into()))?;
        let h_value = zeta_c - w * z_c;
        let grid = GridSpec::new(n, radius)?;
        let mut f_re = GridFunction::zeros(grid);
        let mut f_im = GridFunction::zeros(grid);
        let jz_inv = jz.try_inverse().unwrap();
        for (i, j) in grid.nodes() {
            let (x, y) = grid.xy(i, j);
            let guess = jz_inv * Vector2::new(x, y);
            let z = z_c + Complex64::new(x, y);
            let ((_, _), p) = self.locate_z(patch, z, (guess[0], guess[1]))?;
            let (zeta, _) = self.frame.to_complex(&p.q4());
            let g = zeta - w * z;
            let lin = dg * Vector2::new(x, y);
            let h = h_value + Complex64::new(lin[0], lin[1]);
            f_re.set(i, j, (g - h).re);
            f_im.set(i, j, (g - h).im);
        }
        Ok(Regraph {
            center_z: z_c,
            h_value,
            h_matrix: [[dg[(0, 0)], dg[(0, 1)]], [dg[(1, 0)], dg[(1, 1)]]],
            f_re,
            f_im,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::{builtin, Coeffs};
    use crate::solver::picard_solve;

    fn small_cfg() -> FoliationConfig {
        FoliationConfig { t_nodes: 5, ..Default::default() }
    }

    #[test]
    fn adapted_direction_examples() {
        let acs = ACSField::standard();
        let v = adapted_direction(&PlaneChart::new(Complex64::new(0.0, 0.0)), &Point5::ORIGIN, &acs).unwrap();
        assert!((v - HVec::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-15);
        for eps in [1e-2, 1e-3] {
            let v = adapted_direction(&PlaneChart::new(Complex64::new(eps, -eps)), &Point5::ORIGIN, &acs).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-14);
            assert!((v - HVec::new(1.0, 0.0, 0.0, 0.0)).norm() < 3.0 * eps);
        }
    }

    #[test]
    fn flat_polar_leaf_and_lookup() {
        let c = Coeffs { sigma: 0.2, beta: 0.1, gamma: 0.9, delta: -0.3 };
        let fol = Foliation::new(ACSField::constant(c), small_cfg()).unwrap();
        let x = PlaneChart::new(Complex64::new(0.2, -0.1));
        let leaf = fol.build_polar_leaf(x).unwrap();
        for d in &leaf.disks {
            assert!(d.base.dist(&Point5::new(0.0, 0.0, 0.0, 0.0, d.s)) < 1e-12);
        }
        assert!(fol.tangent_spread(&leaf) < 1e-10);
        // q on the plane X through (0, t): lookup returns X exactly
        let z = Complex64::new(0.3, 0.2);
        let zeta = Complex64::new(0.1, 0.05);
        let q = fol.point_from_coords(zeta, z, 0.1);
        let look = fol.leaf_through_polar(&q).unwrap();
        assert!((look.params.x.w - zeta / z).norm() < 1e-12);
        assert!(look.deviation < 1e-10);
        let look = fol.leaf_through_parallel(&q, &x).unwrap();
        assert!((look.params.p - (zeta - x.w * z)).norm() < 1e-12);
    }

    #[test]
    fn parallel_at_zero_matches_polar() {
        let acs = builtin::perturbed(0.01, 5, Coeffs::STANDARD);
        let fol = Foliation::new(acs, small_cfg()).unwrap();
        let x = PlaneChart::new(Complex64::new(0.1, 0.1));
        let a = fol.disk(&LeafParams::polar(x), 0.2).unwrap();
        let b = fol.disk(&LeafParams::parallel(Complex64::new(0.0, 0.0), x), 0.2).unwrap();
        for (i, j) in a.patch.spec().nodes() {
            assert!(a.patch.point(i, j).dist(&b.patch.point(i, j)) < 1e-8);
        }
    }

    #[test]
    fn perturbed_lookup_contains_q() {
        let acs = builtin::perturbed(0.01, 6, Coeffs::STANDARD);
        let fol = Foliation::new(acs, small_cfg()).unwrap();
        let q = fol.point_from_coords(Complex64::new(0.1, -0.2), Complex64::new(0.3, 0.25), -0.2);
        let look = fol.leaf_through_polar(&q).unwrap();
        assert!(fol.leaf_gap(&look.params, &q).unwrap() < 1e-6);
        let x = PlaneChart::new(Complex64::new(0.1, 0.0));
        let look = fol.leaf_through_parallel(&q, &x).unwrap();
        assert!(look.iterations <= 10);
        assert!(fol.leaf_gap(&look.params, &q).unwrap() < 1e-6);
    }

    #[test]
    fn region_checks() {
        let fol = Foliation::new(ACSField::standard(), small_cfg()).unwrap();
        let q = fol.point_from_coords(Complex64::new(0.0, 0.0), Complex64::new(1e-3, 0.0), 0.0);
        assert!(matches!(fol.leaf_through_polar(&q), Err(Error::Range(_))));
        let q = fol.point_from_coords(Complex64::new(0.3, 0.0), Complex64::new(0.1, 0.0), 0.0);
        assert!(matches!(fol.leaf_through_polar(&q), Err(Error::Range(_))));
        let q = fol.point_from_coords(Complex64::new(0.0, 0.0), Complex64::new(0.1, 0.0), 0.8);
        assert!(matches!(fol.leaf_through_polar(&q), Err(Error::Range(_))));
    }

    #[test]
    fn flat_crossing_is_positive() {
        let fol = Foliation::new(ACSField::standard(), small_cfg()).unwrap();
        let leaf = fol.build_polar_leaf(PlaneChart::new(Complex64::new(0.0, 0.0))).unwrap();
        let cfg = SolverConfig { n: 33, ..Default::default() };
        for w in [Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.6), Complex64::new(0.0, -0.9)] {
            let sol = picard_solve(&Point5::ORIGIN, &PlaneChart::new(w), &fol.acs, &cfg).unwrap();
            let recs = fol.intersect(&leaf, &sol.patch).unwrap();
            assert_eq!(recs.len(), 1, "{recs:?}");
            assert!(recs[0].point.norm() < 1e-10);
            assert_eq!(recs[0].sign, 1);
        }
        // a patch far from the leaf
        let far = picard_solve(&Point5::new(0.0, 3.0, 3.0, 0.0, 0.0), &PlaneChart::new(Complex64::new(0.5, 0.0)), &fol.acs, &cfg)
            .unwrap();
        assert!(fol.intersect(&leaf, &far.patch).unwrap().is_empty());
    }

    #[test]
    fn regraph_examples() {
        let fol = Foliation::new(ACSField::standard(), small_cfg()).unwrap();
        let cfg = SolverConfig { n: 33, ..Default::default() };
        let x = PlaneChart::new(Complex64::new(0.2, 0.1));
        let flat = picard_solve(&Point5::ORIGIN, &x, &fol.acs, &cfg).unwrap();
        let rg = fol.regraph(&flat.patch, &PlaneChart::new(Complex64::new(0.0, 0.0)), 0.4, 17).unwrap();
        assert!(rg.sup() < 1e-12);
        let acs = builtin::perturbed(0.02, 7, Coeffs::STANDARD);
        let fol = Foliation::new(acs, small_cfg()).unwrap();
        let sol = picard_solve(&Point5::ORIGIN, &x, &fol.acs, &cfg).unwrap();
        let rg = fol.regraph(&sol.patch, &x, 0.4, 17).unwrap();
        let c = rg.f_re.spec.center();
        assert!(rg.f_re.get(c, c).abs() < 1e-12 && rg.f_im.get(c, c).abs() < 1e-12);
        for axis in 0..2 {
            assert!(rg.f_re.d_axis(c, c, axis).abs() < 1e-3 && rg.f_im.d_axis(c, c, axis).abs() < 1e-3);
        }
    }
}
