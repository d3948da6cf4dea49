//! Pointwise checks of three contact 5-manifolds carrying horizontal 2-forms:
//! the unit sphere S^5 in C^3 with Re(i_N dz1^dz2^dz3), star-shaped level
//! sets in C^3 with the same ambient forms, and the manifold of orthonormal
//! pairs N^5 in S^3 x S^3.
//!
//! Ambient coordinates on C^3 are (x1, y1, x2, y2, x3, y3). The contact form
//! on C^3 is alpha = (1/2) i_N (sum dx^dy), so d alpha restricts to the
//! Kähler form. On N^5, alpha(U) = (<e1, U2> - <e2, U1>) / 2.
//! d alpha is always measured by central differences of alpha along
//! constant ambient directions (step `FD_STEP`, one Richardson step).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{comass, verify_semicalibration, wedge_coeff, Form2H, HypothesisCheck, JMatrix};
use crate::sampling::{normal, rng};

pub type Vector = DVector<f64>;

pub const FD_STEP: f64 = 1e-5;
pub const CONSTRAINT_TOL: f64 = 1e-12;
pub const ORTHONORMAL_TOL: f64 = 1e-12;
pub const REEB_TOL: f64 = 1e-10;
pub const FORM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    S5,
    CyLevelset,
    N5,
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s5" => Ok(ScenarioId::S5),
            "cy" | "cy_levelset" => Ok(ScenarioId::CyLevelset),
            "n5" => Ok(ScenarioId::N5),
            _ => Err(Error::InvalidInput(format!("unknown scenario '{s}' (expected s5, cy or n5)"))),
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioId::S5 => "s5",
            ScenarioId::CyLevelset => "cy_levelset",
            ScenarioId::N5 => "n5",
        })
    }
}

/// The quadric sum_k w_k x_k^2 = level in R^6 = C^3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub weights: [f64; 6],
    pub level: f64,
}

impl LevelSet {
    pub fn sphere(radius: f64) -> Self {
        LevelSet { weights: [1.0; 6], level: radius * radius }
    }

    pub fn ellipsoid(weights: [f64; 6]) -> Self {
        LevelSet { weights, level: 1.0 }
    }

    pub fn random_ellipsoid(rng: &mut impl Rng) -> Self {
        LevelSet::ellipsoid(std::array::from_fn(|_| rng.gen_range(0.5..2.0)))
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (0..6).map(|k| self.weights[k] * x[k] * x[k]).sum()
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_fn(6, |k, _| 2.0 * self.weights[k] * x[k])
    }

    /// Radial projection of a nonzero direction onto the level set.
    pub fn project(&self, d: &Vector) -> Vector {
        d * (self.level / self.value(d)).sqrt()
    }
}

/// A point of one of the scenario manifolds with its contact data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioPoint {
    pub scenario: ScenarioId,
    pub ambient: Vec<f64>,
    /// Orthonormal (induced metric) basis of the tangent 5-space.
    pub tangent_basis: Vec<Vec<f64>>,
    /// alpha on the tangent basis.
    pub alpha: Vec<f64>,
    pub reeb: Vec<f64>,
    /// Horizontal frame (e1, e2, e3, e4) with d alpha = e12 + e34.
    pub horizontal: Vec<Vec<f64>>,
    pub omega: Form2H,
    /// d alpha measured in the horizontal frame.
    pub dalpha: Form2H,
    /// Unit normals of the defining constraints.
    pub normals: Vec<Vec<f64>>,
}

type AlphaFn = fn(&Vector, &Vector) -> f64;
type OmegaFn = fn(&Vector, &Vector, &Vector) -> f64;

fn i_mul(v: &Vector) -> Vector {
    Vector::from_fn(6, |k, _| if k % 2 == 0 { -v[k + 1] } else { v[k - 1] })
}

fn to_c3(v: &Vector) -> [Complex64; 3] {
    std::array::from_fn(|k| Complex64::new(v[2 * k], v[2 * k + 1]))
}

fn det3(a: &[Complex64; 3], b: &[Complex64; 3], c: &[Complex64; 3]) -> Complex64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn c3_alpha(x: &Vector, u: &Vector) -> f64 {
    0.5 * i_mul(x).dot(u)
}

fn c3_omega(x: &Vector, u: &Vector, v: &Vector) -> f64 {
    det3(&to_c3(x), &to_c3(u), &to_c3(v)).re
}

fn halves(x: &Vector) -> (Vector, Vector) {
    (x.rows(0, 4).into_owned(), x.rows(4, 4).into_owned())
}

fn det4(cols: [&Vector; 4]) -> f64 {
    Matrix4::from_fn(|i, j| cols[j][i]).determinant()
}

fn n5_alpha(x: &Vector, u: &Vector) -> f64 {
    let ((e1, e2), (u1, u2)) = (halves(x), halves(u));
    0.5 * (e1.dot(&u2) - e2.dot(&u1))
}

fn n5_omega(x: &Vector, u: &Vector, v: &Vector) -> f64 {
    let ((e1, e2), (u1, u2), (v1, v2)) = (halves(x), halves(u), halves(v));
    det4([&e1, &e2, &u1, &v2]) - det4([&e1, &e2, &v1, &u2])
}

fn model(id: ScenarioId) -> (AlphaFn, OmegaFn) {
    match id {
        ScenarioId::S5 | ScenarioId::CyLevelset => (c3_alpha, c3_omega),
        ScenarioId::N5 => (n5_alpha, n5_omega),
    }
}

/// d alpha(u, v) = D_u alpha(v) - D_v alpha(u) for constant u, v.
pub fn dalpha_fd(alpha: AlphaFn, x: &Vector, u: &Vector, v: &Vector) -> f64 {
    let d = |h: f64| {
        (alpha(&(x + u * h), v) - alpha(&(x - u * h), v) - alpha(&(x + v * h), u) + alpha(&(x - v * h), u)) / (2.0 * h)
    };
    (4.0 * d(0.5 * FD_STEP) - d(FD_STEP)) / 3.0
}

fn form_in_frame(f: impl Fn(&Vector, &Vector) -> f64, frame: &[Vector]) -> Form2H {
    Form2H::from_matrix(&Matrix4::from_fn(|i, j| if i == j { 0.0 } else { f(&frame[i], &frame[j]) }))
}

/// Gram-Schmidt of `candidates` against `against` (orthonormal); keeps
/// vectors whose residual norm exceeds 0.3 until `count` are found.
fn complete_basis(against: &[Vector], candidates: impl Iterator<Item = Vector>, count: usize) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for c in candidates {
        let mut r = c;
        for b in against.iter().chain(out.iter()) {
            r -= b * b.dot(&r);
        }
        let n = r.norm();
        if n > 0.3 {
            out.push(r / n);
            if out.len() == count {
                break;
            }
        }
    }
    out
}

fn unit(dim: usize, k: usize) -> Vector {
    Vector::from_fn(dim, |i, _| if i == k { 1.0 } else { 0.0 })
}

fn orthonormalize(vs: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        let mut r = v.clone();
        for b in &out {
            r -= b * b.dot(&r);
        }
        out.push(r.normalize());
    }
    out
}

fn assemble(
    scenario: ScenarioId,
    x: &Vector,
    tangent: Vec<Vector>,
    reeb: Vector,
    horizontal: Vec<Vector>,
    normals: Vec<Vector>,
) -> ScenarioPoint {
    let (alpha, omega) = model(scenario);
    ScenarioPoint {
        scenario,
        ambient: x.as_slice().to_vec(),
        alpha: tangent.iter().map(|b| alpha(x, b)).collect(),
        omega: form_in_frame(|u, v| omega(x, u, v), &horizontal),
        dalpha: form_in_frame(|u, v| dalpha_fd(alpha, x, u, v), &horizontal),
        tangent_basis: tangent.iter().map(|v| v.as_slice().to_vec()).collect(),
        reeb: reeb.as_slice().to_vec(),
        horizontal: horizontal.iter().map(|v| v.as_slice().to_vec()).collect(),
        normals: normals.iter().map(|v| v.as_slice().to_vec()).collect(),
    }
}

/// Unit sphere: Reeb 2ip, horizontal frame (e1, i e1, e3, i e3) with
/// e1, e3 Hermitian-orthonormal and orthogonal to p.
pub fn s5_point(p: &[f64; 6]) -> Result<ScenarioPoint> {
    let x = Vector::from_row_slice(p);
    if (x.norm() - 1.0).abs() > CONSTRAINT_TOL {
        return Err(Error::InvalidInput(format!("|p| = {} is not 1", x.norm())));
    }
    let ix = i_mul(&x);
    // complex projections of the real unit vectors
    let mut frame: Vec<Vector> = Vec::new();
    for k in 0..6 {
        let mut r = unit(6, k);
        for b in [&x, &ix].into_iter().chain(frame.iter()) {
            r -= b * b.dot(&r);
        }
        if r.norm() > 0.3 {
            let e = r.normalize();
            let ie = i_mul(&e);
            frame.push(e);
            frame.push(ie);
            if frame.len() == 4 {
                break;
            }
        }
    }
    let mut tangent = frame.clone();
    tangent.push(ix.clone());
    Ok(assemble(ScenarioId::S5, &x, tangent, ix * 2.0, frame, vec![x.clone()]))
}

/// Level set of a quadric: Reeb along i grad(rho); horizontal frame
/// orthonormal for the metric g(|A| ., .) where d alpha = g(A ., .) on the
/// horizontal space, so that d alpha = e12 + e34.
pub fn cy_levelset_point(rho: &LevelSet, p: &[f64; 6]) -> Result<ScenarioPoint> {
    let x = Vector::from_row_slice(p);
    let value = rho.value(&x);
    if (value - rho.level).abs() > CONSTRAINT_TOL * rho.level.max(1.0) {
        return Err(Error::InvalidInput(format!("rho(p) = {value} differs from the level {}", rho.level)));
    }
    let g = rho.gradient(&x);
    let radial = x.dot(&g) / (x.norm() * g.norm());
    if !(radial.abs() > 1e-8) {
        return Err(Error::Degenerate("radial field is tangent to the level set".into()));
    }
    let n = g.normalize();
    let ig = i_mul(&g);
    let reeb = &ig / c3_alpha(&x, &ig);
    let w = {
        let ix = i_mul(&x);
        let r = &ix - &n * n.dot(&ix);
        r.normalize()
    };
    let hb = complete_basis(&[n.clone(), w.clone()], (0..6).map(|k| unit(6, k)), 4);
    // d alpha on the horizontal basis: w(u, v) = u^T D v = g(A u, v), A = -D
    let d = Matrix4::from_fn(|i, j| if i == j { 0.0 } else { dalpha_fd(c3_alpha, &x, &hb[i], &hb[j]) });
    let d = (d - d.transpose()) * 0.5;
    let a = -d;
    let eig = SymmetricEigen::new(a.transpose() * a);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::Degenerate("d alpha is degenerate on the horizontal space".into()));
    }
    let abs_a = eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let abs_inv = abs_a.try_inverse().ok_or_else(|| Error::Degenerate("singular |A|".into()))?;
    let cplx = a * abs_inv;
    let gp = |u: &nalgebra::Vector4<f64>, v: &nalgebra::Vector4<f64>| (u.transpose() * abs_a * v)[0];
    let e1 = nalgebra::Vector4::new(1.0, 0.0, 0.0, 0.0);
    let e1 = e1 / gp(&e1, &e1).sqrt();
    let e2 = cplx * e1;
    // the candidate with the largest residual against span(e1, e2)
    let e3 = (1..4)
        .map(|k| {
            let mut r = nalgebra::Vector4::from_fn(|i, _| if i == k { 1.0 } else { 0.0 });
            for b in [e1, e2] {
                r -= b * gp(&b, &r);
            }
            r
        })
        .max_by(|a, b| gp(a, a).total_cmp(&gp(b, b)))
        .unwrap();
    let e3 = e3 / gp(&e3, &e3).sqrt();
    let e4 = cplx * e3;
    let to_ambient = |c: &nalgebra::Vector4<f64>| (0..4).fold(Vector::zeros(6), |acc, k| acc + &hb[k] * c[k]);
    let frame: Vec<Vector> = [e1, e2, e3, e4].iter().map(to_ambient).collect();
    let mut tangent = hb.clone();
    tangent.push(w);
    Ok(assemble(ScenarioId::CyLevelset, &x, tangent, reeb, frame, vec![n]))
}

/// Orthonormal pair (e1, e2) in R^4: Reeb (-e2, e1); horizontal frame
/// (f1, 0), (0, f1), (f2, 0), (0, f2) with (f1, f2) an oriented
/// orthonormal basis of span(e1, e2)^perp.
pub fn n5_point(e1: &[f64; 4], e2: &[f64; 4]) -> Result<ScenarioPoint> {
    let (a, b) = (Vector::from_row_slice(e1), Vector::from_row_slice(e2));
    let defect = (a.norm() - 1.0).abs().max((b.norm() - 1.0).abs()).max(a.dot(&b).abs());
    if defect > CONSTRAINT_TOL {
        return Err(Error::InvalidInput(format!("(e1, e2) is not orthonormal (defect {defect:.2e})")));
    }
    let mut f = complete_basis(&[a.clone(), b.clone()], (0..4).map(|k| unit(4, k)), 2);
    if det4([&a, &b, &f[0], &f[1]]) < 0.0 {
        f[1] = -&f[1];
    }
    let join = |u: &Vector, v: &Vector| Vector::from_iterator(8, u.iter().chain(v.iter()).copied());
    let z = Vector::zeros(4);
    let frame = vec![join(&f[0], &z), join(&z, &f[0]), join(&f[1], &z), join(&z, &f[1])];
    let x = join(&a, &b);
    let reeb = join(&-&b, &a);
    let mut tangent = frame.clone();
    tangent.push(&reeb / 2f64.sqrt());
    let normals = orthonormalize(&[join(&a, &z), join(&z, &b), join(&b, &a)]);
    Ok(assemble(ScenarioId::N5, &x, tangent, reeb, frame, normals))
}

/// Re-express (d alpha, w) in a frame adapted to both forms: e1 is the first
/// frame vector, e4 = -K e1 with K = D^-1 W, e2 and e3 are the minimum-norm
/// solutions of their pairings with e1 and e4, shifted along span(e1, e4)
/// so that d alpha(e2, e3) = w(e2, e3) = 0. When w ^ d alpha = 0 and
/// w ^ w = (d alpha)^2 the result is d alpha = e12 + e34, w = e13 + e42.
pub fn adapted_frame(dalpha: &Form2H, w: &Form2H) -> Option<(Form2H, Form2H)> {
    use nalgebra::Vector4;
    let (d, m) = (dalpha.to_matrix(), w.to_matrix());
    let k = d.try_inverse()? * m;
    let e1 = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let e4 = -(k * e1);
    let rows = Matrix4::from_rows(&[e1.transpose() * d, e4.transpose() * d, e1.transpose() * m, e4.transpose() * m]);
    let svd = rows.svd(true, true);
    let e2 = svd.solve(&Vector4::new(1.0, 0.0, 0.0, 1.0), 1e-9).ok()?;
    let e3 = svd.solve(&Vector4::new(0.0, -1.0, 1.0, 0.0), 1e-9).ok()?;
    let pair = |f: &Matrix4<f64>, a: &Vector4<f64>, b: &Vector4<f64>| (a.transpose() * f * b)[0];
    let e3 = e3 + e1 * pair(&d, &e2, &e3) + e4 * pair(&m, &e2, &e3);
    let b = Matrix4::from_columns(&[e1, e2, e3, e4]);
    Some((Form2H::from_matrix(&(b.transpose() * d * b)), Form2H::from_matrix(&(b.transpose() * m * b))))
}

/// Comass as the largest singular value of the frame matrix.
pub fn comass_spectral(w: &Form2H) -> f64 {
    let m = w.to_matrix();
    SymmetricEigen::new(m.transpose() * m).eigenvalues.max().max(0.0).sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointChecks {
    pub index: usize,
    pub ambient: Vec<f64>,
    /// Factor s with (s w) ^ (s w) = d alpha ^ d alpha.
    pub normalization: f64,
    pub semicalibration_theta: Option<f64>,
    /// Checks that decide pass/fail.
    pub checks: Vec<HypothesisCheck>,
    /// Values that are measured and reported only.
    pub reported: Vec<HypothesisCheck>,
    pub pass: bool,
}

fn vecs(v: &[Vec<f64>]) -> Vec<Vector> {
    v.iter().map(|x| Vector::from_row_slice(x)).collect()
}

impl ScenarioPoint {
    pub fn check(&self, index: usize) -> PointChecks {
        let (alpha, omega) = model(self.scenario);
        let x = Vector::from_row_slice(&self.ambient);
        let reeb = Vector::from_row_slice(&self.reeb);
        let tangent = vecs(&self.tangent_basis);
        let frame = vecs(&self.horizontal);
        let normals = vecs(&self.normals);
        let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |m, v| m.max(v.abs()));

        let gram = max(&mut (0..5).flat_map(|i| (0..5).map(move |j| (i, j))).map(|(i, j)| {
            tangent[i].dot(&tangent[j]) - if i == j { 1.0 } else { 0.0 }
        }));
        let tangency = max(&mut tangent.iter().chain(frame.iter()).chain(std::iter::once(&reeb))
            .flat_map(|b| normals.iter().map(move |n| n.dot(b))));
        let alpha_reeb = alpha(&x, &reeb) - 1.0;
        let reeb_dalpha = max(&mut tangent.iter().map(|b| dalpha_fd(alpha, &x, &reeb, b)));
        let reeb_omega = max(&mut tangent.iter().map(|b| omega(&x, &reeb, b)));
        let frame_alpha = max(&mut frame.iter().map(|e| alpha(&x, e)));
        let da = self.dalpha;
        let frame_dalpha = max(&mut da.to_array().iter().zip(Form2H::dalpha().to_array()).map(|(a, b)| a - b));
        let wedge = wedge_coeff(&self.omega, &da);
        let comass_gap = comass(&self.omega) - comass_spectral(&self.omega);
        let square = wedge_coeff(&self.omega, &self.omega);
        let normalization = if square > 0.0 { (wedge_coeff(&da, &da) / square).sqrt() } else { f64::NAN };
        let normalized = self.omega.scale(normalization);
        let semi = verify_semicalibration(&normalized);
        let semi_value = if semi.pass { 0.0 } else { semi.checks.iter().filter(|c| !c.pass).fold(f64::INFINITY, |m, c| m.min(c.value.abs())) };
        let j_defect = semi.j.map(|j: JMatrix| {
            let d = da.to_matrix();
            let m = d * j.0 - j.0.transpose() * d;
            m.abs().max()
        });

        let mut checks = vec![
            HypothesisCheck::new("tangent basis orthonormal", gram, ORTHONORMAL_TOL),
            HypothesisCheck::new("frame and Reeb tangent", tangency, ORTHONORMAL_TOL),
            HypothesisCheck::new("alpha(Reeb) == 1", alpha_reeb, ORTHONORMAL_TOL),
            HypothesisCheck::new("i_Reeb dalpha == 0", reeb_dalpha, REEB_TOL),
            HypothesisCheck::new("alpha == 0 on the horizontal frame", frame_alpha, ORTHONORMAL_TOL),
            HypothesisCheck::new("dalpha == e12 + e34 in the frame", frame_dalpha, FORM_TOL),
            HypothesisCheck::new("omega ^ dalpha == 0", wedge, FORM_TOL),
            HypothesisCheck::new("comass closed form == spectral", comass_gap, FORM_TOL),
        ];
        let mut reported = Vec::new();
        let reeb_omega_check = HypothesisCheck::new("i_Reeb omega == 0", reeb_omega, REEB_TOL);
        let semi_check = HypothesisCheck::new("semicalibration after normalization", semi_value, FORM_TOL);
        let j_check = HypothesisCheck::new("dalpha(v, Jv) == 0", j_defect.unwrap_or(f64::NAN), FORM_TOL);
        match self.scenario {
            ScenarioId::S5 | ScenarioId::N5 => {
                checks.push(reeb_omega_check);
                checks.push(HypothesisCheck::new("omega ^ omega == dalpha ^ dalpha", square - wedge_coeff(&da, &da), FORM_TOL));
                checks.push(HypothesisCheck::new("comass == 1", comass_spectral(&self.omega) - 1.0, FORM_TOL));
                checks.push(semi_check);
                checks.push(j_check);
            }
            ScenarioId::CyLevelset => {
                let adapted = match adapted_frame(&da, &normalized) {
                    Some((d2, w2)) => {
                        let frame_gap = d2
                            .to_array()
                            .iter()
                            .zip(Form2H::dalpha().to_array())
                            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                        let semi = verify_semicalibration(&w2);
                        let fail = semi.checks.iter().filter(|c| !c.pass).fold(0.0f64, |m, c| m.max(c.value.abs()));
                        frame_gap.max(if semi.pass { 0.0 } else { fail.max(FORM_TOL * 10.0) })
                    }
                    None => f64::NAN,
                };
                checks.push(HypothesisCheck::new(
                    "semicalibration in the frame adapted to (dalpha, omega)",
                    adapted,
                    FORM_TOL,
                ));
                reported.push(reeb_omega_check);
                reported.push(HypothesisCheck::new(
                    "comass after normalization (polar frame)",
                    comass_spectral(&normalized) - 1.0,
                    FORM_TOL,
                ));
                reported.push(semi_check);
                reported.push(j_check);
            }
        }
        let pass = checks.iter().all(|c| c.pass);
        PointChecks {
            index,
            ambient: self.ambient.clone(),
            normalization,
            semicalibration_theta: semi.theta,
            checks,
            reported,
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaxDeviation {
    pub check: String,
    pub max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: ScenarioId,
    pub n_points: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub level_set: Option<LevelSet>,
    pub max_deviations: Vec<MaxDeviation>,
    pub reported_max: Vec<MaxDeviation>,
    pub normalization_range: (f64, f64),
    pub points: Vec<PointChecks>,
    pub pass: bool,
}

fn summarize(points: &[PointChecks], pick: fn(&PointChecks) -> &Vec<HypothesisCheck>) -> Vec<MaxDeviation> {
    let Some(first) = points.first() else { return Vec::new() };
    pick(first)
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let max = points.iter().map(|p| pick(p)[k].value.abs()).fold(0.0, |m: f64, v| if v.is_nan() { f64::NAN } else { m.max(v) });
            MaxDeviation {
                check: c.hypothesis.clone(),
                max,
                tolerance: c.tolerance,
                pass: points.iter().all(|p| pick(p)[k].pass),
            }
        })
        .collect()
}

fn random_unit(rng: &mut impl Rng, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| normal(rng)).normalize()
}

/// Sample a random point of the scenario manifold.
pub fn random_point(id: ScenarioId, rng: &mut impl Rng, level_set: &LevelSet) -> Result<ScenarioPoint> {
    match id {
        ScenarioId::S5 => {
            let p = random_unit(rng, 6);
            s5_point(&std::array::from_fn(|k| p[k]))
        }
        ScenarioId::CyLevelset => {
            let p = level_set.project(&random_unit(rng, 6));
            cy_levelset_point(level_set, &std::array::from_fn(|k| p[k]))
        }
        ScenarioId::N5 => {
            let a = random_unit(rng, 4);
            let b = random_unit(rng, 4);
            let b = (&b - &a * a.dot(&b)).normalize();
            n5_point(&std::array::from_fn(|k| a[k]), &std::array::from_fn(|k| b[k]))
        }
    }
}

/// Verify `n_points` random points. For the level-set scenario a random
/// ellipsoid is drawn from the same seed unless one is given.
pub fn run_campaign(id: ScenarioId, n_points: usize, seed: u64, level_set: Option<LevelSet>) -> Result<ScenarioReport> {
    if n_points == 0 {
        return Err(Error::InvalidInput("campaign needs at least one point".into()));
    }
    let mut r = rng(seed);
    let ls = match (id, level_set) {
        (ScenarioId::CyLevelset, Some(l)) => Some(l),
        (ScenarioId::CyLevelset, None) => Some(LevelSet::random_ellipsoid(&mut r)),
        _ => None,
    };
    let surface = ls.unwrap_or(LevelSet::sphere(1.0));
    let points = (0..n_points)
        .map(|k| Ok(random_point(id, &mut r, &surface)?.check(k)))
        .collect::<Result<Vec<_>>>()?;
    let normalization_range = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.normalization), hi.max(p.normalization)));
    Ok(ScenarioReport {
        scenario: id,
        n_points,
        seed,
        fd_step: FD_STEP,
        level_set: ls,
        max_deviations: summarize(&points, |p| &p.checks),
        reported_max: summarize(&points, |p| &p.reported),
        normalization_range,
        pass: points.iter().all(|p| p.pass),
        points,
    })
}
