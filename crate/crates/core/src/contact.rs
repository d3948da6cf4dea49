//! Standard (and dilated) contact structure on R^5.
//!
//! Coordinates are ordered (x1, y1, x2, y2, t). The dilated contact form is
//! alpha = (1/r) dt - y1 dx1 - y2 dx2, so that d alpha = dx1^dy1 + dx2^dy2 for
//! every r.

use nalgebra::{Matrix4, Matrix5, Vector4, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec5 = Vector5<f64>;
/// R^4 projection (x1, y1, x2, y2) of a horizontal vector.
pub type HVec = Vector4<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point5 {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub t: f64,
}

impl Point5 {
    pub const ORIGIN: Point5 = Point5 { x1: 0.0, y1: 0.0, x2: 0.0, y2: 0.0, t: 0.0 };

    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64, t: f64) -> Self {
        Point5 { x1, y1, x2, y2, t }
    }

    pub fn from_parts(q: &HVec, t: f64) -> Self {
        Point5::new(q[0], q[1], q[2], q[3], t)
    }

    pub fn from_vec(v: &Vec5) -> Self {
        Point5::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn q4(&self) -> HVec {
        HVec::new(self.x1, self.y1, self.x2, self.y2)
    }

    pub fn to_vec(&self) -> Vec5 {
        Vec5::new(self.x1, self.y1, self.x2, self.y2, self.t)
    }

    pub fn norm(&self) -> f64 {
        self.to_vec().norm()
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|c| c.is_finite())
    }

    pub fn dist(&self, other: &Point5) -> f64 {
        (self.to_vec() - other.to_vec()).norm()
    }

    pub fn scaled(&self, s: f64) -> Point5 {
        Point5::from_vec(&(self.to_vec() * s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactParams {
    pub r: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        ContactParams { r: 1.0 }
    }
}

impl ContactParams {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidInput(format!("dilation r = {r} not in (0, 1]")));
        }
        Ok(ContactParams { r })
    }
}

pub fn horizontal_frame(p: &Point5, params: &ContactParams) -> [Vec5; 4] {
    let r = params.r;
    [
        Vec5::new(1.0, 0.0, 0.0, 0.0, r * p.y1),
        Vec5::new(0.0, 1.0, 0.0, 0.0, 0.0),
        Vec5::new(0.0, 0.0, 1.0, 0.0, r * p.y2),
        Vec5::new(0.0, 0.0, 0.0, 1.0, 0.0),
    ]
}

pub fn alpha_eval(p: &Point5, v: &Vec5, params: &ContactParams) -> f64 {
    v[4] / params.r - p.y1 * v[0] - p.y2 * v[2]
}

pub fn dalpha_eval(u: &HVec, v: &HVec) -> f64 {
    u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2]
}

/// d alpha on ambient vectors (it only sees the R^4 projections).
pub fn dalpha_eval5(u: &Vec5, v: &Vec5) -> f64 {
    dalpha_eval(&project(u), &project(v))
}

pub fn reeb(params: &ContactParams) -> Vec5 {
    Vec5::new(0.0, 0.0, 0.0, 0.0, params.r)
}

pub fn lift_vector(q4: &HVec, _t: f64, v: &HVec, params: &ContactParams) -> Vec5 {
    let dt = params.r * (q4[1] * v[0] + q4[3] * v[2]);
    Vec5::new(v[0], v[1], v[2], v[3], dt)
}

pub fn project(v: &Vec5) -> HVec {
    HVec::new(v[0], v[1], v[2], v[3])
}

pub fn dilate(p: &Point5, r: f64) -> Point5 {
    p.scaled(1.0 / r)
}

#[allow(non_snake_case)]
pub fn standard_I(v: &HVec) -> HVec {
    HVec::new(-v[1], v[0], -v[3], v[2])
}

/// Matrix of I on the frame (x1, y1, x2, y2).
pub fn standard_i_matrix() -> Matrix4<f64> {
    Matrix4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0,
    )
}

/// Matrix D with d alpha(u, v) = u^T D v.
pub fn dalpha_matrix() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Riemannian metric alpha (x) alpha + d alpha(., I .) on ambient vectors.
pub fn metric(p: &Point5, u: &Vec5, v: &Vec5, params: &ContactParams) -> f64 {
    alpha_eval(p, u, params) * alpha_eval(p, v, params)
        + dalpha_eval(&project(u), &standard_I(&project(v)))
}

/// alpha ^ (d alpha)^2 on five vectors; equals (2/r) times the coordinate
/// determinant.
pub fn contact_volume(vs: &[Vec5; 5], params: &ContactParams) -> f64 {
    let m = Matrix5::from_columns(vs);
    2.0 / params.r * m.determinant()
}

/// Contactomorphism of the form (q, t) -> (R^T (q - q0), t - t0 - ...) for a
/// unitary R (commuting with I and preserving d alpha). The t-coordinate is
/// corrected so that the contact form keeps its standard expression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactChart {
    pub origin: Point5,
    /// Columns are the new frame vectors in old coordinates.
    pub rot: Matrix4<f64>,
    /// Symmetric matrix S with t' = t~ - (r/2) q'^T S q'.
    pub quad: Matrix4<f64>,
    pub r: f64,
}

/// Matrix P with y1 dx1 + y2 dx2 = q^T P dq.
fn liouville_matrix() -> Matrix4<f64> {
    let mut p = Matrix4::zeros();
    p[(1, 0)] = 1.0;
    p[(3, 2)] = 1.0;
    p
}

impl ContactChart {
    pub fn identity(r: f64) -> Self {
        ContactChart { origin: Point5::ORIGIN, rot: Matrix4::identity(), quad: Matrix4::zeros(), r }
    }

    pub fn new(origin: Point5, rot: Matrix4<f64>, r: f64) -> Result<Self> {
        let i = standard_i_matrix();
        let orth = (rot.transpose() * rot - Matrix4::identity()).abs().max();
        let comm = (rot * i - i * rot).abs().max();
        if orth > 1e-10 || comm > 1e-10 {
            return Err(Error::Inconsistent(format!(
                "frame change is not unitary (orthogonality {orth:.2e}, I-commutator {comm:.2e})"
            )));
        }
        let p = liouville_matrix();
        let s = rot.transpose() * p * rot - p;
        let quad = (s + s.transpose()) * 0.5;
        Ok(ContactChart { origin, rot, quad, r })
    }

    fn heisenberg_shift(&self, qt: &HVec) -> f64 {
        self.r * (self.origin.y1 * qt[0] + self.origin.y2 * qt[2])
    }

    pub fn to_local(&self, g: &Point5) -> Point5 {
        let qt = g.q4() - self.origin.q4();
        let tt = g.t - self.origin.t - self.heisenberg_shift(&qt);
        let q = self.rot.transpose() * qt;
        let t = tt - 0.5 * self.r * (q.transpose() * self.quad * q)[0];
        Point5::from_parts(&q, t)
    }

    pub fn to_global(&self, l: &Point5) -> Point5 {
        let q = l.q4();
        let tt = l.t + 0.5 * self.r * (q.transpose() * self.quad * q)[0];
        let qt = self.rot * q;
        let t = tt + self.origin.t + self.heisenberg_shift(&qt);
        Point5::from_parts(&(qt + self.origin.q4()), t)
    }

    pub fn vec_to_local(&self, v: &HVec) -> HVec {
        self.rot.transpose() * v
    }

    pub fn vec_to_global(&self, v: &HVec) -> HVec {
        self.rot * v
    }

    pub fn matrix_to_local(&self, j: &Matrix4<f64>) -> Matrix4<f64> {
        self.rot.transpose() * j * self.rot
    }
}
