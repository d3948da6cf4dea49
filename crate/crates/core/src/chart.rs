//! J-invariant 2-planes as points [W1 : W2] of the affine chart W2 != 0 of CP^1.
//!
//! At a point with structure J, horizontal vectors get complex coordinates
//! (zeta, z) through the real basis (dy1, J dy1, dx1, J dx1):
//! v = Re(zeta) dy1 + Im(zeta) J dy1 + Re(z) dx1 + Im(z) J dx1,
//! so that multiplication by i is J and dx1 = (0, 1). The plane [w : 1] is the
//! complex line through (w, 1).

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contact::HVec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneChart {
    pub w: Complex64,
}

/// Columns dy1, J dy1, dx1, J dx1.
pub fn complex_basis(j: &Matrix4<f64>) -> Matrix4<f64> {
    let dy1 = HVec::new(0.0, 1.0, 0.0, 0.0);
    let dx1 = HVec::new(1.0, 0.0, 0.0, 0.0);
    Matrix4::from_columns(&[dy1, j * dy1, dx1, j * dx1])
}

/// Converts between horizontal vectors and complex coordinates for one J.
#[derive(Clone, Copy, Debug)]
pub struct ComplexFrame {
    basis: Matrix4<f64>,
    inverse: Matrix4<f64>,
}

impl ComplexFrame {
    pub fn new(j: &Matrix4<f64>) -> Result<Self> {
        let basis = complex_basis(j);
        let inverse = basis
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("complex basis (dy1, J dy1, dx1, J dx1) is singular".into()))?;
        Ok(ComplexFrame { basis, inverse })
    }

    pub fn to_complex(&self, v: &HVec) -> (Complex64, Complex64) {
        let c = self.inverse * v;
        (Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3]))
    }

    pub fn from_complex(&self, zeta: Complex64, z: Complex64) -> HVec {
        self.basis * HVec::new(zeta.re, zeta.im, z.re, z.im)
    }
}

impl PlaneChart {
    pub fn new(w: Complex64) -> Self {
        PlaneChart { w }
    }

    pub fn from_homogeneous(w1: Complex64, w2: Complex64) -> Result<Self> {
        if w2.norm() == 0.0 {
            return Err(Error::Degenerate("W2 = 0: plane outside the chart".into()));
        }
        Ok(PlaneChart { w: w1 / w2 })
    }

    /// Spanning pair (v, Jv) with v = dx1 + Re(w) dy1 + Im(w) J dy1.
    pub fn vectors(&self, j: &Matrix4<f64>) -> (HVec, HVec) {
        let dy1 = HVec::new(0.0, 1.0, 0.0, 0.0);
        let dx1 = HVec::new(1.0, 0.0, 0.0, 0.0);
        let v = dx1 + dy1 * self.w.re + (j * dy1) * self.w.im;
        (v, j * v)
    }

    /// Chart of the plane spanned by a and b, computed from a Euclidean
    /// orthonormal basis so the result does not depend on the parametrization.
    /// For planes that are not exactly J-invariant this is the least-squares
    /// complex slope.
    pub fn from_plane(j: &Matrix4<f64>, a: &HVec, b: &HVec) -> Result<Self> {
        let frame = ComplexFrame::new(j)?;
        let na = a.norm();
        if na < 1e-14 {
            return Err(Error::Degenerate("zero tangent vector".into()));
        }
        let e1 = a / na;
        let b_perp = b - e1 * e1.dot(b);
        let nb = b_perp.norm();
        if nb < 1e-12 * b.norm().max(1.0) {
            return Err(Error::Degenerate("tangent vectors are linearly dependent".into()));
        }
        let e2 = b_perp / nb;
        let (z1a, z2a) = frame.to_complex(&e1);
        let (z1b, z2b) = frame.to_complex(&e2);
        let den = z2a.norm_sqr() + z2b.norm_sqr();
        if den < 1e-14 {
            return Err(Error::Degenerate("plane has no dx1-component (outside the chart)".into()));
        }
        Ok(PlaneChart { w: (z2a.conj() * z1a + z2b.conj() * z1b) / den })
    }

    pub fn distance(&self, other: &PlaneChart) -> f64 {
        (self.w - other.w).norm()
    }
}
