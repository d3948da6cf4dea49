//! Horizontal 2-forms at a point in an orthonormal frame (e1, e2 = I e1, e3, e4 = I e3),
//! stored in the self-dual / anti-self-dual basis.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::contact::{dalpha_matrix, standard_i_matrix, HVec};
use crate::error::{Error, Result};

/// w = p(e12+e34) + a(e13+e42) + b(e14+e23) + A(e12-e34) + B(e13-e42) + C(e14-e23).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Form2H {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

impl Form2H {
    pub fn new(p: f64, a: f64, b: f64, big_a: f64, big_b: f64, big_c: f64) -> Self {
        Form2H { p, a, b, big_a, big_b, big_c }
    }

    pub fn from_array(c: [f64; 6]) -> Self {
        Form2H::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.p, self.a, self.b, self.big_a, self.big_b, self.big_c]
    }

    /// d alpha = e12 + e34.
    pub fn dalpha() -> Self {
        Form2H::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// The elementary form e^{ij} (1-based indices, i != j).
    pub fn elementary(i: usize, j: usize) -> Self {
        assert!((1..=4).contains(&i) && (1..=4).contains(&j) && i != j);
        let mut m = Matrix4::zeros();
        m[(i - 1, j - 1)] = 1.0;
        m[(j - 1, i - 1)] = -1.0;
        Form2H::from_matrix(&m)
    }

    /// Coefficients from a skew matrix W with w(u, v) = u^T W v.
    pub fn from_matrix(w: &Matrix4<f64>) -> Self {
        let (w12, w13, w14) = (w[(0, 1)], w[(0, 2)], w[(0, 3)]);
        let (w23, w24, w34) = (w[(1, 2)], w[(1, 3)], w[(2, 3)]);
        Form2H {
            p: 0.5 * (w12 + w34),
            big_a: 0.5 * (w12 - w34),
            a: 0.5 * (w13 - w24),
            big_b: 0.5 * (w13 + w24),
            b: 0.5 * (w14 + w23),
            big_c: 0.5 * (w14 - w23),
        }
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let w12 = self.p + self.big_a;
        let w34 = self.p - self.big_a;
        let w13 = self.a + self.big_b;
        let w24 = self.big_b - self.a;
        let w14 = self.b + self.big_c;
        let w23 = self.b - self.big_c;
        Matrix4::new(
            0.0, w12, w13, w14, //
            -w12, 0.0, w23, w24, //
            -w13, -w23, 0.0, w34, //
            -w14, -w24, -w34, 0.0,
        )
    }

    pub fn eval(&self, u: &HVec, v: &HVec) -> f64 {
        (u.transpose() * self.to_matrix() * v)[0]
    }

    pub fn scale(&self, s: f64) -> Self {
        let c = self.to_array().map(|x| x * s);
        Form2H::from_array(c)
    }

    pub fn add(&self, other: &Form2H) -> Self {
        let (a, b) = (self.to_array(), other.to_array());
        Form2H::from_array(std::array::from_fn(|k| a[k] + b[k]))
    }

    pub fn self_dual_norm(&self) -> f64 {
        (self.p * self.p + self.a * self.a + self.b * self.b).sqrt()
    }

    pub fn anti_self_dual_norm(&self) -> f64 {
        (self.big_a * self.big_a + self.big_b * self.big_b + self.big_c * self.big_c).sqrt()
    }

    /// Frame inner product sum_{i<j} u_ij v_ij.
    pub fn inner(&self, other: &Form2H) -> f64 {
        let (a, b) = (self.to_array(), other.to_array());
        2.0 * a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

pub fn star(w: &Form2H) -> Form2H {
    Form2H::new(w.p, w.a, w.b, -w.big_a, -w.big_b, -w.big_c)
}

pub fn sd_split(w: &Form2H) -> (Form2H, Form2H) {
    (
        Form2H::new(w.p, w.a, w.b, 0.0, 0.0, 0.0),
        Form2H::new(0.0, 0.0, 0.0, w.big_a, w.big_b, w.big_c),
    )
}

/// Coefficient c with u ^ v = c e1234.
pub fn wedge_coeff(u: &Form2H, v: &Form2H) -> f64 {
    let (x, y) = (u.to_matrix(), v.to_matrix());
    x[(0, 1)] * y[(2, 3)] - x[(0, 2)] * y[(1, 3)] + x[(0, 3)] * y[(1, 2)] + x[(1, 2)] * y[(0, 3)]
        - x[(1, 3)] * y[(0, 2)]
        + x[(2, 3)] * y[(0, 1)]
}

/// Comass via the closed form (|w+| + |w-|)/sqrt 2 in the frame norm.
pub fn comass(w: &Form2H) -> f64 {
    w.self_dual_norm() + w.anti_self_dual_norm()
}

/// A 4x4 real matrix acting on horizontal projections in the orthonormal frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JMatrix(pub Matrix4<f64>);

impl JMatrix {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let j = JMatrix(m);
        let defect = j.square_defect();
        if defect > 1e-10 {
            return Err(Error::Inconsistent(format!("J^2 + Id has norm {defect:.3e}")));
        }
        Ok(j)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn apply(&self, v: &HVec) -> HVec {
        self.0 * v
    }

    pub fn square_defect(&self) -> f64 {
        (self.0 * self.0 + Matrix4::identity()).abs().max()
    }

    /// max |entry| of the symmetric part of J^T D, i.e. how far d alpha(Jv, v) is from 0.
    pub fn lagrangian_defect(&self) -> f64 {
        let s = self.0.transpose() * dalpha_matrix();
        (s + s.transpose()).abs().max() * 0.5
    }
}

/// J compatible with a form orthogonal to d alpha and positive in the sense
/// a^2 + b^2 > A^2 + B^2 + C^2. Returns (theta, J).
pub fn j_from_form(w: &Form2H) -> Result<(f64, JMatrix)> {
    j_from_form_tol(w, 1e-12 * (1.0 + w.norm()))
}

pub fn j_from_form_tol(w: &Form2H, tol: f64) -> Result<(f64, JMatrix)> {
    if w.p.abs() > tol {
        return Err(Error::FormPrecondition(format!(
            "form not orthogonal to d alpha (p = {:.3e})",
            w.p
        )));
    }
    let sd = w.a * w.a + w.b * w.b;
    if sd == 0.0 {
        return Err(Error::FormPrecondition("a = b = 0: angle undefined".into()));
    }
    let asd = w.anti_self_dual_norm().powi(2);
    if sd <= asd {
        return Err(Error::FormPrecondition(format!(
            "positivity fails: a^2 + b^2 = {sd:.6e} <= A^2 + B^2 + C^2 = {asd:.6e}"
        )));
    }
    let theta = w.b.atan2(w.a);
    Ok((theta, j_theta(theta)))
}

/// The structure J(e1) = cos e3 + sin e4, J(e2) = sin e3 - cos e4,
/// J(e3) = -cos e1 - sin e2, J(e4) = cos e2 - sin e1.
pub fn j_theta(theta: f64) -> JMatrix {
    let (s, c) = theta.sin_cos();
    JMatrix(Matrix4::new(
        0.0, 0.0, -c, -s, //
        0.0, 0.0, -s, c, //
        c, s, 0.0, 0.0, //
        s, -c, 0.0, 0.0,
    ))
}

/// Omega(X, Y) = d alpha(X, (JI - IJ)Y / 2), a J-invariant form orthogonal to d alpha.
pub fn omega_from_j(j: &JMatrix) -> Result<Form2H> {
    let sq = j.square_defect();
    let lag = j.lagrangian_defect();
    if sq > 1e-10 || lag > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "J fails its invariants (|J^2+Id| = {sq:.3e}, |d alpha(Jv,v)| = {lag:.3e})"
        )));
    }
    let jm = j.matrix();
    let i = standard_i_matrix();
    let k = (jm * i - i * jm) * 0.5;
    let om = dalpha_matrix() * k;
    let skew = (om + om.transpose()).abs().max();
    if skew > 1e-10 {
        return Err(Error::Inconsistent(format!("Omega not skew ({skew:.3e})")));
    }
    Ok(Form2H::from_matrix(&om))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl HypothesisCheck {
    pub fn new(hypothesis: &str, value: f64, tolerance: f64) -> Self {
        HypothesisCheck { hypothesis: hypothesis.to_string(), value, tolerance, pass: value.abs() <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicalibrationReport {
    pub checks: Vec<HypothesisCheck>,
    pub pass: bool,
    pub theta: Option<f64>,
    pub j: Option<JMatrix>,
}

impl SemicalibrationReport {
    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.hypothesis.as_str()).collect()
    }
}

pub const SEMICALIBRATION_TOL: f64 = 1e-8;

/// Checks comass 1, w ^ d alpha = 0 and w ^ w = (d alpha)^2; on success the
/// form is self-dual and the calibrated planes are the J-invariant ones.
pub fn verify_semicalibration(w: &Form2H) -> SemicalibrationReport {
    let tol = SEMICALIBRATION_TOL;
    let da = Form2H::dalpha();
    let mut checks = vec![
        HypothesisCheck::new("comass == 1", comass(w) - 1.0, tol),
        HypothesisCheck::new("w ^ dalpha == 0", wedge_coeff(w, &da), tol),
        HypothesisCheck::new("w ^ w == dalpha ^ dalpha", wedge_coeff(w, w) - wedge_coeff(&da, &da), tol),
    ];
    let mut pass = checks.iter().all(|c| c.pass);
    let mut theta = None;
    let mut j = None;
    if pass {
        checks.push(HypothesisCheck::new("self-dual (A = B = C = 0)", w.anti_self_dual_norm(), 1e-4));
        match j_from_form_tol(w, tol) {
            Ok((th, jm)) => {
                theta = Some(th);
                j = Some(jm);
            }
            Err(e) => {
                checks.push(HypothesisCheck {
                    hypothesis: format!("compatible J exists: {e}"),
                    value: f64::NAN,
                    tolerance: tol,
                    pass: false,
                });
            }
        }
        pass = checks.iter().all(|c| c.pass);
    }
    SemicalibrationReport { checks, pass, theta, j }
}
