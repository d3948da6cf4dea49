//! Anti-compatible almost complex structures in the sigma/beta/gamma/delta model.
//!
//! On the frame (dx1, dy1, dx2, dy2) the structure reads
//!
//! ```text
//!     [ s  0   d  -k ]
//! J = [ 0  s  -g   b ]      k = (1 + s^2 + b d) / g
//!     [ b  k  -s   0 ]
//!     [ g  d   0  -s ]
//! ```

use std::sync::Arc;

use nalgebra::{Matrix4, Matrix5};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contact::{dalpha_eval, ContactChart, HVec, Point5, Vec5};
use crate::error::{Error, Result};
use crate::forms::JMatrix;
use crate::sampling;

type EvalFn = Arc<dyn Fn(&Point5) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Point5) -> [f64; 5] + Send + Sync>;
type HessFn = Arc<dyn Fn(&Point5) -> [[f64; 5]; 5] + Send + Sync>;
type JointFn = Arc<dyn Fn(&Point5) -> Coeffs + Send + Sync>;

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_GAMMA_MIN: f64 = 1e-3;

#[derive(Clone)]
pub struct ScalarField5 {
    eval: EvalFn,
    grad: Option<GradFn>,
    hess: Option<HessFn>,
    pub fd_step: f64,
}

impl std::fmt::Debug for ScalarField5 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField5")
            .field("analytic_grad", &self.grad.is_some())
            .field("analytic_hess", &self.hess.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

fn shift(p: &Point5, k: usize, h: f64) -> Point5 {
    let mut v = p.to_vec();
    v[k] += h;
    Point5::from_vec(&v)
}

impl ScalarField5 {
    pub fn from_fn(f: impl Fn(&Point5) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField5 { eval: Arc::new(f), grad: None, hess: None, fd_step: DEFAULT_FD_STEP }
    }

    pub fn with_derivatives(
        f: impl Fn(&Point5) -> f64 + Send + Sync + 'static,
        g: impl Fn(&Point5) -> [f64; 5] + Send + Sync + 'static,
        h: impl Fn(&Point5) -> [[f64; 5]; 5] + Send + Sync + 'static,
    ) -> Self {
        ScalarField5 {
            eval: Arc::new(f),
            grad: Some(Arc::new(g)),
            hess: Some(Arc::new(h)),
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn constant(c: f64) -> Self {
        ScalarField5::with_derivatives(move |_| c, |_| [0.0; 5], |_| [[0.0; 5]; 5])
    }

    /// c + sum_k a_k p_k.
    pub fn affine(c: f64, a: [f64; 5]) -> Self {
        ScalarField5::with_derivatives(
            move |p| c + Vec5::from(a).dot(&p.to_vec()),
            move |_| a,
            |_| [[0.0; 5]; 5],
        )
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.grad.is_some() && self.hess.is_some()
    }

    pub fn value(&self, p: &Point5) -> f64 {
        (self.eval)(p)
    }

    pub fn gradient(&self, p: &Point5) -> [f64; 5] {
        if let Some(g) = &self.grad {
            return g(p);
        }
        let h = self.fd_step;
        std::array::from_fn(|k| (self.value(&shift(p, k, h)) - self.value(&shift(p, k, -h))) / (2.0 * h))
    }

    pub fn hessian(&self, p: &Point5) -> [[f64; 5]; 5] {
        if let Some(hf) = &self.hess {
            return hf(p);
        }
        // second differences use a larger step to limit cancellation
        let h = 10.0 * self.fd_step;
        let f0 = self.value(p);
        let mut out = [[0.0; 5]; 5];
        for k in 0..5 {
            out[k][k] = (self.value(&shift(p, k, h)) - 2.0 * f0 + self.value(&shift(p, k, -h))) / (h * h);
            for l in 0..k {
                let pp = shift(&shift(p, k, h), l, h);
                let pm = shift(&shift(p, k, h), l, -h);
                let mp = shift(&shift(p, k, -h), l, h);
                let mm = shift(&shift(p, k, -h), l, -h);
                let v = (self.value(&pp) - self.value(&pm) - self.value(&mp) + self.value(&mm)) / (4.0 * h * h);
                out[k][l] = v;
                out[l][k] = v;
            }
        }
        out
    }

    /// q -> f(r q).
    pub fn dilated(&self, r: f64) -> Self {
        let f = self.eval.clone();
        let grad = self.grad.clone().map(|g| -> GradFn {
            Arc::new(move |p: &Point5| g(&p.scaled(r)).map(|x| x * r))
        });
        let hess = self.hess.clone().map(|h| -> HessFn {
            Arc::new(move |p: &Point5| h(&p.scaled(r)).map(|row| row.map(|x| x * r * r)))
        });
        ScalarField5 { eval: Arc::new(move |p| f(&p.scaled(r))), grad, hess, fd_step: self.fd_step }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coeffs {
    pub sigma: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Coeffs {
    pub const STANDARD: Coeffs = Coeffs { sigma: 0.0, beta: 0.0, gamma: 1.0, delta: 0.0 };

    pub fn kappa(&self) -> f64 {
        (1.0 + self.sigma * self.sigma + self.beta * self.delta) / self.gamma
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let Coeffs { sigma: s, beta: b, gamma: g, delta: d } = *self;
        let k = self.kappa();
        Matrix4::new(
            s, 0.0, d, -k, //
            0.0, s, -g, b, //
            b, k, -s, 0.0, //
            g, d, 0.0, -s,
        )
    }

    /// Read the coefficients back from a matrix assumed to be in the model.
    pub fn from_matrix(j: &Matrix4<f64>) -> Self {
        Coeffs { sigma: j[(0, 0)], beta: j[(2, 0)], gamma: j[(3, 0)], delta: j[(0, 2)] }
    }
}

/// Unit patterns of the linear entries of J, in the order sigma, beta, gamma,
/// delta, kappa.
fn patterns() -> [Matrix4<f64>; 5] {
    let mut out = [Matrix4::zeros(); 5];
    for (k, entries) in [
        vec![((0, 0), 1.0), ((1, 1), 1.0), ((2, 2), -1.0), ((3, 3), -1.0)],
        vec![((1, 3), 1.0), ((2, 0), 1.0)],
        vec![((1, 2), -1.0), ((3, 0), 1.0)],
        vec![((0, 2), 1.0), ((3, 1), 1.0)],
        vec![((0, 3), -1.0), ((2, 1), 1.0)],
    ]
    .into_iter()
    .enumerate()
    {
        for (ij, v) in entries {
            out[k][ij] = v;
        }
    }
    out
}

/// Something that produces a J matrix on the frame at each point; used by
/// the identity checker so arbitrary (possibly inconsistent) matrices can be
/// audited.
pub trait JField: Send + Sync {
    fn j_at(&self, p: &Point5) -> Result<Matrix4<f64>>;
    fn sample_radius(&self) -> f64;
}

#[derive(Clone)]
pub struct ACSField {
    pub sigma: ScalarField5,
    pub beta: ScalarField5,
    pub gamma: ScalarField5,
    pub delta: ScalarField5,
    pub radius: f64,
    pub gamma_min: f64,
    joint: Option<JointFn>,
}

impl std::fmt::Debug for ACSField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ACSField").field("radius", &self.radius).field("gamma_min", &self.gamma_min).finish()
    }
}

impl ACSField {
    pub fn new(sigma: ScalarField5, beta: ScalarField5, gamma: ScalarField5, delta: ScalarField5) -> Self {
        ACSField { sigma, beta, gamma, delta, radius: f64::INFINITY, gamma_min: DEFAULT_GAMMA_MIN, joint: None }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_gamma_min(mut self, gamma_min: f64) -> Self {
        self.gamma_min = gamma_min;
        self
    }

    pub fn constant(c: Coeffs) -> Self {
        ACSField::new(
            ScalarField5::constant(c.sigma),
            ScalarField5::constant(c.beta),
            ScalarField5::constant(c.gamma),
            ScalarField5::constant(c.delta),
        )
    }

    pub fn standard() -> Self {
        ACSField::constant(Coeffs::STANDARD)
    }

    /// Field whose coefficients come from one joint evaluation; the scalar
    /// components are derived from it (finite-difference derivatives).
    pub fn from_joint(f: impl Fn(&Point5) -> Coeffs + Send + Sync + 'static) -> Self {
        let joint: JointFn = Arc::new(f);
        let comp = |sel: fn(&Coeffs) -> f64| {
            let j = joint.clone();
            ScalarField5::from_fn(move |p| sel(&j(p)))
        };
        ACSField {
            sigma: comp(|c| c.sigma),
            beta: comp(|c| c.beta),
            gamma: comp(|c| c.gamma),
            delta: comp(|c| c.delta),
            radius: f64::INFINITY,
            gamma_min: DEFAULT_GAMMA_MIN,
            joint: Some(joint),
        }
    }

    pub fn coeffs_unchecked(&self, p: &Point5) -> Coeffs {
        if let Some(j) = &self.joint {
            return j(p);
        }
        Coeffs {
            sigma: self.sigma.value(p),
            beta: self.beta.value(p),
            gamma: self.gamma.value(p),
            delta: self.delta.value(p),
        }
    }

    pub fn coeffs(&self, p: &Point5) -> Result<Coeffs> {
        let n = p.norm();
        if n > self.radius {
            return Err(Error::OutOfDomain { norm: n, radius: self.radius });
        }
        let c = self.coeffs_unchecked(p);
        if !(c.gamma.abs() >= self.gamma_min) {
            return Err(Error::GammaThreshold { value: c.gamma, min: self.gamma_min, at: format!("{p:?}") });
        }
        Ok(c)
    }

    pub fn j_matrix(&self, p: &Point5) -> Result<JMatrix> {
        Ok(JMatrix(self.coeffs(p)?.matrix()))
    }

    /// J extended to 5-vectors by J(R) = 0, in the coordinate frame of R^5 at p
    /// (columns are images of d/dx1, d/dy1, d/dx2, d/dy2, d/dt).
    pub fn j_extended(&self, p: &Point5, r: f64) -> Result<Matrix5<f64>> {
        let j = self.j_matrix(p)?.0;
        let params = crate::contact::ContactParams { r };
        let mut out = Matrix5::zeros();
        for k in 0..5 {
            let mut e = Vec5::zeros();
            e[k] = 1.0;
            // split e = horizontal part + multiple of the Reeb field
            let a = crate::contact::alpha_eval(p, &e, &params);
            let h = e - crate::contact::reeb(&params) * a;
            let jh = j * crate::contact::project(&h);
            out.set_column(k, &crate::contact::lift_vector(&p.q4(), p.t, &jh, &params));
        }
        Ok(out)
    }

    /// q -> J(r q), the structure seen through the dilation.
    pub fn dilated(&self, r: f64) -> ACSField {
        let joint = self.joint.clone().map(|j| -> JointFn { Arc::new(move |p: &Point5| j(&p.scaled(r))) });
        ACSField {
            sigma: self.sigma.dilated(r),
            beta: self.beta.dilated(r),
            gamma: self.gamma.dilated(r),
            delta: self.delta.dilated(r),
            radius: self.radius / r,
            gamma_min: self.gamma_min,
            joint,
        }
    }

    /// The field expressed in the coordinates of `chart`: J'(q') = R^T J(G(q')) R.
    pub fn transformed(&self, chart: &ContactChart) -> Result<ACSField> {
        let j0 = chart.matrix_to_local(&self.coeffs_unchecked(&chart.origin).matrix());
        let c0 = Coeffs::from_matrix(&j0);
        let dev = (c0.matrix() - j0).abs().max();
        if dev > 1e-8 || c0.gamma.abs() < self.gamma_min {
            return Err(Error::Inconsistent(format!(
                "conjugated matrix leaves the coordinate model (pattern deviation {dev:.2e}, gamma {:.3e})",
                c0.gamma
            )));
        }
        let base = self.clone();
        let ch = *chart;
        let mut out = ACSField::from_joint(move |q| {
            let g = ch.to_global(q);
            Coeffs::from_matrix(&ch.matrix_to_local(&base.coeffs_unchecked(&g).matrix()))
        });
        out.radius = f64::INFINITY;
        out.gamma_min = self.gamma_min;
        Ok(out)
    }

    /// (kappa, grad kappa, hess kappa) by the chain rule.
    fn kappa_derivatives(&self, p: &Point5) -> (Coeffs, [[f64; 5]; 4], [[[f64; 5]; 5]; 4]) {
        let c = self.coeffs_unchecked(p);
        let fields = [&self.sigma, &self.beta, &self.gamma, &self.delta];
        let g: [[f64; 5]; 4] = std::array::from_fn(|i| fields[i].gradient(p));
        let h: [[[f64; 5]; 5]; 4] = std::array::from_fn(|i| fields[i].hessian(p));
        (c, g, h)
    }

    /// First and second coordinate derivatives of J at p.
    pub fn j_derivatives(&self, p: &Point5) -> ([Matrix4<f64>; 5], [[Matrix4<f64>; 5]; 5]) {
        let (c, g, h) = self.kappa_derivatives(p);
        let Coeffs { sigma: s, beta: b, gamma: gm, delta: d } = c;
        let k = c.kappa();
        // partials of kappa with respect to (s, b, g, d)
        let dk = [2.0 * s / gm, d / gm, -k / gm, b / gm];
        let mut ddk = [[0.0; 4]; 4];
        ddk[0][0] = 2.0 / gm;
        ddk[0][2] = -2.0 * s / (gm * gm);
        ddk[1][3] = 1.0 / gm;
        ddk[1][2] = -d / (gm * gm);
        ddk[3][2] = -b / (gm * gm);
        ddk[2][2] = 2.0 * k / (gm * gm);
        for i in 0..4 {
            for j in 0..i {
                let v = ddk[i][j] + ddk[j][i];
                ddk[i][j] = v;
                ddk[j][i] = v;
            }
        }
        let pat = patterns();
        let mut d1 = [Matrix4::zeros(); 5];
        let mut d2 = [[Matrix4::zeros(); 5]; 5];
        for a in 0..5 {
            let ka: f64 = (0..4).map(|i| dk[i] * g[i][a]).sum();
            let mut m = pat[4] * ka;
            for i in 0..4 {
                m += pat[i] * g[i][a];
            }
            d1[a] = m;
            for bb in 0..5 {
                let mut kab: f64 = (0..4).map(|i| dk[i] * h[i][a][bb]).sum();
                for i in 0..4 {
                    for j in 0..4 {
                        kab += ddk[i][j] * g[i][a] * g[j][bb];
                    }
                }
                let mut m = pat[4] * kab;
                for i in 0..4 {
                    m += pat[i] * h[i][a][bb];
                }
                d2[a][bb] = m;
            }
        }
        (d1, d2)
    }

    pub fn sampling_radius(&self) -> f64 {
        self.radius.min(1.0)
    }
}

impl JField for ACSField {
    fn j_at(&self, p: &Point5) -> Result<Matrix4<f64>> {
        Ok(self.j_matrix(p)?.0)
    }

    fn sample_radius(&self) -> f64 {
        self.sampling_radius()
    }
}

/// A raw matrix field, used to audit structures that may violate the model.
#[derive(Clone)]
pub struct MatrixField {
    f: Arc<dyn Fn(&Point5) -> Matrix4<f64> + Send + Sync>,
    pub radius: f64,
}

impl MatrixField {
    pub fn new(f: impl Fn(&Point5) -> Matrix4<f64> + Send + Sync + 'static, radius: f64) -> Self {
        MatrixField { f: Arc::new(f), radius }
    }

    /// J + offset for a model field.
    pub fn offset(base: ACSField, offset: Matrix4<f64>) -> Self {
        let radius = base.sampling_radius();
        MatrixField::new(move |p| base.coeffs_unchecked(p).matrix() + offset, radius)
    }
}

impl JField for MatrixField {
    fn j_at(&self, p: &Point5) -> Result<Matrix4<f64>> {
        Ok((self.f)(p))
    }

    fn sample_radius(&self) -> f64 {
        self.radius
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n_samples: usize,
    pub max_lagrangian: f64,
    pub max_anticompatibility: f64,
    pub max_square: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn failing(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.max_lagrangian < self.tolerance) {
            out.push("dalpha(Jv, v) = 0");
        }
        if !(self.max_anticompatibility < self.tolerance) {
            out.push("dalpha(v, w) + dalpha(Jv, Jw) = 0");
        }
        if !(self.max_square < self.tolerance) {
            out.push("J^2 = -Id");
        }
        out
    }
}

pub const IDENTITY_TOL: f64 = 1e-10;

/// Residuals of the three identities for one matrix and one pair of vectors.
pub fn identity_residuals(j: &Matrix4<f64>, v: &HVec, w: &HVec) -> (f64, f64, f64) {
    let jv = j * v;
    let jw = j * w;
    let lag = dalpha_eval(&jv, v).abs();
    let anti = (dalpha_eval(v, w) + dalpha_eval(&jv, &jw)).abs();
    let sq = (j * j + Matrix4::identity()).abs().max();
    (lag, anti, sq)
}

pub fn check_identities(field: &dyn JField, n_samples: usize) -> IdentityReport {
    check_identities_seeded(field, n_samples, 0x5eed)
}

pub fn check_identities_seeded(field: &dyn JField, n_samples: usize, seed: u64) -> IdentityReport {
    let mut rng = sampling::rng(seed);
    let mut rep = IdentityReport {
        n_samples,
        max_lagrangian: 0.0,
        max_anticompatibility: 0.0,
        max_square: 0.0,
        tolerance: IDENTITY_TOL,
        pass: true,
    };
    for _ in 0..n_samples {
        let p = sampling::ball5(&mut rng, field.sample_radius());
        let v = sampling::unit_hvec(&mut rng);
        let w = sampling::unit_hvec(&mut rng);
        let j = match field.j_at(&p) {
            Ok(j) => j,
            Err(_) => {
                rep.max_square = f64::INFINITY;
                continue;
            }
        };
        let (a, b, c) = identity_residuals(&j, &v, &w);
        rep.max_lagrangian = rep.max_lagrangian.max(a);
        rep.max_anticompatibility = rep.max_anticompatibility.max(b);
        rep.max_square = rep.max_square.max(c);
    }
    rep.pass = rep.failing().is_empty();
    rep
}

pub const DEFAULT_BETA_MIN: f64 = 1e-3;

/// Rotate the (x2, y2) plane by a quarter turn when gamma degenerates; the
/// direction is chosen so that the new gamma is positive at the center.
pub fn gamma_fallback(acs: &ACSField) -> Result<(ACSField, ContactChart)> {
    gamma_fallback_with(acs, 256, DEFAULT_BETA_MIN)
}

pub fn gamma_fallback_with(acs: &ACSField, n_samples: usize, beta_min: f64) -> Result<(ACSField, ContactChart)> {
    let mut rng = sampling::rng(0x6a33a);
    let mut pts = vec![Point5::ORIGIN];
    for _ in 0..n_samples {
        pts.push(sampling::ball5(&mut rng, acs.sampling_radius()));
    }
    let mut gamma_ok = true;
    let mut beta_ok = true;
    for p in &pts {
        let c = acs.coeffs_unchecked(p);
        if c.gamma.abs() < acs.gamma_min {
            gamma_ok = false;
            if c.beta.abs() < beta_min {
                return Err(Error::Inconsistent(format!(
                    "beta and gamma both vanish at {p:?} (beta = {:.3e}, gamma = {:.3e})",
                    c.beta, c.gamma
                )));
            }
        }
        if c.beta.abs() < beta_min {
            beta_ok = false;
        }
    }
    if gamma_ok {
        return Ok((acs.clone(), ContactChart::identity(1.0)));
    }
    if !beta_ok {
        return Err(Error::Inconsistent("gamma degenerates but beta is not bounded away from 0".into()));
    }
    // Where gamma vanishes the quadruple cannot fix kappa; in this regime the
    // fourth slot is read as kappa and delta follows from J^2 = -Id.
    let s = acs.coeffs_unchecked(&Point5::ORIGIN).beta.signum();
    // new frame: dx2' = -s dy2, dy2' = s dx2
    let mut rot = Matrix4::identity();
    rot[(2, 2)] = 0.0;
    rot[(3, 3)] = 0.0;
    rot[(3, 2)] = -s;
    rot[(2, 3)] = s;
    let chart = ContactChart::new(Point5::ORIGIN, rot, 1.0)?;
    let base = acs.clone();
    let mut out = ACSField::from_joint(move |p| {
        let c = base.coeffs_unchecked(&chart.to_global(p));
        Coeffs { sigma: c.sigma, beta: -s * c.gamma, gamma: s * c.beta, delta: s * c.delta }
    });
    out.radius = acs.radius;
    out.gamma_min = acs.gamma_min;
    Ok((out, chart))
}

/// The matrix of a field whose fourth coefficient is kappa (the convention
/// used for degenerate gamma).
pub fn matrix_from_kappa(sigma: f64, beta: f64, gamma: f64, kappa: f64) -> Matrix4<f64> {
    let delta = (kappa * gamma - 1.0 - sigma * sigma) / beta;
    Matrix4::new(
        sigma, 0.0, delta, -kappa, //
        0.0, sigma, -gamma, beta, //
        beta, kappa, -sigma, 0.0, //
        gamma, delta, 0.0, -sigma,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    pub r: f64,
    pub value: f64,
    pub max_deviation: f64,
    pub max_first: f64,
    pub max_second: f64,
}

/// Unit-ball sample pattern shared by all radii so estimates at different r
/// are directly comparable.
fn unit_ball_pattern(n_samples: usize) -> Vec<Point5> {
    let mut rng = sampling::rng(0xe95);
    let mut pts = vec![Point5::ORIGIN];
    for _ in 1..n_samples.max(1) {
        pts.push(sampling::ball5(&mut rng, 1.0));
    }
    pts
}

/// r * max over B_r of (|J - J0| + |DJ| + |D^2 J|) with Frobenius norms.
pub fn epsilon_estimate(acs: &ACSField, r: f64, n_samples: usize) -> f64 {
    epsilon_estimate_detail(acs, r, n_samples).value
}

pub fn epsilon_estimate_detail(acs: &ACSField, r: f64, n_samples: usize) -> EpsilonEstimate {
    let j0 = acs.coeffs_unchecked(&Point5::ORIGIN).matrix();
    let mut out = EpsilonEstimate { r, value: 0.0, max_deviation: 0.0, max_first: 0.0, max_second: 0.0 };
    let mut best = 0.0f64;
    for u in unit_ball_pattern(n_samples) {
        let p = u.scaled(r);
        let j = acs.coeffs_unchecked(&p).matrix();
        let (d1, d2) = acs.j_derivatives(&p);
        let dev = (j - j0).norm();
        let first = d1.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        let second = d2.iter().flatten().map(|m| m.norm_squared()).sum::<f64>().sqrt();
        best = best.max(dev + first + second);
        out.max_deviation = out.max_deviation.max(dev);
        out.max_first = out.max_first.max(first);
        out.max_second = out.max_second.max(second);
    }
    out.value = r * best;
    out
}

/// Built-in fields used by fixtures, tests and the command line.
pub mod builtin {
    use super::*;

    /// sigma = eps x1, others standard.
    pub fn sigma_linear(eps: f64) -> ACSField {
        ACSField::new(
            ScalarField5::affine(0.0, [eps, 0.0, 0.0, 0.0, 0.0]),
            ScalarField5::constant(0.0),
            ScalarField5::constant(1.0),
            ScalarField5::constant(0.0),
        )
    }

    fn trig_field(base: f64, eps: f64, a: [f64; 5], phase: f64) -> ScalarField5 {
        let av = Vec5::from(a);
        ScalarField5::with_derivatives(
            move |p| base + eps * (av.dot(&p.to_vec()) + phase).sin(),
            move |p| {
                let c = eps * (av.dot(&p.to_vec()) + phase).cos();
                a.map(|x| c * x)
            },
            move |p| {
                let s = -eps * (av.dot(&p.to_vec()) + phase).sin();
                a.map(|x| a.map(|y| s * x * y))
            },
        )
    }

    /// A smooth trigonometric perturbation of size eps around constant
    /// coefficients; `mode` selects frequencies and phases deterministically.
    pub fn perturbed(eps: f64, mode: u64, base: Coeffs) -> ACSField {
        let mut rng = sampling::rng(0x9e37_79b9 ^ mode.wrapping_mul(0x1000_0001));
        let mut draw = || -> ([f64; 5], f64) {
            let a: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (a, phase)
        };
        let (a1, p1) = draw();
        let (a2, p2) = draw();
        let (a3, p3) = draw();
        let (a4, p4) = draw();
        ACSField::new(
            trig_field(base.sigma, eps, a1, p1),
            trig_field(base.beta, eps, a2, p2),
            trig_field(base.gamma, eps, a3, p3),
            trig_field(base.delta, eps, a4, p4),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> HVec {
        let mut v = HVec::zeros();
        v[i] = 1.0;
        v
    }

    #[test]
    fn standard_matrix() {
        let j = ACSField::standard().j_matrix(&Point5::new(0.1, 0.2, 0.3, 0.4, 0.5)).unwrap();
        assert_eq!(j.apply(&e(0)), e(3));
        assert_eq!(j.apply(&e(2)), -e(1));
        assert_eq!(j.apply(&e(1)), e(2));
        assert_eq!(j.apply(&e(3)), -e(0));
    }

    #[test]
    fn kappa_example() {
        let acs = ACSField::constant(Coeffs { sigma: 1.0, beta: 0.0, gamma: 1.0, delta: 0.0 });
        let j = acs.j_matrix(&Point5::ORIGIN).unwrap();
        assert_eq!(j.apply(&e(1)), HVec::new(0.0, 1.0, 2.0, 0.0));
        assert!(j.square_defect() < 1e-14);
    }

    #[test]
    fn gamma_threshold_and_domain() {
        let acs = ACSField::constant(Coeffs { sigma: 0.0, beta: 1.0, gamma: 0.0, delta: 0.0 });
        assert!(matches!(acs.j_matrix(&Point5::ORIGIN), Err(Error::GammaThreshold { .. })));
        let acs = ACSField::standard().with_radius(1.0);
        assert!(matches!(
            acs.j_matrix(&Point5::new(2.0, 0.0, 0.0, 0.0, 0.0)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn corrupted_field_fails_lagrangian() {
        let mut off = Matrix4::zeros();
        off[(1, 0)] = 0.1;
        let f = MatrixField::offset(ACSField::standard(), off);
        let rep = check_identities(&f, 2000);
        assert!(!rep.pass);
        assert!(rep.failing().contains(&"dalpha(Jv, v) = 0"));
        assert!((rep.max_lagrangian - 0.1).abs() < 0.02, "{}", rep.max_lagrangian);
    }

    #[test]
    fn zero_vectors_give_zero_residuals() {
        let j = builtin::perturbed(0.3, 1, Coeffs::STANDARD).j_matrix(&Point5::ORIGIN).unwrap().0;
        let (a, b, _) = identity_residuals(&j, &HVec::zeros(), &HVec::zeros());
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn fallback_examples() {
        let acs = ACSField::constant(Coeffs { sigma: 0.0, beta: 1.0, gamma: 0.0, delta: 0.0 });
        let (new, chart) = gamma_fallback(&acs).unwrap();
        let c = new.coeffs(&Point5::new(0.1, 0.2, -0.3, 0.1, 0.0)).unwrap();
        assert!((c.gamma - 1.0).abs() < 1e-14);
        let j_old = matrix_from_kappa(0.0, 1.0, 0.0, 0.0);
        assert!((j_old * j_old + Matrix4::identity()).abs().max() < 1e-14);
        let j_new = new.coeffs_unchecked(&Point5::ORIGIN).matrix();
        assert!((chart.rot * j_new * chart.rot.transpose() - j_old).abs().max() < 1e-14);
        // round trip on a varying degenerate field
        let var = ACSField::new(
            ScalarField5::affine(0.0, [0.1, 0.0, 0.2, 0.0, 0.0]),
            ScalarField5::affine(-1.0, [0.0, 0.1, 0.0, 0.0, 0.1]),
            ScalarField5::affine(0.0, [0.0, 0.0, 0.0, 0.3, 0.0]),
            ScalarField5::affine(0.5, [0.2, 0.0, 0.0, 0.0, 0.0]),
        );
        let (new, chart) = gamma_fallback(&var).unwrap();
        let mut rng = sampling::rng(3);
        for _ in 0..20 {
            let p = sampling::ball5(&mut rng, 0.5);
            let c = var.coeffs_unchecked(&chart.to_global(&p));
            let j_old = matrix_from_kappa(c.sigma, c.beta, c.gamma, c.delta);
            let j_new = new.coeffs_unchecked(&p).matrix();
            assert!((chart.rot * j_new * chart.rot.transpose() - j_old).abs().max() < 1e-12);
            assert!(new.coeffs_unchecked(&p).gamma > 0.5);
        }

        let std = ACSField::standard();
        let (same, chart) = gamma_fallback(&std).unwrap();
        assert_eq!(chart.rot, Matrix4::identity());
        assert_eq!(same.coeffs_unchecked(&Point5::ORIGIN), Coeffs::STANDARD);

        let bad = ACSField::constant(Coeffs { sigma: 0.0, beta: 0.0, gamma: 0.0, delta: 0.0 });
        assert!(gamma_fallback(&bad).is_err());
    }

    #[test]
    fn fd_derivatives_match_analytic() {
        let acs = builtin::perturbed(0.5, 3, Coeffs::STANDARD);
        let fd = ACSField::new(
            ScalarField5::from_fn({
                let f = acs.sigma.clone();
                move |p| f.value(p)
            }),
            ScalarField5::from_fn({
                let f = acs.beta.clone();
                move |p| f.value(p)
            }),
            ScalarField5::from_fn({
                let f = acs.gamma.clone();
                move |p| f.value(p)
            }),
            ScalarField5::from_fn({
                let f = acs.delta.clone();
                move |p| f.value(p)
            }),
        );
        let p = Point5::new(0.2, -0.1, 0.3, 0.05, -0.4);
        let (a1, a2) = acs.j_derivatives(&p);
        let (b1, b2) = fd.j_derivatives(&p);
        for k in 0..5 {
            assert!((a1[k] - b1[k]).abs().max() < 1e-8);
            for l in 0..5 {
                assert!((a2[k][l] - b2[k][l]).abs().max() < 1e-4);
            }
        }
        // J derivatives against finite differences of J itself
        let h = 1e-6;
        for k in 0..5 {
            let jp = acs.coeffs_unchecked(&shift(&p, k, h)).matrix();
            let jm = acs.coeffs_unchecked(&shift(&p, k, -h)).matrix();
            assert!(((jp - jm) / (2.0 * h) - a1[k]).abs().max() < 1e-7);
        }
    }

    #[test]
    fn epsilon_examples() {
        let acs = ACSField::constant(Coeffs { sigma: 0.3, beta: 0.2, gamma: 1.5, delta: -0.4 });
        for r in [1.0, 0.5, 0.1] {
            assert_eq!(epsilon_estimate(&acs, r, 64), 0.0);
        }
        let lin = builtin::sigma_linear(1.0);
        let e1 = epsilon_estimate(&lin, 0.5, 64);
        let e2 = epsilon_estimate(&lin, 0.25, 64);
        assert!((e2 / e1 - 0.5).abs() < 0.1, "{e1} {e2}");
    }

    #[test]
    fn extended_square() {
        let acs = builtin::perturbed(0.2, 7, Coeffs { sigma: 0.1, beta: 0.2, gamma: 0.9, delta: 0.3 });
        let r = 0.5;
        let p = Point5::new(0.3, 0.2, -0.1, 0.4, 0.2);
        let j = acs.j_extended(&p, r).unwrap();
        let params = crate::contact::ContactParams { r };
        let reeb = crate::contact::reeb(&params);
        let mut alpha = Vec5::zeros();
        for k in 0..5 {
            let mut e = Vec5::zeros();
            e[k] = 1.0;
            alpha[k] = crate::contact::alpha_eval(&p, &e, &params);
        }
        let expect = -Matrix5::identity() + reeb * alpha.transpose();
        assert!((j * j - expect).abs().max() < 1e-12);
        assert!((j * reeb).norm() < 1e-15);
    }
}
