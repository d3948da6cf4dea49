//! J-invariant Legendrian disks as graphs: adapted coordinates, the
//! nonlinear equation for the generating function f and its Picard solve.
//!
//! In adapted coordinates the disk is the lift of L = (x1, f1, -f2, y2) over
//! the unit disk in the (x1, y2)-plane, and J-invariance of L reduces to
//!
//!   M : D^2 f = delta (f12^2 - f11 f22) - beta + A : D^2 f,
//!   M = [[kappa0, sigma0], [sigma0, gamma0]],  A = M - [[kappa, sigma], [sigma, gamma]],
//!
//! with f = 0 on the circle and coefficients evaluated on the lift. The
//! eigen-relation J(d1 L) = (1 + lambda) d2 L + mu d1 L then holds with
//! mu = sigma - delta f12 and lambda = gamma - 1 + delta f11.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::acs::{epsilon_estimate, ACSField, Coeffs};
use crate::chart::PlaneChart;
use crate::contact::{project, standard_i_matrix, ContactChart, ContactParams, HVec, Point5};
use crate::elliptic::{EllipticOperator, OperatorSummary};
use crate::error::{Error, Result};
use crate::grid::{Derivs, GridFunction, GridSpec};
use crate::lift::{lagrangian_graph, legendrian_residual, lift_with_diagnostics, LegendrianPatch};

/// Choice of the constant N in the smallness threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NPolicy {
    /// Estimated sup-to-sup norm of the discrete inverse operator.
    Measured,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Contact parameter of the working coordinates.
    pub r: f64,
    /// Radius of the parameter disk.
    pub radius: f64,
    /// Smallness threshold is 1 / (smallness_constant * max(1, |delta0|) * N^2).
    pub smallness_constant: f64,
    pub enforce_smallness: bool,
    pub n_policy: NPolicy,
    /// Residuals against the continuous equation are taken on |x| <= inner * radius.
    pub inner: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: 65,
            tol: 1e-10,
            max_iter: 200,
            r: 1.0,
            radius: 1.0,
            smallness_constant: 24.0,
            enforce_smallness: true,
            n_policy: NPolicy::Measured,
            inner: 0.9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.smallness_constant > 0.0) {
            return Err(Error::InvalidInput("solver tolerances must be positive".into()));
        }
        if !(self.inner > 0.0 && self.inner <= 1.0) {
            return Err(Error::InvalidInput(format!("inner fraction {} not in (0, 1]", self.inner)));
        }
        ContactParams::new(self.r)?;
        GridSpec::new(self.n, self.radius)?;
        Ok(())
    }

    pub fn params(&self) -> ContactParams {
        ContactParams { r: self.r }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.radius)
    }
}

/// Coordinates centered at p in which the plane X is the (x1, y2)-plane and
/// J0(dx1) = sigma0 dx1 + gamma0 dy2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedChart {
    pub chart: ContactChart,
    pub plane: PlaneChart,
    /// Coefficients of J at p before the (x2, y2)-rotation.
    pub beta_before: f64,
    pub gamma_before: f64,
    pub sigma0: f64,
    pub beta0: f64,
    pub gamma0: f64,
    pub delta0: f64,
}

impl AdaptedChart {
    pub fn coeffs0(&self) -> Coeffs {
        Coeffs { sigma: self.sigma0, beta: self.beta0, gamma: self.gamma0, delta: self.delta0 }
    }
}

fn unit(k: usize) -> HVec {
    let mut v = HVec::zeros();
    v[k] = 1.0;
    v
}

/// Unit vector of the J-invariant plane X closest to dx1 (normalized
/// Euclidean projection of dx1 onto X).
pub fn plane_direction(j: &Matrix4<f64>, x: &PlaneChart) -> Result<HVec> {
    let (v, jv) = x.vectors(j);
    if !(v.norm().is_finite() && jv.norm().is_finite()) {
        return Err(Error::Degenerate("plane chart is not finite".into()));
    }
    let a1 = v.normalize();
    let a2r = jv - a1 * a1.dot(&jv);
    if a2r.norm() < 1e-12 * jv.norm() {
        return Err(Error::Degenerate("plane vectors are dependent".into()));
    }
    let a2 = a2r.normalize();
    let e = unit(0);
    let proj = a1 * a1.dot(&e) + a2 * a2.dot(&e);
    if proj.norm() < 1e-8 {
        return Err(Error::Degenerate("plane is orthogonal to dx1".into()));
    }
    Ok(proj.normalize())
}

pub fn adapt_chart(p: &Point5, x: &PlaneChart, acs: &ACSField, params: &ContactParams) -> Result<AdaptedChart> {
    let j = acs.j_matrix(p)?.0;
    let i = standard_i_matrix();
    let e1 = plane_direction(&j, x)?;
    let ie1 = i * e1;
    // complex-orthogonal complement: prefer dx2 so that the standard data
    // give the identity chart
    let mut w = None;
    for cand in [unit(2), unit(3), unit(0), unit(1)] {
        let r = cand - e1 * e1.dot(&cand) - ie1 * ie1.dot(&cand);
        if r.norm() > 0.3 {
            w = Some(r.normalize());
            break;
        }
    }
    let w = w.ok_or_else(|| Error::Degenerate("no complement for the adapted frame".into()))?;
    let iw = i * w;
    let je1 = j * e1;
    let beta_before = w.dot(&je1);
    let gamma_before = iw.dot(&je1);
    let rho = beta_before.hypot(gamma_before);
    if rho < acs.gamma_min {
        return Err(Error::GammaThreshold { value: rho, min: acs.gamma_min, at: format!("{p:?}") });
    }
    let (c, s) = (gamma_before / rho, beta_before / rho);
    let w2 = w * c - iw * s;
    let iw2 = w * s + iw * c;
    let rot = Matrix4::from_columns(&[e1, ie1, w2, iw2]);
    let chart = ContactChart::new(*p, rot, params.r)?;
    let c0 = Coeffs::from_matrix(&chart.matrix_to_local(&j));
    Ok(AdaptedChart {
        chart,
        plane: *x,
        beta_before,
        gamma_before,
        sigma0: c0.sigma,
        beta0: c0.beta,
        gamma0: c0.gamma,
        delta0: c0.delta,
    })
}

pub fn pullback_acs(acs: &ACSField, chart: &AdaptedChart) -> Result<ACSField> {
    let local = acs.transformed(&chart.chart)?;
    let b0 = local.coeffs_unchecked(&Point5::ORIGIN).beta;
    if b0.abs() > 1e-10 {
        return Err(Error::Inconsistent(format!("beta at the chart origin is {b0:.3e}, expected 0")));
    }
    Ok(local)
}

/// Graph, lift and coefficients of the disk generated by h.
struct DiskState {
    derivs: Vec<Derivs>,
    coeffs: Vec<Coeffs>,
    points: Vec<Point5>,
    t: GridFunction,
    patch: LegendrianPatch,
    path_independence: f64,
}

fn disk_state(h: &GridFunction, acs: &ACSField, params: &ContactParams) -> Result<DiskState> {
    let spec = h.spec;
    let l = lagrangian_graph(h);
    let c = l.center();
    let start = Point5::from_parts(&c, 0.0);
    let lift = lift_with_diagnostics(&l, &start, params)?;
    let mut derivs = vec![Derivs::default(); spec.n * spec.n];
    let mut coeffs = vec![Coeffs::STANDARD; spec.n * spec.n];
    let mut points = vec![Point5::ORIGIN; spec.n * spec.n];
    for (i, j) in spec.nodes() {
        let k = spec.idx(i, j);
        let q = l.point(i, j);
        let p = Point5::from_parts(&q, lift.t.get(i, j));
        let cf = acs.coeffs_unchecked(&p);
        if !(cf.gamma.abs() >= acs.gamma_min) {
            return Err(Error::GammaThreshold { value: cf.gamma, min: acs.gamma_min, at: format!("{p:?}") });
        }
        derivs[k] = h.derivs(i, j);
        coeffs[k] = cf;
        points[k] = p;
    }
    let patch = LegendrianPatch::from_lift(&l, &lift.t, start);
    Ok(DiskState { derivs, coeffs, points, t: lift.t, patch, path_independence: lift.path_independence })
}

fn rhs_value(d: &Derivs, c: &Coeffs, c0: &Coeffs) -> f64 {
    let (k0, k) = (c0.kappa(), c.kappa());
    c.delta * (d.f12 * d.f12 - d.f11 * d.f22) - c.beta
        + (k0 - k) * d.f11
        + 2.0 * (c0.sigma - c.sigma) * d.f12
        + (c0.gamma - c.gamma) * d.f22
}

fn lhs_value(d: &Derivs, c0: &Coeffs) -> f64 {
    c0.kappa() * d.f11 + 2.0 * c0.sigma * d.f12 + c0.gamma * d.f22
}

/// Right-hand side of the disk equation for the current iterate h, with
/// coefficients evaluated on the Legendrian lift of its graph.
pub fn assemble_rhs(h: &GridFunction, acs: &ACSField, params: &ContactParams) -> Result<GridFunction> {
    let c0 = acs.coeffs_unchecked(&Point5::ORIGIN);
    let st = disk_state(h, acs, params)?;
    Ok(rhs_from_state(h.spec, &st, &c0))
}

fn rhs_from_state(spec: GridSpec, st: &DiskState, c0: &Coeffs) -> GridFunction {
    let mut out = GridFunction::zeros(spec);
    for (i, j) in spec.nodes() {
        let k = spec.idx(i, j);
        out.set(i, j, rhs_value(&st.derivs[k], &st.coeffs[k], c0));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smallness {
    pub beta_norm: f64,
    pub a_norm: f64,
    pub inverse_norm: f64,
    pub threshold: f64,
    pub ball_radius: f64,
    pub holds: bool,
}

impl Smallness {
    pub fn measured(&self) -> f64 {
        self.beta_norm + self.a_norm
    }
}

/// Discrete C^2 norms of beta and A on the flat disk of the chart.
pub fn coefficient_norms(acs: &ACSField, spec: GridSpec) -> (f64, f64) {
    let c0 = acs.coeffs_unchecked(&Point5::ORIGIN);
    let at = |x: f64, y: f64| acs.coeffs_unchecked(&Point5::new(x, 0.0, 0.0, y, 0.0));
    let beta = GridFunction::from_fn(spec, |x, y| at(x, y).beta);
    let a11 = GridFunction::from_fn(spec, |x, y| c0.kappa() - at(x, y).kappa());
    let a12 = GridFunction::from_fn(spec, |x, y| c0.sigma - at(x, y).sigma);
    let a22 = GridFunction::from_fn(spec, |x, y| c0.gamma - at(x, y).gamma);
    let a = a11.c2_norm().max(a12.c2_norm()).max(a22.c2_norm());
    (beta.c2_norm(), a)
}

pub fn smallness(acs: &ACSField, op: &EllipticOperator, delta0: f64, cfg: &SolverConfig) -> Smallness {
    let (beta_norm, a_norm) = coefficient_norms(acs, op.spec);
    let n = match cfg.n_policy {
        NPolicy::Measured => op.inverse_norm,
        NPolicy::Fixed(v) => v,
    };
    let d = delta0.abs().max(1.0);
    let threshold = 1.0 / (cfg.smallness_constant * d * n * n);
    let ball_radius = 1.0 / (2.0 * cfg.smallness_constant * d * n);
    Smallness { beta_norm, a_norm, inverse_norm: n, threshold, ball_radius, holds: beta_norm + a_norm <= threshold }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Fixed-point residual of the discrete system.
    pub discrete: f64,
    /// Continuous equation evaluated with fourth-order differences on the inner disk.
    pub equation: f64,
    /// |J(d1 L) - (1 + lambda) d2 L - mu d1 L| on the inner disk.
    pub j_invariance: f64,
    /// The y1-component of the same vector (holds identically given lambda, mu).
    pub second_line: f64,
    /// max |alpha(tangent)| of the lifted patch.
    pub legendrian: f64,
    /// Difference of the two lift sweep orders.
    pub lift_path: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Diagnostics {
    pub epsilon: f64,
    pub smallness: Smallness,
    pub operator: OperatorSummary,
    pub f_c2_norm: f64,
    pub in_ball: bool,
    pub h: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskSolution {
    pub f: GridFunction,
    /// Lifted t in adapted coordinates.
    pub t: GridFunction,
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub lambda: GridFunction,
    pub mu: GridFunction,
    /// The disk in adapted coordinates.
    pub patch_local: LegendrianPatch,
    /// The disk in the input coordinates.
    pub patch: LegendrianPatch,
    pub chart: AdaptedChart,
    pub diagnostics: Diagnostics,
}

/// JSON-friendly summary without grids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskReport {
    pub n: usize,
    pub iterations: usize,
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub residuals: Residuals,
    pub chart: AdaptedChart,
    pub diagnostics: Diagnostics,
    pub f_sup: f64,
    pub center: Point5,
}

impl DiskSolution {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().cloned().fold(0.0, f64::max)
    }

    pub fn report(&self) -> DiskReport {
        DiskReport {
            n: self.f.n(),
            iterations: self.iterations,
            increments: self.increments.clone(),
            ratios: self.ratios.clone(),
            max_ratio: self.max_ratio(),
            residuals: self.residuals,
            chart: self.chart,
            diagnostics: self.diagnostics.clone(),
            f_sup: self.f.sup(),
            center: self.patch.center_point(),
        }
    }
}

/// Increments below this are round-off; their ratios carry no information.
const RATIO_FLOOR: f64 = 1e-14;

pub fn picard_solve(p: &Point5, x: &PlaneChart, acs: &ACSField, cfg: &SolverConfig) -> Result<DiskSolution> {
    cfg.validate()?;
    let params = cfg.params();
    let spec = cfg.grid()?;
    let chart = adapt_chart(p, x, acs, &params)?;
    let local = pullback_acs(acs, &chart)?;
    let c0 = chart.coeffs0();
    let op = EllipticOperator::from_coeffs(spec, c0.sigma, c0.gamma)?;
    let small = smallness(&local, &op, c0.delta, cfg);
    if cfg.enforce_smallness && !small.holds {
        return Err(Error::Smallness { measured: small.measured(), threshold: small.threshold });
    }

    let mut h = GridFunction::zeros(spec);
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut bad = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iter {
        let st = disk_state(&h, &local, &params)?;
        let rhs = rhs_from_state(spec, &st, &c0);
        let next = op.solve(&rhs)?;
        let inc = next.sub(&h).sup();
        if !inc.is_finite() {
            return Err(Error::Contraction { iteration: it, ratios });
        }
        if let Some(&prev) = increments.last() {
            if prev > RATIO_FLOOR {
                let ratio = inc / prev;
                ratios.push(ratio);
                bad = if ratio >= 1.0 { bad + 1 } else { 0 };
            }
        }
        increments.push(inc);
        h = next;
        if inc < cfg.tol {
            converged = true;
            break;
        }
        if bad >= 2 {
            return Err(Error::Contraction { iteration: it, ratios });
        }
    }
    if !converged {
        return Err(Error::MaxIterations { iterations: cfg.max_iter, increment: *increments.last().unwrap_or(&f64::NAN) });
    }
    let iterations = increments.len();
    finish(h, increments, ratios, iterations, chart, local, op, small, cfg)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    f: GridFunction,
    increments: Vec<f64>,
    ratios: Vec<f64>,
    iterations: usize,
    chart: AdaptedChart,
    local: ACSField,
    op: EllipticOperator,
    small: Smallness,
    cfg: &SolverConfig,
) -> Result<DiskSolution> {
    let params = cfg.params();
    let spec = f.spec;
    let c0 = chart.coeffs0();
    let st = disk_state(&f, &local, &params)?;
    let rhs = rhs_from_state(spec, &st, &c0);
    let af = op.apply(&f);
    let mut discrete = 0.0f64;
    for (i, j) in spec.nodes() {
        if op.is_unknown(i, j) {
            discrete = discrete.max((af.get(i, j) - rhs.get(i, j)).abs());
        }
    }

    let mut lambda = GridFunction::zeros(spec);
    let mut mu = GridFunction::zeros(spec);
    for (i, j) in spec.nodes() {
        let k = spec.idx(i, j);
        let (d, c) = (&st.derivs[k], &st.coeffs[k]);
        mu.set(i, j, c.sigma - c.delta * d.f12);
        lambda.set(i, j, c.gamma - 1.0 + c.delta * d.f11);
    }

    let inner2 = (cfg.inner * spec.radius).powi(2);
    let mut equation = 0.0f64;
    let mut j_inv = 0.0f64;
    let mut second = 0.0f64;
    for (i, j) in spec.nodes() {
        let (x, y) = spec.xy(i, j);
        if x * x + y * y > inner2 {
            continue;
        }
        let k = spec.idx(i, j);
        if let Some(d4) = f.derivs4(i, j) {
            let p = Point5::new(x, d4.f1, -d4.f2, y, st.t.get(i, j));
            let c = local.coeffs_unchecked(&p);
            equation = equation.max((lhs_value(&d4, &c0) - rhs_value(&d4, &c, &c0)).abs());
        }
        let jm = local.j_matrix(&st.points[k])?.0;
        let [ta, tb] = st.patch.tangents(i, j);
        let (a, b) = (project(&ta), project(&tb));
        let res = jm * a - b * (1.0 + lambda.get(i, j)) - a * mu.get(i, j);
        j_inv = j_inv.max(res.norm());
        second = second.max(res[1].abs());
    }

    let patch_local = st.patch;
    let ch = chart.chart;
    let patch = patch_local.map_points(|q| ch.to_global(q));
    let residuals = Residuals {
        discrete,
        equation,
        j_invariance: j_inv,
        second_line: second,
        legendrian: legendrian_residual(&patch_local, &params),
        lift_path: st.path_independence,
    };
    let f_c2 = f.c2_norm();
    let diagnostics = Diagnostics {
        epsilon: epsilon_estimate(&local, 1.0, 64),
        smallness: small,
        operator: op.summary(),
        f_c2_norm: f_c2,
        in_ball: f_c2 <= small.ball_radius,
        h: spec.h(),
    };
    Ok(DiskSolution {
        f,
        t: st.t,
        increments,
        ratios,
        iterations,
        residuals,
        lambda,
        mu,
        patch_local,
        patch,
        chart,
        diagnostics,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationChoice {
    pub r: f64,
    pub halvings: usize,
    pub epsilon: f64,
    pub measured: f64,
    pub threshold: f64,
}

pub const MAX_HALVINGS: usize = 20;

/// Halve r from 1 until the flattened structure at the origin satisfies the
/// smallness precondition of `picard_solve`.
pub fn choose_dilation(acs: &ACSField, cfg: &SolverConfig) -> Result<DilationChoice> {
    let spec = cfg.grid()?;
    let mut r = 1.0;
    let mut last = (f64::NAN, f64::NAN, f64::NAN);
    for halvings in 0..=MAX_HALVINGS {
        let field = acs.dilated(r);
        let params = ContactParams { r };
        let measured = adapt_chart(&Point5::ORIGIN, &PlaneChart::new(Default::default()), &field, &params)
            .and_then(|chart| {
                let local = pullback_acs(&field, &chart)?;
                let op = EllipticOperator::from_coeffs(spec, chart.sigma0, chart.gamma0)?;
                let local_cfg = SolverConfig { r, ..*cfg };
                Ok(smallness(&local, &op, chart.delta0, &local_cfg))
            });
        let eps = epsilon_estimate(acs, r, 64);
        if let Ok(s) = measured {
            last = (eps, s.measured(), s.threshold);
            if eps <= s.threshold && s.measured() <= s.threshold {
                return Ok(DilationChoice { r, halvings, epsilon: eps, measured: s.measured(), threshold: s.threshold });
            }
        }
        r *= 0.5;
    }
    Err(Error::Dilation { halvings: MAX_HALVINGS, r: r * 2.0, measured: last.0.max(last.1), threshold: last.2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::builtin;
    use crate::contact::dalpha_eval;
    use num_complex::Complex64;

    fn x0() -> PlaneChart {
        PlaneChart::new(Complex64::new(0.0, 0.0))
    }

    #[test]
    fn identity_chart_for_standard_data() {
        let ch = adapt_chart(&Point5::ORIGIN, &x0(), &ACSField::standard(), &ContactParams::default()).unwrap();
        assert!((ch.chart.rot - Matrix4::identity()).abs().max() < 1e-15);
        assert_eq!((ch.sigma0, ch.beta0, ch.gamma0), (0.0, 0.0, 1.0));
    }

    #[test]
    fn rotation_removes_beta() {
        let c = Coeffs { sigma: 0.3, beta: 0.4, gamma: 0.9, delta: -0.2 };
        let acs = ACSField::constant(c);
        let ch = adapt_chart(&Point5::ORIGIN, &x0(), &acs, &ContactParams::default()).unwrap();
        assert!(ch.beta0.abs() < 1e-14);
        assert!((ch.gamma0 - c.beta.hypot(c.gamma)).abs() < 1e-14);
        assert!((ch.sigma0 - c.sigma).abs() < 1e-14);
        // conjugation oracle: the local matrix is R^T J R
        let local = pullback_acs(&acs, &ch).unwrap();
        let j_loc = local.j_matrix(&Point5::new(0.1, 0.0, 0.2, 0.0, 0.1)).unwrap().0;
        let oracle = ch.chart.rot.transpose() * c.matrix() * ch.chart.rot;
        assert!((j_loc - oracle).abs().max() < 1e-13);
        let rep = crate::acs::check_identities(&local, 200);
        assert!(rep.pass);
    }

    #[test]
    fn generic_plane_is_adapted() {
        let acs = builtin::perturbed(0.2, 3, Coeffs { sigma: 0.1, beta: 0.3, gamma: 1.1, delta: 0.2 });
        let p = Point5::new(0.1, -0.2, 0.05, 0.1, 0.3);
        let x = PlaneChart::new(Complex64::new(0.3, -0.4));
        let params = ContactParams::new(0.7).unwrap();
        let ch = adapt_chart(&p, &x, &acs, &params).unwrap();
        assert!(ch.beta0.abs() < 1e-12 && ch.gamma0 > 0.0);
        // the plane X maps to the (x1, y2)-plane
        let j = acs.j_matrix(&p).unwrap().0;
        let (v, jv) = x.vectors(&j);
        for w in [v, jv] {
            let l = ch.chart.vec_to_local(&w);
            assert!(l[1].abs() < 1e-12 && l[2].abs() < 1e-12, "{l:?}");
        }
        let mut rng = crate::sampling::rng(5);
        for _ in 0..20 {
            let a = crate::sampling::normal_hvec(&mut rng);
            let b = crate::sampling::normal_hvec(&mut rng);
            let (la, lb) = (ch.chart.vec_to_local(&a), ch.chart.vec_to_local(&b));
            assert!((dalpha_eval(&la, &lb) - dalpha_eval(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_examples() {
        let spec = GridSpec::unit(33).unwrap();
        let params = ContactParams::default();
        let zero = GridFunction::zeros(spec);
        let rhs = assemble_rhs(&zero, &builtin::sigma_linear(0.1), &params).unwrap();
        assert_eq!(rhs.sup(), 0.0);
        // constant field: A = 0, only the quadratic term survives
        let c = Coeffs { sigma: 0.2, beta: 0.0, gamma: 1.3, delta: 0.7 };
        let h = GridFunction::from_fn(spec, |x, y| 0.1 * (x * x * y + 0.5 * y * y - 0.3 * x * x));
        let rhs = assemble_rhs(&h, &ACSField::constant(c), &params).unwrap();
        for (i, j) in spec.nodes() {
            let d = h.derivs(i, j);
            let want = c.delta * (d.f12 * d.f12 - d.f11 * d.f22);
            assert!((rhs.get(i, j) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_sees_t_dependence_only_through_coefficients() {
        // shifting the lift start in t changes nothing for a t-independent field
        let spec = GridSpec::unit(33).unwrap();
        let params = ContactParams::default();
        let h = GridFunction::from_fn(spec, |x, y| 0.05 * (1.0 - x * x - y * y) * (x + 2.0 * y));
        let mk = |t_coef: f64, shift: f64| {
            ACSField::from_joint(move |p| Coeffs {
                sigma: 0.1 * p.x1 + t_coef * (p.t + shift),
                beta: 0.05 * p.y2,
                gamma: 1.0,
                delta: 0.1,
            })
        };
        let base = assemble_rhs(&h, &mk(0.0, 0.0), &params).unwrap();
        let shifted = assemble_rhs(&h, &mk(0.0, 0.3), &params).unwrap();
        assert_eq!(base, shifted);
        let dep = assemble_rhs(&h, &mk(0.2, 0.0), &params).unwrap();
        let dep_shift = assemble_rhs(&h, &mk(0.2, 0.3), &params).unwrap();
        assert!(dep.sub(&dep_shift).sup() > 1e-3);
    }

    #[test]
    fn constant_structure_gives_flat_disk() {
        let c = Coeffs { sigma: 0.4, beta: -0.2, gamma: 0.8, delta: 0.3 };
        let cfg = SolverConfig { n: 33, ..Default::default() };
        let x = PlaneChart::new(Complex64::new(0.2, 0.1));
        let sol = picard_solve(&Point5::new(0.0, 0.1, 0.2, 0.0, 0.1), &x, &ACSField::constant(c), &cfg).unwrap();
        assert!(sol.f.sup() <= 1e-12);
        assert!(sol.iterations <= 2);
        assert!(sol.residuals.j_invariance < 1e-12);
    }

    #[test]
    fn perturbed_solve_converges() {
        let acs = builtin::perturbed(0.02, 1, Coeffs::STANDARD);
        let cfg = SolverConfig { n: 33, ..Default::default() };
        let sol = picard_solve(&Point5::ORIGIN, &x0(), &acs, &cfg).unwrap();
        assert!(sol.f.sup() > 1e-4);
        assert!(sol.max_ratio() < 0.5, "{:?}", sol.ratios);
        let h = sol.diagnostics.h;
        assert!(sol.residuals.discrete < 1e-9);
        assert!(sol.residuals.j_invariance < 10.0 * h * h, "{:?}", sol.residuals);
        assert!(sol.residuals.second_line < 10.0 * h * h);
        assert!(sol.residuals.legendrian < 1e-10 + 10.0 * h * h);
        assert!(sol.diagnostics.in_ball);
    }

    #[test]
    fn smallness_violation_reported() {
        let acs = builtin::perturbed(2.0, 1, Coeffs::STANDARD);
        let cfg = SolverConfig { n: 33, ..Default::default() };
        assert!(matches!(picard_solve(&Point5::ORIGIN, &x0(), &acs, &cfg), Err(Error::Smallness { .. })));
    }

    #[test]
    fn dilation_examples() {
        let cfg = SolverConfig { n: 33, ..Default::default() };
        let d = choose_dilation(&ACSField::standard(), &cfg).unwrap();
        assert_eq!(d.r, 1.0);
        let d = choose_dilation(&builtin::sigma_linear(1.0), &cfg).unwrap();
        assert!(d.r > 0.0 && d.r <= 1.0);
        assert!(d.epsilon <= d.threshold && d.measured <= d.threshold);
    }
}
