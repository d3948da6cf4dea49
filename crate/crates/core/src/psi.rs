//! The map (P, X) -> (Q, Y): Q is where the disk through (P, X) crosses the
//! 3-plane Z = {x1 = 0, y2 = 0}, Y its tangent plane there.
//!
//! The `_on_slice` variants use the parallel slice {x1 = P.x1, y2 = P.y2}
//! through the given point instead of Z; on Z the two coincide.

use serde::{Deserialize, Serialize};

use crate::acs::ACSField;
use crate::chart::PlaneChart;
use crate::contact::{project, Point5, Vec5};
use crate::error::{Error, Result};
use crate::lift::LegendrianPatch;
use crate::solver::{picard_solve, DiskSolution, SolverConfig};

/// Points of Z must have |x1|, |y2| below this.
pub const Z_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiValue {
    pub q: Point5,
    pub y: PlaneChart,
    /// Patch parameters of Q.
    pub uv: (f64, f64),
    /// |Q - P| + |Y - X|.
    pub displacement: f64,
}

pub fn in_z(p: &Point5) -> bool {
    p.x1.abs() <= Z_TOL && p.y2.abs() <= Z_TOL
}

/// Newton solve for the patch parameters where x1 = y2 = 0.
pub fn locate_on_z(patch: &LegendrianPatch) -> Result<(f64, f64, Point5, [Vec5; 2])> {
    locate_on_slice(patch, 0.0, 0.0)
}

/// Newton solve for the patch parameters where x1 = a and y2 = b.
pub fn locate_on_slice(patch: &LegendrianPatch, a: f64, b: f64) -> Result<(f64, f64, Point5, [Vec5; 2])> {
    let (mut u, mut v) = (0.0, 0.0);
    for _ in 0..40 {
        let (p, du, dv) = patch
            .eval(u, v)
            .ok_or_else(|| Error::NoIntersection(format!("Newton left the patch at ({u:.3}, {v:.3})")))?;
        let (f1, f2) = (p.x1 - a, p.y2 - b);
        if f1.abs().max(f2.abs()) < 1e-13 {
            return Ok((u, v, p, [du, dv]));
        }
        let (a, b, c, d) = (du[0], dv[0], du[3], dv[3]);
        let det = a * d - b * c;
        if det.abs() < 1e-12 {
            return Err(Error::NoIntersection("disk is not transversal to Z".into()));
        }
        u -= (d * f1 - b * f2) / det;
        v -= (-c * f1 + a * f2) / det;
    }
    Err(Error::NoIntersection("Newton iteration for the Z-crossing did not converge".into()))
}

pub fn psi_with_solution(p: &Point5, x: &PlaneChart, acs: &ACSField, cfg: &SolverConfig) -> Result<(PsiValue, DiskSolution)> {
    if !in_z(p) {
        return Err(Error::Range(format!("P = {p:?} is not on Z (x1 = y2 = 0)")));
    }
    psi_on_slice(p, x, acs, cfg)
}

/// Ψ relative to the slice {x1 = P.x1, y2 = P.y2}.
pub fn psi_on_slice(p: &Point5, x: &PlaneChart, acs: &ACSField, cfg: &SolverConfig) -> Result<(PsiValue, DiskSolution)> {
    let sol = picard_solve(p, x, acs, cfg)?;
    let (u, v, mut q, [du, dv]) = locate_on_slice(&sol.patch, p.x1, p.y2)?;
    // exact slice coordinates up to the Newton tolerance
    q.x1 = p.x1;
    q.y2 = p.y2;
    let j = acs.j_matrix(&q)?.0;
    let y = PlaneChart::from_plane(&j, &project(&du), &project(&dv))?;
    let displacement = q.dist(p) + y.distance(x);
    Ok((PsiValue { q, y, uv: (u, v), displacement }, sol))
}

pub fn psi(p: &Point5, x: &PlaneChart, acs: &ACSField, cfg: &SolverConfig) -> Result<PsiValue> {
    Ok(psi_with_solution(p, x, acs, cfg)?.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiInverse {
    pub p: Point5,
    pub x: PlaneChart,
    pub iterations: usize,
    /// Ψ(P, X) at the returned pair.
    pub image: PsiValue,
    pub increments: Vec<f64>,
}

pub const INVERT_TOL: f64 = 1e-8;
pub const INVERT_MAX_ITER: usize = 50;

/// Fixed-point inversion (P, X) <- (P, X) - (Ψ(P, X) - (Q, Y)) from (Q, Y).
pub fn psi_invert(q: &Point5, y: &PlaneChart, acs: &ACSField, cfg: &SolverConfig) -> Result<PsiInverse> {
    if !in_z(q) {
        return Err(Error::Range(format!("Q = {q:?} is not on Z (x1 = y2 = 0)")));
    }
    Ok(psi_invert_on_slice(q, y, acs, cfg, INVERT_TOL)?.0)
}

/// Inversion relative to the slice through Q, stopping once the increment
/// drops below `tol`; also returns the final disk.
pub fn psi_invert_on_slice(
    q: &Point5,
    y: &PlaneChart,
    acs: &ACSField,
    cfg: &SolverConfig,
    tol: f64,
) -> Result<(PsiInverse, DiskSolution)> {
    let (mut p, mut x) = (*q, *y);
    let mut increments = Vec::new();
    for it in 1..=INVERT_MAX_ITER {
        let (image, sol) = psi_on_slice(&p, &x, acs, cfg)?;
        let dq = image.q.to_vec() - q.to_vec();
        let dw = image.y.w - y.w;
        let inc = dq.norm() + dw.norm();
        increments.push(inc);
        if inc < tol {
            return Ok((PsiInverse { p, x, iterations: it, image, increments }, sol));
        }
        if !inc.is_finite() || (it > 3 && inc > 10.0 * increments[0]) {
            return Err(Error::Range(format!("inversion diverges (increment {inc:.3e})")));
        }
        p = Point5::from_vec(&(p.to_vec() - dq));
        p.x1 = q.x1;
        p.y2 = q.y2;
        x = PlaneChart::new(x.w - dw);
    }
    Err(Error::MaxIterations { iterations: INVERT_MAX_ITER, increment: *increments.last().unwrap() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::{builtin, Coeffs};
    use num_complex::Complex64;

    fn cfg() -> SolverConfig {
        SolverConfig { n: 33, ..Default::default() }
    }

    #[test]
    fn flat_is_identity() {
        let acs = ACSField::constant(Coeffs { sigma: 0.2, beta: 0.1, gamma: 0.9, delta: -0.4 });
        let p = Point5::new(0.0, 0.1, -0.2, 0.0, 0.05);
        let x = PlaneChart::new(Complex64::new(0.1, -0.2));
        let v = psi(&p, &x, &acs, &cfg()).unwrap();
        assert!(v.displacement < 1e-12, "{}", v.displacement);
        let inv = psi_invert(&p, &x, &acs, &cfg()).unwrap();
        assert_eq!(inv.iterations, 1);
    }

    #[test]
    fn perturbed_round_trip() {
        let acs = builtin::perturbed(0.01, 2, Coeffs::STANDARD);
        let q = Point5::new(0.0, 0.05, 0.1, 0.0, -0.05);
        let y = PlaneChart::new(Complex64::new(0.05, 0.1));
        let inv = psi_invert(&q, &y, &acs, &cfg()).unwrap();
        let back = psi(&inv.p, &inv.x, &acs, &cfg()).unwrap();
        assert!(back.q.dist(&q) < 1e-6 && back.y.distance(&y) < 1e-6);
        assert!(back.q.x1.abs() <= 1e-9 && back.q.y2.abs() <= 1e-9);
    }

    #[test]
    fn slice_inversion_off_z() {
        let acs = builtin::perturbed(0.01, 3, Coeffs::STANDARD);
        let q = Point5::new(0.1, 0.05, -0.1, -0.2, 0.1);
        let y = PlaneChart::new(Complex64::new(-0.1, 0.1));
        let (inv, sol) = psi_invert_on_slice(&q, &y, &acs, &cfg(), INVERT_TOL).unwrap();
        let (u, v, p, _) = locate_on_slice(&sol.patch, q.x1, q.y2).unwrap();
        assert!(p.dist(&q) < 1e-7, "{}", p.dist(&q));
        assert!((u, v) == inv.image.uv);
    }

    #[test]
    fn rejects_points_off_z() {
        let x = PlaneChart::new(Complex64::new(0.0, 0.0));
        let p = Point5::new(0.1, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(psi(&p, &x, &ACSField::standard(), &cfg()), Err(Error::Range(_))));
    }
}
