//! Constant-coefficient operator M11 u11 + 2 M12 u12 + M22 u22 on the disk
//! with zero Dirichlet data.
//!
//! The operator is written as a sum of 1-D second differences along the four
//! lattice directions: M11 u11 + M22 u22 + M12 (u_ss - u_dd), where s and d
//! are the unit diagonals. In the interior this is the usual 4-point cross
//! stencil for u12; next to the circle each 1-D difference uses the
//! Shortley–Weller non-uniform formula with the crossing point as the
//! neighbor.

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

#[derive(Clone, Debug)]
pub struct EllipticOperator {
    pub spec: GridSpec,
    pub m: Matrix2<f64>,
    /// Smallest eigenvalue of M.
    pub k: f64,
    /// Estimated sup-to-sup norm of the discrete inverse.
    pub inverse_norm: f64,
    unknown_of: Vec<Option<usize>>,
    nodes: Vec<(usize, usize)>,
    rows: Vec<Vec<(usize, f64)>>,
    lu: BandedLu,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSummary {
    pub m: [[f64; 2]; 2],
    pub k: f64,
    pub inverse_norm: f64,
    pub unknowns: usize,
}

impl EllipticOperator {
    /// Operator with M = [[(1 + sigma0^2)/gamma0, sigma0], [sigma0, gamma0]].
    pub fn from_coeffs(spec: GridSpec, sigma0: f64, gamma0: f64) -> Result<Self> {
        if !(gamma0 > 0.0) {
            return Err(Error::InvalidInput(format!("gamma0 = {gamma0} must be positive")));
        }
        let m = Matrix2::new((1.0 + sigma0 * sigma0) / gamma0, sigma0, sigma0, gamma0);
        EllipticOperator::new(spec, m)
    }

    pub fn new(spec: GridSpec, m: Matrix2<f64>) -> Result<Self> {
        if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-14 * m.norm() {
            return Err(Error::InvalidInput("M must be symmetric".into()));
        }
        let k = SymmetricEigen::new(m).eigenvalues.min();
        if !(k > 0.0) {
            return Err(Error::InvalidInput(format!("M is not positive definite (smallest eigenvalue {k})")));
        }
        let n = spec.n;
        let mut unknown_of = vec![None; n * n];
        let mut nodes = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if spec.in_disk(i as isize, j as isize) && spec.is_interior(i, j) {
                    unknown_of[spec.idx(i, j)] = Some(nodes.len());
                    nodes.push((i, j));
                }
            }
        }
        let h = spec.h();
        let dirs: [((isize, isize), f64); 4] =
            [((1, 0), m[(0, 0)]), ((0, 1), m[(1, 1)]), ((1, 1), m[(0, 1)]), ((1, -1), -m[(0, 1)])];
        let mut rows = Vec::with_capacity(nodes.len());
        let (mut kl, mut ku) = (0usize, 0usize);
        for (row, &(i, j)) in nodes.iter().enumerate() {
            let (x, y) = spec.xy(i, j);
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(9);
            let mut diag = 0.0;
            for &((di, dj), c) in &dirs {
                if c == 0.0 {
                    continue;
                }
                let step = h * ((di * di + dj * dj) as f64).sqrt();
                let mut dist = [0.0; 2];
                let mut nb = [None; 2];
                for (s, sign) in [1isize, -1].into_iter().enumerate() {
                    let (ni, nj) = (i as isize + sign * di, j as isize + sign * dj);
                    let inside = ni >= 0 && nj >= 0 && ni < n as isize && nj < n as isize;
                    let u = if inside { unknown_of[spec.idx(ni as usize, nj as usize)] } else { None };
                    match u {
                        Some(col) => {
                            dist[s] = step;
                            nb[s] = Some(col);
                        }
                        None => {
                            let ex = (sign * di) as f64 * h;
                            let ey = (sign * dj) as f64 * h;
                            dist[s] = step * crossing(x, y, ex, ey, spec.radius);
                        }
                    }
                }
                let (a, b) = (dist[0], dist[1]);
                diag -= 2.0 * c / (a * b);
                if let Some(col) = nb[0] {
                    entries.push((col, 2.0 * c / (a * (a + b))));
                }
                if let Some(col) = nb[1] {
                    entries.push((col, 2.0 * c / (b * (a + b))));
                }
            }
            entries.push((row, diag));
            for &(col, _) in &entries {
                if col < row {
                    kl = kl.max(row - col);
                } else {
                    ku = ku.max(col - row);
                }
            }
            rows.push(entries);
        }
        let lu = BandedLu::factor(nodes.len(), kl, ku, &rows)
            .map_err(|e| Error::Degenerate(format!("singular discretization at unknown {}", e.column)))?;
        let mut op = EllipticOperator { spec, m, k, inverse_norm: 0.0, unknown_of, nodes, rows, lu };
        op.inverse_norm = op.estimate_inverse_norm();
        Ok(op)
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_unknown(&self, i: usize, j: usize) -> bool {
        self.unknown_of[self.spec.idx(i, j)].is_some()
    }

    pub fn summary(&self) -> OperatorSummary {
        OperatorSummary {
            m: [[self.m[(0, 0)], self.m[(0, 1)]], [self.m[(1, 0)], self.m[(1, 1)]]],
            k: self.k,
            inverse_norm: self.inverse_norm,
            unknowns: self.unknowns(),
        }
    }

    fn gather(&self, g: &GridFunction) -> Vec<f64> {
        self.nodes.iter().map(|&(i, j)| g.get(i, j)).collect()
    }

    fn scatter(&self, v: &[f64]) -> GridFunction {
        let mut g = GridFunction::zeros(self.spec);
        for (k, &(i, j)) in self.nodes.iter().enumerate() {
            g.set(i, j, v[k]);
        }
        g
    }

    /// Discrete solution with zero boundary values; non-unknown nodes are 0.
    pub fn solve(&self, rhs: &GridFunction) -> Result<GridFunction> {
        if rhs.spec != self.spec {
            return Err(Error::InvalidInput("right-hand side lives on a different grid".into()));
        }
        let mut b = self.gather(rhs);
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("right-hand side is not finite".into()));
        }
        self.lu.solve_in_place(&mut b);
        Ok(self.scatter(&b))
    }

    /// The discrete operator applied to u (boundary values taken as 0).
    pub fn apply(&self, u: &GridFunction) -> GridFunction {
        let v = self.gather(u);
        let out: Vec<f64> = self.rows.iter().map(|r| r.iter().map(|&(c, a)| a * v[c]).sum()).collect();
        self.scatter(&out)
    }

    /// Relative residual |A u - b|_inf / (|A|_inf |u|_inf + |b|_inf).
    pub fn relative_residual(&self, u: &GridFunction, rhs: &GridFunction) -> f64 {
        let au = self.apply(u);
        let mut res = 0.0f64;
        let mut bn = 0.0f64;
        let mut un = 0.0f64;
        for &(i, j) in &self.nodes {
            res = res.max((au.get(i, j) - rhs.get(i, j)).abs());
            bn = bn.max(rhs.get(i, j).abs());
            un = un.max(u.get(i, j).abs());
        }
        let an = self.rows.iter().map(|r| r.iter().map(|&(_, a)| a.abs()).sum::<f64>()).fold(0.0, f64::max);
        let den = an * un + bn;
        if den == 0.0 {
            0.0
        } else {
            res / den
        }
    }

    /// Hager–Higham estimate of |A^-1|_inf = |A^-T|_1.
    fn estimate_inverse_norm(&self) -> f64 {
        let n = self.unknowns();
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0f64;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let mut y = x.clone();
            self.lu.solve_transpose_in_place(&mut y);
            let norm1: f64 = y.iter().map(|v| v.abs()).sum();
            if norm1 <= est {
                break;
            }
            est = norm1;
            let mut z: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            self.lu.solve_in_place(&mut z);
            let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |acc, (k, v)| if v.abs() > acc.1 { (k, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || jmax == last_j {
                break;
            }
            last_j = jmax;
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        let mut alt: Vec<f64> = (0..n)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + k as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        self.lu.solve_transpose_in_place(&mut alt);
        let alt_est = 2.0 * alt.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }
}

/// Fraction tau in (0, 1] with |(x, y) + tau (ex, ey)| = radius.
fn crossing(x: f64, y: f64, ex: f64, ey: f64, radius: f64) -> f64 {
    let a = ex * ex + ey * ey;
    let b = x * ex + y * ey;
    let c = x * x + y * y - radius * radius;
    let disc = (b * b - a * c).max(0.0);
    // stable root of a tau^2 + 2 b tau + c = 0 with c < 0
    let tau = if b >= 0.0 { -c / (b + disc.sqrt()) } else { (disc.sqrt() - b) / a };
    tau.clamp(f64::MIN_POSITIVE, 1.0)
}

pub fn elliptic_solve(op: &EllipticOperator, rhs: &GridFunction) -> Result<GridFunction> {
    op.solve(rhs)
}
