//! Lagrangian graphs of gradients over dx1 ^ dy2 and their Legendrian lifts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acs::ACSField;
use crate::chart::PlaneChart;
use crate::contact::{alpha_eval, ContactParams, HVec, Point5, Vec5};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

/// Nodewise L = (x1, f1, -f2, y2) over the grid of f.
#[derive(Clone, Debug)]
pub struct LagrangianGraph {
    pub spec: GridSpec,
    pub points: Vec<HVec>,
    /// (d/dx1 L, d/dy2 L) per node.
    pub tangents: Vec<[HVec; 2]>,
}

impl LagrangianGraph {
    pub fn point(&self, i: usize, j: usize) -> HVec {
        self.points[self.spec.idx(i, j)]
    }

    pub fn center(&self) -> HVec {
        let c = self.spec.center();
        self.point(c, c)
    }
}

pub fn lagrangian_graph(f: &GridFunction) -> LagrangianGraph {
    let spec = f.spec;
    let mut points = vec![HVec::zeros(); spec.n * spec.n];
    let mut tangents = vec![[HVec::zeros(); 2]; spec.n * spec.n];
    for (i, j) in spec.nodes() {
        let (x, y) = spec.xy(i, j);
        let d = f.derivs(i, j);
        let k = spec.idx(i, j);
        points[k] = HVec::new(x, d.f1, -d.f2, y);
        tangents[k] = [HVec::new(1.0, d.f11, -d.f12, 0.0), HVec::new(0.0, d.f12, -d.f22, 1.0)];
    }
    LagrangianGraph { spec, points, tangents }
}

/// Trapezoidal integral of r (y1 dx1 + y2 dx2) along the segment a -> b.
fn edge(a: &HVec, b: &HVec, r: f64) -> f64 {
    r * (0.5 * (a[1] + b[1]) * (b[0] - a[0]) + 0.5 * (a[3] + b[3]) * (b[2] - a[2]))
}

/// Max over grid cells of |circulation| / h^2 of the pulled-back 1-form.
pub fn closedness_residual(l: &LagrangianGraph, params: &ContactParams) -> f64 {
    let spec = l.spec;
    let h = spec.h();
    let mut worst = 0.0f64;
    for j in 0..spec.n - 1 {
        for i in 0..spec.n - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if !corners.iter().all(|&(a, b)| spec.in_disk(a as isize, b as isize)) {
                continue;
            }
            let mut c = 0.0;
            for k in 0..4 {
                let (a, b) = corners[k];
                let (a2, b2) = corners[(k + 1) % 4];
                c += edge(&l.point(a, b), &l.point(a2, b2), params.r);
            }
            worst = worst.max(c.abs() / (h * h));
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct LiftResult {
    /// Average of the two sweep orders.
    pub t: GridFunction,
    pub row_first: GridFunction,
    pub column_first: GridFunction,
    pub closedness: f64,
    pub path_independence: f64,
}

/// Staircase path integration from the center node: along the center row
/// first (`row_first`) or along the center column first.
fn sweep(l: &LagrangianGraph, t0: f64, r: f64, row_first: bool) -> GridFunction {
    let spec = l.spec;
    let n = spec.n;
    let c = spec.center();
    let mut t = GridFunction::zeros(spec);
    // position (a, b) with a along the first leg
    let node = |a: usize, b: usize| if row_first { (a, b) } else { (b, a) };
    let mut first_leg = vec![0.0; n];
    first_leg[c] = t0;
    for a in (c + 1)..n {
        let (p, q) = (node(a - 1, c), node(a, c));
        if !spec.in_disk(q.0 as isize, q.1 as isize) {
            break;
        }
        first_leg[a] = first_leg[a - 1] + edge(&l.point(p.0, p.1), &l.point(q.0, q.1), r);
    }
    for a in (0..c).rev() {
        let (p, q) = (node(a + 1, c), node(a, c));
        if !spec.in_disk(q.0 as isize, q.1 as isize) {
            break;
        }
        first_leg[a] = first_leg[a + 1] + edge(&l.point(p.0, p.1), &l.point(q.0, q.1), r);
    }
    for a in 0..n {
        let base = node(a, c);
        if !spec.in_disk(base.0 as isize, base.1 as isize) {
            continue;
        }
        t.set(base.0, base.1, first_leg[a]);
        let mut acc = first_leg[a];
        for b in (c + 1)..n {
            let (p, q) = (node(a, b - 1), node(a, b));
            if !spec.in_disk(q.0 as isize, q.1 as isize) {
                break;
            }
            acc += edge(&l.point(p.0, p.1), &l.point(q.0, q.1), r);
            t.set(q.0, q.1, acc);
        }
        let mut acc = first_leg[a];
        for b in (0..c).rev() {
            let (p, q) = (node(a, b + 1), node(a, b));
            if !spec.in_disk(q.0 as isize, q.1 as isize) {
                break;
            }
            acc += edge(&l.point(p.0, p.1), &l.point(q.0, q.1), r);
            t.set(q.0, q.1, acc);
        }
    }
    t
}

pub fn lift_with_diagnostics(l: &LagrangianGraph, start: &Point5, params: &ContactParams) -> Result<LiftResult> {
    let h = l.spec.h();
    let gap = (start.q4() - l.center()).norm();
    if gap > 1e-12 * (1.0 + start.q4().norm()) {
        return Err(Error::InvalidInput(format!(
            "lift start is not over the center node (distance {gap:.3e})"
        )));
    }
    let closedness = closedness_residual(l, params);
    let bound = 10.0 * h * h;
    if closedness > bound {
        return Err(Error::NotLagrangian { residual: closedness, bound });
    }
    let row_first = sweep(l, start.t, params.r, true);
    let column_first = sweep(l, start.t, params.r, false);
    let diff = row_first.sub(&column_first).sup();
    let mut t = row_first.clone();
    for k in 0..t.values.len() {
        t.values[k] = 0.5 * (row_first.values[k] + column_first.values[k]);
    }
    Ok(LiftResult { t, row_first, column_first, closedness, path_independence: diff })
}

pub fn legendrian_lift(l: &LagrangianGraph, start: &Point5, params: &ContactParams) -> Result<GridFunction> {
    Ok(lift_with_diagnostics(l, start, params)?.t)
}

/// Circulation of r (y1 dx1 + y2 dx2) around a closed lattice loop.
pub fn loop_residual(l: &LagrangianGraph, params: &ContactParams, lp: &[(usize, usize)]) -> f64 {
    let mut c = 0.0;
    for k in 0..lp.len() {
        let (a, b) = lp[k];
        let (a2, b2) = lp[(k + 1) % lp.len()];
        c += edge(&l.point(a, b), &l.point(a2, b2), params.r);
    }
    c.abs()
}

/// Random closed lattice loops: two random monotone staircase paths between
/// random node pairs, the second traversed backwards.
pub fn random_loops(spec: &GridSpec, count: usize, rng: &mut impl Rng) -> Vec<Vec<(usize, usize)>> {
    let nodes: Vec<(usize, usize)> = spec.nodes().collect();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = nodes[rng.gen_range(0..nodes.len())];
        let b = nodes[rng.gen_range(0..nodes.len())];
        if a == b {
            continue;
        }
        let p1 = staircase(spec, a, b, rng);
        let p2 = staircase(spec, a, b, rng);
        if let (Some(p1), Some(mut p2)) = (p1, p2) {
            p2.reverse();
            let mut lp = p1;
            // p2 starts at b and ends at a; drop duplicates of the endpoints
            lp.extend(p2.into_iter().skip(1));
            lp.pop();
            out.push(lp);
        }
    }
    out
}

fn staircase(spec: &GridSpec, a: (usize, usize), b: (usize, usize), rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut cur = (a.0 as isize, a.1 as isize);
    let target = (b.0 as isize, b.1 as isize);
    let mut path = vec![a];
    while cur != target {
        let dx = (target.0 - cur.0).signum();
        let dy = (target.1 - cur.1).signum();
        let step_x = if dx == 0 {
            false
        } else if dy == 0 {
            true
        } else {
            rng.gen_bool(0.5)
        };
        let next = if step_x { (cur.0 + dx, cur.1) } else { (cur.0, cur.1 + dy) };
        let next = if spec.in_disk(next.0, next.1) {
            next
        } else {
            let alt = if step_x { (cur.0, cur.1 + dy) } else { (cur.0 + dx, cur.1) };
            if (alt.0 - cur.0).abs() + (alt.1 - cur.1).abs() == 1 && spec.in_disk(alt.0, alt.1) {
                alt
            } else {
                return None;
            }
        };
        cur = next;
        path.push((cur.0 as usize, cur.1 as usize));
    }
    Some(path)
}

/// A Legendrian surface sampled on a parameter grid; node positions are
/// kept as five coordinate grids so the patch can be evaluated between nodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LegendrianPatch {
    pub coords: [GridFunction; 5],
    pub start: Point5,
}

impl LegendrianPatch {
    pub fn new(coords: [GridFunction; 5], start: Point5) -> Self {
        LegendrianPatch { coords, start }
    }

    /// Lift of L with t-values, in the same coordinates.
    pub fn from_lift(l: &LagrangianGraph, t: &GridFunction, start: Point5) -> Self {
        let spec = l.spec;
        let mut coords: [GridFunction; 5] = std::array::from_fn(|_| GridFunction::zeros(spec));
        for (i, j) in spec.nodes() {
            let p = l.point(i, j);
            for k in 0..4 {
                coords[k].set(i, j, p[k]);
            }
            coords[4].set(i, j, t.get(i, j));
        }
        LegendrianPatch { coords, start }
    }

    pub fn map_points(&self, f: impl Fn(&Point5) -> Point5) -> Self {
        let spec = self.spec();
        let mut coords: [GridFunction; 5] = std::array::from_fn(|_| GridFunction::zeros(spec));
        for (i, j) in spec.nodes() {
            let q = f(&self.point(i, j)).to_vec();
            for k in 0..5 {
                coords[k].set(i, j, q[k]);
            }
        }
        LegendrianPatch { coords, start: f(&self.start) }
    }

    pub fn spec(&self) -> GridSpec {
        self.coords[0].spec
    }

    pub fn point(&self, i: usize, j: usize) -> Point5 {
        Point5::new(
            self.coords[0].get(i, j),
            self.coords[1].get(i, j),
            self.coords[2].get(i, j),
            self.coords[3].get(i, j),
            self.coords[4].get(i, j),
        )
    }

    pub fn center_point(&self) -> Point5 {
        let c = self.spec().center();
        self.point(c, c)
    }

    /// Difference-quotient tangents (second order, one-sided at the rim).
    pub fn tangents(&self, i: usize, j: usize) -> [Vec5; 2] {
        let a = Vec5::from_fn(|k, _| self.coords[k].d_axis(i, j, 0));
        let b = Vec5::from_fn(|k, _| self.coords[k].d_axis(i, j, 1));
        [a, b]
    }

    /// Point and parameter derivatives at (u, v) by bicubic interpolation.
    pub fn eval(&self, u: f64, v: f64) -> Option<(Point5, Vec5, Vec5)> {
        let mut p = Vec5::zeros();
        let mut du = Vec5::zeros();
        let mut dv = Vec5::zeros();
        for k in 0..5 {
            let (a, b, c) = self.coords[k].interp(u, v)?;
            p[k] = a;
            du[k] = b;
            dv[k] = c;
        }
        Some((Point5::from_vec(&p), du, dv))
    }

    pub fn shifted_t(&self, dt: f64) -> Self {
        let mut out = self.clone();
        out.coords[4] = out.coords[4].map(|t| t + dt);
        out.start.t += dt;
        out
    }

    pub fn to_csv(&self) -> String {
        let spec = self.spec();
        let mut out = String::from("i,j,u,v,x1,y1,x2,y2,t\n");
        for (i, j) in spec.nodes() {
            let (u, v) = spec.xy(i, j);
            let p = self.point(i, j);
            out.push_str(&format!(
                "{i},{j},{u:.12e},{v:.12e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
                p.x1, p.y1, p.x2, p.y2, p.t
            ));
        }
        out
    }
}

pub fn legendrian_residual(patch: &LegendrianPatch, params: &ContactParams) -> f64 {
    let spec = patch.spec();
    let mut worst = 0.0f64;
    for (i, j) in spec.nodes() {
        let p = patch.point(i, j);
        for tv in patch.tangents(i, j) {
            worst = worst.max(alpha_eval(&p, &tv, params).abs());
        }
    }
    worst
}

pub fn tangent_plane(patch: &LegendrianPatch, node: (usize, usize), acs: &ACSField) -> Result<PlaneChart> {
    let p = patch.point(node.0, node.1);
    let [a, b] = patch.tangents(node.0, node.1);
    let j = acs.j_matrix(&p)?;
    PlaneChart::from_plane(&j.0, &crate::contact::project(&a), &crate::contact::project(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn quad(n: usize) -> GridFunction {
        GridFunction::from_fn(GridSpec::unit(n).unwrap(), |x, y| 0.5 * (x * x + y * y))
    }

    #[test]
    fn graph_examples() {
        let f = quad(17);
        let l = lagrangian_graph(&f);
        for (i, j) in f.spec.nodes() {
            let (x, y) = f.spec.xy(i, j);
            assert!((l.point(i, j) - HVec::new(x, x, -y, y)).norm() < 1e-12);
        }
        let zero = GridFunction::zeros(GridSpec::unit(17).unwrap());
        let l0 = lagrangian_graph(&zero);
        assert!(l0.points.iter().all(|p| p[1] == 0.0 && p[2] == 0.0));
    }

    #[test]
    fn lift_examples() {
        let params = ContactParams::default();
        let f = quad(33);
        let l = lagrangian_graph(&f);
        let t = legendrian_lift(&l, &Point5::ORIGIN, &params).unwrap();
        let h = f.h();
        for (i, j) in f.spec.nodes() {
            let (x, y) = f.spec.xy(i, j);
            assert!((t.get(i, j) - 0.5 * (x * x - y * y)).abs() <= 10.0 * h * h);
        }
        let g = GridFunction::from_fn(GridSpec::unit(33).unwrap(), |x, y| x * y);
        let t = legendrian_lift(&lagrangian_graph(&g), &Point5::ORIGIN, &params).unwrap();
        assert!(t.sup() < 1e-13);
    }

    #[test]
    fn start_must_be_over_center() {
        let l = lagrangian_graph(&quad(17));
        let p = Point5::new(0.1, 0.0, 0.0, 0.0, 0.0);
        assert!(legendrian_lift(&l, &p, &ContactParams::default()).is_err());
    }

    #[test]
    fn non_lagrangian_rejected() {
        let spec = GridSpec::unit(17).unwrap();
        let mut l = lagrangian_graph(&GridFunction::zeros(spec));
        // (x1, y2, 0, y2): d(y1 dx1) = dy2 ^ dx1 != 0
        for (i, j) in spec.nodes() {
            let (x, y) = spec.xy(i, j);
            l.points[spec.idx(i, j)] = HVec::new(x, y, 0.0, y);
        }
        let e = legendrian_lift(&l, &Point5::ORIGIN, &ContactParams::default());
        assert!(matches!(e, Err(Error::NotLagrangian { .. })));
    }

    #[test]
    fn loops_close() {
        let params = ContactParams::new(0.7).unwrap();
        let f = GridFunction::from_fn(GridSpec::unit(33).unwrap(), |x, y| 0.3 * (x + 0.5 * y).sin() * y);
        let l = lagrangian_graph(&f);
        let mut rng = sampling::rng(9);
        let h = f.h();
        for lp in random_loops(&f.spec, 50, &mut rng) {
            assert!(loop_residual(&l, &params, &lp) <= 10.0 * h * h);
        }
    }

    #[test]
    fn residual_and_tangent_plane() {
        let params = ContactParams::default();
        let f = quad(33);
        let l = lagrangian_graph(&f);
        let t = legendrian_lift(&l, &Point5::ORIGIN, &params).unwrap();
        let patch = LegendrianPatch::from_lift(&l, &t, Point5::ORIGIN);
        let h = f.h();
        let res = legendrian_residual(&patch, &params);
        assert!(res <= 10.0 * h * h, "{res}");
        let shifted = patch.shifted_t(0.37);
        assert!((legendrian_residual(&shifted, &params) - res).abs() < 1e-12);

        let zero = GridFunction::zeros(GridSpec::unit(17).unwrap());
        let l0 = lagrangian_graph(&zero);
        let t0 = legendrian_lift(&l0, &Point5::ORIGIN, &params).unwrap();
        let flat = LegendrianPatch::from_lift(&l0, &t0, Point5::ORIGIN);
        assert_eq!(legendrian_residual(&flat, &params), 0.0);
        let acs = ACSField::standard();
        for (i, j) in zero.spec.nodes() {
            let pc = tangent_plane(&flat, (i, j), &acs).unwrap();
            assert!(pc.w.norm() < 1e-14);
        }
    }
}
