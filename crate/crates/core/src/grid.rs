//! Scalar functions on a uniform grid over [-R, R]^2 masked to the closed disk of radius R.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub radius: f64,
}

/// Nodes closer than this fraction of h to the circle count as boundary nodes.
const BOUNDARY_SNAP: f64 = 1e-9;

impl GridSpec {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if n < 17 || n % 2 == 0 {
            return Err(Error::InvalidInput(format!("grid size n = {n} must be odd and >= 17")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("grid radius {radius} must be positive")));
        }
        Ok(GridSpec { n, radius })
    }

    pub fn unit(n: usize) -> Result<Self> {
        GridSpec::new(n, 1.0)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.radius / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.radius + i as f64 * self.h()
    }

    pub fn xy(&self, i: usize, j: usize) -> (f64, f64) {
        (self.coord(i), self.coord(j))
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn center(&self) -> usize {
        self.n / 2
    }

    fn in_closed_disk(&self, i: isize, j: isize) -> bool {
        if i < 0 || j < 0 || i >= self.n as isize || j >= self.n as isize {
            return false;
        }
        let (x, y) = self.xy(i as usize, j as usize);
        (x * x + y * y).sqrt() <= self.radius * (1.0 + 1e-12)
    }

    /// Mask: nodes of the closed disk that have a neighbor along both axes
    /// (this drops the isolated extreme points of the circle).
    pub fn in_disk(&self, i: isize, j: isize) -> bool {
        self.in_closed_disk(i, j)
            && (self.in_closed_disk(i - 1, j) || self.in_closed_disk(i + 1, j))
            && (self.in_closed_disk(i, j - 1) || self.in_closed_disk(i, j + 1))
    }

    /// Strictly inside the disk, away from the circle.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        let (x, y) = self.xy(i, j);
        self.radius - (x * x + y * y).sqrt() > BOUNDARY_SNAP * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |j| (0..self.n).map(move |i| (i, j))).filter(move |&(i, j)| self.in_disk(i as isize, j as isize))
    }

    /// Locate the grid cell containing (x, y): fractional indices.
    pub fn frac_index(&self, x: f64, y: f64) -> (f64, f64) {
        ((x + self.radius) / self.h(), (y + self.radius) / self.h())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

/// First and second derivatives at a node: (f1, f2, f11, f12, f22).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Derivs {
    pub f1: f64,
    pub f2: f64,
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
}

impl GridFunction {
    pub fn zeros(spec: GridSpec) -> Self {
        GridFunction { spec, values: vec![0.0; spec.n * spec.n] }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = GridFunction::zeros(spec);
        for (i, j) in spec.nodes().collect::<Vec<_>>() {
            let (x, y) = spec.xy(i, j);
            g.values[spec.idx(i, j)] = f(x, y);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn h(&self) -> f64 {
        self.spec.h()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.spec.idx(i, j);
        self.values[k] = v;
    }

    fn at(&self, i: isize, j: isize) -> Option<f64> {
        if self.spec.in_disk(i, j) {
            Some(self.get(i as usize, j as usize))
        } else {
            None
        }
    }

    /// sup norm over the mask.
    pub fn sup(&self) -> f64 {
        self.spec.nodes().map(|(i, j)| self.get(i, j).abs()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        GridFunction { spec: self.spec, values }
    }

    pub fn scale(&self, s: f64) -> GridFunction {
        GridFunction { spec: self.spec, values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { spec: self.spec, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// Second-order first derivative along an axis (0: first coordinate),
    /// central where possible, one-sided at the mask boundary.
    pub fn d_axis(&self, i: usize, j: usize, axis: usize) -> f64 {
        let h = self.h();
        let step = |k: isize| -> (isize, isize) {
            if axis == 0 {
                (i as isize + k, j as isize)
            } else {
                (i as isize, j as isize + k)
            }
        };
        let val = |k: isize| {
            let (a, b) = step(k);
            self.at(a, b)
        };
        let u0 = self.get(i, j);
        match (val(-1), val(1)) {
            (Some(m), Some(p)) => (p - m) / (2.0 * h),
            (None, Some(p)) => match val(2) {
                Some(p2) => (-3.0 * u0 + 4.0 * p - p2) / (2.0 * h),
                None => (p - u0) / h,
            },
            (Some(m), None) => match val(-2) {
                Some(m2) => (3.0 * u0 - 4.0 * m + m2) / (2.0 * h),
                None => (u0 - m) / h,
            },
            (None, None) => 0.0,
        }
    }

    pub fn d2_axis(&self, i: usize, j: usize, axis: usize) -> f64 {
        let h = self.h();
        let val = |k: isize| {
            if axis == 0 {
                self.at(i as isize + k, j as isize)
            } else {
                self.at(i as isize, j as isize + k)
            }
        };
        let u0 = self.get(i, j);
        match (val(-1), val(1)) {
            (Some(m), Some(p)) => (p - 2.0 * u0 + m) / (h * h),
            (None, Some(p)) => match (val(2), val(3)) {
                (Some(p2), Some(p3)) => (2.0 * u0 - 5.0 * p + 4.0 * p2 - p3) / (h * h),
                (Some(p2), None) => (u0 - 2.0 * p + p2) / (h * h),
                _ => 0.0,
            },
            (Some(m), None) => match (val(-2), val(-3)) {
                (Some(m2), Some(m3)) => (2.0 * u0 - 5.0 * m + 4.0 * m2 - m3) / (h * h),
                (Some(m2), None) => (u0 - 2.0 * m + m2) / (h * h),
                _ => 0.0,
            },
            (None, None) => 0.0,
        }
    }

    /// Mixed derivative: the second-axis derivative of the first-axis derivative.
    pub fn d12(&self, i: usize, j: usize) -> f64 {
        let h = self.h();
        let ok = |k: isize| self.spec.in_disk(i as isize, j as isize + k);
        let d1 = |k: isize| self.d_axis(i, (j as isize + k) as usize, 0);
        match (ok(-1), ok(1)) {
            (true, true) => (d1(1) - d1(-1)) / (2.0 * h),
            (false, true) => {
                if ok(2) {
                    (-3.0 * d1(0) + 4.0 * d1(1) - d1(2)) / (2.0 * h)
                } else {
                    (d1(1) - d1(0)) / h
                }
            }
            (true, false) => {
                if ok(-2) {
                    (3.0 * d1(0) - 4.0 * d1(-1) + d1(-2)) / (2.0 * h)
                } else {
                    (d1(0) - d1(-1)) / h
                }
            }
            (false, false) => 0.0,
        }
    }

    pub fn derivs(&self, i: usize, j: usize) -> Derivs {
        Derivs {
            f1: self.d_axis(i, j, 0),
            f2: self.d_axis(i, j, 1),
            f11: self.d2_axis(i, j, 0),
            f12: self.d12(i, j),
            f22: self.d2_axis(i, j, 1),
        }
    }

    /// Fourth-order central derivatives; None unless the full 5x5 block is in the disk.
    pub fn derivs4(&self, i: usize, j: usize) -> Option<Derivs> {
        let (ii, jj) = (i as isize, j as isize);
        for a in -2..=2 {
            for b in -2..=2 {
                if !self.spec.in_disk(ii + a, jj + b) {
                    return None;
                }
            }
        }
        let h = self.h();
        let u = |a: isize, b: isize| self.get((ii + a) as usize, (jj + b) as usize);
        let c1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let c2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        let mut d = Derivs::default();
        for k in 0..5 {
            let o = k as isize - 2;
            d.f1 += c1[k] * u(o, 0) / h;
            d.f2 += c1[k] * u(0, o) / h;
            d.f11 += c2[k] * u(o, 0) / (h * h);
            d.f22 += c2[k] * u(0, o) / (h * h);
            for l in 0..5 {
                d.f12 += c1[k] * c1[l] * u(o, l as isize - 2) / (h * h);
            }
        }
        Some(d)
    }

    /// Sup of |f| + |Df| + |D^2 f| over the mask (discrete C^2 surrogate).
    pub fn c2_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, j) in self.spec.nodes() {
            let d = self.derivs(i, j);
            let v = self.get(i, j).abs()
                + (d.f1 * d.f1 + d.f2 * d.f2).sqrt()
                + (d.f11 * d.f11 + 2.0 * d.f12 * d.f12 + d.f22 * d.f22).sqrt();
            best = best.max(v);
        }
        best
    }

    /// Local bicubic (4x4 Lagrange) interpolation with first derivatives.
    pub fn interp(&self, x: f64, y: f64) -> Option<(f64, f64, f64)> {
        let (fx, fy) = self.spec.frac_index(x, y);
        let n = self.n() as isize;
        let pick = |f: f64| -> isize { (f.floor() as isize - 1).clamp(0, n - 4) };
        let (mut i0, mut j0) = (pick(fx), pick(fy));
        // shift the stencil toward the center if part of it leaves the disk
        let c = self.spec.center() as isize;
        for _ in 0..4 {
            let ok = (0..4).all(|a| (0..4).all(|b| self.spec.in_disk(i0 + a, j0 + b)));
            if ok {
                let h = self.h();
                let (wx, dwx) = lagrange4(fx - i0 as f64);
                let (wy, dwy) = lagrange4(fy - j0 as f64);
                let (mut v, mut vx, mut vy) = (0.0, 0.0, 0.0);
                for a in 0..4 {
                    for b in 0..4 {
                        let u = self.get((i0 + a) as usize, (j0 + b) as usize);
                        v += wx[a as usize] * wy[b as usize] * u;
                        vx += dwx[a as usize] * wy[b as usize] * u;
                        vy += wx[a as usize] * dwy[b as usize] * u;
                    }
                }
                return Some((v, vx / h, vy / h));
            }
            i0 += (c - 1 - i0).signum();
            j0 += (c - 1 - j0).signum();
            if (fx - i0 as f64) > 4.0 || (fy - j0 as f64) > 4.0 || fx < i0 as f64 - 1.0 || fy < j0 as f64 - 1.0 {
                return None;
            }
        }
        None
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,x,y,value\n");
        for (i, j) in self.spec.nodes() {
            let (x, y) = self.spec.xy(i, j);
            out.push_str(&format!("{i},{j},{x:.12e},{y:.12e},{:.15e}\n", self.get(i, j)));
        }
        out
    }
}

/// Cubic Lagrange weights on nodes 0..3 at local coordinate s, with derivatives.
fn lagrange4(s: f64) -> ([f64; 4], [f64; 4]) {
    let nodes = [0.0, 1.0, 2.0, 3.0];
    let mut w = [0.0; 4];
    let mut dw = [0.0; 4];
    for k in 0..4 {
        let mut denom = 1.0;
        for m in 0..4 {
            if m != k {
                denom *= nodes[k] - nodes[m];
            }
        }
        let mut prod = 1.0;
        for m in 0..4 {
            if m != k {
                prod *= s - nodes[m];
            }
        }
        w[k] = prod / denom;
        let mut d = 0.0;
        for skip in 0..4 {
            if skip == k {
                continue;
            }
            let mut p = 1.0;
            for m in 0..4 {
                if m != k && m != skip {
                    p *= s - nodes[m];
                }
            }
            d += p;
        }
        dw[k] = d / denom;
    }
    (w, dw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratics_are_differentiated_exactly() {
        let spec = GridSpec::unit(17).unwrap();
        let f = GridFunction::from_fn(spec, |x, y| 0.5 * x * x + 0.3 * x * y - 0.7 * y * y + x - 2.0 * y);
        for (i, j) in spec.nodes() {
            let (x, y) = spec.xy(i, j);
            let d = f.derivs(i, j);
            assert!((d.f1 - (x + 0.3 * y + 1.0)).abs() < 1e-10);
            assert!((d.f2 - (0.3 * x - 1.4 * y - 2.0)).abs() < 1e-10);
            assert!((d.f11 - 1.0).abs() < 1e-8, "{i} {j} {}", d.f11);
            assert!((d.f12 - 0.3).abs() < 1e-8);
            assert!((d.f22 + 1.4).abs() < 1e-8);
        }
    }

    #[test]
    fn fourth_order_derivatives_converge() {
        let f = |x: f64, y: f64| (1.3 * x + 0.4 * y).sin();
        let mut errs = Vec::new();
        for n in [33, 65] {
            let spec = GridSpec::unit(n).unwrap();
            let g = GridFunction::from_fn(spec, f);
            let c = spec.center();
            let d = g.derivs4(c + 2, c + 1).unwrap();
            let (x, y) = spec.xy(c + 2, c + 1);
            let ex = -1.3 * 0.4 * (1.3 * x + 0.4 * y).sin();
            errs.push((d.f12 - ex).abs());
        }
        assert!(errs[1] < errs[0] / 10.0, "{errs:?}");
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let spec = GridSpec::new(33, 1.2).unwrap();
        let f = |x: f64, y: f64| x * x * x - 2.0 * x * y * y + y + 0.25;
        let g = GridFunction::from_fn(spec, f);
        for (x, y) in [(0.013, -0.31), (0.7, 0.5), (-0.95, 0.1), (0.0, 0.0)] {
            let (v, vx, vy) = g.interp(x, y).unwrap();
            assert!((v - f(x, y)).abs() < 1e-12);
            assert!((vx - (3.0 * x * x - 2.0 * y * y)).abs() < 1e-10);
            assert!((vy - (-4.0 * x * y + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridSpec::unit(16).is_err());
        assert!(GridSpec::unit(15).is_err());
        assert!(GridSpec::unit(19).is_ok());
    }
}
