//! Banded LU factorization with partial pivoting.
//!
//! Row i stores columns i - kl ..= i + kl + ku (the extra kl columns hold
//! fill-in created by row interchanges).

#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularMatrix {
    pub column: usize,
}

impl BandedLu {
    /// Factor the matrix given as sparse rows (column, value).
    pub fn factor(n: usize, kl: usize, ku: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self, SingularMatrix> {
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu { n, kl, ku, width, data: vec![0.0; n * width], piv: vec![0; n] };
        for (i, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                assert!(c + kl >= i && c <= i + ku, "entry ({i}, {c}) outside the band");
                let k = lu.pos(i, c);
                lu.data[k] += v;
            }
        }
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn pos(&self, i: usize, c: usize) -> usize {
        i * self.width + (c + self.kl - i)
    }

    fn eliminate(&mut self) -> Result<(), SingularMatrix> {
        let n = self.n;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.pos(k, k)].abs();
            for i in (k + 1)..=last_row {
                let v = self.data[self.pos(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(SingularMatrix { column: k });
            }
            self.piv[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.pos(k, c), self.pos(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.pos(k, k)];
            for i in (k + 1)..=last_row {
                let ik = self.pos(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == 0.0 {
                    continue;
                }
                let rk = self.pos(k, k);
                let ri = self.pos(i, k);
                for off in 1..=(last_col - k) {
                    self.data[ri + off] -= l * self.data[rk + off];
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in (k + 1)..=(k + self.kl).min(n - 1) {
                    b[i] -= self.data[self.pos(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let last = (k + self.kl + self.ku).min(n - 1);
            let mut s = b[k];
            for c in (k + 1)..=last {
                s -= self.data[self.pos(k, c)] * b[c];
            }
            b[k] = s / self.data[self.pos(k, k)];
        }
    }

    /// Solve A^T x = b.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let first = k.saturating_sub(self.kl + self.ku);
            let mut s = b[k];
            for c in first..k {
                s -= self.data[self.pos(c, k)] * b[c];
            }
            b[k] = s / self.data[self.pos(k, k)];
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in (k + 1)..=(k + self.kl).min(n - 1) {
                s -= self.data[self.pos(i, k)] * b[i];
            }
            b[k] = s;
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }
}
