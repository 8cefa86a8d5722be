//! Sparse LDLᵀ factorization (up-looking, elimination-tree based) with a
//! coordinate nested-dissection fill-reducing ordering.

use super::sparse::Csr;
use crate::{Error, Result};

const NONE: usize = usize::MAX;
const LEAF: usize = 48;

/// Fill-reducing ordering from node coordinates: recursive median bisection
/// along the wider axis, the separator ordered last. Returns `perm` with
/// `perm[new] = old`.
pub fn nested_dissection(a: &Csr, coords: &[[f64; 2]]) -> Vec<usize> {
    assert_eq!(a.n, coords.len());
    let mut order = Vec::with_capacity(a.n);
    let mut side = vec![0u8; a.n];
    let mut stack: Vec<(Vec<usize>, bool)> = vec![((0..a.n).collect(), false)];
    // post-order emulation: a `true` entry is a separator ready to emit
    while let Some((set, emit)) = stack.pop() {
        if emit || set.len() <= LEAF {
            order.extend_from_slice(&set);
            continue;
        }
        let (lo, hi) = set.iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), &i| {
            let p = coords[i];
            ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
        });
        let ax = usize::from(hi[1] - lo[1] > hi[0] - lo[0]);
        let mut sorted = set.clone();
        sorted.sort_by(|&i, &j| coords[i][ax].total_cmp(&coords[j][ax]).then(i.cmp(&j)));
        let half = sorted.len() / 2;
        for &i in &sorted[..half] {
            side[i] = 1;
        }
        for &i in &sorted[half..] {
            side[i] = 2;
        }
        let (mut left, mut right, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &i in &sorted[..half] {
            left.push(i);
        }
        for &i in &sorted[half..] {
            if a.row(i).0.iter().any(|&j| side[j] == 1) {
                sep.push(i);
            } else {
                right.push(i);
            }
        }
        for &i in &set {
            side[i] = 0;
        }
        sep.sort_unstable();
        if left.is_empty() || right.is_empty() {
            order.extend_from_slice(&sorted);
            continue;
        }
        stack.push((sep, true));
        stack.push((right, false));
        stack.push((left, false));
    }
    order
}

#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    /// Factor `P A Pᵀ = L D Lᵀ` for symmetric `a` given `perm[new] = old`.
    pub fn factor(a: &Csr, perm: Vec<usize>) -> Result<Ldl> {
        let n = a.n;
        let mut pinv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        // rows of the permuted matrix restricted to columns ≤ row
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (knew, row) in rows.iter_mut().enumerate() {
            let (c, v) = a.row(perm[knew]);
            for (&j, &x) in c.iter().zip(v) {
                let jn = pinv[j];
                if jn <= knew {
                    row.push((jn, x));
                }
            }
        }
        // symbolic
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &(i0, _) in &rows[k] {
                let mut i = i0;
                if i == k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let total = lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![0.0; total];
        let mut d = vec![0.0; n];
        // numeric
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        flag.iter_mut().for_each(|f| *f = NONE);
        lnz.iter_mut().for_each(|l| *l = 0);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for &(i0, x) in &rows[k] {
                y[i0] += x;
                let mut len = 0;
                let mut i = i0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            while top < n {
                let i = pattern[top];
                top += 1;
                let yi = y[i];
                y[i] = 0.0;
                let p2 = lp[i] + lnz[i];
                for p in lp[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[p2] = k;
                lx[p2] = l_ki;
                lnz[i] += 1;
            }
            if d[k] == 0.0 || !d[k].is_finite() {
                return Err(Error::Assembly(format!("zero pivot at row {k} of the factorization")));
            }
        }
        Ok(Ldl {
            n,
            perm,
            lp,
            li,
            lx,
            d,
        })
    }

    /// Number of stored off-diagonal factor entries.
    pub fn fill(&self) -> usize {
        self.lp[self.n]
    }

    /// Number of negative pivots (the inertia's negative count).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj /= dj;
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_laplacian(m: usize, shift: f64) -> (Csr, Vec<[f64; 2]>) {
        let n = m * m;
        let mut a = vec![vec![0.0; n]; n];
        let mut coords = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                coords.push([i as f64, j as f64]);
                a[k][k] = 4.0 + shift;
                if i > 0 {
                    a[k][k - m] = -1.0;
                }
                if i + 1 < m {
                    a[k][k + m] = -1.0;
                }
                if j > 0 {
                    a[k][k - 1] = -1.0;
                }
                if j + 1 < m {
                    a[k][k + 1] = -1.0;
                }
            }
        }
        (Csr::from_dense(&a), coords)
    }

    #[test]
    fn solves_grid_system() {
        let (a, coords) = grid_laplacian(20, 0.1);
        let perm = nested_dissection(&a, &coords);
        let mut seen = perm.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..400).collect::<Vec<_>>());
        let f = Ldl::factor(&a, perm).unwrap();
        let natural = Ldl::factor(&a, (0..400).collect()).unwrap();
        assert!(f.fill() < natural.fill());
        let x0: Vec<f64> = (0..400).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let b = a.matvec(&x0);
        let x = f.solve(&b);
        let err = x.iter().zip(&x0).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        assert_eq!(f.negative_pivots(), 0);
    }

    #[test]
    fn indefinite_inertia() {
        // eigenvalues of the shifted grid operator below zero are counted by negative pivots
        let (a, coords) = grid_laplacian(6, -1.0);
        let f = Ldl::factor(&a, nested_dissection(&a, &coords)).unwrap();
        let dense = nalgebra::DMatrix::from_fn(36, 36, |i, j| a.get(i, j));
        let neg = dense.symmetric_eigen().eigenvalues.iter().filter(|&&x| x < 0.0).count();
        assert_eq!(f.negative_pivots(), neg);
    }
}
