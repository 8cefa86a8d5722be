//! Compressed sparse row matrices with full symmetric storage.

use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Zero matrix whose pattern couples every pair of nodes sharing an element.
    pub fn from_elements(n: usize, elements: &[[usize; 3]]) -> Self {
        let mut adj: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for e in elements {
            for &a in e {
                for &b in e {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            indices.extend_from_slice(row);
            indptr.push(indices.len());
        }
        let nnz = indices.len();
        Csr {
            n,
            indptr,
            indices,
            data: vec![0.0; nnz],
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let n = a.len();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for row in a {
            for (j, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    indices.push(j);
                    data.push(x);
                }
            }
            indptr.push(indices.len());
        }
        Csr {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.indptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `x` at `(i, j)`; the entry must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, x: f64) {
        let k = self.position(i, j).expect("entry outside the sparsity pattern");
        self.data[k] += x;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(4096).enumerate().for_each(|(i, yi)| {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        });
    }

    /// `xᵀ A x`
    pub fn quad(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Principal submatrix on `keep` (ascending original indices).
    pub fn submatrix(&self, keep: &[usize]) -> Csr {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for &old in keep {
            let (c, v) = self.row(old);
            for (&j, &a) in c.iter().zip(v) {
                if map[j] != usize::MAX {
                    indices.push(map[j]);
                    data.push(a);
                }
            }
            indptr.push(indices.len());
        }
        Csr {
            n: keep.len(),
            indptr,
            indices,
            data,
        }
    }

    /// `self + s·other` on a shared pattern.
    pub fn axpy_same_pattern(&self, s: f64, other: &Csr) -> Csr {
        assert_eq!(self.indices, other.indices);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                row[j] = x;
            }
        }
        a
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                m = m.max((x - self.get(j, i)).abs());
            }
        }
        m
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_and_products() {
        let mut a = Csr::from_elements(4, &[[0, 1, 2], [1, 3, 2]]);
        assert_eq!(a.nnz(), 4 + 2 * 5);
        assert_eq!(a.get(0, 3), 0.0);
        a.add(0, 1, 2.0);
        a.add(1, 0, 2.0);
        a.add(3, 3, 1.0);
        assert_eq!(a.matvec(&[1.0, 1.0, 0.0, 2.0]), vec![2.0, 2.0, 0.0, 2.0]);
        assert_eq!(a.max_asymmetry(), 0.0);
        let s = a.submatrix(&[0, 1]);
        assert_eq!(s.to_dense(), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert_eq!(Csr::from_dense(&a.to_dense()).quad(&[1.0, 1.0, 1.0, 1.0]), 5.0);
    }
}
