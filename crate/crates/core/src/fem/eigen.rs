//! Shift-invert block subspace iteration with Rayleigh–Ritz and locking for
//! `K x = λ M x`, `K` symmetric semidefinite and `M` symmetric definite.

use super::ldl::Ldl;
use super::sparse::{dot, Csr};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) struct Settings {
    pub want: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

pub(crate) struct Outcome {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Ritz value just above the wanted ones
    pub next: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct Pencil<'a> {
    pub k: &'a Csr,
    pub m: &'a Csr,
    /// lumped mass, used for the residual norm
    pub lumped: &'a [f64],
    /// M-orthonormal vectors already removed from the search space
    pub deflate: &'a [Vec<f64>],
}

impl Pencil<'_> {
    pub fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let kx = self.k.matvec(x);
        let mx = self.m.matvec(x);
        kx.iter()
            .zip(&mx)
            .zip(self.lumped)
            .map(|((a, b), w)| (a - lambda * b).powi(2) / w)
            .sum::<f64>()
            .sqrt()
    }

    /// One classical Gram–Schmidt pass in the M inner product.
    fn project(&self, x: &mut [f64], basis: &[Vec<f64>]) {
        let mx = self.m.matvec(x);
        let coef: Vec<f64> = self.deflate.iter().chain(basis).map(|q| dot(q, &mx)).collect();
        for (q, c) in self.deflate.iter().chain(basis).zip(coef) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi -= c * qi;
            }
        }
    }

    /// M-orthonormalize `x` against `basis` (two passes); `None` if it collapses.
    fn orthonormalize(&self, mut x: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
        let before = dot(&self.m.matvec(&x), &x).sqrt();
        self.project(&mut x, basis);
        self.project(&mut x, basis);
        let nrm = dot(&self.m.matvec(&x), &x).sqrt();
        if !(nrm > 1e-10 * before) || nrm == 0.0 {
            return None;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
        Some(x)
    }
}

pub(crate) fn subspace_iteration(p: &Pencil, op: &Ldl, s: &Settings) -> Outcome {
    let n = p.k.n;
    let room = n.saturating_sub(p.deflate.len());
    let block = (s.want + s.want.max(6)).min(room);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let fresh = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen::<f64>() - 0.5).collect() };
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(block);
    while q.len() < block {
        let x = fresh(&mut rng);
        if let Some(x) = p.orthonormalize(x, &q) {
            q.push(x);
        }
    }
    let mut locked = 0usize;
    let mut values = vec![0.0; block];
    let mut residuals = vec![f64::INFINITY; block];
    let mut iterations = 0;
    loop {
        // Rayleigh–Ritz on span(q)
        let kq: Vec<Vec<f64>> = q.iter().map(|x| p.k.matvec(x)).collect();
        let mq: Vec<Vec<f64>> = q.iter().map(|x| p.m.matvec(x)).collect();
        let b = q.len();
        let hk = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&q[i], &kq[j]) + dot(&q[j], &kq[i])));
        let hm = DMatrix::from_fn(b, b, |i, j| 0.5 * (dot(&q[i], &mq[j]) + dot(&q[j], &mq[i])));
        let (theta, s_vecs) = generalized_small(hk, hm);
        let mut rotated: Vec<Vec<f64>> = Vec::with_capacity(b);
        for c in 0..b {
            let mut x = vec![0.0; n];
            for (r, qr) in q.iter().enumerate() {
                let w = s_vecs[(r, c)];
                if w != 0.0 {
                    x.iter_mut().zip(qr).for_each(|(xi, qi)| *xi += w * qi);
                }
            }
            rotated.push(x);
        }
        q = rotated;
        values = theta;
        for (i, r) in residuals.iter_mut().enumerate() {
            *r = if i < s.want { p.residual(&q[i], values[i]) } else { f64::INFINITY };
        }
        locked = (0..s.want)
            .take_while(|&i| residuals[i] <= s.tol * (1.0 + values[i].abs()))
            .count()
            .max(locked.min(s.want));
        // a locked prefix stays converged only if its residual holds
        locked = (0..locked)
            .take_while(|&i| residuals[i] <= s.tol * (1.0 + values[i].abs()))
            .count();
        if locked >= s.want || iterations >= s.max_iter {
            break;
        }
        iterations += 1;
        // power step on the unlocked columns
        let mut next: Vec<Vec<f64>> = q[..locked].to_vec();
        for x in &q[locked..] {
            let y = op.solve(&p.m.matvec(x));
            let y = p.orthonormalize(y, &next).or_else(|| p.orthonormalize(fresh(&mut rng), &next));
            if let Some(y) = y {
                next.push(y);
            }
        }
        q = next;
    }
    let want = s.want.min(q.len());
    Outcome {
        values: values[..want].to_vec(),
        vectors: q[..want].to_vec(),
        residuals: residuals[..want].to_vec(),
        next: values.get(want).copied().unwrap_or(f64::INFINITY),
        iterations,
        converged: locked >= s.want,
    }
}

/// Ascending eigenpairs of the small pencil `(a, b)`, `b` positive definite.
fn generalized_small(a: DMatrix<f64>, b: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let l = b.clone().cholesky().map(|c| c.l()).unwrap_or_else(|| DMatrix::identity(n, n));
    let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(n, n));
    let c = &linv * a * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, linv.transpose() * y)
}
