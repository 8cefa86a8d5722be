//! P1 finite elements for the Laplace–Beltrami operator in the Poincaré
//! chart, and the generalized eigensolver.
//!
//! The Dirichlet energy is conformally invariant in two dimensions, so the
//! stiffness matrix is the Euclidean one; curvature enters only through the
//! conformal weight of the mass matrix.

mod eigen;
mod ldl;
pub mod sparse;

use crate::geometry::{check_point, rho, Bc, ChartPoint, Curvature};
use crate::mesh::TriangleMesh;
use crate::quadrature::{Rule, SEVEN_POINT, THREE_POINT};
use crate::{Error, Result};
use eigen::{Outcome, Pencil, Settings};
pub use ldl::{nested_dissection, Ldl};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
pub use sparse::Csr;
use std::sync::Arc;

/// Above this value of `|ℓ|·R²` the mass matrix uses the 7-point rule.
const STRONG_VARIATION: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub stiffness: Csr,
    pub mass: Csr,
    /// sorted node indices carrying a Dirichlet constraint
    pub dirichlet_dofs: Vec<usize>,
    pub n_dofs: usize,
    pub kappa: Curvature,
    pub bc: [Bc; 3],
    pub mesh: Arc<TriangleMesh>,
}

impl DiscreteProblem {
    pub fn is_neumann(&self) -> bool {
        self.dirichlet_dofs.is_empty()
    }

    /// Unconstrained node indices, ascending.
    pub fn free_dofs(&self) -> Vec<usize> {
        let mut mark = vec![true; self.n_dofs];
        for &d in &self.dirichlet_dofs {
            mark[d] = false;
        }
        (0..self.n_dofs).filter(|&i| mark[i]).collect()
    }

    pub fn metric_area(&self) -> f64 {
        self.mass.data.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    /// nodal coefficients, zero on Dirichlet nodes
    pub vector: Vec<f64>,
    pub residual: f64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshInfo {
    pub n_nodes: usize,
    pub n_elements: usize,
    pub h: f64,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
    pub bc: [Bc; 3],
    pub kappa: f64,
    pub mesh: MeshInfo,
    pub shift: f64,
    pub iterations: usize,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn is_neumann(&self) -> bool {
        self.bc.iter().all(|&b| b == Bc::Neumann)
    }

    /// Second Neumann eigenpair, or the first mixed one.
    pub fn principal(&self) -> Option<&EigenPair> {
        self.pairs.get(usize::from(self.is_neumann()))
    }

    /// CSV with columns `index,value,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,value,residual\n");
        for p in &self.pairs {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", p.index, p.value, p.residual));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// overrides the default shift
    pub shift: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            k: 6,
            tol: 1e-9,
            max_iter: 500,
            shift: None,
        }
    }
}

pub fn assemble(m: &TriangleMesh, kappa: Curvature, bc: [Bc; 3]) -> Result<DiscreteProblem> {
    m.validate()?;
    for p in &m.nodes {
        check_point(kappa, &ChartPoint::poincare(p[0], p[1]))?;
    }
    let ell = kappa.ell();
    let local: Vec<([[f64; 3]; 3], [[f64; 3]; 3])> = m
        .elements
        .par_iter()
        .map(|e| element_matrices(e.map(|i| m.nodes[i]), ell))
        .collect::<Result<_>>()?;
    let n = m.n_nodes();
    let mut k = Csr::from_elements(n, &m.elements);
    let mut mass = k.clone();
    // fixed-order reduction: identical sums for any thread count
    for (e, (ke, me)) in m.elements.iter().zip(&local) {
        for a in 0..3 {
            for b in 0..3 {
                k.add(e[a], e[b], ke[a][b]);
                mass.add(e[a], e[b], me[a][b]);
            }
        }
    }
    let dmask: u8 = (0..3).filter(|&e| bc[e] == Bc::Dirichlet).fold(0, |acc, e| acc | (1 << e));
    let dirichlet_dofs = (0..n).filter(|&i| m.node_edges[i] & dmask != 0).collect();
    Ok(DiscreteProblem {
        stiffness: k,
        mass,
        dirichlet_dofs,
        n_dofs: n,
        kappa,
        bc,
        mesh: Arc::new(m.clone()),
    })
}

/// Assembles with the triangle's own curvature and boundary conditions.
pub fn assemble_mesh(m: &TriangleMesh) -> Result<DiscreteProblem> {
    assemble(m, m.kappa, m.triangle.edge_bc)
}

type Local = [[f64; 3]; 3];

fn element_matrices(p: [[f64; 2]; 3], ell: f64) -> Result<(Local, Local)> {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    if !(det > 0.0) {
        return Err(Error::Assembly(format!("singular element Jacobian (det = {det:e})")));
    }
    let area = 0.5 * det;
    let mut k = [[0.0; 3]; 3];
    let b = [0, 1, 2].map(|i| p[(i + 1) % 3][1] - p[(i + 2) % 3][1]);
    let c = [0, 1, 2].map(|i| p[(i + 2) % 3][0] - p[(i + 1) % 3][0]);
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    let r2max = p.iter().map(|q| q[0] * q[0] + q[1] * q[1]).fold(0.0, f64::max);
    let rule: &Rule = if ell.abs() * r2max > STRONG_VARIATION {
        &SEVEN_POINT
    } else {
        &THREE_POINT
    };
    let mut m = [[0.0; 3]; 3];
    for (l, w) in rule.points.iter().zip(rule.weights) {
        let x = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
        let y = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
        let wr = w * rho(ell, x * x + y * y) * area;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += wr * l[i] * l[j];
            }
        }
    }
    Ok((k, m))
}

/// Default shift: zero with constraints, minus half the area-based Weyl
/// estimate of the first nonzero Neumann eigenvalue otherwise.
pub fn default_shift(p: &DiscreteProblem) -> f64 {
    if p.is_neumann() {
        -0.5 * 4.0 * std::f64::consts::PI / p.metric_area()
    } else {
        0.0
    }
}

pub fn solve_smallest(p: &DiscreteProblem, k: usize, tol: f64) -> Result<Spectrum> {
    solve_with(
        p,
        &SolverOptions {
            k,
            tol,
            ..Default::default()
        },
    )
}

pub fn solve_with(p: &DiscreteProblem, opts: &SolverOptions) -> Result<Spectrum> {
    let free = p.free_dofs();
    let neumann = p.is_neumann();
    if opts.k == 0 || opts.k >= free.len() {
        return Err(Error::InsufficientPairs {
            have: free.len(),
            need: opts.k + 1,
        });
    }
    let kr = p.stiffness.submatrix(&free);
    let mr = p.mass.submatrix(&free);
    let lumped = mr.row_sums();
    let coords: Vec<[f64; 2]> = free.iter().map(|&i| p.mesh.nodes[i]).collect();
    let perm = nested_dissection(&kr, &coords);
    let sigma = opts.shift.unwrap_or_else(|| default_shift(p));
    let op = Ldl::factor(&kr.axpy_same_pattern(-sigma, &mr), perm.clone())?;
    let constant = if neumann {
        let total: f64 = mr.data.iter().sum();
        vec![vec![1.0 / total.sqrt(); free.len()]]
    } else {
        Vec::new()
    };
    let pencil = Pencil {
        k: &kr,
        m: &mr,
        lumped: &lumped,
        deflate: &constant,
    };
    let want = opts.k - usize::from(neumann);
    let mut extra = 0;
    let mut seed = 0x5eed;
    let out: Outcome = loop {
        let out = if want == 0 {
            Outcome {
                values: vec![],
                vectors: vec![],
                residuals: vec![],
                next: f64::INFINITY,
                iterations: 0,
                converged: true,
            }
        } else {
            eigen::subspace_iteration(
                &pencil,
                &op,
                &Settings {
                    want: want + extra,
                    tol: opts.tol,
                    max_iter: opts.max_iter,
                    seed,
                },
            )
        };
        if !out.converged || want == 0 {
            break out;
        }
        // Sylvester inertia: nothing may hide below the last computed value
        let last = *out.values.last().expect("non-empty");
        let tau = if out.next.is_finite() {
            last + 0.5 * (out.next - last)
        } else {
            last * (1.0 + 1e-6) + 1e-12
        };
        let below = Ldl::factor(&kr.axpy_same_pattern(-tau, &mr), perm.clone())
            .map(|f| f.negative_pivots())
            .unwrap_or(usize::MAX);
        let found = out.values.len() + usize::from(neumann);
        if below <= found || extra >= 2 * opts.k + 8 {
            if below > found {
                log::warn!("inertia check reports {below} eigenvalues below {tau}, {found} found");
            }
            break out;
        }
        log::debug!("inertia check: {below} below {tau} but {found} found, enlarging the block");
        extra += below - found;
        seed += 1;
    };
    let mut pairs = Vec::with_capacity(opts.k);
    if neumann {
        let v = constant[0].clone();
        let residual = pencil.residual(&v, 0.0);
        pairs.push(EigenPair {
            value: 0.0,
            vector: v,
            residual,
            index: 0,
        });
    }
    let take = want.min(out.values.len());
    let mut converged_prefix = true;
    for i in 0..take {
        if out.residuals[i] > opts.tol * (1.0 + out.values[i].abs()) {
            converged_prefix = false;
            if !out.converged {
                break;
            }
        }
        let mut v = out.vectors[i].clone();
        normalize_sign(&mut v);
        let index = pairs.len();
        pairs.push(EigenPair {
            value: out.values[i],
            vector: v,
            residual: out.residuals[i],
            index,
        });
    }
    // expand to full nodal vectors
    for pair in &mut pairs {
        let mut full = vec![0.0; p.n_dofs];
        for (&i, &x) in free.iter().zip(&pair.vector) {
            full[i] = x;
        }
        pair.vector = full;
    }
    let spectrum = Spectrum {
        pairs,
        bc: p.bc,
        kappa: p.kappa.value(),
        mesh: MeshInfo {
            n_nodes: p.mesh.n_nodes(),
            n_elements: p.mesh.elements.len(),
            h: p.mesh.h,
            level: p.mesh.level,
        },
        shift: sigma,
        iterations: out.iterations,
    };
    if !out.converged || !converged_prefix {
        return Err(Error::NoConvergence {
            max_iterations: opts.max_iter,
            partial: Box::new(spectrum),
        });
    }
    Ok(spectrum)
}

/// Largest-magnitude entry made positive; near-ties go to the lowest index.
pub fn normalize_sign(v: &mut [f64]) {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if big == 0.0 {
        return;
    }
    let i = v.iter().position(|x| x.abs() >= big * (1.0 - 1e-9)).expect("max exists");
    if v[i] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn rayleigh_quotient(p: &DiscreteProblem, v: &[f64]) -> Result<f64> {
    check_vector(p, v)?;
    let den = p.mass.quad(v);
    if !(den > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(p.stiffness.quad(v) / den)
}

/// Quotient of the Hermitian forms at `re + i·im`, computed from the real
/// and imaginary parts (the cross terms cancel for symmetric real matrices).
pub fn rayleigh_quotient_complex(p: &DiscreteProblem, re: &[f64], im: &[f64]) -> Result<f64> {
    check_vector(p, re)?;
    check_vector(p, im)?;
    let den = p.mass.quad(re) + p.mass.quad(im);
    if !(den > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok((p.stiffness.quad(re) + p.stiffness.quad(im)) / den)
}

fn check_vector(p: &DiscreteProblem, v: &[f64]) -> Result<()> {
    if v.len() != p.n_dofs {
        return Err(Error::ShapeMismatch(format!("vector of length {}, {} dofs", v.len(), p.n_dofs)));
    }
    if let Some(&d) = p.dirichlet_dofs.iter().find(|&&d| v[d] != 0.0) {
        return Err(Error::ShapeMismatch(format!("vector nonzero on Dirichlet node {d}")));
    }
    Ok(())
}

/// Relative gap above the principal eigenvalue.
pub fn eigen_gap(s: &Spectrum) -> Result<f64> {
    let (i, need) = if s.is_neumann() { (1, 3) } else { (0, 2) };
    if s.pairs.len() < need {
        return Err(Error::InsufficientPairs {
            have: s.pairs.len(),
            need,
        });
    }
    let a = s.pairs[i].value;
    Ok((s.pairs[i + 1].value - a) / a)
}

/// Two-level Richardson extrapolation for an error of order `h^order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    pub estimate: f64,
    /// estimated error of the fine value
    pub error: f64,
    pub order: f64,
}

pub fn richardson(coarse: f64, fine: f64, order: f64) -> Richardson {
    let f = 2f64.powf(order) - 1.0;
    Richardson {
        estimate: fine + (fine - coarse) / f,
        error: (fine - coarse).abs() / f,
        order,
    }
}

/// Observed order from three successive halvings.
pub fn observed_order(v: [f64; 3]) -> f64 {
    ((v[1] - v[0]).abs() / (v[2] - v[1]).abs()).log2()
}

/// Order assumed for graded meshes.
pub const GRADED_ORDER: f64 = 2.0;
