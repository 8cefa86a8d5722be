//! Derivatives of eigenfunctions along Killing fields.

use super::recovery::recover_gradient_with;
use super::check_len;
use crate::fem::EigenPair;
use crate::killing::KillingField;
use crate::mesh::TriangleMesh;
use crate::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct DerivativeField {
    pub field: KillingField,
    /// `Xu` at every node
    pub values: Vec<f64>,
    pub interior_min: f64,
    pub interior_argmin: usize,
    pub interior_max: f64,
    pub max_abs: f64,
    interior: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    Monotone(i8),
    NotCertified { witness: usize },
}

impl Certification {
    pub fn is_monotone(&self) -> bool {
        matches!(self, Certification::Monotone(_))
    }
}

pub fn killing_derivative(eig: &EigenPair, x: &KillingField, m: &TriangleMesh) -> Result<DerivativeField> {
    let grad = recover_gradient_with(&eig.vector, m, m.triangle.edge_bc)?;
    killing_derivative_with(&grad, x, m)
}

/// `Xu = du(X)`, from recovered gradients in Poincaré chart components.
pub fn killing_derivative_with(grad: &[[f64; 2]], x: &KillingField, m: &TriangleMesh) -> Result<DerivativeField> {
    if grad.len() != m.n_nodes() {
        check_len(m, &vec![0.0; grad.len()])?;
    }
    let mut values = Vec::with_capacity(m.n_nodes());
    for (i, g) in grad.iter().enumerate() {
        let v = x.evaluate(&m.point(i))?;
        values.push(g[0] * v[0] + g[1] * v[1]);
    }
    let interior: Vec<bool> = (0..m.n_nodes()).map(|i| !m.is_boundary(i)).collect();
    let mut interior_min = f64::INFINITY;
    let mut interior_max = f64::NEG_INFINITY;
    let mut interior_argmin = 0;
    for (i, &v) in values.iter().enumerate() {
        if !interior[i] {
            continue;
        }
        if v < interior_min {
            interior_min = v;
            interior_argmin = i;
        }
        interior_max = interior_max.max(v);
    }
    let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(DerivativeField {
        field: *x,
        values,
        interior_min,
        interior_argmin,
        interior_max,
        max_abs,
        interior,
    })
}

/// Positive (or negative) monotonicity over the interior nodes: the
/// minimum exceeds `-margin·max|Xu|` and at least 99% of nodes are strictly
/// positive. The positive sign is tried first.
pub fn certify_monotone(d: &DerivativeField, margin: f64) -> Certification {
    let vals: Vec<f64> = d.values.iter().zip(&d.interior).filter(|(_, &i)| i).map(|(&v, _)| v).collect();
    if d.max_abs == 0.0 || vals.is_empty() {
        return Certification::NotCertified {
            witness: d.interior_argmin,
        };
    }
    for sign in [1i8, -1] {
        let s = f64::from(sign);
        let min = vals.iter().map(|v| s * v).fold(f64::INFINITY, f64::min);
        let positive = vals.iter().filter(|&&v| s * v > 0.0).count();
        if min > -margin * d.max_abs && positive as f64 >= 0.99 * vals.len() as f64 {
            return Certification::Monotone(sign);
        }
    }
    Certification::NotCertified {
        witness: d.interior_argmin,
    }
}
