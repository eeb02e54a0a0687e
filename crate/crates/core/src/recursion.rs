//! The boundary-law map and its propagation towards the root.
//!
//! For a reduced field `h = (h_0, ..., h_{m-1})` (differences against the
//! last spin value) the map is
//!
//! ```text
//! F_i(h) = ln  sum_j theta^|i-j| r^[i=j] e^{h_j}  -  ln  sum_j theta^|m-j| r^[m=j] e^{h_j}
//! ```
//!
//! with both sums over `j = 0..=m` and `h_m = 0`. Each sum is evaluated as a
//! log-sum-exp so fields of magnitude ~700 stay finite.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree::FiniteTree;

/// Reduced field `h*` at one vertex: `m` finite log-ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ReducedField(Vec<f64>);

impl ReducedField {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite field {components:?}")));
        }
        Ok(Self(components))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Full `(m+1)`-vector with the last component fixed to 0.
    pub fn lifted(&self) -> Vec<f64> {
        let mut full = self.0.clone();
        full.push(0.0);
        full
    }
}

impl From<ReducedField> for Vec<f64> {
    fn from(f: ReducedField) -> Self {
        f.0
    }
}

/// Log of the pair weight `exp(-beta * bond_energy(i, j))`.
#[inline]
fn log_weight(i: usize, j: usize, ln_theta: f64, ln_r: f64) -> f64 {
    let d = i.abs_diff(j);
    d as f64 * ln_theta + if d == 0 { ln_r } else { 0.0 }
}

/// `ln sum_{j=0}^{m} w(row, j) e^{h_j}` with `h_m = 0`.
fn log_row(row: usize, h: &[f64], ln_theta: f64, ln_r: f64) -> f64 {
    let m = h.len();
    let term = |j: usize| log_weight(row, j, ln_theta, ln_r) + if j < m { h[j] } else { 0.0 };
    let max = (0..=m).map(term).fold(f64::NEG_INFINITY, f64::max);
    max + (0..=m).map(|j| (term(j) - max).exp()).sum::<f64>().ln()
}

/// The boundary-law map `F(h, m, theta, r)` for `m = h.len()`.
pub fn boundary_map(h: &[f64], theta: f64, r: f64) -> Vec<f64> {
    let (ln_theta, ln_r) = (theta.ln(), r.ln());
    let m = h.len();
    let denom = log_row(m, h, ln_theta, ln_r);
    (0..m).map(|i| log_row(i, h, ln_theta, ln_r) - denom).collect()
}

/// Closed form of `F` for three spin values, written out term by term.
pub fn boundary_map_m2(h: [f64; 2], theta: f64, r: f64) -> [f64; 2] {
    let (z0, z1) = (h[0].exp(), h[1].exp());
    let den = theta * theta * z0 + theta * z1 + r;
    [
        ((r * z0 + theta * z1 + theta * theta) / den).ln(),
        ((theta * z0 + r * z1 + theta) / den).ln(),
    ]
}

/// `F(h)` together with its Jacobian `dF_i/dh_j` (row-major, `m x m`).
pub fn boundary_map_with_jacobian(h: &[f64], theta: f64, r: f64) -> (Vec<f64>, Vec<f64>) {
    let (ln_theta, ln_r) = (theta.ln(), r.ln());
    let m = h.len();
    // Softmax weights of each row over j = 0..=m.
    let probs = |row: usize| -> (f64, Vec<f64>) {
        let lse = log_row(row, h, ln_theta, ln_r);
        let p = (0..m)
            .map(|j| (log_weight(row, j, ln_theta, ln_r) + h[j] - lse).exp())
            .collect();
        (lse, p)
    };
    let (den, p_den) = probs(m);
    let mut value = Vec::with_capacity(m);
    let mut jac = Vec::with_capacity(m * m);
    for i in 0..m {
        let (num, p_num) = probs(i);
        value.push(num - den);
        jac.extend((0..m).map(|j| p_num[j] - p_den[j]));
    }
    (value, jac)
}

/// Fields on the vertices of a finite tree, indexed by vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldAssignment {
    fields: Vec<Option<ReducedField>>,
}

impl FieldAssignment {
    pub fn get(&self, v: usize) -> Option<&ReducedField> {
        self.fields.get(v).and_then(Option::as_ref)
    }

    /// Fields on the sphere `W_j`, in vertex order.
    pub fn sphere(&self, tree: &FiniteTree, j: usize) -> Vec<ReducedField> {
        tree.sphere(j)
            .map(|v| self.fields[v].clone().expect("field missing on sphere"))
            .collect()
    }
}

/// Applies `h_x = sum_{y in S(x)} F(h_y)` from the boundary `W_n` inwards
/// down to level 1. The root is left without a field.
pub fn propagate(
    tree: &FiniteTree,
    boundary: &[ReducedField],
    theta: f64,
    r: f64,
) -> Result<FieldAssignment> {
    let n = tree.depth();
    if n < 1 {
        return Err(Error::InvalidParameter("propagation needs depth n >= 1".into()));
    }
    let outer = tree.sphere(n);
    if boundary.len() != outer.len() {
        return Err(Error::BoundaryLength { expected: outer.len(), got: boundary.len() });
    }
    let m = boundary[0].len();
    if m == 0 {
        return Err(Error::InvalidParameter("fields need at least one component".into()));
    }
    if let Some(bad) = boundary.iter().find(|f| f.len() != m) {
        return Err(Error::Dimension { expected: m, got: bad.len() });
    }

    let mut fields: Vec<Option<ReducedField>> = vec![None; tree.len()];
    for (v, f) in outer.zip(boundary) {
        fields[v] = Some(f.clone());
    }
    for level in (1..n).rev() {
        for x in tree.sphere(level) {
            let mut acc = vec![0.0; m];
            for &y in tree.children(x) {
                let hy = fields[y].as_ref().expect("children are filled first");
                for (a, fy) in acc.iter_mut().zip(boundary_map(hy.as_slice(), theta, r)) {
                    *a += fy;
                }
            }
            fields[x] = Some(ReducedField(acc));
        }
    }
    Ok(FieldAssignment { fields })
}
