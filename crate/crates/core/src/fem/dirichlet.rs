use crate::error::{Error, Result};
use crate::mesh::LabeledMesh;

use super::CsrMatrix;

/// Set of Dirichlet nodes, applied by symmetric elimination: the rows and
/// columns of constrained nodes are zeroed, the diagonal set to one, and the
/// known values moved to the right-hand side.
#[derive(Debug, Clone)]
pub struct DirichletBc {
    nodes: Vec<usize>,
    mask: Vec<bool>,
}

impl DirichletBc {
    /// All nodes on the top and bottom faces.
    pub fn on_box_faces(mesh: &LabeledMesh) -> Self {
        let nodes = mesh.dirichlet_nodes();
        let mut mask = vec![false; mesh.num_nodes()];
        for &v in &nodes {
            mask[v] = true;
        }
        DirichletBc { nodes, mask }
    }

    /// A subset of the top and bottom face nodes.
    pub fn new(mesh: &LabeledMesh, nodes: &[usize]) -> Result<Self> {
        let mut mask = vec![false; mesh.num_nodes()];
        for &v in nodes {
            if v >= mesh.num_nodes() || !mesh.is_dirichlet_node(v) {
                return Err(Error::invalid(format!(
                    "node {v} is not on the Dirichlet boundary"
                )));
            }
            mask[v] = true;
        }
        let nodes = (0..mask.len()).filter(|&v| mask[v]).collect();
        Ok(DirichletBc { nodes, mask })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn contains(&self, node: usize) -> bool {
        self.mask[node]
    }

    /// Matrix with constrained rows and columns replaced by identity.
    pub fn eliminate_matrix(&self, a: &CsrMatrix) -> CsrMatrix {
        let mut out = a.clone();
        let (rp, ci) = (a.row_ptr().to_vec(), a.col_idx().to_vec());
        let vals = out.values_mut();
        for i in 0..a.dim() {
            for k in rp[i]..rp[i + 1] {
                let j = ci[k];
                if self.mask[i] || self.mask[j] {
                    vals[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        out
    }

    /// Right-hand side for the eliminated system, given the unmodified
    /// matrix and nodal `values` (indexed by node, read only at constrained
    /// nodes).
    pub fn eliminate_rhs(&self, a: &CsrMatrix, rhs: &[f64], values: &[f64]) -> Vec<f64> {
        let mut b = rhs.to_vec();
        for i in 0..a.dim() {
            if self.mask[i] {
                b[i] = values[i];
                continue;
            }
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if self.mask[j] {
                    b[i] -= v * values[j];
                }
            }
        }
        b
    }

    /// Overwrites constrained entries of a solution with their exact values.
    pub fn impose(&self, x: &mut [f64], values: &[f64]) {
        for &v in &self.nodes {
            x[v] = values[v];
        }
    }

    /// Zeroes constrained entries for a homogeneous constraint.
    pub fn zero_rhs(&self, rhs: &mut [f64]) {
        for &v in &self.nodes {
            rhs[v] = 0.0;
        }
    }
}

/// Applies Dirichlet data at `nodes` (with `values[i]` the value at
/// `nodes[i]`) to the system `(a, rhs)`.
pub fn apply_dirichlet(
    mesh: &LabeledMesh,
    a: &CsrMatrix,
    rhs: &[f64],
    nodes: &[usize],
    values: &[f64],
) -> Result<(CsrMatrix, Vec<f64>)> {
    if nodes.len() != values.len() {
        return Err(Error::invalid("one Dirichlet value per node required"));
    }
    if rhs.len() != a.dim() || a.dim() != mesh.num_nodes() {
        return Err(Error::invalid("system dimension does not match the mesh"));
    }
    let bc = DirichletBc::new(mesh, nodes)?;
    let mut full = vec![0.0; a.dim()];
    for (&v, &g) in nodes.iter().zip(values) {
        full[v] = g;
    }
    Ok((bc.eliminate_matrix(a), bc.eliminate_rhs(a, rhs, &full)))
}
