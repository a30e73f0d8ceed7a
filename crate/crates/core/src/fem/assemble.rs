use crate::error::{Error, Result};
use crate::geometry::{self, Point3};
use crate::mesh::{FacetTag, LabeledMesh, Region, SolventSubmesh, TransferOps, MIN_TET_VOLUME};

use super::CsrMatrix;

/// Relative permittivities of the protein, membrane and solvent regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Permittivities {
    pub protein: f64,
    pub membrane: f64,
    pub solvent: f64,
}

impl Permittivities {
    pub fn uniform(eps: f64) -> Self {
        Permittivities {
            protein: eps,
            membrane: eps,
            solvent: eps,
        }
    }

    pub fn of(&self, region: Region) -> f64 {
        match region {
            Region::Protein => self.protein,
            Region::Membrane => self.membrane,
            Region::Solvent => self.solvent,
        }
    }
}

/// Empty matrix with the node-adjacency pattern of the box mesh.
pub fn box_pattern(mesh: &LabeledMesh) -> CsrMatrix {
    CsrMatrix::from_cells(mesh.num_nodes(), mesh.tets().iter().map(|t| t.nodes))
}

fn element_gradients(p: [Point3; 4], t: usize) -> Result<([Point3; 4], f64)> {
    match geometry::p1_gradients(p) {
        Some((g, v)) if v.abs() >= MIN_TET_VOLUME => Ok((g, v.abs())),
        _ => Err(Error::Assembly(format!("tet {t} is degenerate"))),
    }
}

/// Stiffness matrix `A_kl = Σ ε_region ∫ ∇φ_k·∇φ_l` over the box mesh.
pub fn assemble_stiffness(mesh: &LabeledMesh, eps: Permittivities) -> Result<CsrMatrix> {
    let mut a = box_pattern(mesh);
    for (t, tet) in mesh.tets().iter().enumerate() {
        let (g, vol) = element_gradients(mesh.tet_points(t), t)?;
        let e = eps.of(tet.region) * vol;
        for i in 0..4 {
            for j in 0..4 {
                a.add(tet.nodes[i], tet.nodes[j], e * geometry::dot(g[i], g[j]));
            }
        }
    }
    Ok(a)
}

fn add_consistent_mass(m: &mut CsrMatrix, nodes: [usize; 4], vol: f64) {
    for i in 0..4 {
        for j in 0..4 {
            let w = if i == j { vol / 10.0 } else { vol / 20.0 };
            m.add(nodes[i], nodes[j], w);
        }
    }
}

/// Consistent P1 mass matrix over the box, restricted to tets of `region`
/// when given. The pattern is always the full box pattern.
pub fn assemble_mass(mesh: &LabeledMesh, region: Option<Region>) -> CsrMatrix {
    let mut m = box_pattern(mesh);
    for (t, tet) in mesh.tets().iter().enumerate() {
        if region.is_none_or(|r| r == tet.region) {
            add_consistent_mass(&mut m, tet.nodes, mesh.volumes()[t]);
        }
    }
    m
}

/// Consistent P1 mass matrix of the solvent submesh.
pub fn assemble_submesh_mass(sub: &SolventSubmesh) -> CsrMatrix {
    let mut m = CsrMatrix::from_cells(sub.num_nodes(), sub.tets().iter().copied());
    for (tet, &vol) in sub.tets().iter().zip(sub.volumes()) {
        add_consistent_mass(&mut m, *tet, vol);
    }
    m
}

/// Vertex-rule mass of each box node over the solvent tets (zero at nodes
/// without solvent support).
pub fn solvent_lumped_mass(mesh: &LabeledMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.num_nodes()];
    for (t, tet) in mesh.tets().iter().enumerate() {
        if tet.region == Region::Solvent {
            for &v in &tet.nodes {
                m[v] += mesh.volumes()[t] / 4.0;
            }
        }
    }
    m
}

/// `b_k = ∫_{D_s} (P ρ) φ_k` with the vertex quadrature rule, where `ρ` is a
/// nodal density on the solvent submesh.
pub fn assemble_solvent_load(
    mesh: &LabeledMesh,
    transfer: &TransferOps,
    density: &[f64],
) -> Result<Vec<f64>> {
    if transfer.box_len() != mesh.num_nodes() {
        return Err(Error::invalid("transfer operators do not belong to this mesh"));
    }
    let p = transfer.prolong(density)?;
    let mut b = vec![0.0; mesh.num_nodes()];
    for (t, tet) in mesh.tets().iter().enumerate() {
        if tet.region == Region::Solvent {
            let w = mesh.volumes()[t] / 4.0;
            for &v in &tet.nodes {
                b[v] += w * p[v];
            }
        }
    }
    Ok(b)
}

/// `b_k = ∫ ρ φ_k` over facets carrying `tag`, with the three-vertex
/// triangle rule. `density(f, x)` gives the surface density on facet `f` at
/// vertex `x`, so it may be discontinuous across facets.
pub fn assemble_interface_load(
    mesh: &LabeledMesh,
    tag: FacetTag,
    mut density: impl FnMut(usize, Point3) -> f64,
) -> Result<Vec<f64>> {
    let mut b = vec![0.0; mesh.num_nodes()];
    let mut found = false;
    for (f, facet) in mesh.facets().iter().enumerate() {
        if facet.tag != tag {
            continue;
        }
        found = true;
        let w = mesh.facet_area(f) / 3.0;
        for &v in &facet.nodes {
            b[v] += w * density(f, mesh.nodes()[v]);
        }
    }
    if !found {
        return Err(Error::invalid(format!("mesh has no facets tagged {}", tag.id())));
    }
    Ok(b)
}

const GAUSS4_A: f64 = 0.585_410_196_624_968_5;
const GAUSS4_B: f64 = 0.138_196_601_125_010_5;

/// `b_k = ∫_Ω f φ_k` over the whole box with the degree-2 four-point rule.
pub fn assemble_volume_load(mesh: &LabeledMesh, f: impl Fn(Point3) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_nodes()];
    for (t, tet) in mesh.tets().iter().enumerate() {
        let p = mesh.tet_points(t);
        let w = mesh.volumes()[t] / 4.0;
        for q in 0..4 {
            let mut x = [0.0; 3];
            for (k, pk) in p.iter().enumerate() {
                let l = if k == q { GAUSS4_A } else { GAUSS4_B };
                x = geometry::add(x, geometry::scale(*pk, l));
            }
            let fx = f(x) * w;
            for k in 0..4 {
                let l = if k == q { GAUSS4_A } else { GAUSS4_B };
                b[tet.nodes[k]] += fx * l;
            }
        }
    }
    b
}

/// `L2` norm `sqrt(xᵀ M x)` for a mass matrix `M`.
pub fn mass_norm(mass: &CsrMatrix, x: &[f64]) -> f64 {
    super::sparse::dot(x, &mass.matvec(x)).max(0.0).sqrt()
}
