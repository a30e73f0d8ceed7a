//! Linear interface problem for the harmonic correction `Ψ`.
//!
//! `Ψ` is harmonic in every region, equals `g - G` on the top and bottom
//! faces, and absorbs the permittivity jumps of `G` across the interfaces.
//! Integrating by parts region by region and inserting the jump conditions
//! gives, for test functions vanishing on the Dirichlet faces,
//!
//! ```text
//! a(Ψ, v) =  ∫_Γp  (ε_s - ε_p) ∂G/∂n_p v
//!          + ∫_Γm [(ε_s - ε_m) ∂G/∂n_m + τσ] v
//!          + ∫_Γpm (ε_m - ε_p) ∂G/∂n_p v
//!          - ∫_ΓN  ε ∂G/∂n_b v
//! ```
//!
//! with `n_p` pointing out of the protein, `n_m` out of the membrane and
//! `n_b` out of the box, which is the stored facet orientation. The side
//! term uses the permittivity of the tet adjacent to each facet.

use std::collections::HashMap;

use crate::error::Result;
use crate::fem::{
    assemble_stiffness, CsrMatrix, DirichletBc, LinearSolveOptions, Permittivities,
    PreparedSolver, SolveStats,
};
use crate::geometry::{self, Point3};
use crate::mesh::{FacetTag, LabeledMesh};
use crate::physics::{boundary_value, PhysicalConstants, ProblemConfig};
use crate::singular_field::{eval_g, eval_grad_g, AtomSet};

#[derive(Debug, Clone)]
pub struct PsiSolution {
    pub psi: Vec<f64>,
    pub stats: SolveStats,
}

pub fn permittivities(config: &ProblemConfig) -> Permittivities {
    Permittivities {
        protein: config.eps_p,
        membrane: config.eps_m,
        solvent: config.eps_s,
    }
}

/// Right-hand side of the weak form above, before Dirichlet elimination.
pub fn model2_load(
    mesh: &LabeledMesh,
    atoms: &AtomSet,
    constants: &PhysicalConstants,
    config: &ProblemConfig,
) -> Result<Vec<f64>> {
    // ∇G at every vertex of a facet that needs it
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut points: Vec<Point3> = Vec::new();
    if !atoms.is_empty() {
        for f in mesh.facets() {
            if matches!(f.tag, FacetTag::DirichletBottom | FacetTag::DirichletTop) {
                continue;
            }
            for &v in &f.nodes {
                slot.entry(v).or_insert_with(|| {
                    points.push(mesh.nodes()[v]);
                    points.len() - 1
                });
            }
        }
    }
    let grad = eval_grad_g(atoms, constants.alpha, config.eps_p, &points)?;
    let surface = constants.tau * config.sigma;

    let mut b = vec![0.0; mesh.num_nodes()];
    for (fi, f) in mesh.facets().iter().enumerate() {
        let (jump, extra) = match f.tag {
            FacetTag::DirichletBottom | FacetTag::DirichletTop => continue,
            FacetTag::ProteinSolvent => (config.eps_s - config.eps_p, 0.0),
            FacetTag::MembraneSolvent => (config.eps_s - config.eps_m, surface),
            FacetTag::ProteinMembrane => (config.eps_m - config.eps_p, 0.0),
            FacetTag::Neumann => (-config.permittivity(mesh.tets()[f.inside].region), 0.0),
        };
        let n = mesh.facet_normal(fi);
        let w = mesh.facet_area(fi) / 3.0;
        for &v in &f.nodes {
            let dg = if atoms.is_empty() {
                0.0
            } else {
                geometry::dot(grad[slot[&v]], n)
            };
            b[v] += w * (jump * dg + extra);
        }
    }
    Ok(b)
}

/// `g - G` at every node, meaningful only at Dirichlet nodes (zero
/// elsewhere).
pub fn model2_dirichlet_values(
    mesh: &LabeledMesh,
    bc: &DirichletBc,
    atoms: &AtomSet,
    constants: &PhysicalConstants,
    config: &ProblemConfig,
) -> Result<Vec<f64>> {
    let pts: Vec<Point3> = bc.nodes().iter().map(|&v| mesh.nodes()[v]).collect();
    let g = eval_g(atoms, constants.alpha, config.eps_p, &pts)?;
    let mut values = vec![0.0; mesh.num_nodes()];
    for (k, &v) in bc.nodes().iter().enumerate() {
        values[v] = boundary_value(mesh.nodes()[v], config)? - g[k];
    }
    Ok(values)
}

/// Solves for `Ψ` using an already assembled stiffness matrix of `mesh`.
pub fn solve_model2_with_stiffness(
    mesh: &LabeledMesh,
    stiffness: &CsrMatrix,
    atoms: &AtomSet,
    constants: &PhysicalConstants,
    config: &ProblemConfig,
    options: &LinearSolveOptions,
) -> Result<PsiSolution> {
    let bc = DirichletBc::on_box_faces(mesh);
    let values = model2_dirichlet_values(mesh, &bc, atoms, constants, config)?;
    let load = model2_load(mesh, atoms, constants, config)?;
    let rhs = bc.eliminate_rhs(stiffness, &load, &values);
    let solver = PreparedSolver::new(bc.eliminate_matrix(stiffness), *options)?;
    let (mut psi, mut stats) = solver.solve(&rhs, Some(&values))?;
    stats.seconds += solver.setup_seconds();
    bc.impose(&mut psi, &values);
    Ok(PsiSolution { psi, stats })
}

pub fn solve_model2(
    mesh: &LabeledMesh,
    atoms: &AtomSet,
    constants: &PhysicalConstants,
    config: &ProblemConfig,
    options: &LinearSolveOptions,
) -> Result<PsiSolution> {
    config.validate()?;
    let a = assemble_stiffness(mesh, permittivities(config))?;
    solve_model2_with_stiffness(mesh, &a, atoms, constants, config, options)
}
