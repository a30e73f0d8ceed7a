//! P1 finite element assembly on labeled meshes and the sparse linear
//! solvers used by every stage.

mod assemble;
mod dirichlet;
mod direct;
mod gmres;
mod ilu;
mod linear;
mod sparse;

pub use assemble::{
    assemble_interface_load, assemble_mass, assemble_solvent_load, assemble_stiffness,
    assemble_submesh_mass, assemble_volume_load, box_pattern, mass_norm, solvent_lumped_mass,
    Permittivities,
};
pub use dirichlet::{apply_dirichlet, DirichletBc};
pub use direct::{rcm_ordering, SkylineLu};
pub use ilu::Ilu0;
pub use linear::{
    relative_max_diff, residual_norm, solve_linear, LinearMethod, LinearSolveOptions,
    PreparedSolver, SolveStats,
};
pub use sparse::{dot, norm2, CsrMatrix};
