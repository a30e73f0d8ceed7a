//! Small slab problems for the Model 3 iteration.

use nusmpbic::fem::{assemble_stiffness, CsrMatrix, LinearSolveOptions};
use nusmpbic::mesh::{extract_solvent_submesh, structured_box, LabeledMesh, Region, SolventSubmesh, TransferOps};
use nusmpbic::model2::{permittivities, solve_model2_with_stiffness};
use nusmpbic::physics::{compute_constants, BoxBounds, IonSpecies, PhysicalConstants, ProblemConfig, SolventSpec};
use nusmpbic::singular_field::{eval_g, AtomSet};

pub const TABULATED_VOLUMES: [f64; 4] = [24.8384, 77.0727, 9.8547, 3.5914];

/// Cl⁻, NO₃⁻, K⁺, Na⁺ at 0.1 mol/L with the tabulated volumes.
pub fn tabulated_species() -> SolventSpec {
    let names = ["Cl-", "NO3-", "K+", "Na+"];
    let z = [-1, -1, 1, 1];
    SolventSpec::new(
        (0..4)
            .map(|i| IonSpecies::new(names[i], z[i], 0.1, TABULATED_VOLUMES[i]).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Box `[-4,4]² x [-10,10]` with a membrane slab `|z| < 3`, spacing 2 in x
/// and y and 1 in z.
pub fn slab_mesh() -> (LabeledMesh, ProblemConfig) {
    let xs: Vec<f64> = (0..=4).map(|k| -4.0 + 2.0 * k as f64).collect();
    let zs: Vec<f64> = (0..=20).map(|k| -10.0 + k as f64).collect();
    let mesh = structured_box(&xs, &xs, &zs, |c| {
        if c[2].abs() < 3.0 {
            Region::Membrane
        } else {
            Region::Solvent
        }
    })
    .unwrap();
    let bounds = BoxBounds::new([-4.0, -4.0, -10.0], [4.0, 4.0, 10.0]).unwrap();
    (mesh, ProblemConfig::new(bounds, (-3.0, 3.0)))
}

pub struct Prepared {
    pub mesh: LabeledMesh,
    pub config: ProblemConfig,
    pub submesh: SolventSubmesh,
    pub transfer: TransferOps,
    pub stiffness: CsrMatrix,
    pub g_plus_psi: Vec<f64>,
    pub constants: PhysicalConstants,
}

pub fn prepare(mesh: LabeledMesh, config: ProblemConfig, atoms: &AtomSet, linear: &LinearSolveOptions) -> Prepared {
    let constants = compute_constants(config.temperature).unwrap();
    let (submesh, transfer) = extract_solvent_submesh(&mesh).unwrap();
    let stiffness = assemble_stiffness(&mesh, permittivities(&config)).unwrap();
    let g = eval_g(atoms, constants.alpha, config.eps_p, mesh.nodes()).unwrap();
    let psi = solve_model2_with_stiffness(&mesh, &stiffness, atoms, &constants, &config, linear).unwrap();
    let g_plus_psi = g.iter().zip(&psi.psi).map(|(a, b)| a + b).collect();
    Prepared {
        mesh,
        config,
        submesh,
        transfer,
        stiffness,
        g_plus_psi,
        constants,
    }
}
