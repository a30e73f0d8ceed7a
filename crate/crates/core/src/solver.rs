//! The full pipeline: `G`, Model 2 for `Ψ`, then the two-block iteration for
//! `Φ̃` and the concentrations, and finally `u = G + Ψ + Φ̃`.

use std::time::Instant;

use crate::error::Result;
use crate::fem::{assemble_stiffness, LinearSolveOptions, SolveStats};
use crate::mesh::{extract_solvent_submesh, LabeledMesh, SolventSubmesh, TransferOps};
use crate::model2::{permittivities, solve_model2_with_stiffness};
use crate::model3::{run_model3_with, IterationRecord, Model3Context, NodalState, SolverReport};
use crate::physics::{compute_constants, PhysicalConstants, ProblemConfig, SolventSpec};
use crate::singular_field::{eval_g, AtomSet};

#[derive(Debug, Clone)]
pub struct Solution {
    pub constants: PhysicalConstants,
    pub submesh: SolventSubmesh,
    pub transfer: TransferOps,
    /// Box-node vectors.
    pub g: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi_tilde: Vec<f64>,
    pub u: Vec<f64>,
    pub state: NodalState,
    pub report: SolverReport,
    pub psi_stats: SolveStats,
    /// Non-fatal input problems, e.g. atoms outside the protein region.
    pub warnings: Vec<String>,
    pub total_seconds: f64,
}

impl Solution {
    /// `u` restricted to the solvent nodes.
    pub fn solvent_potential(&self) -> Vec<f64> {
        self.transfer.restrict(&self.u).expect("u has box length")
    }
}

pub fn solve(
    mesh: &LabeledMesh,
    atoms: &AtomSet,
    solvent: &SolventSpec,
    config: &ProblemConfig,
    linear: &LinearSolveOptions,
) -> Result<Solution> {
    solve_with(mesh, atoms, solvent, config, linear, |_, _| {})
}

/// As [`solve`], calling `observe` after every outer iteration.
pub fn solve_with(
    mesh: &LabeledMesh,
    atoms: &AtomSet,
    solvent: &SolventSpec,
    config: &ProblemConfig,
    linear: &LinearSolveOptions,
    observe: impl FnMut(&IterationRecord, &NodalState),
) -> Result<Solution> {
    let t0 = Instant::now();
    config.validate()?;
    linear.validate()?;
    let constants = compute_constants(config.temperature)?;
    let mut warnings = Vec::new();
    let outside = atoms.atoms_outside_protein(mesh);
    if !outside.is_empty() {
        warnings.push(format!(
            "{} atom(s) lie outside the protein region (first: atom {})",
            outside.len(),
            outside[0]
        ));
    }

    let (submesh, transfer) = extract_solvent_submesh(mesh)?;
    let stiffness = assemble_stiffness(mesh, permittivities(config))?;
    let g = eval_g(atoms, constants.alpha, config.eps_p, mesh.nodes())?;
    let psi = solve_model2_with_stiffness(mesh, &stiffness, atoms, &constants, config, linear)?;
    let g_plus_psi: Vec<f64> = g.iter().zip(&psi.psi).map(|(a, b)| a + b).collect();

    let ctx = Model3Context::new(
        mesh,
        &submesh,
        &transfer,
        &stiffness,
        &g_plus_psi,
        solvent,
        constants,
        config,
        *linear,
    )?;
    let (state, mut report) = run_model3_with(&ctx, observe)?;
    report.linear_seconds += psi.stats.seconds;
    if let Some(d) = psi.stats.cross_check_diff {
        report.max_cross_check_diff = Some(report.max_cross_check_diff.map_or(d, |c| c.max(d)));
    }
    let u = g_plus_psi
        .iter()
        .zip(&state.phi_tilde)
        .map(|(a, b)| a + b)
        .collect();
    let phi_tilde = state.phi_tilde.clone();
    drop(ctx);
    Ok(Solution {
        constants,
        submesh,
        transfer,
        g,
        psi: psi.psi,
        phi_tilde,
        u,
        state,
        report,
        psi_stats: psi.stats,
        warnings,
        total_seconds: t0.elapsed().as_secs_f64(),
    })
}
