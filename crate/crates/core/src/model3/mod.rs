//! Ionic concentrations and the ionic potential `Φ̃` by the damped two-block
//! iteration: nodal Newton solves for the concentrations at fixed potential
//! (block 1), then one linear solve for the potential at fixed
//! concentrations (block 2).

mod newton;

use std::time::Instant;

pub use newton::{
    closed_form_node, exp_factors, guarded_exponents, jacobian_entries, jacobian_solve, water_root_solve, newton_node_solve,
    size_constraint_residual, solve_dense, water_fraction, NewtonFailure, NewtonOptions, NodeSolve,
};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_mass, assemble_solvent_load, assemble_submesh_mass, mass_norm, solvent_lumped_mass,
    CsrMatrix, DirichletBc, LinearSolveOptions, PreparedSolver, SolveStats,
};
use crate::mesh::{LabeledMesh, SolventSubmesh, TransferOps};
use crate::physics::{PhysicalConstants, ProblemConfig, SolventSpec};

/// Concentrations `c[i][μ]` (mol/L) at solvent nodes and `Φ̃` at box nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalState {
    pub c: Vec<Vec<f64>>,
    pub phi_tilde: Vec<f64>,
}

impl NodalState {
    /// Smallest water fraction over all nodes.
    pub fn min_water_fraction(&self, solvent: &SolventSpec, gamma: f64) -> f64 {
        let n_h = self.c.first().map_or(0, Vec::len);
        (0..n_h)
            .map(|mu| water_fraction(&self.column(mu), solvent, gamma))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_concentration(&self) -> f64 {
        self.c
            .iter()
            .flat_map(|ci| ci.iter())
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn column(&self, mu: usize) -> Vec<f64> {
        self.c.iter().map(|ci| ci[mu]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `‖Φ̃^{k+1} - Φ̃^k‖` in L2 over the box.
    pub err_phi: f64,
    /// `max_i ‖c_i^{k+1} - c_i^k‖` in L2 over the solvent.
    pub err_c: f64,
    pub residual: f64,
    pub newton_max_inner: usize,
    /// Nodes that needed the Newton fallback start.
    pub newton_fallbacks: usize,
    pub min_water_fraction: f64,
    pub min_concentration: f64,
    pub linear_iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
    pub wall_seconds: f64,
    /// Wall time spent inside linear solves, setup included.
    pub linear_seconds: f64,
    /// Largest relative gap between iterative and direct solutions, when
    /// the linear solver cross-checks.
    pub max_cross_check_diff: Option<f64>,
    pub message: String,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.iterations.last()
    }
}

/// `β̄ = β Σ Z_i² c_i^b / (1 + γ (v̄²/v0) Σ c_i^b)`.
pub fn beta_bar(solvent: &SolventSpec, constants: &PhysicalConstants) -> f64 {
    let vbar = solvent.mean_volume();
    let sz2: f64 = solvent
        .species
        .iter()
        .map(|s| (s.charge_number as f64).powi(2) * s.bulk_concentration)
        .sum();
    let sc: f64 = solvent.species.iter().map(|s| s.bulk_concentration).sum();
    constants.beta * sz2 / (1.0 + constants.gamma * vbar * vbar / solvent.v0 * sc)
}

/// Closed-form concentrations for equal ion volumes at nodal potentials `u`.
pub fn uniform_size_closed_form(
    u: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
    overflow_bound: f64,
) -> Result<Vec<Vec<f64>>> {
    if !solvent.has_uniform_sizes() {
        return Err(Error::invalid("closed form requires equal ion volumes"));
    }
    Ok(closed_form_field(u, solvent, gamma, overflow_bound))
}

fn closed_form_field(u: &[f64], solvent: &SolventSpec, gamma: f64, bound: f64) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; u.len()]; solvent.len()];
    for (mu, &um) in u.iter().enumerate() {
        let col = closed_form_node(&guarded_exponents(um, solvent, bound), solvent, gamma);
        for (i, v) in col.into_iter().enumerate() {
            c[i][mu] = v;
        }
    }
    c
}

/// `R = (1/N_h) max_i (Σ_μ f_i²)^{1/2}` with
/// `f_i = c_i - c_i^b e^{e_i} W^{v_i/v0}` at each node, using the guarded
/// exponents. `u` is the full potential at solvent nodes.
pub fn residual(
    c: &[Vec<f64>],
    u: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
    overflow_bound: f64,
) -> Result<f64> {
    let n_h = u.len();
    if n_h == 0 || c.len() != solvent.len() || c.iter().any(|ci| ci.len() != n_h) {
        return Err(Error::invalid("concentration and potential dimensions differ"));
    }
    let mut sums = vec![0.0; solvent.len()];
    for mu in 0..n_h {
        let col: Vec<f64> = c.iter().map(|ci| ci[mu]).collect();
        let e = guarded_exponents(u[mu], solvent, overflow_bound);
        let f = size_constraint_residual(&col, &exp_factors(&e, solvent), solvent, gamma)
            .map_err(|_| Error::Domain {
                node: mu,
                msg: "water fraction is not positive".into(),
            })?;
        for (s, fi) in sums.iter_mut().zip(f) {
            *s += fi * fi;
        }
    }
    Ok(sums.iter().map(|s| s.sqrt()).fold(0.0, f64::max) / n_h as f64)
}

/// All three errors below `epsilon`.
pub fn check_termination(record: &IterationRecord, epsilon: f64) -> bool {
    record.err_phi < epsilon && record.err_c < epsilon && record.residual < epsilon
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Block1Stats {
    pub max_inner: usize,
    pub fallbacks: usize,
}

/// Operators and fixed data shared by every iteration.
pub struct Model3Context<'a> {
    pub mesh: &'a LabeledMesh,
    pub submesh: &'a SolventSubmesh,
    pub transfer: &'a TransferOps,
    pub solvent: &'a SolventSpec,
    pub constants: PhysicalConstants,
    pub config: &'a ProblemConfig,
    stiffness: &'a CsrMatrix,
    bc: DirichletBc,
    block2: PreparedSolver,
    linear: LinearSolveOptions,
    box_mass: CsrMatrix,
    solvent_mass: CsrMatrix,
    g_plus_psi: Vec<f64>,
    u_fix: Vec<f64>,
    newton: NewtonOptions,
}

impl<'a> Model3Context<'a> {
    /// `stiffness` is the unmodified stiffness matrix of `mesh`;
    /// `g_plus_psi` is `G + Ψ` at box nodes.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: &'a LabeledMesh,
        submesh: &'a SolventSubmesh,
        transfer: &'a TransferOps,
        stiffness: &'a CsrMatrix,
        g_plus_psi: &[f64],
        solvent: &'a SolventSpec,
        constants: PhysicalConstants,
        config: &'a ProblemConfig,
        linear: LinearSolveOptions,
    ) -> Result<Self> {
        config.validate()?;
        if g_plus_psi.len() != mesh.num_nodes() || stiffness.dim() != mesh.num_nodes() {
            return Err(Error::invalid("G + Ψ and the stiffness matrix must match the mesh"));
        }
        if solvent.is_empty() {
            return Err(Error::invalid("at least one ionic species is required"));
        }
        let bc = DirichletBc::on_box_faces(mesh);
        let block2 = PreparedSolver::new(bc.eliminate_matrix(stiffness), linear)?;
        Ok(Model3Context {
            mesh,
            submesh,
            transfer,
            solvent,
            constants,
            config,
            stiffness,
            bc,
            block2,
            linear,
            box_mass: assemble_mass(mesh, None),
            solvent_mass: assemble_submesh_mass(submesh),
            g_plus_psi: g_plus_psi.to_vec(),
            u_fix: transfer.restrict(g_plus_psi)?,
            newton: NewtonOptions {
                tol: config.newton_tol,
                max_iter: config.max_newton,
                ..Default::default()
            },
        })
    }

    pub fn num_solvent_nodes(&self) -> usize {
        self.u_fix.len()
    }

    /// `R(G + Ψ)` at solvent nodes.
    pub fn u_fix(&self) -> &[f64] {
        &self.u_fix
    }

    /// Full potential `G + Ψ + Φ̃` at solvent nodes.
    pub fn solvent_potential(&self, phi_tilde: &[f64]) -> Vec<f64> {
        (0..self.u_fix.len())
            .map(|mu| self.u_fix[mu] + phi_tilde[self.transfer.parent(mu)])
            .collect()
    }

    pub fn block2_solver(&self) -> &PreparedSolver {
        &self.block2
    }

    pub fn box_mass(&self) -> &CsrMatrix {
        &self.box_mass
    }

    pub fn solvent_mass(&self) -> &CsrMatrix {
        &self.solvent_mass
    }

    fn newton_at(&self, mu: usize, exponents: &[f64], init: &[f64]) -> Result<(Vec<f64>, usize, bool)> {
        let gamma = self.constants.gamma;
        match newton_node_solve(exponents, self.solvent, gamma, init, &self.newton) {
            Ok(r) => Ok((r.xi, r.iterations, false)),
            Err(_) => {
                let start = closed_form_node(exponents, self.solvent, gamma);
                newton_node_solve(exponents, self.solvent, gamma, &start, &self.newton)
                    .or_else(|_| water_root_solve(exponents, self.solvent, gamma))
                    .map(|r| (r.xi, r.iterations, true))
                    .map_err(|f| f.at_node(mu))
            }
        }
    }
}

/// Block 1: solves the size constraints node by node at the potential
/// `G + Ψ + Φ̃^k`, starting Newton from `c^k`.
pub fn solve_block1(ctx: &Model3Context, state: &NodalState) -> Result<(Vec<Vec<f64>>, Block1Stats)> {
    let u = ctx.solvent_potential(&state.phi_tilde);
    let n_h = u.len();
    let mut p = vec![vec![0.0; n_h]; ctx.solvent.len()];
    let mut stats = Block1Stats::default();
    for mu in 0..n_h {
        let e = guarded_exponents(u[mu], ctx.solvent, ctx.config.overflow_bound);
        let (xi, its, fallback) = ctx.newton_at(mu, &e, &state.column(mu))?;
        stats.max_inner = stats.max_inner.max(its);
        stats.fallbacks += fallback as usize;
        for (i, v) in xi.into_iter().enumerate() {
            p[i][mu] = v;
        }
    }
    Ok((p, stats))
}

/// Block 2: `a(q, v) = β Σ_j Z_j ∫_{D_s} (P c_j) v` with `q = 0` on the
/// Dirichlet faces.
pub fn solve_block2(
    ctx: &Model3Context,
    c_next: &[Vec<f64>],
    warm_start: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    let n_h = ctx.num_solvent_nodes();
    if c_next.len() != ctx.solvent.len() || c_next.iter().any(|ci| ci.len() != n_h) {
        return Err(Error::invalid("concentration array has the wrong shape"));
    }
    let mut density = vec![0.0; n_h];
    for (s, ci) in ctx.solvent.species.iter().zip(c_next) {
        let z = s.charge_number as f64;
        for (d, v) in density.iter_mut().zip(ci) {
            *d += z * v;
        }
    }
    let mut b = assemble_solvent_load(ctx.mesh, ctx.transfer, &density)?;
    for v in &mut b {
        *v *= ctx.constants.beta;
    }
    ctx.bc.zero_rhs(&mut b);
    let (mut q, stats) = ctx.block2.solve(&b, warm_start)?;
    ctx.bc.zero_rhs(&mut q);
    Ok((q, stats))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub block1: Block1Stats,
    pub block2: SolveStats,
}

/// One damped two-block step: `c^{k+1} = c^k + ω(p - c^k)`, then
/// `Φ̃^{k+1} = Φ̃^k + ω(q - Φ̃^k)` with `q` computed from the damped
/// `c^{k+1}`.
pub fn two_block_step(ctx: &Model3Context, state: &NodalState, omega: f64) -> Result<(NodalState, StepStats)> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::invalid(format!("omega = {omega} must lie in (0, 1]")));
    }
    let (p, block1) = solve_block1(ctx, state)?;
    let c: Vec<Vec<f64>> = state
        .c
        .iter()
        .zip(&p)
        .map(|(ck, pk)| ck.iter().zip(pk).map(|(a, b)| a + omega * (b - a)).collect())
        .collect();
    let (q, block2) = solve_block2(ctx, &c, Some(&state.phi_tilde))?;
    let phi_tilde = state
        .phi_tilde
        .iter()
        .zip(&q)
        .map(|(a, b)| a + omega * (b - a))
        .collect();
    Ok((NodalState { c, phi_tilde }, StepStats { block1, block2 }))
}

/// Linearized start: `a(Φ̃⁰, v) + β̄ ∫_{D_s} Φ̃⁰ v = -β̄ ∫_{D_s} (G + Ψ) v`
/// (vertex rule), then closed-form concentrations at `G + Ψ + Φ̃⁰`.
pub fn initial_iterate(ctx: &Model3Context) -> Result<(NodalState, SolveStats)> {
    ctx.solvent.check_electroneutrality()?;
    let bb = beta_bar(ctx.solvent, &ctx.constants);
    let lumped = solvent_lumped_mass(ctx.mesh);
    let mut a = ctx.stiffness.clone();
    a.add_diagonal(&lumped.iter().map(|m| bb * m).collect::<Vec<_>>());
    let mut b: Vec<f64> = lumped
        .iter()
        .zip(&ctx.g_plus_psi)
        .map(|(m, u)| -bb * m * u)
        .collect();
    ctx.bc.zero_rhs(&mut b);
    let solver = PreparedSolver::new(ctx.bc.eliminate_matrix(&a), ctx.linear)?;
    let (mut phi, mut stats) = solver.solve(&b, None)?;
    stats.seconds += solver.setup_seconds();
    ctx.bc.zero_rhs(&mut phi);
    let u = ctx.solvent_potential(&phi);
    let c = closed_form_field(&u, ctx.solvent, ctx.constants.gamma, ctx.config.overflow_bound);
    Ok((NodalState { c, phi_tilde: phi }, stats))
}

/// Error growth beyond this multiple of its running minimum counts as
/// divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Runs the two-block iteration from the linearized start until the three
/// errors fall below `config.tol`, the iteration diverges, or
/// `config.max_outer` iterations pass. Numerical failures inside a block are
/// returned as errors; the other outcomes are reported in
/// [`SolverReport::termination`].
pub fn run_model3(ctx: &Model3Context) -> Result<(NodalState, SolverReport)> {
    run_model3_with(ctx, |_, _| {})
}

/// As [`run_model3`], calling `observe` with every accepted iterate.
pub fn run_model3_with(
    ctx: &Model3Context,
    mut observe: impl FnMut(&IterationRecord, &NodalState),
) -> Result<(NodalState, SolverReport)> {
    let wall = Instant::now();
    let cfg = ctx.config;
    let gamma = ctx.constants.gamma;
    let mut linear_seconds = ctx.block2.setup_seconds();
    let mut cross: Option<f64> = None;
    let mut note_cross = |d: Option<f64>| {
        if let Some(d) = d {
            cross = Some(cross.map_or(d, |c: f64| c.max(d)));
        }
    };

    let (mut state, init_stats) = initial_iterate(ctx)?;
    linear_seconds += init_stats.seconds;
    note_cross(init_stats.cross_check_diff);

    let mut records = Vec::new();
    let mut running_min = f64::INFINITY;
    let mut termination = Termination::MaxIterations;
    let mut message = format!("no convergence within {} iterations", cfg.max_outer);
    for k in 0..cfg.max_outer {
        let t0 = Instant::now();
        let (next, stats) = two_block_step(ctx, &state, cfg.omega)?;
        linear_seconds += stats.block2.seconds;
        note_cross(stats.block2.cross_check_diff);
        let dphi: Vec<f64> = next.phi_tilde.iter().zip(&state.phi_tilde).map(|(a, b)| a - b).collect();
        let err_phi = mass_norm(&ctx.box_mass, &dphi);
        let err_c = next
            .c
            .iter()
            .zip(&state.c)
            .map(|(a, b)| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                mass_norm(&ctx.solvent_mass, &d)
            })
            .fold(0.0, f64::max);
        let u = ctx.solvent_potential(&next.phi_tilde);
        let res = residual(&next.c, &u, ctx.solvent, gamma, cfg.overflow_bound)?;
        let record = IterationRecord {
            k: k + 1,
            err_phi,
            err_c,
            residual: res,
            newton_max_inner: stats.block1.max_inner,
            newton_fallbacks: stats.block1.fallbacks,
            min_water_fraction: next.min_water_fraction(ctx.solvent, gamma),
            min_concentration: next.min_concentration(),
            linear_iterations: stats.block2.iterations,
            seconds: t0.elapsed().as_secs_f64(),
        };
        state = next;
        observe(&record, &state);
        records.push(record);

        let err = err_phi.max(err_c);
        if !err.is_finite() || !res.is_finite() {
            termination = Termination::Diverged;
            message = format!("non-finite iteration error at iteration {}; try a smaller omega", k + 1);
            break;
        }
        running_min = running_min.min(err);
        if err > DIVERGENCE_FACTOR * running_min {
            termination = Termination::Diverged;
            message = format!(
                "iteration error {err:.3e} at iteration {} exceeds {DIVERGENCE_FACTOR} times its minimum {running_min:.3e}; try a smaller omega (current {})",
                k + 1,
                cfg.omega
            );
            break;
        }
        if check_termination(&record, cfg.tol) {
            termination = Termination::Converged;
            message = format!("converged in {} iterations", k + 1);
            break;
        }
    }
    Ok((
        state,
        SolverReport {
            iterations: records,
            termination,
            wall_seconds: wall.elapsed().as_secs_f64(),
            linear_seconds,
            max_cross_check_diff: cross,
            message,
        },
    ))
}
