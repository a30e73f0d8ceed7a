use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nusmpbic::energy::evaluate_energy;
use nusmpbic::fem::{LinearMethod, LinearSolveOptions};
use nusmpbic::io::csv::{format_curves, format_iteration_report, format_summary, write_text};
use nusmpbic::io::{
    block_average_curves, export_vtk, load_config, parse_pqr, write_config, write_pqr, CaseConfig, PotentialParts,
    DEFAULT_HBAR,
};
use nusmpbic::mesh::{generate_synthetic_channel, load_mesh, write_mesh, ChannelGeometry};
use nusmpbic::model3::Termination;
use nusmpbic::singular_field::AtomSet;
use nusmpbic::solver::solve_with;
use nusmpbic::synthetic::{four_species, ChannelCase};
use nusmpbic::Error;

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_OUTPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "nusmpbic", version, about = "Size-modified Poisson-Boltzmann ion channel solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the potential and ionic concentrations.
    Solve(SolveArgs),
    /// Write a synthetic test mesh, with atoms and a case file for channels.
    GenerateMesh(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LinearSolverArg {
    GmresIlu,
    Direct,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    mesh: PathBuf,
    /// Atomic charges; omit for an atom-free run.
    #[arg(long)]
    pqr: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Give every species the mean ion volume.
    #[arg(long)]
    uniform_size: bool,
    /// Membrane surface charge density, µC/cm².
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_enum)]
    linear_solver: Option<LinearSolverArg>,
    /// Slab width for the z-profiles, Å.
    #[arg(long)]
    hbar: Option<f64>,
    /// Do not print per-iteration progress.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKind {
    /// Membrane with a protein-lined pore, 20 buried charges.
    Channel,
    /// Plain membrane slab without protein.
    Slab,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "channel")]
    kind: MeshKind,
    /// Target edge length, Å.
    #[arg(long, default_value_t = 3.0)]
    h: f64,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INPUT,
            msg: e.to_string(),
        }
    }

    fn output(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_OUTPUT,
            msg: format!("cannot write output: {e}"),
        }
    }

    /// Input problems map to 1, everything raised while solving to 3.
    fn solving(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Io { .. } | Error::Parse { .. } | Error::Mesh(_) => EXIT_INPUT,
            _ => EXIT_NUMERICAL,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(&args),
        Command::GenerateMesh(args) => generate(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn load_case(args: &SolveArgs) -> Result<CaseConfig, Failure> {
    let mut case = load_config(&args.config).map_err(Failure::input)?;
    if let Some(w) = args.omega {
        case.problem.omega = w;
    }
    if let Some(t) = args.tol {
        case.problem.tol = t;
    }
    if let Some(s) = args.sigma {
        case.problem.sigma = s;
    }
    if let Some(h) = args.hbar {
        case.hbar = h;
    }
    if let Some(m) = args.linear_solver {
        case.linear.method = match m {
            LinearSolverArg::GmresIlu => LinearMethod::GmresIlu,
            LinearSolverArg::Direct => LinearMethod::Direct,
        };
    }
    if args.uniform_size {
        case.solvent = case.solvent.uniform_sized();
    }
    case.problem.validate().map_err(Failure::input)?;
    case.linear.validate().map_err(Failure::input)?;
    if case.hbar.is_nan() || case.hbar <= 0.0 {
        return Err(Failure::input("hbar must be positive"));
    }
    Ok(case)
}

fn solve(args: &SolveArgs) -> Result<u8, Failure> {
    let case = load_case(args)?;
    let mesh = load_mesh(&args.mesh).map_err(Failure::input)?;
    let atoms = match &args.pqr {
        Some(p) => parse_pqr(p).map_err(Failure::input)?,
        None => AtomSet::empty(),
    };
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::output(format!("{}: {e}", args.out.display())))?;

    let quiet = args.quiet;
    let sol = solve_with(&mesh, &atoms, &case.solvent, &case.problem, &case.linear, |r, _| {
        if !quiet {
            eprintln!(
                "{:4}  err_phi {:.3e}  err_c {:.3e}  R {:.3e}  newton {}",
                r.k, r.err_phi, r.err_c, r.residual, r.newton_max_inner
            );
        }
    })
    .map_err(Failure::solving)?;
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }

    let out = |name: &str| args.out.join(name);
    let parts = PotentialParts {
        g: &sol.g,
        psi: &sol.psi,
        phi_tilde: &sol.phi_tilde,
        u: &sol.u,
    };
    export_vtk(out("solution.vtk"), &mesh, &sol.transfer, &case.solvent, &parts, &sol.state)
        .map_err(Failure::output)?;
    write_text(out("iterations.csv"), &format_iteration_report(&sol.report)).map_err(Failure::output)?;
    let curves = block_average_curves(
        &sol.state.c,
        &sol.u,
        &sol.submesh,
        &sol.transfer,
        &case.solvent,
        &case.problem,
        case.hbar,
    )
    .map_err(Failure::input)?;
    write_text(out("curves.csv"), &format_curves(&curves)).map_err(Failure::output)?;
    let energy = match evaluate_energy(
        &sol.state,
        &sol.u,
        &sol.submesh,
        &sol.transfer,
        &case.solvent,
        sol.constants.gamma,
    ) {
        Ok(e) => Some(e),
        Err(e) => {
            eprintln!("warning: energy not evaluated: {e}");
            None
        }
    };
    write_text(out("summary.csv"), &format_summary(&sol.report, energy.as_ref())).map_err(Failure::output)?;

    if sol.report.converged() {
        println!("{}", sol.report.message);
    }
    if let Some(e) = energy {
        println!(
            "energy (k_BT): F_es {:.6e}  F_id {:.6e}  F_ex {:.6e}  total {:.6e}",
            e.es, e.id, e.ex, e.total
        );
    }
    println!(
        "time: {:.2} s total, {:.2} s in linear solves",
        sol.total_seconds, sol.report.linear_seconds
    );
    Ok(match sol.report.termination {
        Termination::Converged => 0,
        Termination::MaxIterations | Termination::Diverged => {
            eprintln!("error: {}", sol.report.message);
            EXIT_NOT_CONVERGED
        }
    })
}

fn generate(args: &GenerateArgs) -> Result<u8, Failure> {
    let mut case = ChannelCase::new(args.h);
    if let MeshKind::Slab = args.kind {
        case.geometry = ChannelGeometry {
            pore_radius: 0.0,
            protein: None,
            ..case.geometry
        };
        case.atoms = AtomSet::empty();
    }
    let mesh = generate_synthetic_channel(&case.geometry).map_err(Failure::input)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::output(format!("{}: {e}", args.out.display())))?;
    let write = |name: &str| -> PathBuf { args.out.join(name) };
    let stem = match args.kind {
        MeshKind::Channel => "channel",
        MeshKind::Slab => "slab",
    };
    write_mesh(&mesh, write(&format!("{stem}.msh"))).map_err(Failure::output)?;
    let config = CaseConfig {
        problem: case.config(),
        solvent: four_species(),
        hbar: DEFAULT_HBAR,
        linear: LinearSolveOptions::default(),
    };
    write_config(write(&format!("{stem}.cfg")), &config).map_err(Failure::output)?;
    if !case.atoms.is_empty() {
        write_pqr(write(&format!("{stem}.pqr")), &case.atoms).map_err(Failure::output)?;
    }
    println!(
        "{} nodes, {} tets written to {}",
        mesh.num_nodes(),
        mesh.num_tets(),
        display(&args.out)
    );
    Ok(0)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
