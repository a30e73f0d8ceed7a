//! Acceptance suite. Prints one line per criterion and exits 0; set
//! `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

mod common;

use std::time::Instant;

use common::cases::tabulated_species;
use common::oracle;
use nusmpbic::energy::energy_on_solvent;
use nusmpbic::fem::{assemble_stiffness, LinearSolveOptions};
use nusmpbic::io::{block_average_curves, CurveSet, DEFAULT_HBAR};
use nusmpbic::mesh::LabeledMesh;
use nusmpbic::model2::permittivities;
use nusmpbic::model3::*;
use nusmpbic::physics::{IonSpecies, ProblemConfig, SolventSpec};
use nusmpbic::solver::{solve_with, Solution};
use nusmpbic::synthetic::ChannelCase;
use rand::{Rng, SeedableRng};

const GAMMA: f64 = 6.022_140_76e-4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Iterates of a channel run, recorded for the feasibility check.
struct Run {
    solution: Solution,
    min_water: f64,
    min_c: f64,
}

struct Channel {
    mesh: LabeledMesh,
    case: ChannelCase,
    solvent: SolventSpec,
}

impl Channel {
    fn new(h: f64) -> Self {
        let case = ChannelCase::new(h);
        Channel {
            mesh: case.mesh().expect("channel mesh"),
            case,
            solvent: tabulated_species(),
        }
    }

    fn config(&self, sigma: f64) -> ProblemConfig {
        let mut c = self.case.config();
        c.omega = 0.4;
        c.sigma = sigma;
        c
    }

    fn run(&self, config: &ProblemConfig, solvent: &SolventSpec, linear: &LinearSolveOptions) -> Run {
        let mut min_water = f64::INFINITY;
        let mut min_c = f64::INFINITY;
        let solution = solve_with(&self.mesh, &self.case.atoms, solvent, config, linear, |r, st| {
            min_water = min_water.min(r.min_water_fraction);
            min_c = min_c.min(st.min_concentration());
        })
        .expect("channel solve");
        Run {
            solution,
            min_water,
            min_c,
        }
    }

    fn curves(&self, s: &Solution, config: &ProblemConfig) -> CurveSet {
        block_average_curves(
            &s.state.c,
            &s.u,
            &s.submesh,
            &s.transfer,
            &self.solvent,
            config,
            DEFAULT_HBAR,
        )
        .expect("curves")
    }
}

fn random_solvent(rng: &mut impl Rng, n: usize) -> SolventSpec {
    let species = (0..n)
        .map(|i| {
            let z = if i % 2 == 0 { -1 } else { 1 } * rng.gen_range(1..=2);
            IonSpecies::new(format!("s{i}"), z, rng.gen_range(0.01..0.5), rng.gen_range(3.0..80.0)).unwrap()
        })
        .collect();
    SolventSpec::new(species).unwrap()
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for sample in 0..100 {
        let n = [1, 2, 4][sample % 3];
        let s = random_solvent(&mut rng, n);
        let u = rng.gen_range(-5.0..5.0);
        let factors = exp_factors(&guarded_exponents(u, &s, 45.0), &s);
        let vmax = s.species.iter().map(|x| x.ion_volume).fold(0.0, f64::max);
        let xi: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0.0..0.8 / (GAMMA * vmax * n as f64)))
            .collect();
        let j = jacobian_entries(&xi, &factors, &s, GAMMA).unwrap();
        for k in 0..n {
            let h = 1e-6 * xi[k].max(1e-2);
            let (mut p, mut m) = (xi.clone(), xi.clone());
            p[k] += h;
            m[k] -= h;
            let fp = size_constraint_residual(&p, &factors, &s, GAMMA).unwrap();
            let fm = size_constraint_residual(&m, &factors, &s, GAMMA).unwrap();
            for i in 0..n {
                let row = j[i].iter().fold(0.0f64, |a, x| a.max(x.abs()));
                worst = worst.max(((fp[i] - fm[i]) / (2.0 * h) - j[i][k]).abs() / row);
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && secs < 5.0,
        format!("100 samples, worst relative gap {worst:.2e} (row scale), {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let single = SolventSpec::new(vec![IonSpecies::new("a", -1, 0.1, 24.8384).unwrap()]).unwrap();
    let r = newton_node_solve(&[0.0], &single, GAMMA, &[0.1], &NewtonOptions::default()).unwrap();
    let closed_gap = (r.xi[0] - 0.1 / (1.0 + 0.1 * GAMMA * 24.8384)).abs();

    // Newton starts from the equal-volume closed form, as the solver does
    // for a fresh node; the bulk-concentration start is reported alongside.
    let s = tabulated_species();
    let bulk: Vec<f64> = s.species.iter().map(|x| x.bulk_concentration).collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(77);
    let (mut worst, mut max_iter, mut max_iter_bulk) = (0.0f64, 0, 0);
    for _ in 0..50 {
        let u = rng.gen_range(-10.0..10.0);
        let e = guarded_exponents(u, &s, 45.0);
        let start = closed_form_node(&e, &s, GAMMA);
        let r = newton_node_solve(&e, &s, GAMMA, &start, &NewtonOptions::default()).unwrap();
        let reference = oracle::fixed_point(&e, &s, GAMMA, 100_000);
        for i in 0..4 {
            worst = worst.max((r.xi[i] - reference[i]).abs() / reference[i]);
        }
        max_iter = max_iter.max(r.iterations);
        let rb = newton_node_solve(&e, &s, GAMMA, &bulk, &NewtonOptions::default()).unwrap();
        max_iter_bulk = max_iter_bulk.max(rb.iterations);
    }
    outcome(
        closed_gap <= 1e-12 && worst <= 1e-8 && max_iter <= 10,
        format!(
            "n=1 gap {closed_gap:.1e}; n=4 over 50 potentials in [-10, 10]: worst relative gap {worst:.1e}, max {max_iter} Newton steps ({max_iter_bulk} from bulk values)"
        ),
    )
}

fn criterion_3(channel: &Channel) -> Outcome {
    let uniform = channel.solvent.uniform_sized();
    let config = channel.config(0.0);
    let run = channel.run(&config, &uniform, &LinearSolveOptions::default());
    let sol = &run.solution;
    let stiffness = assemble_stiffness(&channel.mesh, permittivities(&config)).unwrap();
    let g_plus_psi: Vec<f64> = sol.g.iter().zip(&sol.psi).map(|(a, b)| a + b).collect();
    let ctx = Model3Context::new(
        &channel.mesh,
        &sol.submesh,
        &sol.transfer,
        &stiffness,
        &g_plus_psi,
        &uniform,
        sol.constants,
        &config,
        LinearSolveOptions::default(),
    )
    .unwrap();
    let (p, _) = solve_block1(&ctx, &sol.state).unwrap();
    let u = ctx.solvent_potential(&sol.state.phi_tilde);
    let closed = uniform_size_closed_form(&u, &uniform, sol.constants.gamma, config.overflow_bound).unwrap();
    let mut block_gap = 0.0f64;
    for i in 0..4 {
        for mu in 0..u.len() {
            block_gap = block_gap.max((p[i][mu] - closed[i][mu]).abs() / closed[i][mu].max(1.0));
        }
    }
    let c = &sol.state.c;
    let pair_gap = (0..u.len())
        .map(|mu| (c[0][mu] - c[1][mu]).abs().max((c[2][mu] - c[3][mu]).abs()))
        .fold(0.0, f64::max);
    outcome(
        block_gap <= 1e-10 && pair_gap <= 1e-8 && sol.report.converged(),
        format!(
            "block 1 vs closed form {block_gap:.1e}; like-charge fields differ by at most {pair_gap:.1e} ({})",
            sol.report.message
        ),
    )
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let (errs, orders) = common::observed_orders(&[4, 8, 16]);
    let secs = t0.elapsed().as_secs_f64();
    let min = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        min >= 1.8 && secs < 60.0,
        format!(
            "L2 errors {}, orders {}, {secs:.1} s",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" "),
            orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn monotone_violations(v: &[f64]) -> Vec<usize> {
    (1..v.len()).filter(|&k| v[k] > v[k - 1]).map(|k| k + 1).collect()
}

fn criterion_5(run: &Run) -> Outcome {
    let rep = &run.solution.report;
    let Some(last) = rep.last() else {
        return outcome(false, "no iterations".into());
    };
    let errs_ok = last.err_phi < 1e-4 && last.err_c < 1e-4 && last.residual < 1e-4;
    let n = rep.iterations.len();
    let tail = |f: fn(&IterationRecord) -> f64| -> Vec<f64> { rep.iterations.iter().skip(3).map(f).collect() };
    let bad_phi: Vec<usize> = monotone_violations(&tail(|r| r.err_phi)).iter().map(|k| k + 3).collect();
    let bad_c: Vec<usize> = monotone_violations(&tail(|r| r.err_c)).iter().map(|k| k + 3).collect();
    let first = rep.iterations[0].err_phi.max(rep.iterations[0].err_c);
    let final_err = last.err_phi.max(last.err_c);
    let orders = (first / final_err).log10();
    let secs = run.solution.total_seconds;
    let pass = rep.converged() && errs_ok && n <= 500 && secs < 120.0 && bad_phi.is_empty() && bad_c.is_empty() && orders >= 6.0;
    outcome(
        pass,
        format!(
            "{} ({:.2} s); final errors {:.1e} {:.1e} R {:.1e}; {orders:.2} orders of decrease; increases after iteration 3 at k = {bad_phi:?} (err_phi), {bad_c:?} (err_c)",
            rep.message, secs, last.err_phi, last.err_c, last.residual
        ),
    )
}

fn criterion_6(run: &Run) -> Outcome {
    outcome(
        run.min_water > 0.0 && run.min_c >= 0.0,
        format!(
            "min water fraction {:.4}, min concentration {:.3e} over all iterates",
            run.min_water, run.min_c
        ),
    )
}

/// Indices of the blocks centered on the membrane surfaces.
fn surface_blocks(cs: &CurveSet, membrane: (f64, f64)) -> [usize; 2] {
    [cs.block_at(membrane.0).unwrap(), cs.block_at(membrane.1).unwrap()]
}

fn criterion_7(channel: &Channel, base: &Run) -> Outcome {
    let cfg0 = channel.config(0.0);
    let cfg10 = channel.config(10.0);
    let charged = channel.run(&cfg10, &channel.solvent, &LinearSolveOptions::default());
    if !charged.solution.report.converged() {
        return outcome(false, format!("sigma = 10 run: {}", charged.solution.report.message));
    }
    let c0 = channel.curves(&base.solution, &cfg0);
    let c10 = channel.curves(&charged.solution, &cfg10);
    let mut pass = true;
    let mut parts = Vec::new();
    for j in surface_blocks(&c0, cfg0.membrane_z) {
        for i in 0..2 {
            let (a, b) = (c0.concentrations[i][j], c10.concentrations[i][j]);
            let up = matches!((a, b), (Some(a), Some(b)) if b > a);
            pass &= up;
            parts.push(format!(
                "{} at z={}: {:.4} -> {:.4}",
                c0.species_names[i],
                c0.z[j],
                a.unwrap_or(f64::NAN),
                b.unwrap_or(f64::NAN)
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8(channel: &Channel, base: &Run) -> Outcome {
    let cfg = channel.config(0.0);
    let cs = channel.curves(&base.solution, &cfg);
    let (z1, z2) = cfg.membrane_z;
    let peak = |i: usize| {
        cs.blocks()
            .filter(|&j| cs.z[j] >= z1 - 1e-9 && cs.z[j] <= z2 + 1e-9)
            .filter_map(|j| cs.concentrations[i][j])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (cl, no3) = (peak(0), peak(1));
    outcome(cl > no3, format!("pore peaks Cl- {cl:.4}, NO3- {no3:.4} mol/L"))
}

fn criterion_9(channel: &Channel, base: &Run) -> Outcome {
    let cfg = channel.config(0.0);
    let check = |tol: f64| {
        let opts = LinearSolveOptions {
            cross_check: true,
            abs_tol: tol,
            rel_tol: tol,
            ..Default::default()
        };
        let r = channel.run(&cfg, &channel.solvent, &opts);
        r.solution.report.max_cross_check_diff.unwrap_or(f64::NAN)
    };
    let default_diff = check(1e-6);
    let tight_diff = check(1e-8);
    let _ = base;

    let fine = Channel::new(1.5);
    let nodes = fine.mesh.num_nodes();
    let gm = fine.run(&cfg, &fine.solvent, &LinearSolveOptions::default()).solution;
    let dr = fine.run(&cfg, &fine.solvent, &LinearSolveOptions::direct()).solution;
    let (tg, td) = (gm.report.linear_seconds, dr.report.linear_seconds);
    let agree = tight_diff <= 1e-6;
    outcome(
        agree && nodes >= 30_000 && tg < td && gm.report.converged() && dr.report.converged(),
        format!(
            "max relative gap {tight_diff:.1e} at linear tolerance 1e-8 ({default_diff:.1e} at the default 1e-6); {nodes} nodes: gmres-ilu {tg:.2} s vs direct {td:.2} s in linear solves"
        ),
    )
}

fn criterion_10(channel: &Channel, base: &Run) -> Outcome {
    let sol = &base.solution;
    let u = sol.solvent_potential();
    let mass = sol.submesh.lumped_mass();
    let g = sol.constants.gamma;
    let energy = |c: &[Vec<f64>]| energy_on_solvent(c, &u, &mass, &channel.solvent, g).unwrap();
    let e0 = energy(&sol.state.c);
    let mut worst = f64::INFINITY;
    let mut worst_total = f64::INFINITY;
    for i in 0..4 {
        for scale in [0.99, 1.01] {
            let mut c = sol.state.c.clone();
            c[i].iter_mut().for_each(|x| *x *= scale);
            let e = energy(&c);
            worst = worst.min(e.stationary_functional() - e0.stationary_functional());
            worst_total = worst_total.min(e.total - e0.total);
        }
    }
    outcome(
        worst >= 0.0,
        format!(
            "smallest change of 2F_es + F_id + F_ex over 8 perturbations {worst:.3e} k_BT (F total: {worst_total:.3e})"
        ),
    )
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |n: usize, name: &'static str, o: Outcome| {
        println!("criterion {n:2} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };

    report(1, "Jacobian vs central differences", criterion_1());
    report(2, "Newton oracle", criterion_2());
    let channel = Channel::new(3.0);
    report(3, "uniform-size equivalence", criterion_3(&channel));
    report(4, "FEM convergence", criterion_4());
    let base = channel.run(&channel.config(0.0), &channel.solvent, &LinearSolveOptions::default());
    println!(
        "   channel: {} nodes, {} solvent nodes, {} atoms",
        channel.mesh.num_nodes(),
        base.solution.submesh.num_nodes(),
        channel.case.atoms.len()
    );
    report(5, "end-to-end synthetic channel", criterion_5(&base));
    report(6, "feasibility", criterion_6(&base));
    report(7, "membrane-charge sign effect", criterion_7(&channel, &base));
    report(8, "size ordering in the pore", criterion_8(&channel, &base));
    report(9, "linear-solver agreement and timing", criterion_9(&channel, &base));
    report(10, "energy stationarity", criterion_10(&channel, &base));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("{} of {} criteria pass; failing: {failed:?}", results.len() - failed.len(), results.len());
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
