use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nusmpbic::io::read_vtk;
use nusmpbic::mesh::{extract_solvent_submesh, load_mesh};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nusmpbic"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, kind: &str, h: &str) -> PathBuf {
    let out = dir.join(kind);
    let o = run(&["generate-mesh", "--kind", kind, "--h", h, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

const NEUTRAL_CASE: &str = "\
box = -20 20 -20 20 -32 32
membrane_z = -12 12
[species]
name = A
z = -1
c_b = 0.1
volume = 20
[species]
name = B
z = 1
c_b = 0.1
volume = 20
";

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn neutral_slab_gives_flat_curves() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generate(dir.path(), "slab", "4");
    let cfg = dir.path().join("neutral.cfg");
    std::fs::write(&cfg, NEUTRAL_CASE).unwrap();
    let out = dir.path().join("res");
    let mesh = gen.join("slab.msh");
    let o = run(&["solve", "--config", s(&cfg), "--mesh", s(&mesh), "--out", s(&out), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("curves.csv"));
    // Equal sizes and no charges: c = c_b / (1 + γ v Σ c_b) everywhere.
    let flat = 0.1 / (1.0 + 6.022_140_76e-4 * 20.0 * 0.2);
    let last = rows.len() - 1;
    for (j, row) in rows.iter().enumerate() {
        let z: f64 = row[0].parse().unwrap();
        // Slabs strictly inside the membrane hold no solvent.
        if z.abs() < 12.0 - 2.5 {
            assert!(row[1..].iter().all(String::is_empty), "row {j}");
            continue;
        }
        for col in 1..=2 {
            let v: f64 = row[col].parse().unwrap();
            let expect = if j == 0 || j == last { 0.1 } else { flat };
            assert!((v - expect).abs() < 1e-12, "row {j}: {v}");
        }
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    }
    let iters = csv_rows(&out.join("iterations.csv"));
    assert!(iters.len() <= 2);
}

#[test]
fn missing_mesh_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, NEUTRAL_CASE).unwrap();
    let missing = dir.path().join("no_such.msh");
    let o = run(&["solve", "--config", s(&cfg), "--mesh", s(&missing), "--out", s(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such.msh"));
}

#[test]
fn malformed_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generate(dir.path(), "slab", "8");
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "box = 0 1\n").unwrap();
    let o = run(&["solve", "--config", s(&cfg), "--mesh", s(&gen.join("slab.msh")), "--out", s(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("c.cfg"));
    let o = run(&["solve", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn large_omega_is_reported_as_divergent() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generate(dir.path(), "channel", "3");
    let out = dir.path().join("res");
    let o = run(&[
        "solve",
        "--config",
        s(&gen.join("channel.cfg")),
        "--mesh",
        s(&gen.join("channel.msh")),
        "--pqr",
        s(&gen.join("channel.pqr")),
        "--out",
        s(&out),
        "--omega",
        "0.95",
        "--quiet",
    ]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("smaller omega"), "{err}");
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("termination,diverged"));
}

fn channel_run(gen: &Path, out: &Path) {
    let o = run(&[
        "solve",
        "--config",
        s(&gen.join("channel.cfg")),
        "--mesh",
        s(&gen.join("channel.msh")),
        "--pqr",
        s(&gen.join("channel.pqr")),
        "--out",
        s(out),
        "--quiet",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn channel_runs_are_deterministic_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generate(dir.path(), "channel", "3");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    channel_run(&gen, &a);
    channel_run(&gen, &b);
    for f in ["curves.csv", "solution.vtk"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    // Wall-clock seconds are the only column allowed to differ.
    let (ia, ib) = (csv_rows(&a.join("iterations.csv")), csv_rows(&b.join("iterations.csv")));
    assert_eq!(ia.len(), ib.len());
    for (ra, rb) in ia.iter().zip(&ib) {
        assert_eq!(ra[..5], rb[..5]);
    }
    let sa = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(sa, std::fs::read_to_string(b.join("summary.csv")).unwrap());
    assert!(sa.contains("F_total,"));

    let grid = read_vtk(a.join("solution.vtk")).unwrap();
    let mesh = load_mesh(gen.join("channel.msh")).unwrap();
    assert_eq!(grid.cells.len(), mesh.num_tets());
    let u = grid.point_field("u").unwrap();
    let parts = ["G", "Psi", "Phi_tilde"].map(|n| grid.point_field(n).unwrap());
    for k in 0..u.len() {
        let sum = parts[0][k] + parts[1][k] + parts[2][k];
        assert!((u[k] - sum).abs() <= 1e-14 * u[k].abs().max(1.0), "node {k}");
    }
    let (_, transfer) = extract_solvent_submesh(&mesh).unwrap();
    let mut expect = vec![0.0; mesh.num_nodes()];
    for mu in 0..transfer.solvent_len() {
        expect[transfer.parent(mu)] = 1.0;
    }
    let mask = grid.point_field("solvent_mask").unwrap();
    assert_eq!(mask, &expect[..]);
    let cl = grid.point_field("c_Cl-").unwrap();
    for k in 0..cl.len() {
        if mask[k] == 0.0 {
            assert_eq!(cl[k], 0.0);
        } else {
            assert!(cl[k] > 0.0);
        }
    }
}

#[test]
fn uniform_size_flag_makes_like_charges_coincide() {
    let dir = tempfile::tempdir().unwrap();
    let gen = generate(dir.path(), "channel", "4");
    let out = dir.path().join("res");
    let o = run(&[
        "solve",
        "--config",
        s(&gen.join("channel.cfg")),
        "--mesh",
        s(&gen.join("channel.msh")),
        "--pqr",
        s(&gen.join("channel.pqr")),
        "--out",
        s(&out),
        "--uniform-size",
        "--linear-solver",
        "direct",
        "--quiet",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let grid = read_vtk(out.join("solution.vtk")).unwrap();
    let f = |n: &str| grid.point_field(n).unwrap().to_vec();
    for (a, b) in [("c_Cl-", "c_NO3-"), ("c_K+", "c_Na+")] {
        for (x, y) in f(a).iter().zip(f(b)) {
            assert!((x - y).abs() <= 1e-8, "{a} vs {b}");
        }
    }
}
