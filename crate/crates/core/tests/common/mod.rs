#![allow(dead_code)]

use std::f64::consts::PI;

use nusmpbic::fem::{
    assemble_interface_load, assemble_stiffness, assemble_volume_load, DirichletBc,
    LinearSolveOptions, Permittivities, PreparedSolver,
};
use nusmpbic::geometry::{self, Point3};
use nusmpbic::mesh::{structured_box, FacetTag, LabeledMesh, Region};

const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

/// Collapsed Gauss product rule on a tet: barycentric points and weights
/// summing to one.
pub fn tet_rule() -> Vec<([f64; 4], f64)> {
    let mut out = Vec::new();
    for &(a, wa) in &GL4 {
        for &(b, wb) in &GL4 {
            for &(c, wc) in &GL4 {
                let (u, v, w) = ((a + 1.0) / 2.0, (b + 1.0) / 2.0, (c + 1.0) / 2.0);
                let l1 = u;
                let l2 = v * (1.0 - u);
                let l3 = w * (1.0 - u) * (1.0 - v);
                let jac = (1.0 - u).powi(2) * (1.0 - v);
                // 6 * (1/8 from the interval map) * weights * jacobian
                let weight = 6.0 * wa * wb * wc * jac / 8.0;
                out.push(([1.0 - l1 - l2 - l3, l1, l2, l3], weight));
            }
        }
    }
    out
}

pub fn exact(p: Point3) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).sin() * p[2] * p[2]
}

fn grad_exact(p: Point3) -> Point3 {
    let (sx, cx) = (PI * p[0]).sin_cos();
    let (sy, cy) = (PI * p[1]).sin_cos();
    let z2 = p[2] * p[2];
    [PI * cx * sy * z2, PI * sx * cy * z2, 2.0 * sx * sy * p[2]]
}

fn source(p: Point3) -> f64 {
    let s = (PI * p[0]).sin() * (PI * p[1]).sin();
    s * (2.0 * PI * PI * p[2] * p[2] - 2.0)
}

pub fn unit_grid(n: usize) -> LabeledMesh {
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    structured_box(&xs, &xs, &xs, |_| Region::Solvent).unwrap()
}

/// P1 solution of `-Δu = f` on the unit cube with Dirichlet data on the z
/// faces and Neumann data on the sides, and its L2 error.
pub fn manufactured_error(n: usize) -> f64 {
    let m = unit_grid(n);
    let a = assemble_stiffness(&m, Permittivities::uniform(1.0)).unwrap();
    let mut b = assemble_volume_load(&m, source);
    let g = assemble_interface_load(&m, FacetTag::Neumann, |f, x| {
        geometry::dot(m.facet_normal(f), grad_exact(x))
    })
    .unwrap();
    for (bi, gi) in b.iter_mut().zip(&g) {
        *bi += gi;
    }
    let bc = DirichletBc::on_box_faces(&m);
    let values: Vec<f64> = m.nodes().iter().map(|&p| exact(p)).collect();
    let rhs = bc.eliminate_rhs(&a, &b, &values);
    let opts = LinearSolveOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_iter: 5000,
        ..Default::default()
    };
    let solver = PreparedSolver::new(bc.eliminate_matrix(&a), opts).unwrap();
    let (mut uh, _) = solver.solve(&rhs, None).unwrap();
    bc.impose(&mut uh, &values);

    let rule = tet_rule();
    let mut err2 = 0.0;
    for t in 0..m.num_tets() {
        let p = m.tet_points(t);
        let nodes = m.tets()[t].nodes;
        let vol = m.volumes()[t];
        for (l, w) in &rule {
            let mut x = [0.0; 3];
            let mut u = 0.0;
            for k in 0..4 {
                x = geometry::add(x, geometry::scale(p[k], l[k]));
                u += l[k] * uh[nodes[k]];
            }
            err2 += w * vol * (u - exact(x)).powi(2);
        }
    }
    err2.sqrt()
}

/// Observed orders between consecutive refinements.
pub fn observed_orders(ns: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let errs: Vec<f64> = ns.iter().map(|&n| manufactured_error(n)).collect();
    let orders = errs
        .windows(2)
        .zip(ns.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    (errs, orders)
}

pub mod cases;
pub mod oracle;
