//! CSV writers for the iteration report, the z-curves and the run summary.
//! Floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::io::curves::CurveSet;
use crate::model3::{SolverReport, Termination};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub const ITERATION_HEADER: &str = "k,err_phi,err_c,residual,newton_max_inner,seconds";

/// One row per outer iteration.
pub fn format_iteration_report(report: &SolverReport) -> String {
    let mut s = format!("{ITERATION_HEADER}\n");
    for r in &report.iterations {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.k,
            num(r.err_phi),
            num(r.err_c),
            num(r.residual),
            r.newton_max_inner,
            num(r.seconds)
        )
        .expect("write to string");
    }
    s
}

/// Columns `z`, `c_<name>` per species, `u_plus`, `u_minus`. Blocks without
/// solvent leave their cells empty.
pub fn format_curves(curves: &CurveSet) -> String {
    let mut s = String::from("z");
    for name in &curves.species_names {
        write!(s, ",c_{name}").expect("write to string");
    }
    s.push_str(",u_plus,u_minus\n");
    for (j, &z) in curves.z.iter().enumerate() {
        s.push_str(&num(z));
        for col in &curves.concentrations {
            write!(s, ",{}", opt(col[j])).expect("write to string");
        }
        writeln!(s, ",{},{}", opt(curves.u_plus[j]), opt(curves.u_minus[j])).expect("write to string");
    }
    s
}

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIterations => "max_iterations",
        Termination::Diverged => "diverged",
    }
}

/// `quantity,value` rows: outcome, iteration count, final errors and the
/// energy terms in k_BT.
pub fn format_summary(report: &SolverReport, energy: Option<&EnergyBreakdown>) -> String {
    let mut s = String::from("quantity,value\n");
    writeln!(s, "termination,{}", termination_name(report.termination)).expect("write to string");
    writeln!(s, "iterations,{}", report.iterations.len()).expect("write to string");
    if let Some(r) = report.last() {
        for (k, v) in [("err_phi", r.err_phi), ("err_c", r.err_c), ("residual", r.residual)] {
            writeln!(s, "{k},{}", num(v)).expect("write to string");
        }
    }
    if let Some(e) = energy {
        for (k, v) in [("F_es", e.es), ("F_id", e.id), ("F_ex", e.ex), ("F_total", e.total)] {
            writeln!(s, "{k},{}", num(v)).expect("write to string");
        }
    }
    s
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
