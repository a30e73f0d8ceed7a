use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};

use super::direct::SkylineLu;
use super::gmres::gmres;
use super::ilu::Ilu0;
use super::sparse::norm2;
use super::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMethod {
    /// Restarted GMRES preconditioned by zero-fill ILU.
    GmresIlu,
    /// Skyline LU after reverse Cuthill-McKee reordering.
    Direct,
}

impl FromStr for LinearMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmres-ilu" | "gmres_ilu" => Ok(LinearMethod::GmresIlu),
            "direct" => Ok(LinearMethod::Direct),
            _ => Err(Error::invalid(format!(
                "unknown linear solver `{s}` (expected gmres-ilu or direct)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveOptions {
    pub method: LinearMethod,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Also solve every system with the direct method and record the largest
    /// relative difference between the two solutions.
    pub cross_check: bool,
}

impl Default for LinearSolveOptions {
    fn default() -> Self {
        LinearSolveOptions {
            method: LinearMethod::GmresIlu,
            abs_tol: 1e-6,
            rel_tol: 1e-6,
            restart: 30,
            max_iter: 1000,
            cross_check: false,
        }
    }
}

impl LinearSolveOptions {
    pub fn direct() -> Self {
        LinearSolveOptions {
            method: LinearMethod::Direct,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("linear solver tolerances must be positive"));
        }
        if self.restart == 0 || self.max_iter == 0 {
            return Err(Error::invalid("restart and max_iter must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
    /// `‖x_gmres - x_direct‖∞ / ‖x_direct‖∞` when cross-checking.
    pub cross_check_diff: Option<f64>,
}

/// A system matrix with its preconditioner or factorization computed once
/// for repeated solves.
#[derive(Debug, Clone)]
pub struct PreparedSolver {
    matrix: CsrMatrix,
    options: LinearSolveOptions,
    ilu: Option<Ilu0>,
    lu: Option<SkylineLu>,
    setup_seconds: f64,
}

impl PreparedSolver {
    pub fn new(matrix: CsrMatrix, options: LinearSolveOptions) -> Result<Self> {
        options.validate()?;
        let start = Instant::now();
        let need_lu = options.method == LinearMethod::Direct || options.cross_check;
        let ilu = if options.method == LinearMethod::GmresIlu {
            Some(Ilu0::new(&matrix)?)
        } else {
            None
        };
        let lu = if need_lu {
            Some(SkylineLu::new(&matrix)?)
        } else {
            None
        };
        Ok(PreparedSolver {
            matrix,
            options,
            ilu,
            lu,
            setup_seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn options(&self) -> &LinearSolveOptions {
        &self.options
    }

    /// Time spent building the preconditioner or factorization.
    pub fn setup_seconds(&self) -> f64 {
        self.setup_seconds
    }

    pub fn solve(&self, b: &[f64], x0: Option<&[f64]>) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.matrix.dim();
        if b.len() != n || x0.is_some_and(|x| x.len() != n) {
            return Err(Error::invalid(format!(
                "right-hand side has length {}, system has dimension {n}",
                b.len()
            )));
        }
        let start = Instant::now();
        let o = &self.options;
        let target = o.abs_tol.max(o.rel_tol * norm2(b));
        let (x, iterations, residual) = match o.method {
            LinearMethod::GmresIlu => {
                let out = gmres(
                    &self.matrix,
                    self.ilu.as_ref(),
                    b,
                    x0,
                    target,
                    o.restart,
                    o.max_iter,
                )?;
                (out.x, out.iterations, out.residual)
            }
            LinearMethod::Direct => {
                let x = self.lu.as_ref().expect("factorized").solve(b);
                let r = residual_norm(&self.matrix, &x, b);
                if !r.is_finite() {
                    return Err(Error::LinearSolver {
                        iterations: 1,
                        residual: r,
                        reason: "direct solve produced non-finite values".into(),
                    });
                }
                (x, 1, r)
            }
        };
        let seconds = start.elapsed().as_secs_f64();
        let cross_check_diff = if o.cross_check {
            let xd = self.lu.as_ref().expect("factorized").solve(b);
            Some(relative_max_diff(&x, &xd))
        } else {
            None
        };
        Ok((
            x,
            SolveStats {
                iterations,
                residual,
                seconds,
                cross_check_diff,
            },
        ))
    }
}

pub fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>())
}

/// `‖x - reference‖∞ / ‖reference‖∞`, or the absolute difference when the
/// reference vanishes.
pub fn relative_max_diff(x: &[f64], reference: &[f64]) -> f64 {
    let diff = x
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// One-shot solve of `A x = b`.
pub fn solve_linear(a: &CsrMatrix, b: &[f64], options: &LinearSolveOptions) -> Result<Vec<f64>> {
    let solver = PreparedSolver::new(a.clone(), *options)?;
    solver.solve(b, None).map(|(x, _)| x)
}
