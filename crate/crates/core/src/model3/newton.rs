//! Per-node size constraint equations and their Newton solver.
//!
//! At a solvent node with potential `u` the concentrations `ξ` solve
//! `F̄_i(ξ) = ξ_i - c_i^b e^{e_i} W^{v_i/v0} = 0`, `W = 1 - γ Σ_j v_j ξ_j`,
//! with exponents `e_i = min(-Z_i u, M)`.

use crate::error::{Error, Result};
use crate::physics::SolventSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Stop once the Euclidean norm of the Newton step falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed to keep `W > 0`.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-8,
            max_iter: 50,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolve {
    pub xi: Vec<f64>,
    pub iterations: usize,
    /// Norm of every Newton step taken.
    pub step_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonFailure {
    pub residual: f64,
    pub reason: String,
}

impl NewtonFailure {
    pub fn at_node(self, node: usize) -> Error {
        Error::Newton {
            node,
            residual: self.residual,
            reason: self.reason,
        }
    }
}

/// `min(-Z_i u, M)` for every species.
pub fn guarded_exponents(u: f64, solvent: &SolventSpec, overflow_bound: f64) -> Vec<f64> {
    solvent
        .species
        .iter()
        .map(|s| (-(s.charge_number as f64) * u).min(overflow_bound))
        .collect()
}

/// `c_i^b e^{e_i}` for given exponents.
pub fn exp_factors(exponents: &[f64], solvent: &SolventSpec) -> Vec<f64> {
    solvent
        .species
        .iter()
        .zip(exponents)
        .map(|(s, e)| s.bulk_concentration * e.exp())
        .collect()
}

/// Water volume fraction `1 - γ Σ v_j ξ_j`.
pub fn water_fraction(xi: &[f64], solvent: &SolventSpec, gamma: f64) -> f64 {
    1.0 - gamma
        * solvent
            .species
            .iter()
            .zip(xi)
            .map(|(s, x)| s.ion_volume * x)
            .sum::<f64>()
}

/// `F̄(ξ)`; requires `W > 0`.
pub fn size_constraint_residual(
    xi: &[f64],
    factors: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
) -> Result<Vec<f64>> {
    let w = water_fraction(xi, solvent, gamma);
    if !(w > 0.0) {
        return Err(Error::invalid(format!("water fraction {w} is not positive")));
    }
    Ok(solvent
        .species
        .iter()
        .enumerate()
        .map(|(i, s)| xi[i] - factors[i] * w.powf(s.ion_volume / solvent.v0))
        .collect())
}

/// Jacobian of `F̄`: `δ_ij + γ (v_i v_j / v0) a_i W^{v_i/v0 - 1}` with
/// `a_i = c_i^b e^{e_i}`.
pub fn jacobian_entries(
    xi: &[f64],
    factors: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
) -> Result<Vec<Vec<f64>>> {
    let w = water_fraction(xi, solvent, gamma);
    if !(w > 0.0) {
        return Err(Error::invalid(format!("water fraction {w} is not positive")));
    }
    let n = solvent.len();
    let v0 = solvent.v0;
    let mut j = vec![vec![0.0; n]; n];
    for (i, si) in solvent.species.iter().enumerate() {
        let row = gamma * si.ion_volume / v0 * factors[i] * w.powf(si.ion_volume / v0 - 1.0);
        for (k, sk) in solvent.species.iter().enumerate() {
            j[i][k] = row * sk.ion_volume + if i == k { 1.0 } else { 0.0 };
        }
    }
    Ok(j)
}

/// Gaussian elimination with partial pivoting. Returns `None` for a
/// numerically singular matrix.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if !(a[piv][col].abs() > 1e-14 * scale) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Solves `J x = b` for the Jacobian at `xi`. `J = I + r vᵀ` with
/// `r_i = γ (v_i/v0) a_i W^{v_i/v0 - 1}`, so Sherman-Morrison applies and
/// stays accurate when the Boltzmann factors are huge.
pub fn jacobian_solve(
    xi: &[f64],
    factors: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
    b: &[f64],
) -> Option<Vec<f64>> {
    let w = water_fraction(xi, solvent, gamma);
    if !(w > 0.0) {
        return None;
    }
    let v0 = solvent.v0;
    let r: Vec<f64> = solvent
        .species
        .iter()
        .zip(factors)
        .map(|(s, a)| gamma * s.ion_volume / v0 * a * w.powf(s.ion_volume / v0 - 1.0))
        .collect();
    let vb: f64 = solvent.species.iter().zip(b).map(|(s, x)| s.ion_volume * x).sum();
    let vr: f64 = solvent.species.iter().zip(&r).map(|(s, x)| s.ion_volume * x).sum();
    let x: Vec<f64> = b.iter().zip(&r).map(|(bi, ri)| bi - ri * vb / (1.0 + vr)).collect();
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the size constraint equations at one node by Newton's method,
/// starting from `init` (which must satisfy `W > 0`).
pub fn newton_node_solve(
    exponents: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
    init: &[f64],
    options: &NewtonOptions,
) -> std::result::Result<NodeSolve, NewtonFailure> {
    let factors = exp_factors(exponents, solvent);
    if factors.iter().any(|f| !f.is_finite()) {
        return Err(NewtonFailure {
            residual: f64::INFINITY,
            reason: "Boltzmann factor overflow".into(),
        });
    }
    let mut xi = init.to_vec();
    if !(water_fraction(&xi, solvent, gamma) > 0.0) {
        return Err(NewtonFailure {
            residual: f64::NAN,
            reason: "initial guess violates water-volume positivity".into(),
        });
    }
    let mut step_norms = Vec::new();
    for it in 1..=options.max_iter {
        let f = size_constraint_residual(&xi, &factors, solvent, gamma).expect("feasible iterate");
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = jacobian_solve(&xi, &factors, solvent, gamma, &rhs).ok_or_else(|| NewtonFailure {
            residual: norm(&f),
            reason: "singular Jacobian".into(),
        })?;
        let mut t = 1.0;
        let mut trial: Vec<f64> = xi.iter().zip(&step).map(|(x, s)| x + s).collect();
        let mut halvings = 0;
        while !(water_fraction(&trial, solvent, gamma) > 0.0) {
            if halvings == options.max_halvings {
                return Err(NewtonFailure {
                    residual: norm(&f),
                    reason: format!("step left the feasible region after {halvings} halvings"),
                });
            }
            halvings += 1;
            t *= 0.5;
            trial = xi.iter().zip(&step).map(|(x, s)| x + t * s).collect();
        }
        let taken = t * norm(&step);
        step_norms.push(taken);
        xi = trial;
        if !taken.is_finite() {
            return Err(NewtonFailure {
                residual: taken,
                reason: "non-finite Newton step".into(),
            });
        }
        if taken < options.tol && halvings == 0 {
            return Ok(NodeSolve {
                xi,
                iterations: it,
                step_norms,
            });
        }
    }
    Err(NewtonFailure {
        residual: step_norms.last().copied().unwrap_or(f64::NAN),
        reason: format!("no convergence in {} iterations", options.max_iter),
    })
}

/// Solves the size constraints through the water fraction alone: with
/// `ξ_i = a_i W^{v_i/v0}`, `W` is the unique root in `(0, 1]` of
/// `W - 1 + γ Σ_i v_i a_i W^{v_i/v0}`, found by safeguarded Newton on
/// `s = ln W`. Used when Newton on `F̄` fails; near the exponent guard the
/// Boltzmann factors reach `1e19` and the direct iteration keeps stepping out
/// of the feasible region.
pub fn water_root_solve(
    exponents: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
) -> std::result::Result<NodeSolve, NewtonFailure> {
    let log_a: Vec<f64> = solvent
        .species
        .iter()
        .zip(exponents)
        .map(|(s, e)| s.bulk_concentration.ln() + e)
        .collect();
    let terms: Vec<(f64, f64)> = solvent
        .species
        .iter()
        .zip(&log_a)
        .map(|(sp, la)| ((gamma * sp.ion_volume).ln() + la, sp.ion_volume / solvent.v0))
        .collect();
    // φ(s), φ'(s) and the magnitude of the summands for a roundoff test.
    let phi = |s: f64| {
        let mut f = s.exp() - 1.0;
        let mut d = s.exp();
        let mut size = 1.0 + s.exp();
        for &(lc, p) in &terms {
            let t = (lc + p * s).exp();
            f += t;
            d += p * t;
            size += t;
        }
        (f, d, size)
    };
    let fail = |reason: &str| NewtonFailure {
        residual: f64::NAN,
        reason: reason.into(),
    };
    let (mut lo, mut hi) = (-1.0, 0.0);
    while phi(lo).0 >= 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -1e6 {
            return Err(fail("no bracket for the water fraction"));
        }
    }
    if phi(hi).0 < 0.0 {
        return Err(fail("no bracket for the water fraction"));
    }
    // φ is convex in s, so Newton from the right of the root never overshoots.
    let mut s = hi;
    let mut step_norms = Vec::new();
    for it in 1..=200 {
        let (f, d, size) = phi(s);
        let mut done = f.abs() <= 8.0 * f64::EPSILON * size;
        if !done {
            if f < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let mut next = s - f / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let taken = (next - s).abs();
            step_norms.push(taken);
            s = next;
            let small = 1e-15 * s.abs().max(1.0);
            done = taken <= small || hi - lo <= small;
        }
        if done {
            let xi = log_a
                .iter()
                .zip(&terms)
                .map(|(la, &(_, p))| (la + p * s).exp())
                .collect();
            return Ok(NodeSolve {
                xi,
                iterations: it,
                step_norms,
            });
        }
    }
    Err(fail("water fraction root did not converge"))
}

/// `c_i = c_i^b e^{e_i} / (1 + γ (v̄²/v0) Σ_j c_j^b e^{e_j})` with guarded
/// exponents. This is the exact solution of the size constraints when all
/// ion volumes equal `v0`, and the initial concentrations otherwise.
pub fn closed_form_node(exponents: &[f64], solvent: &SolventSpec, gamma: f64) -> Vec<f64> {
    let factors = exp_factors(exponents, solvent);
    let vbar = solvent.mean_volume();
    let denom = 1.0 + gamma * vbar * vbar / solvent.v0 * factors.iter().sum::<f64>();
    factors.iter().map(|a| a / denom).collect()
}
