use crate::error::{Error, Result};

use super::ilu::Ilu0;
use super::sparse::{dot, norm2};
use super::CsrMatrix;

pub(crate) struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Restarted GMRES with right preconditioning, so the monitored residual is
/// the residual of the original system. Converged once `‖b - A x‖₂ ≤ target`.
pub(crate) fn gmres(
    a: &CsrMatrix,
    precond: Option<&Ilu0>,
    b: &[f64],
    x0: Option<&[f64]>,
    target: f64,
    restart: usize,
    max_iter: usize,
) -> Result<GmresOutcome> {
    let n = a.dim();
    let m = restart.max(1);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut total = 0;

    let residual = |x: &[f64], r: &mut Vec<f64>| {
        a.matvec_into(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        norm2(r)
    };

    let mut beta = residual(&x, &mut r);
    if !beta.is_finite() {
        return Err(Error::LinearSolver {
            iterations: 0,
            residual: beta,
            reason: "non-finite right-hand side or initial guess".into(),
        });
    }
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];

    loop {
        if beta <= target {
            return Ok(GmresOutcome {
                x,
                iterations: total,
                residual: beta,
            });
        }
        if total >= max_iter {
            return Err(Error::LinearSolver {
                iterations: total,
                residual: beta,
                reason: format!("GMRES did not reach {target:.3e} within {max_iter} iterations"),
            });
        }
        v.clear();
        z.clear();
        v.push(r.iter().map(|ri| ri / beta).collect());
        g.iter_mut().for_each(|gi| *gi = 0.0);
        g[0] = beta;
        let mut k = 0;
        while k < m && total < max_iter {
            let mut zk = v[k].clone();
            if let Some(p) = precond {
                p.apply(&mut zk);
            }
            a.matvec_into(&zk, &mut w);
            z.push(zk);
            for j in 0..=k {
                let hjk = dot(&w, &v[j]);
                h[j][k] = hjk;
                for (wi, vi) in w.iter_mut().zip(&v[j]) {
                    *wi -= hjk * vi;
                }
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 || !d.is_finite() {
                return Err(Error::LinearSolver {
                    iterations: total,
                    residual: beta,
                    reason: "GMRES breakdown (singular Hessenberg)".into(),
                });
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            if g[k].abs() <= target || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // back substitution for the k-dimensional least-squares problem
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&z[j]) {
                *xi += yj * zi;
            }
        }
        beta = residual(&x, &mut r);
        if !beta.is_finite() {
            return Err(Error::LinearSolver {
                iterations: total,
                residual: beta,
                reason: "GMRES produced a non-finite iterate".into(),
            });
        }
    }
}
