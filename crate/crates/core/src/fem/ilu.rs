use crate::error::{Error, Result};

use super::CsrMatrix;

/// Zero-fill incomplete LU factorization sharing the pattern of the input.
/// `L` has a unit diagonal and is stored below the diagonal, `U` on and above.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let rp = a.row_ptr().to_vec();
        let ci = a.col_idx().to_vec();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in rp[i]..rp[i + 1] {
                if ci[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::LinearSolver {
                    iterations: 0,
                    residual: f64::NAN,
                    reason: format!("ILU(0): row {i} has no diagonal entry"),
                });
            }
        }
        let scale = a.max_abs();
        let vals = lu.values_mut();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = k;
            }
            for kk in rp[i]..diag[i] {
                let k = ci[kk];
                let pivot = vals[diag[k]];
                let lik = vals[kk] / pivot;
                vals[kk] = lik;
                for jj in diag[k] + 1..rp[k + 1] {
                    let p = pos[ci[jj]];
                    if p != usize::MAX {
                        vals[p] -= lik * vals[jj];
                    }
                }
            }
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = usize::MAX;
            }
            let d = vals[diag[i]];
            if !(d.abs() > 1e-14 * scale) {
                return Err(Error::LinearSolver {
                    iterations: 0,
                    residual: f64::NAN,
                    reason: format!("ILU(0): zero pivot in row {i}"),
                });
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    /// Solves `L U x = b` in place.
    pub fn apply(&self, x: &mut [f64]) {
        let n = self.lu.dim();
        let rp = self.lu.row_ptr();
        let ci = self.lu.col_idx();
        let v = self.lu.values();
        for i in 0..n {
            let mut s = x[i];
            for k in rp[i]..self.diag[i] {
                s -= v[k] * x[ci[k]];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                s -= v[k] * x[ci[k]];
            }
            x[i] = s / v[self.diag[i]];
        }
    }
}
