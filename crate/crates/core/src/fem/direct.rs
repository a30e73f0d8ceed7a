use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::CsrMatrix;

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of `a`.
/// `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, mark: &mut Vec<usize>, stamp: usize| -> (usize, usize) {
        // returns (last node of the deepest level with minimum degree, depth)
        let mut queue = VecDeque::from([(start, 0usize)]);
        mark[start] = stamp;
        let mut best = (start, 0);
        while let Some((v, d)) = queue.pop_front() {
            if d > best.1 || (d == best.1 && degree[v] < degree[best.0]) {
                best = (v, d);
            }
            for &w in &adj[v] {
                if mark[w] != stamp {
                    mark[w] = stamp;
                    queue.push_back((w, d + 1));
                }
            }
        }
        best
    };

    let mut mark = vec![usize::MAX; n];
    let mut stamp = 0;
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| (degree[v], v));
    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start node
        let mut start = seed;
        let mut depth = 0;
        for _ in 0..4 {
            stamp += 1;
            let (far, d) = bfs_levels(start, &mut mark, stamp);
            if d <= depth {
                break;
            }
            depth = d;
            start = far;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// LU factorization without pivoting in skyline (variable band) storage.
/// The matrix is reordered by RCM first; the profile is taken symmetric so
/// lower rows and upper columns share their first index.
#[derive(Debug, Clone)]
pub struct SkylineLu {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for &j in a.row(i).0 {
                let (pi, pj) = (inv[i], inv[j]);
                let (hi, lo) = if pi > pj { (pi, pj) } else { (pj, pi) };
                first[hi] = first[hi].min(lo);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let len = offset[n];
        let mut lower = vec![0.0; len];
        let mut upper = vec![0.0; len];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi == pj {
                    diag[pi] += v;
                } else if pj < pi {
                    lower[offset[pi] + pj - first[pi]] += v;
                } else {
                    upper[offset[pj] + pi - first[pj]] += v;
                }
            }
        }
        let scale = a.max_abs();
        for i in 0..n {
            let fi = first[i];
            let oi = offset[i];
            for j in fi..i {
                let fj = first[j];
                let oj = offset[j];
                let k0 = fi.max(fj);
                let len = j - k0;
                // u_ji: column i of U, row j
                let s_u = dot_slices(
                    &lower[oj + k0 - fj..oj + k0 - fj + len],
                    &upper[oi + k0 - fi..oi + k0 - fi + len],
                );
                upper[oi + j - fi] -= s_u;
                // l_ij: row i of L, column j
                let s_l = dot_slices(
                    &lower[oi + k0 - fi..oi + k0 - fi + len],
                    &upper[oj + k0 - fj..oj + k0 - fj + len],
                );
                lower[oi + j - fi] = (lower[oi + j - fi] - s_l) / diag[j];
            }
            let len = i - fi;
            diag[i] -= dot_slices(&lower[oi..oi + len], &upper[oi..oi + len]);
            if !(diag[i].abs() > 1e-12 * scale) {
                return Err(Error::LinearSolver {
                    iterations: 0,
                    residual: f64::NAN,
                    reason: format!("direct solve: zero pivot at row {} (singular matrix)", perm[i]),
                });
            }
        }
        Ok(SkylineLu {
            perm,
            first,
            offset,
            lower,
            upper,
            diag,
        })
    }

    /// Number of stored off-diagonal entries in each triangle.
    pub fn profile_len(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let oi = self.offset[i];
            y[i] -= dot_slices(&self.lower[oi..oi + i - fi], &y[fi..i]);
        }
        for i in (0..n).rev() {
            y[i] /= self.diag[i];
            let fi = self.first[i];
            let oi = self.offset[i];
            let yi = y[i];
            for (k, u) in self.upper[oi..oi + i - fi].iter().enumerate() {
                y[fi + k] -= u * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[inline]
fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
