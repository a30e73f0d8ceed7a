//! z-profiles of the solution: averages of the concentrations and of the
//! positive and negative parts of `u` over horizontal slabs of the solvent
//! mesh.
//!
//! Slab centers are spaced `(Z2 - Z1) / round((Z2 - Z1) / h̄)` apart and
//! anchored at `Z1`, so both membrane surfaces are centers; every slab is `h̄`
//! thick and lies inside `[L_z1, L_z2]`. Tets are clipped exactly at the slab
//! planes and each piece is integrated with the vertex rule, which is exact
//! for the P1 concentrations.

use crate::error::{Error, Result};
use crate::geometry::{signed_volume, Point3};
use crate::mesh::{SolventSubmesh, TransferOps};
use crate::physics::{ProblemConfig, SolventSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    /// `L_z1`, the slab centers, `L_z2`.
    pub z: Vec<f64>,
    /// Per species, one value per entry of `z`; `None` for slabs without
    /// solvent.
    pub concentrations: Vec<Vec<Option<f64>>>,
    pub u_plus: Vec<Option<f64>>,
    pub u_minus: Vec<Option<f64>>,
    /// Solvent volume of each slab (slab centers only).
    pub block_volumes: Vec<f64>,
    pub species_names: Vec<String>,
}

impl CurveSet {
    /// Indices into `z` of the slabs (excluding the two endpoints).
    pub fn blocks(&self) -> std::ops::Range<usize> {
        1..self.z.len() - 1
    }

    /// Index into `z` of the slab centered at `z0`.
    pub fn block_at(&self, z0: f64) -> Option<usize> {
        let tol = 1e-9 * (1.0 + z0.abs());
        self.blocks().find(|&j| (self.z[j] - z0).abs() <= tol)
    }
}

/// Slab centers for the box `[z_lo, z_hi]` and membrane `(z1, z2)`.
pub fn slab_centers(z_lo: f64, z_hi: f64, membrane: (f64, f64), hbar: f64) -> Result<Vec<f64>> {
    let (z1, z2) = membrane;
    if !(hbar > 0.0) || !(z1 < z2) || !(z_lo < z1 && z2 < z_hi) {
        return Err(Error::invalid(format!(
            "slab width {hbar} and membrane ({z1}, {z2}) must be positive and inside ({z_lo}, {z_hi})"
        )));
    }
    let m = ((z2 - z1) / hbar).round().max(1.0);
    let step = (z2 - z1) / m;
    let eps = 1e-9 * (z_hi - z_lo);
    let lo = z_lo + 0.5 * hbar - eps;
    let hi = z_hi - 0.5 * hbar + eps;
    let k_min = ((lo - z1) / step).ceil() as i64;
    let k_max = ((hi - z1) / step).floor() as i64;
    Ok((k_min..=k_max).map(|k| z1 + k as f64 * step).collect())
}

#[derive(Clone)]
struct Vertex {
    p: Point3,
    f: Vec<f64>,
}

fn lerp(a: &Vertex, b: &Vertex, t: f64) -> Vertex {
    Vertex {
        p: [
            a.p[0] + t * (b.p[0] - a.p[0]),
            a.p[1] + t * (b.p[1] - a.p[1]),
            a.p[2] + t * (b.p[2] - a.p[2]),
        ],
        f: a.f.iter().zip(&b.f).map(|(x, y)| x + t * (y - x)).collect(),
    }
}

fn prism(a: [Vertex; 3], b: [Vertex; 3]) -> Vec<[Vertex; 4]> {
    let [a0, a1, a2] = a;
    let [b0, b1, b2] = b;
    vec![
        [a0, a1.clone(), a2.clone(), b0.clone()],
        [a1, a2.clone(), b0.clone(), b1.clone()],
        [a2, b0, b1, b2],
    ]
}

/// Part of a tet where `d(z) >= 0`, as tets. `d` is affine in z.
fn clip(tet: [Vertex; 4], d: impl Fn(f64) -> f64) -> Vec<[Vertex; 4]> {
    let dist: Vec<f64> = tet.iter().map(|v| d(v.p[2])).collect();
    let (inside, outside): (Vec<usize>, Vec<usize>) = (0..4).partition(|&i| dist[i] >= 0.0);
    let cut = |i: usize, o: usize| lerp(&tet[i], &tet[o], dist[i] / (dist[i] - dist[o]));
    match inside.len() {
        4 => vec![tet],
        0 => Vec::new(),
        1 => {
            let p = inside[0];
            vec![[
                tet[p].clone(),
                cut(p, outside[0]),
                cut(p, outside[1]),
                cut(p, outside[2]),
            ]]
        }
        2 => {
            let (p, q) = (inside[0], inside[1]);
            let (r, s) = (outside[0], outside[1]);
            prism(
                [tet[p].clone(), cut(p, r), cut(p, s)],
                [tet[q].clone(), cut(q, r), cut(q, s)],
            )
        }
        _ => {
            let s = outside[0];
            let [p, q, r] = [inside[0], inside[1], inside[2]];
            prism(
                [tet[p].clone(), tet[q].clone(), tet[r].clone()],
                [cut(p, s), cut(q, s), cut(r, s)],
            )
        }
    }
}

/// Block averages of `c_i`, `u⁺ = (u + |u|)/2` and `u⁻ = (u - |u|)/2` with
/// the endpoint values `c_i^b` and `u_b`, `u_t` at `L_z1` and `L_z2`.
pub fn block_average_curves(
    c: &[Vec<f64>],
    u_box: &[f64],
    submesh: &SolventSubmesh,
    transfer: &TransferOps,
    solvent: &SolventSpec,
    config: &ProblemConfig,
    hbar: f64,
) -> Result<CurveSet> {
    let n_h = submesh.num_nodes();
    if c.len() != solvent.len() || c.iter().any(|ci| ci.len() != n_h) {
        return Err(Error::invalid("concentration array has the wrong shape"));
    }
    let u = transfer.restrict(u_box)?;
    let centers = slab_centers(config.bounds.min[2], config.bounds.max[2], config.membrane_z, hbar)?;
    let ns = solvent.len();
    let m = centers.len();
    // Per block: volume, ∫c_i, ∫u⁺, ∫u⁻.
    let mut vol = vec![0.0; m];
    let mut sums = vec![vec![0.0; ns + 2]; m];
    let half = 0.5 * hbar;
    for tet in submesh.tets() {
        let verts: [Vertex; 4] = tet.map(|v| Vertex {
            p: submesh.nodes()[v],
            f: c.iter().map(|ci| ci[v]).chain(std::iter::once(u[v])).collect(),
        });
        let zmin = verts.iter().map(|v| v.p[2]).fold(f64::INFINITY, f64::min);
        let zmax = verts.iter().map(|v| v.p[2]).fold(f64::NEG_INFINITY, f64::max);
        for (j, &zc) in centers.iter().enumerate() {
            let (a, b) = (zc - half, zc + half);
            if zmax <= a || zmin >= b {
                continue;
            }
            for lower in clip(verts.clone(), |z| z - a) {
                for piece in clip(lower, |z| b - z) {
                    let v = signed_volume(piece[0].p, piece[1].p, piece[2].p, piece[3].p).abs();
                    if v == 0.0 {
                        continue;
                    }
                    vol[j] += v;
                    for k in 0..ns {
                        sums[j][k] += v * piece.iter().map(|x| x.f[k]).sum::<f64>() / 4.0;
                    }
                    let up: f64 = piece.iter().map(|x| 0.5 * (x.f[ns] + x.f[ns].abs())).sum();
                    let um: f64 = piece.iter().map(|x| 0.5 * (x.f[ns] - x.f[ns].abs())).sum();
                    sums[j][ns] += v * up / 4.0;
                    sums[j][ns + 1] += v * um / 4.0;
                }
            }
        }
    }
    let avg = |j: usize, k: usize| (vol[j] > 0.0).then(|| sums[j][k] / vol[j]);
    let mut z = vec![config.bounds.min[2]];
    z.extend(&centers);
    z.push(config.bounds.max[2]);
    let concentrations = solvent
        .species
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut col = vec![Some(s.bulk_concentration)];
            col.extend((0..m).map(|j| avg(j, k)));
            col.push(Some(s.bulk_concentration));
            col
        })
        .collect();
    let part = |k: usize| {
        let mut col = vec![Some(config.u_b)];
        col.extend((0..m).map(|j| avg(j, k)));
        col.push(Some(config.u_t));
        col
    };
    Ok(CurveSet {
        z,
        concentrations,
        u_plus: part(ns),
        u_minus: part(ns + 1),
        block_volumes: vol,
        species_names: solvent.species.iter().map(|s| s.name.clone()).collect(),
    })
}
