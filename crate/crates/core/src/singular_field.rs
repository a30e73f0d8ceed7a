//! Closed-form potential of the atomic point charges in a uniform medium of
//! permittivity `ε_p`, and its gradient.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{self, Point3};
use crate::mesh::{LabeledMesh, Region};

/// Minimum distance between an evaluation point and an atom center, Å.
pub const COLLISION_DISTANCE: f64 = 1e-8;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomSet {
    pub positions: Vec<Point3>,
    /// Charge numbers in units of the elementary charge.
    pub charges: Vec<f64>,
    /// Radii, Å. Carried for diagnostics only.
    pub radii: Vec<f64>,
}

impl AtomSet {
    pub fn new(positions: Vec<Point3>, charges: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if positions.len() != charges.len() || positions.len() != radii.len() {
            return Err(Error::invalid("atom positions, charges and radii differ in length"));
        }
        for (j, (p, (&z, &r))) in positions.iter().zip(charges.iter().zip(&radii)).enumerate() {
            if p.iter().any(|c| !c.is_finite()) || !z.is_finite() || !(r >= 0.0) {
                return Err(Error::invalid(format!("atom {j} has invalid data")));
            }
        }
        Ok(AtomSet {
            positions,
            charges,
            radii,
        })
    }

    pub fn empty() -> Self {
        AtomSet::default()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_charge(&self) -> f64 {
        self.charges.iter().sum()
    }

    /// Copy with every charge multiplied by `s`.
    pub fn scaled(&self, s: f64) -> AtomSet {
        AtomSet {
            charges: self.charges.iter().map(|z| z * s).collect(),
            ..self.clone()
        }
    }

    /// Indices of atoms that do not lie inside a protein tet of `mesh`.
    pub fn atoms_outside_protein(&self, mesh: &LabeledMesh) -> Vec<usize> {
        let protein: Vec<usize> = (0..mesh.num_tets())
            .filter(|&t| mesh.tets()[t].region == Region::Protein)
            .collect();
        (0..self.len())
            .filter(|&j| {
                !protein
                    .iter()
                    .any(|&t| point_in_tet(self.positions[j], mesh.tet_points(t)))
            })
            .collect()
    }
}

fn point_in_tet(x: Point3, p: [Point3; 4]) -> bool {
    let vol = geometry::signed_volume(p[0], p[1], p[2], p[3]);
    let tol = -1e-12 * vol.abs();
    let faces = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];
    faces.iter().enumerate().all(|(k, f)| {
        let sub = geometry::signed_volume(p[f[0]], p[f[1]], p[f[2]], x);
        let reference = geometry::signed_volume(p[f[0]], p[f[1]], p[f[2]], p[k]);
        sub * reference.signum() >= tol
    })
}

fn prefactor(alpha: f64, eps_p: f64) -> Result<f64> {
    if !(alpha > 0.0 && eps_p > 0.0) {
        return Err(Error::invalid("alpha and eps_p must be positive"));
    }
    Ok(alpha / (4.0 * PI * eps_p))
}

fn check_distance(atom: usize, point: usize, d: f64) -> Result<()> {
    if d <= COLLISION_DISTANCE {
        return Err(Error::Singularity {
            atom,
            point,
            distance: d,
        });
    }
    Ok(())
}

/// `G(r) = α/(4π ε_p) Σ_j z_j / |r - r_j|` at each point.
pub fn eval_g(atoms: &AtomSet, alpha: f64, eps_p: f64, points: &[Point3]) -> Result<Vec<f64>> {
    let c = prefactor(alpha, eps_p)?;
    points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut s = 0.0;
            for (j, (&r, &z)) in atoms.positions.iter().zip(&atoms.charges).enumerate() {
                let d = geometry::norm(geometry::sub(x, r));
                check_distance(j, i, d)?;
                s += z / d;
            }
            Ok(c * s)
        })
        .collect()
}

/// `∇G(r) = -α/(4π ε_p) Σ_j z_j (r - r_j) / |r - r_j|³` at each point.
pub fn eval_grad_g(
    atoms: &AtomSet,
    alpha: f64,
    eps_p: f64,
    points: &[Point3],
) -> Result<Vec<Point3>> {
    let c = prefactor(alpha, eps_p)?;
    points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut g = [0.0; 3];
            for (j, (&r, &z)) in atoms.positions.iter().zip(&atoms.charges).enumerate() {
                let dv = geometry::sub(x, r);
                let d = geometry::norm(dv);
                check_distance(j, i, d)?;
                g = geometry::add(g, geometry::scale(dv, -z / (d * d * d)));
            }
            Ok(geometry::scale(g, c))
        })
        .collect()
}
