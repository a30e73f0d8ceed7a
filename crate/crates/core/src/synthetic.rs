//! A self-contained test problem: a membrane slab pierced by a pore lined
//! with a charged protein shell, bathed in a mixture of four salts' ions.

use std::f64::consts::PI;

use crate::error::Result;
use crate::mesh::{generate_synthetic_channel, ChannelGeometry, LabeledMesh, ProteinShell};
use crate::physics::{BoxBounds, IonSpecies, ProblemConfig, SolventSpec};
use crate::singular_field::AtomSet;

/// Cl⁻, NO₃⁻, K⁺, Na⁺ at 0.1 mol/L each, volumes from the ionic radii
/// 1.81, 2.64, 1.33 and 0.95 Å.
pub fn four_species() -> SolventSpec {
    SolventSpec::new(vec![
        IonSpecies::from_radius("Cl-", -1, 0.1, 1.81).expect("valid"),
        IonSpecies::from_radius("NO3-", -1, 0.1, 2.64).expect("valid"),
        IonSpecies::from_radius("K+", 1, 0.1, 1.33).expect("valid"),
        IonSpecies::from_radius("Na+", 1, 0.1, 0.95).expect("valid"),
    ])
    .expect("valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCase {
    pub geometry: ChannelGeometry,
    pub atoms: AtomSet,
}

/// Membrane `-12 < z < 12` in the box `[-20, 20]² x [-32, 32]`, pore radius
/// 7 Å, protein shell out to 15 Å over `-18 < z < 18`.
pub fn channel_geometry(h: f64) -> ChannelGeometry {
    ChannelGeometry {
        bounds: BoxBounds::new([-20.0, -20.0, -32.0], [20.0, 20.0, 32.0]).expect("valid box"),
        membrane_z: (-12.0, 12.0),
        axis: (0.0, 0.0),
        pore_radius: 7.0,
        protein: Some(ProteinShell {
            outer_radius: 15.0,
            z_range: (-18.0, 18.0),
        }),
        h,
    }
}

/// `count` point charges on a helix buried in the protein wall at the height
/// of the membrane, away from the pore: alternating +0.5 and -0.5 with every
/// fifth charge flipped to positive, so the net charge is positive.
/// Positions avoid the grid planes of the default meshes.
pub fn channel_atoms(geometry: &ChannelGeometry, count: usize) -> AtomSet {
    let shell = geometry.protein.expect("channel has a protein shell");
    let r_in = geometry.pore_radius + 0.55 * (shell.outer_radius - geometry.pore_radius);
    let r_out = geometry.pore_radius + 0.8 * (shell.outer_radius - geometry.pore_radius);
    let (m0, m1) = geometry.membrane_z;
    let (z0, z1) = (m0.max(shell.z_range.0), m1.min(shell.z_range.1));
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut pos = Vec::with_capacity(count);
    let mut z = Vec::with_capacity(count);
    for k in 0..count {
        let t = (k as f64 + 0.5) / count as f64;
        let theta = 0.37 + golden * k as f64;
        let r = if k % 2 == 0 { r_out } else { r_in };
        let zk = z0 + (z1 - z0) * (0.15 + 0.7 * t) + 0.113;
        pos.push([
            geometry.axis.0 + r * theta.cos(),
            geometry.axis.1 + r * theta.sin(),
            zk,
        ]);
        z.push(if k % 2 == 0 || k % 5 == 4 { 0.5 } else { -0.5 });
    }
    AtomSet::new(pos, z, vec![1.5; count]).expect("valid atoms")
}

impl ChannelCase {
    /// The default test channel with 20 charges and mesh size `h`.
    pub fn new(h: f64) -> Self {
        let geometry = channel_geometry(h);
        let atoms = channel_atoms(&geometry, 20);
        ChannelCase { geometry, atoms }
    }

    pub fn mesh(&self) -> Result<LabeledMesh> {
        generate_synthetic_channel(&self.geometry)
    }

    pub fn config(&self) -> ProblemConfig {
        ProblemConfig::new(self.geometry.bounds, self.geometry.membrane_z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn species_volumes() {
        let s = four_species();
        let v: Vec<f64> = s.species.iter().map(|x| x.ion_volume).collect();
        for (a, b) in v.iter().zip([24.8384, 77.0727, 9.8547, 3.5914]) {
            assert!((a - b).abs() < 5e-4, "{a} vs {b}");
        }
        assert!((s.mean_volume() - 28.8393).abs() < 5e-4);
        assert_eq!(s.v0, v[3]);
        s.check_electroneutrality().unwrap();
    }

    #[test]
    fn atoms_sit_inside_the_protein() {
        let case = ChannelCase::new(3.0);
        let m = case.mesh().unwrap();
        assert!(case.atoms.atoms_outside_protein(&m).is_empty());
        assert!(case.atoms.total_charge() > 0.0);
        let n = m.num_nodes();
        assert!((4000..7000).contains(&n), "{n}");
    }
}
