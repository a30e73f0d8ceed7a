//! Structured tetrahedral meshes: tensor grids split six tets per cell, and a
//! synthetic membrane-channel geometry built on top of them.

use super::{LabeledMesh, Region, Tet};
use crate::error::{Error, Result};
use crate::geometry::{self, Point3};
use crate::physics::BoxBounds;

/// Tensor-product grid on the given breakpoints, each cell split into six
/// tets sharing its main diagonal. The split is the same in every cell, so
/// neighbouring cells share their face triangulations. `region` is called
/// with each tet centroid.
pub fn structured_box(
    xs: &[f64],
    ys: &[f64],
    zs: &[f64],
    region: impl Fn(Point3) -> Region,
) -> Result<LabeledMesh> {
    for (name, v) in [("x", xs), ("y", ys), ("z", zs)] {
        if v.len() < 2 || v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(format!(
                "{name} breakpoints must be strictly increasing with at least two entries"
            )));
        }
    }
    let (nx, ny, nz) = (xs.len(), ys.len(), zs.len());
    let mut nodes = Vec::with_capacity(nx * ny * nz);
    for &z in zs {
        for &y in ys {
            for &x in xs {
                nodes.push([x, y, z]);
            }
        }
    }
    let id = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * (nx - 1) * (ny - 1) * (nz - 1));
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corner = |bits: usize| id(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1));
                for p in PERMS {
                    let b1 = 1 << p[0];
                    let b2 = b1 | (1 << p[1]);
                    let tn = [corner(0), corner(b1), corner(b2), corner(7)];
                    let c = geometry::centroid(tn.map(|v| nodes[v]));
                    tets.push(Tet {
                        nodes: tn,
                        region: region(c),
                    });
                }
            }
        }
    }
    LabeledMesh::from_tets(nodes, tets)
}

/// Annular protein shell lining the pore between `pore_radius` and
/// `outer_radius`, spanning `z_range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProteinShell {
    pub outer_radius: f64,
    pub z_range: (f64, f64),
}

/// Box with a membrane slab pierced by a cylindrical pore along z, optionally
/// lined by a protein shell.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGeometry {
    pub bounds: BoxBounds,
    pub membrane_z: (f64, f64),
    /// Pore axis position in the xy-plane.
    pub axis: (f64, f64),
    pub pore_radius: f64,
    pub protein: Option<ProteinShell>,
    /// Target edge length, Å.
    pub h: f64,
}

impl ChannelGeometry {
    fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        let (z1, z2) = self.membrane_z;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::invalid("mesh size h must be positive"));
        }
        if !(z1 < z2 && z1 > b.min[2] && z2 < b.max[2]) {
            return Err(Error::invalid(format!(
                "membrane ({z1}, {z2}) must satisfy Lz1 < Z1 < Z2 < Lz2"
            )));
        }
        if !(self.pore_radius >= 0.0) {
            return Err(Error::invalid("pore radius must be non-negative"));
        }
        let (ax, ay) = self.axis;
        let room = [ax - b.min[0], b.max[0] - ax, ay - b.min[1], b.max[1] - ay]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let outer = self.protein.map_or(self.pore_radius, |p| p.outer_radius);
        if !(room > 0.0) || outer >= room {
            return Err(Error::invalid(format!(
                "pore/protein radius {outer} does not fit in the box around axis ({ax}, {ay})"
            )));
        }
        if let Some(p) = self.protein {
            if !(p.outer_radius > self.pore_radius) {
                return Err(Error::invalid(
                    "protein shell radius must exceed the pore radius",
                ));
            }
            let (pz1, pz2) = p.z_range;
            if !(pz1 < pz2 && pz1 > b.min[2] && pz2 < b.max[2]) {
                return Err(Error::invalid(format!(
                    "protein z-range ({pz1}, {pz2}) must lie strictly inside the box"
                )));
            }
        }
        Ok(())
    }

    /// Region containing a point, by the same rule the generator applies to
    /// tet centroids.
    pub fn region_at(&self, p: Point3) -> Region {
        let r = (p[0] - self.axis.0).hypot(p[1] - self.axis.1);
        if let Some(shell) = self.protein {
            if r >= self.pore_radius
                && r < shell.outer_radius
                && p[2] > shell.z_range.0
                && p[2] < shell.z_range.1
            {
                return Region::Protein;
            }
        }
        if p[2] > self.membrane_z.0 && p[2] < self.membrane_z.1 && r >= self.pore_radius {
            Region::Membrane
        } else {
            Region::Solvent
        }
    }
}

fn subdivide(breaks: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let n = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for i in 1..=n {
            out.push(if i == n {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * i as f64 / n as f64
            });
        }
    }
    out
}

/// Deterministic conforming mesh of a [`ChannelGeometry`]. Grid planes are
/// placed at the box faces, the membrane faces and the protein z-limits;
/// curved surfaces are resolved by assigning each tet the region of its
/// centroid.
pub fn generate_synthetic_channel(geom: &ChannelGeometry) -> Result<LabeledMesh> {
    geom.validate()?;
    let b = &geom.bounds;
    let mut zb = vec![b.min[2], geom.membrane_z.0, geom.membrane_z.1, b.max[2]];
    if let Some(p) = geom.protein {
        zb.extend([p.z_range.0, p.z_range.1]);
    }
    zb.sort_by(f64::total_cmp);
    zb.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let xs = subdivide(&[b.min[0], b.max[0]], geom.h);
    let ys = subdivide(&[b.min[1], b.max[1]], geom.h);
    let zs = subdivide(&zb, geom.h);
    structured_box(&xs, &ys, &zs, |c| geom.region_at(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_solvent_submesh, FacetTag};
    use std::f64::consts::PI;

    fn geom(pore: f64, protein: Option<ProteinShell>, h: f64) -> ChannelGeometry {
        ChannelGeometry {
            bounds: BoxBounds::new([-20.0, -20.0, -30.0], [20.0, 20.0, 30.0]).unwrap(),
            membrane_z: (-12.0, 12.0),
            axis: (0.0, 0.0),
            pore_radius: pore,
            protein,
            h,
        }
    }

    #[test]
    fn slab_volumes_match_analytic_within_two_percent() {
        let g = geom(8.0, None, 2.0);
        let m = generate_synthetic_channel(&g).unwrap();
        let slab = 40.0 * 40.0 * 24.0 - PI * 64.0 * 24.0;
        let membrane = m.region_volume(Region::Membrane);
        assert!((membrane - slab).abs() / slab < 0.02, "{membrane} vs {slab}");
        let solvent = m.region_volume(Region::Solvent);
        let expected = g.bounds.volume() - slab;
        assert!((solvent - expected).abs() / expected < 0.02, "{solvent} vs {expected}");
        assert_eq!(m.region_volume(Region::Protein), 0.0);
    }

    #[test]
    fn membrane_faces_area_close_to_analytic() {
        let m = generate_synthetic_channel(&geom(8.0, None, 2.0)).unwrap();
        // flat faces only: the facets lying in the planes z = Z1, Z2
        let flat: f64 = (0..m.facets().len())
            .filter(|&f| m.facets()[f].tag == FacetTag::MembraneSolvent)
            .filter(|&f| m.facet_points(f).iter().all(|p| (p[2].abs() - 12.0).abs() < 1e-12))
            .map(|f| m.facet_area(f))
            .sum();
        let analytic = 2.0 * (1600.0 - PI * 64.0);
        assert!((flat - analytic).abs() / analytic < 0.01, "{flat} vs {analytic}");
    }

    #[test]
    fn zero_pore_separates_the_solvent() {
        let m = generate_synthetic_channel(&geom(0.0, None, 4.0)).unwrap();
        let membrane = m.region_volume(Region::Membrane);
        assert!((membrane - 40.0 * 40.0 * 24.0).abs() < 1e-8);
        let (sub, _) = extract_solvent_submesh(&m).unwrap();
        // no solvent node inside the slab, so the two compartments share none
        assert!(sub.nodes().iter().all(|p| p[2] <= -12.0 || p[2] >= 12.0));
        assert!(sub.nodes().iter().any(|p| p[2] == -12.0));
        assert!(sub.nodes().iter().any(|p| p[2] == 12.0));
    }

    #[test]
    fn protein_shell_is_present_and_conforming() {
        let shell = ProteinShell {
            outer_radius: 12.0,
            z_range: (-16.0, 16.0),
        };
        let m = generate_synthetic_channel(&geom(6.0, Some(shell), 3.0)).unwrap();
        let vol = m.region_volume(Region::Protein);
        let analytic = PI * (144.0 - 36.0) * 32.0;
        assert!((vol - analytic).abs() / analytic < 0.1, "{vol} vs {analytic}");
        for tag in [
            FacetTag::ProteinSolvent,
            FacetTag::MembraneSolvent,
            FacetTag::ProteinMembrane,
        ] {
            assert!(m.tag_area(tag) > 0.0, "{tag:?}");
        }
    }

    #[test]
    fn halving_h_multiplies_nodes_by_about_eight() {
        let a = generate_synthetic_channel(&geom(8.0, None, 4.0)).unwrap();
        let b = generate_synthetic_channel(&geom(8.0, None, 2.0)).unwrap();
        let ratio = b.num_nodes() as f64 / a.num_nodes() as f64;
        assert!((6.5..8.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn generation_is_deterministic() {
        let g = geom(6.0, None, 4.0);
        let a = generate_synthetic_channel(&g).unwrap();
        let b = generate_synthetic_channel(&g).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.tets(), b.tets());
        assert_eq!(a.facets(), b.facets());
    }

    #[test]
    fn infeasible_geometry_rejected() {
        assert!(generate_synthetic_channel(&geom(25.0, None, 4.0)).is_err());
        let shell = ProteinShell {
            outer_radius: 5.0,
            z_range: (-16.0, 16.0),
        };
        assert!(generate_synthetic_channel(&geom(6.0, Some(shell), 4.0)).is_err());
        let mut g = geom(6.0, None, 4.0);
        g.membrane_z = (5.0, -5.0);
        assert!(generate_synthetic_channel(&g).is_err());
        g.membrane_z = (-12.0, 12.0);
        g.h = 0.0;
        assert!(generate_synthetic_channel(&g).is_err());
    }

    #[test]
    fn structured_box_rejects_bad_breakpoints() {
        assert!(structured_box(&[0.0], &[0.0, 1.0], &[0.0, 1.0], |_| Region::Solvent).is_err());
        assert!(structured_box(&[0.0, 0.0], &[0.0, 1.0], &[0.0, 1.0], |_| Region::Solvent).is_err());
    }
}
