//! Region-labeled tetrahedral meshes of the simulation box, the solvent
//! submesh, and the node maps that transfer P1 vectors between them.

mod format;
mod generate;

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{self, Point3};
use crate::physics::BoxBounds;

pub use format::{load_mesh, parse_mesh, write_mesh};
pub use generate::{generate_synthetic_channel, structured_box, ChannelGeometry, ProteinShell};

/// Smallest admissible tetrahedron volume, Å³.
pub const MIN_TET_VOLUME: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Protein,
    Membrane,
    Solvent,
}

impl Region {
    pub fn id(self) -> u8 {
        match self {
            Region::Protein => 0,
            Region::Membrane => 1,
            Region::Solvent => 2,
        }
    }

    pub fn from_id(id: i64) -> Option<Region> {
        match id {
            0 => Some(Region::Protein),
            1 => Some(Region::Membrane),
            2 => Some(Region::Solvent),
            _ => None,
        }
    }
}

/// Boundary and interface facet tags.
///
/// Interface facets are oriented: the right-hand normal of the stored vertex
/// order points out of the first-named region (protein for `ProteinSolvent`
/// and `ProteinMembrane`, membrane for `MembraneSolvent`). Boundary facets
/// point out of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FacetTag {
    DirichletBottom,
    DirichletTop,
    Neumann,
    ProteinSolvent,
    MembraneSolvent,
    ProteinMembrane,
}

impl FacetTag {
    pub fn id(self) -> u8 {
        match self {
            FacetTag::DirichletBottom => 10,
            FacetTag::DirichletTop => 11,
            FacetTag::Neumann => 12,
            FacetTag::ProteinSolvent => 20,
            FacetTag::MembraneSolvent => 21,
            FacetTag::ProteinMembrane => 22,
        }
    }

    pub fn from_id(id: i64) -> Option<FacetTag> {
        Some(match id {
            10 => FacetTag::DirichletBottom,
            11 => FacetTag::DirichletTop,
            12 => FacetTag::Neumann,
            20 => FacetTag::ProteinSolvent,
            21 => FacetTag::MembraneSolvent,
            22 => FacetTag::ProteinMembrane,
            _ => return None,
        })
    }

    pub fn is_boundary(self) -> bool {
        matches!(
            self,
            FacetTag::DirichletBottom | FacetTag::DirichletTop | FacetTag::Neumann
        )
    }

    /// Interface tag for two distinct regions, with the region the stored
    /// normal points out of.
    fn for_regions(a: Region, b: Region) -> Option<(FacetTag, Region)> {
        use Region::*;
        match (a.min(b), a.max(b)) {
            (Protein, Solvent) => Some((FacetTag::ProteinSolvent, Protein)),
            (Membrane, Solvent) => Some((FacetTag::MembraneSolvent, Membrane)),
            (Protein, Membrane) => Some((FacetTag::ProteinMembrane, Protein)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tet {
    pub nodes: [usize; 4],
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub nodes: [usize; 3],
    pub tag: FacetTag,
    /// Tet on the side the normal points away from.
    pub inside: usize,
    /// Tet on the side the normal points into; `None` on the box boundary.
    pub outside: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LabeledMesh {
    nodes: Vec<Point3>,
    tets: Vec<Tet>,
    facets: Vec<Facet>,
    volumes: Vec<f64>,
    bounds: BoxBounds,
}

type FaceKey = [usize; 3];

fn face_key(mut f: [usize; 3]) -> FaceKey {
    f.sort_unstable();
    f
}

const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

impl LabeledMesh {
    /// Builds a mesh from nodes and labeled tets, deriving the boundary and
    /// interface facets from the tet adjacency.
    pub fn from_tets(nodes: Vec<Point3>, tets: Vec<Tet>) -> Result<Self> {
        let (tets, volumes, bounds) = prepare_tets(&nodes, tets)?;
        let facets = derive_facets(&nodes, &tets, &bounds)?;
        Ok(LabeledMesh {
            nodes,
            tets,
            facets,
            volumes,
            bounds,
        })
    }

    /// Builds a mesh and checks that the supplied facet list is exactly the
    /// set of boundary and interface facets implied by the tets, with matching
    /// tags. Facet orientation is normalized to the tag convention.
    pub fn new(nodes: Vec<Point3>, tets: Vec<Tet>, facets: Vec<([usize; 3], FacetTag)>) -> Result<Self> {
        let n = nodes.len();
        for (i, (f, _)) in facets.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::Mesh(format!("facet {i} references a missing node")));
            }
        }
        let mesh = Self::from_tets(nodes, tets)?;
        let expected: HashMap<FaceKey, FacetTag> = mesh
            .facets
            .iter()
            .map(|f| (face_key(f.nodes), f.tag))
            .collect();
        let mut seen = BTreeSet::new();
        for (i, (f, tag)) in facets.iter().enumerate() {
            let key = face_key(*f);
            match expected.get(&key) {
                None => {
                    return Err(Error::Mesh(format!(
                        "facet {i} {:?} is neither a boundary facet nor an interface between regions",
                        f
                    )))
                }
                Some(t) if t != tag => {
                    return Err(Error::Mesh(format!(
                        "facet {i} {:?} tagged {} but its adjacency requires {}",
                        f,
                        tag.id(),
                        t.id()
                    )))
                }
                Some(_) => {}
            }
            if !seen.insert(key) {
                return Err(Error::Mesh(format!("facet {i} {:?} listed twice", f)));
            }
        }
        if seen.len() != expected.len() {
            let missing = mesh
                .facets
                .iter()
                .find(|f| !seen.contains(&face_key(f.nodes)))
                .expect("a facet is missing");
            return Err(Error::Mesh(format!(
                "facet {:?} (tag {}) is missing from the facet list",
                missing.nodes,
                missing.tag.id()
            )));
        }
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn tets(&self) -> &[Tet] {
        &self.tets
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    /// Positive tet volumes, Å³.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn bounds(&self) -> BoxBounds {
        self.bounds
    }

    pub fn tet_points(&self, t: usize) -> [Point3; 4] {
        self.tets[t].nodes.map(|i| self.nodes[i])
    }

    pub fn facet_points(&self, f: usize) -> [Point3; 3] {
        self.facets[f].nodes.map(|i| self.nodes[i])
    }

    /// Unit normal of a facet following the orientation convention.
    pub fn facet_normal(&self, f: usize) -> Point3 {
        let [a, b, c] = self.facet_points(f);
        let n = geometry::triangle_area_normal(a, b, c);
        geometry::scale(n, 1.0 / geometry::norm(n))
    }

    pub fn facet_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.facet_points(f);
        geometry::norm(geometry::triangle_area_normal(a, b, c))
    }

    pub fn region_volume(&self, region: Region) -> f64 {
        self.tets
            .iter()
            .zip(&self.volumes)
            .filter(|(t, _)| t.region == region)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn tag_area(&self, tag: FacetTag) -> f64 {
        (0..self.facets.len())
            .filter(|&f| self.facets[f].tag == tag)
            .map(|f| self.facet_area(f))
            .sum()
    }

    /// Sorted, deduplicated nodes on the top and bottom faces.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .facets
            .iter()
            .filter(|f| matches!(f.tag, FacetTag::DirichletBottom | FacetTag::DirichletTop))
            .flat_map(|f| f.nodes)
            .collect();
        set.into_iter().collect()
    }

    pub fn is_dirichlet_node(&self, node: usize) -> bool {
        let z = self.nodes[node][2];
        let tol = self.plane_tolerance();
        (z - self.bounds.min[2]).abs() <= tol || (z - self.bounds.max[2]).abs() <= tol
    }

    pub(crate) fn plane_tolerance(&self) -> f64 {
        1e-9 * self.bounds.diameter()
    }

    /// Translated copy of the mesh.
    pub fn translated(&self, shift: Point3) -> LabeledMesh {
        let mut m = self.clone();
        for p in &mut m.nodes {
            *p = geometry::add(*p, shift);
        }
        m.bounds = BoxBounds {
            min: geometry::add(self.bounds.min, shift),
            max: geometry::add(self.bounds.max, shift),
        };
        m
    }
}

fn prepare_tets(nodes: &[Point3], mut tets: Vec<Tet>) -> Result<(Vec<Tet>, Vec<f64>, BoxBounds)> {
    if nodes.is_empty() || tets.is_empty() {
        return Err(Error::Mesh("mesh needs at least one node and one tet".into()));
    }
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for (i, p) in nodes.iter().enumerate() {
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::Mesh(format!("node {i} has non-finite coordinates")));
        }
        for k in 0..3 {
            min[k] = min[k].min(p[k]);
            max[k] = max[k].max(p[k]);
        }
    }
    let bounds = BoxBounds::new(min, max).map_err(|e| Error::Mesh(e.to_string()))?;
    let mut volumes = Vec::with_capacity(tets.len());
    for (t, tet) in tets.iter_mut().enumerate() {
        if tet.nodes.iter().any(|&v| v >= nodes.len()) {
            return Err(Error::Mesh(format!("tet {t} references a missing node")));
        }
        let [a, b, c, d] = tet.nodes.map(|i| nodes[i]);
        let mut vol = geometry::signed_volume(a, b, c, d);
        if vol.abs() < MIN_TET_VOLUME {
            return Err(Error::Mesh(format!(
                "tet {t} is degenerate (volume {vol:e} Å³)"
            )));
        }
        if vol < 0.0 {
            tet.nodes.swap(2, 3);
            vol = -vol;
        }
        volumes.push(vol);
    }
    Ok((tets, volumes, bounds))
}

fn derive_facets(nodes: &[Point3], tets: &[Tet], bounds: &BoxBounds) -> Result<Vec<Facet>> {
    let mut faces: HashMap<FaceKey, Vec<usize>> = HashMap::with_capacity(tets.len() * 2);
    for (t, tet) in tets.iter().enumerate() {
        for lf in TET_FACES {
            let key = face_key(lf.map(|l| tet.nodes[l]));
            faces.entry(key).or_default().push(t);
        }
    }
    let tol = 1e-9 * bounds.diameter();
    let on_plane = |key: &FaceKey, axis: usize, value: f64| {
        key.iter().all(|&v| (nodes[v][axis] - value).abs() <= tol)
    };
    let tet_centroid = |t: usize| geometry::centroid(tets[t].nodes.map(|i| nodes[i]));

    let mut keys: Vec<&FaceKey> = faces.keys().collect();
    keys.sort_unstable();
    let mut facets = Vec::new();
    for key in keys {
        let adj = &faces[key];
        match adj.as_slice() {
            [t] => {
                let tag = if on_plane(key, 2, bounds.min[2]) {
                    FacetTag::DirichletBottom
                } else if on_plane(key, 2, bounds.max[2]) {
                    FacetTag::DirichletTop
                } else if (0..2).any(|ax| {
                    on_plane(key, ax, bounds.min[ax]) || on_plane(key, ax, bounds.max[ax])
                }) {
                    FacetTag::Neumann
                } else {
                    return Err(Error::Mesh(format!(
                        "boundary face {:?} does not lie on the box boundary (hole or non-conforming interface)",
                        key
                    )));
                };
                let nodes3 = orient(nodes, *key, tet_centroid(*t), None);
                facets.push(Facet {
                    nodes: nodes3,
                    tag,
                    inside: *t,
                    outside: None,
                });
            }
            [a, b] => {
                let (ra, rb) = (tets[*a].region, tets[*b].region);
                if ra == rb {
                    continue;
                }
                let (tag, inner) = FacetTag::for_regions(ra, rb).expect("distinct regions");
                let (inside, outside) = if ra == inner { (*a, *b) } else { (*b, *a) };
                let nodes3 = orient(
                    nodes,
                    *key,
                    tet_centroid(inside),
                    Some(tet_centroid(outside)),
                );
                facets.push(Facet {
                    nodes: nodes3,
                    tag,
                    inside,
                    outside: Some(outside),
                });
            }
            _ => {
                return Err(Error::Mesh(format!(
                    "face {:?} is shared by {} tets (non-conforming mesh)",
                    key,
                    adj.len()
                )))
            }
        }
    }
    Ok(facets)
}

/// Orders a face so its right-hand normal points from `inside` toward
/// `outside` (or away from `inside` when there is no outer tet).
fn orient(nodes: &[Point3], key: FaceKey, inside: Point3, outside: Option<Point3>) -> [usize; 3] {
    let [a, b, c] = key.map(|i| nodes[i]);
    let n = geometry::triangle_area_normal(a, b, c);
    let dir = match outside {
        Some(o) => geometry::sub(o, inside),
        None => geometry::sub(geometry::centroid([a, b, c]), inside),
    };
    if geometry::dot(n, dir) > 0.0 {
        key
    } else {
        [key[0], key[2], key[1]]
    }
}

/// Tetrahedral mesh of the solvent region together with its parent node map.
#[derive(Debug, Clone)]
pub struct SolventSubmesh {
    nodes: Vec<Point3>,
    tets: Vec<[usize; 4]>,
    volumes: Vec<f64>,
    parent_of: Vec<usize>,
    /// Box-mesh tet index of every solvent tet.
    parent_tet: Vec<usize>,
}

impl SolventSubmesh {
    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn parent_of(&self) -> &[usize] {
        &self.parent_of
    }

    pub fn parent_tet(&self) -> &[usize] {
        &self.parent_tet
    }

    pub fn volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn tet_points(&self, t: usize) -> [Point3; 4] {
        self.tets[t].map(|i| self.nodes[i])
    }

    /// Vertex-rule (lumped) mass of each solvent node: sum of adjacent tet
    /// volumes divided by four.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.nodes.len()];
        for (tet, vol) in self.tets.iter().zip(&self.volumes) {
            for &v in tet {
                m[v] += vol / 4.0;
            }
        }
        m
    }
}

/// Restriction (box to solvent) and prolongation (solvent to box) of nodal
/// vectors. Restriction reads parent values; prolongation extends by zero.
#[derive(Debug, Clone)]
pub struct TransferOps {
    parent_of: Vec<usize>,
    child_of: Vec<Option<usize>>,
}

impl TransferOps {
    pub fn box_len(&self) -> usize {
        self.child_of.len()
    }

    pub fn solvent_len(&self) -> usize {
        self.parent_of.len()
    }

    pub fn parent(&self, solvent_node: usize) -> usize {
        self.parent_of[solvent_node]
    }

    pub fn child(&self, box_node: usize) -> Option<usize> {
        self.child_of[box_node]
    }

    pub fn restrict(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.box_len() {
            return Err(Error::invalid(format!(
                "restriction expects {} box values, got {}",
                self.box_len(),
                values.len()
            )));
        }
        Ok(self.parent_of.iter().map(|&p| values[p]).collect())
    }

    pub fn prolong(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.solvent_len() {
            return Err(Error::invalid(format!(
                "prolongation expects {} solvent values, got {}",
                self.solvent_len(),
                values.len()
            )));
        }
        let mut out = vec![0.0; self.box_len()];
        for (s, &p) in self.parent_of.iter().enumerate() {
            out[p] = values[s];
        }
        Ok(out)
    }
}

/// Extracts the solvent tets into their own mesh. Solvent nodes are numbered
/// in increasing box-node order.
pub fn extract_solvent_submesh(mesh: &LabeledMesh) -> Result<(SolventSubmesh, TransferOps)> {
    let solvent_tets: Vec<usize> = (0..mesh.num_tets())
        .filter(|&t| mesh.tets[t].region == Region::Solvent)
        .collect();
    if solvent_tets.is_empty() {
        return Err(Error::invalid("mesh has no solvent tets"));
    }
    let mut child_of = vec![None; mesh.num_nodes()];
    for &t in &solvent_tets {
        for v in mesh.tets[t].nodes {
            child_of[v] = Some(0);
        }
    }
    let mut parent_of = Vec::new();
    for (v, c) in child_of.iter_mut().enumerate() {
        if c.is_some() {
            *c = Some(parent_of.len());
            parent_of.push(v);
        }
    }
    let nodes = parent_of.iter().map(|&p| mesh.nodes[p]).collect();
    let tets = solvent_tets
        .iter()
        .map(|&t| mesh.tets[t].nodes.map(|v| child_of[v].expect("solvent node")))
        .collect();
    let volumes = solvent_tets.iter().map(|&t| mesh.volumes[t]).collect();
    Ok((
        SolventSubmesh {
            nodes,
            tets,
            volumes,
            parent_of: parent_of.clone(),
            parent_tet: solvent_tets,
        },
        TransferOps {
            parent_of,
            child_of,
        },
    ))
}
