//! Legacy ASCII VTK unstructured grids. Floats are written with 17
//! significant digits so files reload bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::mesh::{LabeledMesh, TransferOps};
use crate::model3::NodalState;
use crate::physics::SolventSpec;

const VTK_TETRA: u32 = 10;

/// The potential and its three parts at box nodes.
#[derive(Debug, Clone, Copy)]
pub struct PotentialParts<'a> {
    pub g: &'a [f64],
    pub psi: &'a [f64],
    pub phi_tilde: &'a [f64],
    pub u: &'a [f64],
}

fn scalars(out: &mut String, name: &str, kind: &str, values: impl Iterator<Item = String>) {
    writeln!(out, "SCALARS {name} {kind} 1\nLOOKUP_TABLE default").unwrap();
    for v in values {
        out.push_str(&v);
        out.push('\n');
    }
}

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Array name used for the concentration of a species.
pub fn concentration_name(species: &str) -> String {
    let clean: String = species
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect();
    format!("c_{clean}")
}

/// Renders the mesh with region ids per cell and point arrays `u`, `G`,
/// `Psi`, `Phi_tilde`, one `c_<name>` per species (zero off the solvent) and
/// `solvent_mask`.
pub fn format_vtk(
    mesh: &LabeledMesh,
    transfer: &TransferOps,
    solvent: &SolventSpec,
    parts: &PotentialParts,
    state: &NodalState,
) -> Result<String> {
    let n = mesh.num_nodes();
    for (name, v) in [
        ("G", parts.g),
        ("Psi", parts.psi),
        ("Phi_tilde", parts.phi_tilde),
        ("u", parts.u),
    ] {
        if v.len() != n {
            return Err(Error::invalid(format!("{name} has {} values for {n} nodes", v.len())));
        }
    }
    if state.c.len() != solvent.len() {
        return Err(Error::invalid("one concentration field per species is required"));
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nnusmpbic solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {n} double").unwrap();
    for p in mesh.nodes() {
        writeln!(s, "{} {} {}", f17(p[0]), f17(p[1]), f17(p[2])).unwrap();
    }
    let nt = mesh.num_tets();
    writeln!(s, "CELLS {nt} {}", 5 * nt).unwrap();
    for t in mesh.tets() {
        let v = t.nodes;
        writeln!(s, "4 {} {} {} {}", v[0], v[1], v[2], v[3]).unwrap();
    }
    writeln!(s, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        writeln!(s, "{VTK_TETRA}").unwrap();
    }
    writeln!(s, "CELL_DATA {nt}").unwrap();
    scalars(&mut s, "region", "int", mesh.tets().iter().map(|t| t.region.id().to_string()));
    writeln!(s, "POINT_DATA {n}").unwrap();
    for (name, v) in [
        ("u", parts.u),
        ("G", parts.g),
        ("Psi", parts.psi),
        ("Phi_tilde", parts.phi_tilde),
    ] {
        scalars(&mut s, name, "double", v.iter().map(|x| f17(*x)));
    }
    for (sp, c) in solvent.species.iter().zip(&state.c) {
        let full = transfer.prolong(c)?;
        scalars(&mut s, &concentration_name(&sp.name), "double", full.iter().map(|x| f17(*x)));
    }
    let mut mask = vec![0.0; n];
    for mu in 0..transfer.solvent_len() {
        mask[transfer.parent(mu)] = 1.0;
    }
    scalars(&mut s, "solvent_mask", "double", mask.iter().map(|x| f17(*x)));
    Ok(s)
}

pub fn export_vtk(
    path: impl AsRef<Path>,
    mesh: &LabeledMesh,
    transfer: &TransferOps,
    solvent: &SolventSpec,
    parts: &PotentialParts,
    state: &NodalState,
) -> Result<()> {
    let path = path.as_ref();
    let text = format_vtk(mesh, transfer, solvent, parts, state)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Contents of a legacy VTK unstructured grid as written by [`format_vtk`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkGrid {
    pub points: Vec<Point3>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u32>,
    pub cell_data: Vec<(String, Vec<f64>)>,
    pub point_data: Vec<(String, Vec<f64>)>,
}

impl VtkGrid {
    pub fn point_field(&self, name: &str) -> Option<&[f64]> {
        self.point_data
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn cell_field(&self, name: &str) -> Option<&[f64]> {
        self.cell_data
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

struct Tokens<'a> {
    it: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
    source: &'a str,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.it.next().ok_or_else(|| Error::Parse {
            path: self.source.into(),
            line: 0,
            msg: "unexpected end of file".into(),
        })
    }

    fn num<T: std::str::FromStr>(&mut self) -> Result<T> {
        let t = self.next()?;
        t.parse().map_err(|_| Error::Parse {
            path: self.source.into(),
            line: 0,
            msg: format!("malformed number `{t}`"),
        })
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        let t = self.next()?;
        if t != word {
            return Err(Error::Parse {
                path: self.source.into(),
                line: 0,
                msg: format!("expected `{word}`, found `{t}`"),
            });
        }
        Ok(())
    }

    fn scalars(&mut self, count: usize) -> Result<(String, Vec<f64>)> {
        let name = self.next()?.to_string();
        let _kind = self.next()?;
        if self.it.peek().is_some_and(|t| t.parse::<usize>().is_ok()) {
            self.next()?;
        }
        self.expect("LOOKUP_TABLE")?;
        self.next()?;
        let v = (0..count).map(|_| self.num()).collect::<Result<_>>()?;
        Ok((name, v))
    }
}

/// Reads the subset of the legacy format produced by [`format_vtk`].
pub fn parse_vtk(text: &str, source: &str) -> Result<VtkGrid> {
    let body = text.splitn(3, '\n').nth(2).unwrap_or("");
    let mut t = Tokens {
        it: body.split_whitespace().peekable(),
        source,
    };
    t.expect("ASCII")?;
    t.expect("DATASET")?;
    t.expect("UNSTRUCTURED_GRID")?;
    let mut g = VtkGrid::default();
    let mut section = "";
    let mut count = 0usize;
    while let Some(word) = t.it.next() {
        match word {
            "POINTS" => {
                let n: usize = t.num()?;
                t.next()?;
                g.points = (0..n)
                    .map(|_| Ok([t.num()?, t.num()?, t.num()?]))
                    .collect::<Result<_>>()?;
            }
            "CELLS" => {
                let n: usize = t.num()?;
                t.next()?;
                for _ in 0..n {
                    let k: usize = t.num()?;
                    g.cells.push((0..k).map(|_| t.num()).collect::<Result<_>>()?);
                }
            }
            "CELL_TYPES" => {
                let n: usize = t.num()?;
                g.cell_types = (0..n).map(|_| t.num()).collect::<Result<_>>()?;
            }
            "CELL_DATA" | "POINT_DATA" => {
                section = word;
                count = t.num()?;
            }
            "SCALARS" => {
                let field = t.scalars(count)?;
                match section {
                    "CELL_DATA" => g.cell_data.push(field),
                    "POINT_DATA" => g.point_data.push(field),
                    _ => {
                        return Err(Error::Parse {
                            path: source.into(),
                            line: 0,
                            msg: "SCALARS outside a data section".into(),
                        })
                    }
                }
            }
            other => {
                return Err(Error::Parse {
                    path: source.into(),
                    line: 0,
                    msg: format!("unsupported keyword `{other}`"),
                })
            }
        }
    }
    Ok(g)
}

pub fn read_vtk(path: impl AsRef<Path>) -> Result<VtkGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk(&text, &path.display().to_string())
}
