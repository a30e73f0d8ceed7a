//! `nusmpbic-mesh v1` ASCII format.
//!
//! ```text
//! nusmpbic-mesh v1
//! nodes <N>
//! x y z                 (N lines)
//! tets <M>
//! i0 i1 i2 i3 region    (M lines, region 0 protein, 1 membrane, 2 solvent)
//! facets <K>
//! i0 i1 i2 tag          (K lines, tags 10/11/12 boundary, 20/21/22 interfaces)
//! ```
//!
//! Indices are 0-based. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{FacetTag, LabeledMesh, Region, Tet};
use crate::error::{Error, Result};

const HEADER: &str = "nusmpbic-mesh v1";

pub fn load_mesh(path: impl AsRef<Path>) -> Result<LabeledMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, &path.display().to_string())
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    source: &'a str,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Ok((i + 1, t));
        }
        Err(self.err(self.last + 1, "unexpected end of file"))
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let (ln, line) = self.next()?;
        let mut it = line.split_whitespace();
        if it.next() != Some(name) {
            return Err(self.err(ln, format!("expected `{name} <count>`")));
        }
        let count = it
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| self.err(ln, format!("bad {name} count")))?;
        if it.next().is_some() {
            return Err(self.err(ln, "trailing tokens"));
        }
        Ok(count)
    }

    fn fields<T: std::str::FromStr, const N: usize>(&mut self, what: &str) -> Result<(usize, [T; N])> {
        let (ln, line) = self.next()?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != N {
            return Err(self.err(ln, format!("{what} needs {N} fields, found {}", toks.len())));
        }
        let mut out = Vec::with_capacity(N);
        for t in toks {
            out.push(
                t.parse::<T>()
                    .map_err(|_| self.err(ln, format!("malformed {what} field `{t}`")))?,
            );
        }
        match out.try_into() {
            Ok(a) => Ok((ln, a)),
            Err(_) => unreachable!(),
        }
    }
}

/// Parses mesh text; `source` names the input in error messages.
pub fn parse_mesh(text: &str, source: &str) -> Result<LabeledMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
        source,
        last: 0,
    };
    let (ln, header) = lines.next()?;
    if header != HEADER {
        return Err(lines.err(ln, format!("expected header `{HEADER}`")));
    }

    let n = lines.section("nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, p) = lines.fields::<f64, 3>("node")?;
        if p.iter().any(|c| !c.is_finite()) {
            return Err(lines.err(ln, "non-finite coordinate"));
        }
        nodes.push(p);
    }

    let m = lines.section("tets")?;
    let mut tets = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, f) = lines.fields::<i64, 5>("tet")?;
        let region = Region::from_id(f[4])
            .ok_or_else(|| lines.err(ln, format!("unknown region id {}", f[4])))?;
        let mut idx = [0usize; 4];
        for k in 0..4 {
            if f[k] < 0 || f[k] as usize >= n {
                return Err(lines.err(ln, format!("node index {} out of range", f[k])));
            }
            idx[k] = f[k] as usize;
        }
        tets.push(Tet { nodes: idx, region });
    }

    let k = lines.section("facets")?;
    let mut facets = Vec::with_capacity(k);
    for _ in 0..k {
        let (ln, f) = lines.fields::<i64, 4>("facet")?;
        let tag = FacetTag::from_id(f[3])
            .ok_or_else(|| lines.err(ln, format!("unknown facet tag {}", f[3])))?;
        let mut idx = [0usize; 3];
        for j in 0..3 {
            if f[j] < 0 || f[j] as usize >= n {
                return Err(lines.err(ln, format!("node index {} out of range", f[j])));
            }
            idx[j] = f[j] as usize;
        }
        facets.push((idx, tag));
    }
    if let Ok((ln, _)) = lines.next() {
        return Err(lines.err(ln, "unexpected content after facets section"));
    }
    LabeledMesh::new(nodes, tets, facets)
}

pub fn format_mesh(mesh: &LabeledMesh) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "nodes {}", mesh.num_nodes()).unwrap();
    for p in mesh.nodes() {
        writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]).unwrap();
    }
    writeln!(s, "tets {}", mesh.num_tets()).unwrap();
    for t in mesh.tets() {
        let [a, b, c, d] = t.nodes;
        writeln!(s, "{a} {b} {c} {d} {}", t.region.id()).unwrap();
    }
    writeln!(s, "facets {}", mesh.facets().len()).unwrap();
    for f in mesh.facets() {
        let [a, b, c] = f.nodes;
        writeln!(s, "{a} {b} {c} {}", f.tag.id()).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &LabeledMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_mesh(mesh)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_box;

    const CORNER_TET: &str = "nusmpbic-mesh v1
nodes 4
0 0 0
1 0 0
0 1 0
0 0 1
tets 1
0 1 2 3 2
facets 4
0 2 1 10
0 1 3 12
0 3 2 12
1 2 3 12
";

    #[test]
    fn slanted_boundary_face_rejected() {
        let err = parse_mesh(CORNER_TET, "t").unwrap_err();
        assert!(matches!(err, Error::Mesh(_)), "{err}");
    }

    #[test]
    fn unit_cube_round_trip() {
        let m = structured_box(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], |_| Region::Solvent).unwrap();
        let text = format_mesh(&m);
        let m2 = parse_mesh(&text, "cube").unwrap();
        assert_eq!(m2.num_tets(), 6);
        assert!((m2.volumes().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(m.nodes(), m2.nodes());
        assert_eq!(format_mesh(&m2), text);
    }

    #[test]
    fn file_round_trip() {
        let m = structured_box(&[0.0, 1.0, 2.0], &[0.0, 1.0], &[0.0, 0.5, 1.0], |c| {
            if c[2] < 0.5 {
                Region::Membrane
            } else {
                Region::Solvent
            }
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.msh");
        write_mesh(&m, &path).unwrap();
        let m2 = load_mesh(&path).unwrap();
        assert_eq!(m2.facets(), m.facets());
    }

    #[test]
    fn unknown_region_rejected_with_line() {
        let m = structured_box(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], |_| Region::Solvent).unwrap();
        let mut lines: Vec<String> = format_mesh(&m).lines().map(String::from).collect();
        let first_tet = lines.iter().position(|l| l.starts_with("tets")).unwrap() + 1;
        let last = lines[first_tet].len() - 1;
        lines[first_tet].replace_range(last.., "5");
        match parse_mesh(&lines.join("\n"), "bad.msh") {
            Err(Error::Parse { line, msg, path }) => {
                assert!(msg.contains("region"), "{msg}");
                assert_eq!(line, first_tet + 1);
                assert_eq!(path, "bad.msh");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_mesh("", "e").is_err());
        assert!(parse_mesh("nusmpbic-mesh v2\n", "e").is_err());
        assert!(parse_mesh("nusmpbic-mesh v1\nnodes 1\n0 0\n", "e").is_err());
        assert!(parse_mesh("nusmpbic-mesh v1\nnodes 1\n0 0 x\n", "e").is_err());
        let m = structured_box(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], |_| Region::Solvent).unwrap();
        let text = format_mesh(&m).replace("\ntets 6\n0 ", "\ntets 6\n80 ");
        assert!(matches!(parse_mesh(&text, "e"), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_mesh("/nonexistent/x.msh").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.msh"));
    }
}
