//! PQR atom files: whitespace-delimited `ATOM`/`HETATM` records
//! `serial name resName [chainID] resSeq x y z charge radius`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::singular_field::AtomSet;

#[derive(Debug, Clone, PartialEq)]
pub struct PqrRecord {
    pub serial: i64,
    pub atom_name: String,
    pub residue_name: String,
    pub chain_id: Option<String>,
    /// Kept as text so insertion codes such as `52A` survive.
    pub residue_number: String,
    pub position: Point3,
    pub charge: f64,
    pub radius: f64,
}

fn field<T: std::str::FromStr>(s: &str, what: &str, source: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        path: source.into(),
        line,
        msg: format!("malformed {what} `{s}`"),
    })
}

/// Parses PQR text. Lines other than `ATOM`/`HETATM` records are skipped.
pub fn parse_pqr_records(text: &str, source: &str) -> Result<Vec<PqrRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let parts: Vec<&str> = raw.split_whitespace().collect();
        match parts.first() {
            Some(&"ATOM") | Some(&"HETATM") => {}
            _ => continue,
        }
        let chain_id = match parts.len() {
            10 => None,
            11 => Some(parts[4].to_string()),
            n => {
                return Err(Error::Parse {
                    path: source.into(),
                    line,
                    msg: format!("expected 10 or 11 fields in an atom record, found {n}"),
                })
            }
        };
        let k = parts.len() - 5;
        let position = [
            field(parts[k], "x coordinate", source, line)?,
            field(parts[k + 1], "y coordinate", source, line)?,
            field(parts[k + 2], "z coordinate", source, line)?,
        ];
        let charge: f64 = field(parts[k + 3], "charge", source, line)?;
        let radius: f64 = field(parts[k + 4], "radius", source, line)?;
        if position.iter().any(|c: &f64| !c.is_finite()) || !charge.is_finite() {
            return Err(Error::Parse {
                path: source.into(),
                line,
                msg: "non-finite coordinate or charge".into(),
            });
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::Parse {
                path: source.into(),
                line,
                msg: format!("radius {radius} must be finite and non-negative"),
            });
        }
        out.push(PqrRecord {
            serial: field(parts[1], "atom serial", source, line)?,
            atom_name: parts[2].to_string(),
            residue_name: parts[3].to_string(),
            chain_id,
            residue_number: parts[k - 1].to_string(),
            position,
            charge,
            radius,
        });
    }
    Ok(out)
}

pub fn records_to_atoms(records: &[PqrRecord]) -> Result<AtomSet> {
    AtomSet::new(
        records.iter().map(|r| r.position).collect(),
        records.iter().map(|r| r.charge).collect(),
        records.iter().map(|r| r.radius).collect(),
    )
}

pub fn parse_pqr_str(text: &str, source: &str) -> Result<AtomSet> {
    let records = parse_pqr_records(text, source)?;
    if records.is_empty() {
        return Err(Error::invalid(format!("{source}: no ATOM or HETATM records")));
    }
    records_to_atoms(&records)
}

pub fn parse_pqr(path: impl AsRef<Path>) -> Result<AtomSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pqr_str(&text, &path.display().to_string())
}

/// One `ATOM` record per atom, residue `UNK`, no chain id.
pub fn format_pqr(atoms: &AtomSet) -> String {
    let mut s = String::new();
    for (i, p) in atoms.positions.iter().enumerate() {
        writeln!(
            s,
            "ATOM {:>6} X{} UNK {} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            i + 1,
            i + 1,
            i + 1,
            p[0],
            p[1],
            p[2],
            atoms.charges[i],
            atoms.radii[i]
        )
        .expect("write to string");
    }
    s
}

pub fn write_pqr(path: impl AsRef<Path>, atoms: &AtomSet) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_pqr(atoms)).map_err(|e| Error::io(path, e))
}
