//! File formats and result export.

pub mod config;
pub mod csv;
pub mod curves;
pub mod pqr;
pub mod vtk;

pub use config::{format_config, load_config, parse_config_str, write_config, CaseConfig, DEFAULT_HBAR};
pub use curves::{block_average_curves, slab_centers, CurveSet};
pub use pqr::{format_pqr, parse_pqr, parse_pqr_records, parse_pqr_str, write_pqr, PqrRecord};
pub use vtk::{export_vtk, format_vtk, parse_vtk, read_vtk, PotentialParts, VtkGrid};
