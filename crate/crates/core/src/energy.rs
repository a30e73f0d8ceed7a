//! Free energy of a solvent state in units of k_BT:
//!
//! * `F_es = (γ/2) Σ_i Z_i ∫ u c_i`
//! * `F_id = γ Σ_i ∫ c_i (ln(c_i/c_i^b) - 1)`
//! * `F_ex = (1/v0) ∫ W (ln W - 1)`, `W = 1 - γ Σ_j v_j c_j`
//!
//! Integrals over the solvent use the vertex rule, and `c ln c` is taken as 0
//! at `c = 0`.

use crate::error::{Error, Result};
use crate::mesh::{SolventSubmesh, TransferOps};
use crate::model3::{water_fraction, NodalState};
use crate::physics::SolventSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub es: f64,
    pub id: f64,
    pub ex: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(es: f64, id: f64, ex: f64) -> Self {
        EnergyBreakdown {
            es,
            id,
            ex,
            total: es + id + ex,
        }
    }

    /// `2 F_es + F_id + F_ex`: the functional of `c` at frozen `u` whose
    /// critical points are the size constraint solutions.
    pub fn stationary_functional(&self) -> f64 {
        2.0 * self.es + self.id + self.ex
    }
}

/// Energy of `state` with the full potential `u_box` at box nodes.
pub fn evaluate_energy(
    state: &NodalState,
    u_box: &[f64],
    submesh: &SolventSubmesh,
    transfer: &TransferOps,
    solvent: &SolventSpec,
    gamma: f64,
) -> Result<EnergyBreakdown> {
    let u = transfer.restrict(u_box)?;
    energy_on_solvent(&state.c, &u, &submesh.lumped_mass(), solvent, gamma)
}

/// As [`evaluate_energy`] with `u` and the lumped mass at solvent nodes.
pub fn energy_on_solvent(
    c: &[Vec<f64>],
    u: &[f64],
    lumped_mass: &[f64],
    solvent: &SolventSpec,
    gamma: f64,
) -> Result<EnergyBreakdown> {
    let n_h = u.len();
    if lumped_mass.len() != n_h || c.len() != solvent.len() || c.iter().any(|ci| ci.len() != n_h) {
        return Err(Error::invalid("concentration, potential and mass dimensions differ"));
    }
    let (mut es, mut id, mut ex) = (0.0, 0.0, 0.0);
    for mu in 0..n_h {
        let m = lumped_mass[mu];
        let col: Vec<f64> = c.iter().map(|ci| ci[mu]).collect();
        let w = water_fraction(&col, solvent, gamma);
        if !(w > 0.0) {
            return Err(Error::Domain {
                node: mu,
                msg: format!("water fraction {w} is not positive"),
            });
        }
        for (s, &ci) in solvent.species.iter().zip(&col) {
            if ci < 0.0 || !ci.is_finite() {
                return Err(Error::Domain {
                    node: mu,
                    msg: format!("concentration of {} is {ci}", s.name),
                });
            }
            es += m * s.charge_number as f64 * u[mu] * ci;
            if ci > 0.0 {
                id += m * ci * ((ci / s.bulk_concentration).ln() - 1.0);
            }
        }
        ex += m * w * (w.ln() - 1.0);
    }
    Ok(EnergyBreakdown::new(0.5 * gamma * es, gamma * id, ex / solvent.v0))
}

/// Nodal first variation of the stationary functional in `c_i`:
/// `γ [Z_i u + ln(c_i/c_i^b) - (v_i/v0) ln W]` (without the mass weight).
pub fn first_variation(c: &[Vec<f64>], u: &[f64], solvent: &SolventSpec, gamma: f64) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![0.0; u.len()]; solvent.len()];
    for mu in 0..u.len() {
        let col: Vec<f64> = c.iter().map(|ci| ci[mu]).collect();
        let w = water_fraction(&col, solvent, gamma);
        if !(w > 0.0) || col.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain {
                node: mu,
                msg: "first variation needs positive concentrations and water fraction".into(),
            });
        }
        for (i, s) in solvent.species.iter().enumerate() {
            out[i][mu] = gamma
                * (s.charge_number as f64 * u[mu] + (col[i] / s.bulk_concentration).ln()
                    - s.ion_volume / solvent.v0 * w.ln());
        }
    }
    Ok(out)
}
