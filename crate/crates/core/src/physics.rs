//! Physical constants, ionic species data and problem configuration.
//!
//! Units follow the model: lengths in Å, concentrations in mol/L, potentials
//! in units of k_BT/e_c, surface charge density in µC/cm².

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Elementary charge, C (CODATA 2018, exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Avogadro constant, 1/mol (CODATA 2018, exact).
pub const AVOGADRO: f64 = 6.022_140_76e23;

pub const DEFAULT_TEMPERATURE: f64 = 298.15;
/// Default cap on the Boltzmann exponent `-Z_i u`.
pub const DEFAULT_OVERFLOW_BOUND: f64 = 45.0;

const ELECTRONEUTRALITY_RTOL: f64 = 1e-12;

/// Dimensionless couplings of the scaled Poisson problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Coupling of atomic point charges.
    pub alpha: f64,
    /// Coupling of ionic charge densities given in mol/L.
    pub beta: f64,
    /// Coupling of the membrane surface charge given in µC/cm².
    pub tau: f64,
    /// mol/L to 1/Å³ conversion, `1e-27 N_A`.
    pub gamma: f64,
    pub temperature: f64,
}

pub fn compute_constants(temperature: f64) -> Result<PhysicalConstants> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::invalid(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let thermal = VACUUM_PERMITTIVITY * BOLTZMANN * temperature;
    let e2 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    Ok(PhysicalConstants {
        alpha: 1e10 * e2 / thermal,
        beta: AVOGADRO * e2 / (1e17 * thermal),
        tau: 1e-12 * ELEMENTARY_CHARGE / thermal,
        gamma: 1e-27 * AVOGADRO,
        temperature,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    pub charge_number: i32,
    /// Bulk concentration, mol/L.
    pub bulk_concentration: f64,
    /// Ion volume, Å³.
    pub ion_volume: f64,
}

impl IonSpecies {
    pub fn new(
        name: impl Into<String>,
        charge_number: i32,
        bulk_concentration: f64,
        ion_volume: f64,
    ) -> Result<Self> {
        let name = name.into();
        if !(bulk_concentration > 0.0) || !bulk_concentration.is_finite() {
            return Err(Error::invalid(format!(
                "species {name}: bulk concentration must be positive"
            )));
        }
        if !(ion_volume > 0.0) || !ion_volume.is_finite() {
            return Err(Error::invalid(format!(
                "species {name}: ion volume must be positive"
            )));
        }
        Ok(IonSpecies {
            name,
            charge_number,
            bulk_concentration,
            ion_volume,
        })
    }

    /// Species whose volume is given through a ball radius in Å.
    pub fn from_radius(
        name: impl Into<String>,
        charge_number: i32,
        bulk_concentration: f64,
        radius: f64,
    ) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("ion radius must be positive"));
        }
        Self::new(name, charge_number, bulk_concentration, ball_volume(radius))
    }

    pub fn charge(&self) -> f64 {
        self.charge_number as f64
    }
}

pub fn ball_volume(radius: f64) -> f64 {
    4.0 * std::f64::consts::PI * radius.powi(3) / 3.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolventSpec {
    pub species: Vec<IonSpecies>,
    /// Size scaling parameter v0, Å³.
    pub v0: f64,
}

impl SolventSpec {
    /// Builds a solvent with `v0 = min_i v_i`.
    pub fn new(species: Vec<IonSpecies>) -> Result<Self> {
        let v0 = species
            .iter()
            .map(|s| s.ion_volume)
            .fold(f64::INFINITY, f64::min);
        Self::with_v0(species, v0)
    }

    pub fn with_v0(species: Vec<IonSpecies>, v0: f64) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::invalid("at least one ionic species is required"));
        }
        if !(v0 > 0.0) || !v0.is_finite() {
            return Err(Error::invalid("v0 must be positive"));
        }
        Ok(SolventSpec { species, v0 })
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn mean_volume(&self) -> f64 {
        self.species.iter().map(|s| s.ion_volume).sum::<f64>() / self.len() as f64
    }

    pub fn has_uniform_sizes(&self) -> bool {
        let v = self.species[0].ion_volume;
        self.species.iter().all(|s| s.ion_volume == v)
    }

    /// Copy with every ion volume replaced by the mean volume; v0 follows.
    pub fn uniform_sized(&self) -> SolventSpec {
        let vbar = self.mean_volume();
        let species = self
            .species
            .iter()
            .map(|s| IonSpecies {
                ion_volume: vbar,
                ..s.clone()
            })
            .collect();
        SolventSpec { species, v0: vbar }
    }

    pub fn check_electroneutrality(&self) -> Result<()> {
        let net: f64 = self
            .species
            .iter()
            .map(|s| s.charge() * s.bulk_concentration)
            .sum();
        let scale: f64 = self
            .species
            .iter()
            .map(|s| (s.charge() * s.bulk_concentration).abs())
            .sum();
        if net.abs() > ELECTRONEUTRALITY_RTOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::invalid(format!(
                "bulk solution is not electroneutral: sum Z_i c_i^b = {net:e}"
            )));
        }
        Ok(())
    }

    /// Bulk ionic volume fraction `gamma * sum v_i c_i^b`.
    pub fn bulk_volume_fraction(&self, gamma: f64) -> f64 {
        gamma
            * self
                .species
                .iter()
                .map(|s| s.ion_volume * s.bulk_concentration)
                .sum::<f64>()
    }
}

/// Axis-aligned simulation box `(L_x1, L_x2) x (L_y1, L_y2) x (L_z1, L_z2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    pub min: Point3,
    pub max: Point3,
}

impl BoxBounds {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        for k in 0..3 {
            if !(min[k] < max[k]) {
                return Err(Error::invalid(format!(
                    "box extent {k} is empty: [{}, {}]",
                    min[k], max[k]
                )));
            }
        }
        Ok(BoxBounds { min, max })
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn volume(&self) -> f64 {
        self.extent(0) * self.extent(1) * self.extent(2)
    }

    pub fn diameter(&self) -> f64 {
        (0..3).map(|k| self.extent(k).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub eps_p: f64,
    pub eps_m: f64,
    pub eps_s: f64,
    /// Membrane surface charge density, µC/cm².
    pub sigma: f64,
    pub u_b: f64,
    pub u_t: f64,
    pub bounds: BoxBounds,
    /// Membrane location (Z1, Z2), Å.
    pub membrane_z: (f64, f64),
    pub temperature: f64,
    pub omega: f64,
    /// Outer tolerance on iteration and residual errors.
    pub tol: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub overflow_bound: f64,
    pub max_outer: usize,
}

impl ProblemConfig {
    /// Configuration with the solver defaults for the given geometry.
    pub fn new(bounds: BoxBounds, membrane_z: (f64, f64)) -> Self {
        ProblemConfig {
            eps_p: 2.0,
            eps_m: 2.0,
            eps_s: 80.0,
            sigma: 0.0,
            u_b: 0.0,
            u_t: 0.0,
            bounds,
            membrane_z,
            temperature: DEFAULT_TEMPERATURE,
            omega: 0.4,
            tol: 1e-4,
            newton_tol: 1e-8,
            max_newton: 50,
            overflow_bound: DEFAULT_OVERFLOW_BOUND,
            max_outer: 500,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, eps) in [
            ("eps_p", self.eps_p),
            ("eps_m", self.eps_m),
            ("eps_s", self.eps_s),
        ] {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::invalid(format!(
                "omega must lie in (0, 1], got {}",
                self.omega
            )));
        }
        let (z1, z2) = self.membrane_z;
        if !(z1 < z2 && z1 > self.bounds.min[2] && z2 < self.bounds.max[2]) {
            return Err(Error::invalid(format!(
                "membrane ({z1}, {z2}) must satisfy Z1 < Z2 inside ({}, {})",
                self.bounds.min[2], self.bounds.max[2]
            )));
        }
        if !(self.tol > 0.0) || !(self.newton_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if !(self.overflow_bound > 0.0) {
            return Err(Error::invalid("overflow bound must be positive"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        if !self.sigma.is_finite() || !self.u_b.is_finite() || !self.u_t.is_finite() {
            return Err(Error::invalid("sigma and boundary potentials must be finite"));
        }
        Ok(())
    }

    /// Dielectric constant of a region.
    pub fn permittivity(&self, region: crate::mesh::Region) -> f64 {
        use crate::mesh::Region;
        match region {
            Region::Protein => self.eps_p,
            Region::Membrane => self.eps_m,
            Region::Solvent => self.eps_s,
        }
    }
}

/// Boundary potential on the Dirichlet faces: `u_b` at the bottom and `u_t`
/// at the top of the box.
pub fn boundary_value(point: Point3, config: &ProblemConfig) -> Result<f64> {
    let tol = 1e-9 * config.bounds.diameter();
    if (point[2] - config.bounds.min[2]).abs() <= tol {
        Ok(config.u_b)
    } else if (point[2] - config.bounds.max[2]).abs() <= tol {
        Ok(config.u_t)
    } else {
        Err(Error::invalid(format!(
            "point ({}, {}, {}) is not on the top or bottom face",
            point[0], point[1], point[2]
        )))
    }
}
