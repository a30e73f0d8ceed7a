//! Finite element solver for the nonuniform size-modified Poisson-Boltzmann
//! ion channel model.
//!
//! The electrostatic potential is split as `u = G + Ψ + Φ̃`: `G` is the
//! closed-form field of the atomic point charges ([`singular_field`]), `Ψ`
//! solves a linear interface problem ([`model2`]), and `Φ̃` together with the
//! ionic concentrations is computed by a damped two-block iteration
//! ([`model3`]). [`solver`] chains the stages.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod model2;
pub mod model3;
pub mod physics;
pub mod singular_field;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
