//! Complex Klein-Gordon field on a star graph of semi-infinite rays.
//!
//! * [`graph`]: specifications, junction families and the field state.
//! * [`analytic`]: continuum S-matrix, phase families and two-mode residuals.
//! * [`discrete`]: lattice dispersion, lattice reflection and mode residuals.
//! * [`dynamics`]: leapfrog evolution and packet scattering experiments.
//! * [`observables`]: energy, charge, fluxes and junction balances.
//! * [`scenarios`]: configuration, CSV commands and the validation suite.

pub mod analytic;
pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod observables;
pub mod scenarios;

pub use error::{Error, Result};
pub use graph::{
    FieldState, JunctionCoupling, JunctionFamily, LatticeSpec, ScatteringAmplitudes, StarGraphSpec,
};
