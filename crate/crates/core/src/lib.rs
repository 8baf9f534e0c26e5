//! Split-step laboratory for the lossy cubic Schrödinger equation, its
//! integrable companion and the standard cubic equation, with the maps between
//! them and explicit closeness bounds.

pub mod bounds;
pub mod error;
pub mod field;
pub mod interp;
pub mod models;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use field::{ComplexField, Grid, Spectral};
pub use interp::{Interpolation, Interpolator};
pub use models::{DimensionlessParams, Sign};
pub use solver::{Model, SplitStepConfig, Stepper, Trajectory};
