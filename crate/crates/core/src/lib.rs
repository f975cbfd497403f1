//! Spectral analysis of a lattice two-channel Friedrichs-type model on T³.

pub mod error;
pub mod lattice;
pub mod quadrature;
pub mod determinant;
pub mod spectral;
pub mod asymptotics;
pub mod scan;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{SpectralParams, TorusPoint};
