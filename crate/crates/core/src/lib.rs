//! Numerical models for magnetically trapped atoms above current-carrying nanowires.
//!
//! The crate is organised bottom-up: [`physcore`] holds constants, species and
//! materials; [`wiremodel`] the thin-wire resistivity and current limits;
//! [`fieldsolver`] the Biot-Savart trap potential, trap characterisation and WKB
//! barrier transmission; [`corrugation`] edge-roughness field noise; [`casimir`]
//! the Casimir-Polder attraction to planar stacks and cylinders; [`lossmodel`]
//! thermal spin-flip, decoherence, Majorana and surface-tunnelling rates; and
//! [`gpsolver`] the three-dimensional Gross-Pitaevskii ground state.

pub mod bessel;
pub mod casimir;
pub mod corrugation;
mod error;
pub mod fieldsolver;
pub mod gpsolver;
pub mod lossmodel;
pub mod physcore;
pub mod quad;
pub mod wiremodel;

pub use error::{Error, ErrorKind, Result};
pub use nalgebra::{Matrix3, Vector3};
