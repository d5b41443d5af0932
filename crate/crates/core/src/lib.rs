//! Contemporaneous and temporal aggregation of subcritical Galton-Watson
//! processes with regularly varying immigration.
//!
//! The crate has three layers. [`analytic`] evaluates the stable limit laws
//! in closed form, with quadrature oracles. [`heavy_tail`], [`sim`] and
//! [`aggregation`] generate the processes and their normalized aggregates.
//! [`verify`] compares the two, and [`cli`] drives it all from the command
//! line.

pub mod aggregation;
pub mod analytic;
pub mod cli;
pub mod error;
pub mod heavy_tail;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod verify;

pub use analytic::{ModelParams, StableBasis};
pub use error::{Error, Result};
pub use quadrature::QuadratureConfig;
