#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Two-photon polarization state analysis: linear and maximum-likelihood
//! tomography, entanglement measures, CHSH analysis and calibration fits,
//! with a forward simulator for synthetic data.

pub mod bell;
pub mod calibration;
pub mod error;
pub mod measures;
pub mod mle;
pub mod optim;
pub mod polarization;
pub mod qmatrix;
pub mod simulator;
pub mod tomography;

pub use error::{Error, Result};
pub use qmatrix::{ComplexMatrix, DensityMatrix, Subsystem};
