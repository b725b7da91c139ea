//! Frequency-domain model of a two-optical-mode optomechanical force sensor
//! with coherent quantum noise cancellation through an ancilla mode.
//!
//! All quantities are normalized to the mechanical frequency `omega_m`.
//!
//! - [`params`]: parameter types, validation, presets
//! - [`response`]: susceptibilities, optical rigidity, normal modes
//! - [`spectra`]: transfer functions, noise spectra, SQL, cancellation ratio
//! - [`stability`]: Routh–Hurwitz chain, eigenvalues, coupling threshold
//! - [`oracle`]: state-space evaluation used to cross-check the closed forms
//! - [`units`]: SI rescaling and hardware maps

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod oracle;
pub mod params;
pub mod response;
pub mod spectra;
pub mod stability;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::config::Config;
pub use params::{
    matched_ancilla, validate, AncillaCoupling, CouplingRule, G2Convention, HomodyneSettings, NoiseModel,
    PumpParams, SystemParams, ValidationReport,
};
pub use response::{ComplexResponse, NmsModes, OpticalSpring};
pub use spectra::{Components, ControlMode, SpectrumResult, SpectrumSample, Table1Row, TransferSet};
pub use stability::{GMaxResult, JacobianSpec, StabilityReport};
pub use units::SIContext;
