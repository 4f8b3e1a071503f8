//! Qubit phase-estimation toolkit.
//!
//! Simulates three ways of sensing the rotation angle `tau` of an unknown
//! qubit rotation `U = exp(-i tau (sigma . n) / 2)`:
//!
//! - a single probe qubit measured after the rotation,
//! - the entanglement-assisted "hindsight" protocol (probe-ancilla singlet),
//! - coherently controlled superposition (CCS) sensing, where a coherent
//!   ancilla controls whether `U` or `U^dagger` acts on the probe.
//!
//! On top of the simulators sit classical and quantum Fisher information
//! routines, Cramér–Rao bounds, a block-diagonality certificate for
//! axis-agnostic estimation and a seeded Monte Carlo maximum-likelihood check.
//!
//! All joint (two-qubit) objects use the ordering `ancilla ⊗ probe`.

pub mod error;
pub mod estimation;
pub mod harness;
pub mod protocols;
pub mod qlinalg;
pub mod qstate;

pub use error::{Error, Result};
pub use qlinalg::{Axis, ComplexMatrix, EigenDecomposition};
pub use qstate::{
    AncillaPreparation, DensityMatrix, Ket, MeasurementSetting, NoiseStrength,
    OutcomeDistribution, ParamVector, Povm,
};
