//! Biorthogonal spectra, Z2-indices and exceptional points of
//! pseudo-Hermitian Hamiltonians, with an exact free-fermion oracle for the
//! Hermitian limit of the staggered-gain transverse-field Ising chain.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the CLI and the tolerances are
//! tuned for.

pub mod biortho;
pub mod cli;
pub mod epscan;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod scalar;

pub use scalar::Real;

pub type CMatrix = numerics::ComplexMatrix<f64>;
pub type Eigen = numerics::EigenSystem<f64>;
pub type Chain = model::ChainSpec<f64>;
pub type Point = model::NormalizedPoint<f64>;
pub type Spectrum = biortho::BiorthoSpectrum<f64>;
pub type Level = biortho::LevelRecord<f64>;
pub type Mode = oracle::FermionMode<f64>;
pub type State = oracle::OracleState<f64>;
pub type Record = epscan::EpRecord<f64>;
pub type Track = epscan::LevelTrack<f64>;
