//! Exact free-fermion solution of the Hermitian (γ = 0) chain: Bogolyubov
//! wave-vectors and energies, mode parity factors, and the energy and
//! mirror parity of every many-body state.

mod modes;
mod roots;
mod states;

pub use modes::{delta_from_wave_vector, mode_function, solve_modes, FermionMode, WaveVector, POLE_SHRINK};
pub use roots::{bisect, MAX_BISECTIONS};
pub use states::{
    almost_zero_energy, compare_with_numeric, excitation_band, full_spectrum, pair_relative_parity, parity_by_recursion,
    OracleComparison, OracleState, MAX_ORACLE_SITES,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no sign change on [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("bisection stalled on [{lo}, {hi}] after {iterations} iterations")]
    BisectionStalled { lo: f64, hi: f64, iterations: usize },
    #[error("enumerating 2^{n} states exceeds the limit of {max} sites")]
    ResourceLimit { n: usize, max: usize },
}
