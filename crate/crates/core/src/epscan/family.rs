//! One-parameter Hamiltonian families.

use serde::{Deserialize, Serialize};

use super::EpScanError;
use crate::model::{build_hamiltonian, build_parity, coupling_derivative, gain_generator, ChainSpec, NormalizedPoint};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

/// Path `p ↦ H(p)` with a parameter-independent pseudo-metric.
pub trait ParameterFamily<T: Real>: Sync {
    fn hamiltonian(&self, p: T) -> Result<ComplexMatrix<T>, EpScanError>;

    fn metric(&self) -> &ComplexMatrix<T>;

    /// Coordinates of `p` in the full parameter space.
    fn location(&self, p: T) -> Vec<T> {
        vec![p]
    }

    /// Whether `p` lies in the domain of the family.
    fn admits(&self, _p: T) -> bool {
        true
    }
}

/// Swept normalized parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    JTilde,
    GammaTilde,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::JTilde => "j_tilde",
            Axis::GammaTilde => "gamma_tilde",
        })
    }
}

/// Staggered chain on the normalization circle, swept along one axis.
#[derive(Clone, Debug)]
pub struct ChainFamily<T: Real> {
    pub n: usize,
    pub axis: Axis,
    pub fixed: T,
    parity: ComplexMatrix<T>,
}

impl<T: Real> ChainFamily<T> {
    pub fn new(n: usize, axis: Axis, fixed: T) -> Result<Self, EpScanError> {
        Ok(Self {
            n,
            axis,
            fixed,
            parity: build_parity(n)?,
        })
    }

    pub fn point(&self, p: T) -> NormalizedPoint<T> {
        match self.axis {
            Axis::JTilde => NormalizedPoint::new(p, self.fixed),
            Axis::GammaTilde => NormalizedPoint::new(self.fixed, p),
        }
    }

    /// Same chain swept along the other axis through `(j̃, γ̃)`.
    pub fn along(&self, axis: Axis, fixed: T) -> Self {
        Self {
            n: self.n,
            axis,
            fixed,
            parity: self.parity.clone(),
        }
    }

    /// `∂H/∂p`.
    pub fn derivative(&self, p: T) -> Result<ComplexMatrix<T>, EpScanError> {
        let pt = self.point(p);
        match self.axis {
            Axis::GammaTilde => Ok(gain_generator(self.n)?),
            Axis::JTilde => Ok(coupling_derivative(self.n, pt.j_tilde)?),
        }
    }
}

impl<T: Real> ParameterFamily<T> for ChainFamily<T> {
    fn hamiltonian(&self, p: T) -> Result<ComplexMatrix<T>, EpScanError> {
        let spec = ChainSpec::from_normalized(self.n, self.point(p))?;
        Ok(build_hamiltonian(&spec)?)
    }

    fn metric(&self) -> &ComplexMatrix<T> {
        &self.parity
    }

    fn location(&self, p: T) -> Vec<T> {
        let pt = self.point(p);
        vec![pt.j_tilde, pt.gamma_tilde]
    }

    fn admits(&self, p: T) -> bool {
        self.point(p).j_tilde.abs() <= T::one()
    }
}

/// Family given by a closure, for toy models.
pub struct FnFamily<T: Real, F> {
    f: F,
    metric: ComplexMatrix<T>,
}

impl<T: Real, F> FnFamily<T, F>
where
    F: Fn(T) -> ComplexMatrix<T> + Sync,
{
    pub fn new(metric: ComplexMatrix<T>, f: F) -> Self {
        Self { f, metric }
    }
}

impl<T: Real, F> ParameterFamily<T> for FnFamily<T, F>
where
    F: Fn(T) -> ComplexMatrix<T> + Sync,
{
    fn hamiltonian(&self, p: T) -> Result<ComplexMatrix<T>, EpScanError> {
        Ok((self.f)(p))
    }

    fn metric(&self) -> &ComplexMatrix<T> {
        &self.metric
    }
}
