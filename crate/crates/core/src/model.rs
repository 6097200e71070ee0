//! Transverse-field Ising chain with an imaginary longitudinal gain/loss
//! profile, its mirror-parity pseudo-metric and the gain generator.
//!
//! Basis: σᶻ product states, site 1 is the most significant bit, bit value
//! 0 is spin up (σᶻ = +1).

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::ComplexMatrix;
use crate::scalar::{lit, Real};

/// Largest chain handled by the dense constructors (dim 4096).
pub const MAX_SITES: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("number of sites must be even and positive, got {0}")]
    OddOrZeroSites(usize),
    #[error("{0} sites exceeds the dense limit of {MAX_SITES}")]
    TooManySites(usize),
    #[error("gain profile has {got} entries, expected {expected}")]
    ProfileLength { expected: usize, got: usize },
    #[error("gain profile is not antisymmetric: site {site} has {value} but its mirror has {mirror}")]
    NotAntisymmetric { site: usize, value: f64, mirror: f64 },
    #[error("transverse field must be non-negative and finite, got {0}")]
    BadTransverseField(f64),
    #[error("parameter {name} is not finite")]
    NonFinite { name: &'static str },
    #[error("normalized coupling {0} lies outside [-1, 1]")]
    CouplingOutOfRange(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Physical parameters of the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ChainSpec<T: Real> {
    /// Number of spins.
    pub n: usize,
    /// Transverse field Δ.
    pub delta: T,
    /// Ising coupling J; positive is ferromagnetic.
    pub coupling: T,
    /// Imaginary longitudinal field γ_n per site.
    pub gamma_profile: Vec<T>,
}

/// Point on the normalization circle `J² + Δ² = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormalizedPoint<T: Real> {
    pub j_tilde: T,
    pub gamma_tilde: T,
}

impl<T: Real> NormalizedPoint<T> {
    pub fn new(j_tilde: T, gamma_tilde: T) -> Self {
        Self { j_tilde, gamma_tilde }
    }

    /// `Δ = √(1 − j̃²)`.
    pub fn delta(&self) -> T {
        (T::one() - self.j_tilde * self.j_tilde).max(T::zero()).sqrt()
    }
}

/// `γ_n = (−1)^{n−1} γ`, n = 1..N.
pub fn staggered_profile<T: Real>(n: usize, gamma: T) -> Vec<T> {
    (0..n).map(|i| if i % 2 == 0 { gamma } else { -gamma }).collect()
}

impl<T: Real> ChainSpec<T> {
    pub fn staggered(n: usize, delta: T, coupling: T, gamma: T) -> Result<Self, ModelError> {
        let spec = Self {
            n,
            delta,
            coupling,
            gamma_profile: staggered_profile(n, gamma),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Staggered chain at a normalized point.
    pub fn from_normalized(n: usize, point: NormalizedPoint<T>) -> Result<Self, ModelError> {
        if !point.j_tilde.is_finite() || !point.gamma_tilde.is_finite() {
            return Err(ModelError::NonFinite { name: "normalized point" });
        }
        if point.j_tilde.abs() > T::one() {
            return Err(ModelError::CouplingOutOfRange(crate::scalar::to_f64(point.j_tilde)));
        }
        Self::staggered(n, point.delta(), point.j_tilde, point.gamma_tilde)
    }

    pub fn with_profile(n: usize, delta: T, coupling: T, gamma_profile: Vec<T>) -> Result<Self, ModelError> {
        let spec = Self {
            n,
            delta,
            coupling,
            gamma_profile,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Checks the structural invariants and the antisymmetry `γ_n = −γ_{N+1−n}`.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.validate_shape()?;
        let tol = lit::<T>(64.0) * T::epsilon();
        for i in 0..self.n / 2 {
            let (a, b) = (self.gamma_profile[i], self.gamma_profile[self.n - 1 - i]);
            if (a + b).abs() > tol * (a.abs() + b.abs()).max(T::one()) {
                return Err(ModelError::NotAntisymmetric {
                    site: i + 1,
                    value: crate::scalar::to_f64(a),
                    mirror: crate::scalar::to_f64(b),
                });
            }
        }
        Ok(())
    }

    /// Checks everything except antisymmetry.
    fn validate_shape(&self) -> Result<(), ModelError> {
        check_sites(self.n)?;
        if self.gamma_profile.len() != self.n {
            return Err(ModelError::ProfileLength {
                expected: self.n,
                got: self.gamma_profile.len(),
            });
        }
        if !self.coupling.is_finite() {
            return Err(ModelError::NonFinite { name: "coupling" });
        }
        if !(self.delta.is_finite() && self.delta >= T::zero()) {
            return Err(ModelError::BadTransverseField(crate::scalar::to_f64(self.delta)));
        }
        if self.gamma_profile.iter().any(|g| !g.is_finite()) {
            return Err(ModelError::NonFinite { name: "gamma_profile" });
        }
        Ok(())
    }
}

fn check_sites(n: usize) -> Result<(), ModelError> {
    if n == 0 || n % 2 == 1 {
        return Err(ModelError::OddOrZeroSites(n));
    }
    if n > MAX_SITES {
        return Err(ModelError::TooManySites(n));
    }
    Ok(())
}

/// `σᶻ` eigenvalue (+1 up, −1 down) of 0-based `site` in basis state `s`.
#[inline]
pub fn spin_z(n: usize, s: usize, site: usize) -> i32 {
    if (s >> (n - 1 - site)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `H = Σ_n [Δσˣ_n + iγ_nσᶻ_n] − J Σ_n σᶻ_nσᶻ_{n+1}` with open boundaries.
///
/// Non-antisymmetric profiles are accepted here so that pseudo-Hermiticity
/// violations can be measured.
pub fn build_hamiltonian<T: Real>(spec: &ChainSpec<T>) -> Result<ComplexMatrix<T>, ModelError> {
    spec.validate_shape()?;
    Ok(assemble(spec))
}

fn assemble<T: Real>(spec: &ChainSpec<T>) -> ComplexMatrix<T> {
    let n = spec.n;
    let dim = spec.dim();
    let mut h = ComplexMatrix::zeros(dim);
    for s in 0..dim {
        let mut re = T::zero();
        let mut im = T::zero();
        for site in 0..n {
            let z = lit::<T>(spin_z(n, s, site) as f64);
            im = im + spec.gamma_profile[site] * z;
            if site + 1 < n {
                re = re - spec.coupling * z * lit(spin_z(n, s, site + 1) as f64);
            }
            let flipped = s ^ (1 << (n - 1 - site));
            h[(flipped, s)] = h[(flipped, s)] + Complex::new(spec.delta, T::zero());
        }
        h[(s, s)] = Complex::new(re, im);
    }
    h
}

/// Mirror parity `σ^α_n → σ^α_{N+1−n}` as a bit-reversal permutation matrix.
pub fn build_parity<T: Real>(n: usize) -> Result<ComplexMatrix<T>, ModelError> {
    check_sites(n)?;
    let dim = 1usize << n;
    let mut p = ComplexMatrix::zeros(dim);
    for s in 0..dim {
        p[(mirror_state(n, s), s)] = Complex::new(T::one(), T::zero());
    }
    Ok(p)
}

/// Basis index of the mirror image of `s`.
pub fn mirror_state(n: usize, s: usize) -> usize {
    (0..n).fold(0, |acc, b| acc | (((s >> b) & 1) << (n - 1 - b)))
}

/// `‖ζH − H†ζ‖_F`.
pub fn psh_residual<T: Real>(h: &ComplexMatrix<T>, zeta: &ComplexMatrix<T>) -> Result<T, ModelError> {
    if h.dim() != zeta.dim() {
        return Err(ModelError::DimensionMismatch(h.dim(), zeta.dim()));
    }
    Ok(zeta.matmul(h).sub(&h.adjoint().matmul(zeta)).frobenius_norm())
}

/// `V = ∂H/∂γ = i Σ_n (−1)^{n−1} σᶻ_n` for the staggered profile.
pub fn gain_generator<T: Real>(n: usize) -> Result<ComplexMatrix<T>, ModelError> {
    custom_gain(n, &staggered_profile(n, T::one()))
}

/// `i Σ_n γ_n σᶻ_n` for an arbitrary profile.
pub fn custom_gain<T: Real>(n: usize, profile: &[T]) -> Result<ComplexMatrix<T>, ModelError> {
    check_sites(n)?;
    if profile.len() != n {
        return Err(ModelError::ProfileLength {
            expected: n,
            got: profile.len(),
        });
    }
    let dim = 1usize << n;
    let diag: Vec<Complex<T>> = (0..dim)
        .map(|s| {
            let m = (0..n).fold(T::zero(), |acc, site| acc + profile[site] * lit(spin_z(n, s, site) as f64));
            Complex::new(T::zero(), m)
        })
        .collect();
    Ok(ComplexMatrix::diag(&diag))
}

/// `∂H/∂j̃` on the normalization circle: `−(j̃/Δ) Σσˣ − Σσᶻσᶻ`.
pub fn coupling_derivative<T: Real>(n: usize, j_tilde: T) -> Result<ComplexMatrix<T>, ModelError> {
    let delta = (T::one() - j_tilde * j_tilde).sqrt();
    if !(delta > T::zero()) {
        return Err(ModelError::CouplingOutOfRange(crate::scalar::to_f64(j_tilde)));
    }
    let spec = ChainSpec {
        n,
        delta: -j_tilde / delta,
        coupling: T::one(),
        gamma_profile: vec![T::zero(); n],
    };
    check_sites(n)?;
    Ok(assemble(&spec))
}
