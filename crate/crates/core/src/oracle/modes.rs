//! Bogolyubov modes from `sin((N+1)k)/sin(Nk) = J/Δ`.

use serde::{Deserialize, Serialize};

use super::roots::bisect;
use super::OracleError;
use crate::biortho::Z2;
use crate::scalar::{lit, to_f64, Real};

/// Distance kept from the poles of `sin(Nk)` and from the ends of `[0, π]`;
/// raised to `16επ` for coarser scalars.
pub const POLE_SHRINK: f64 = 1e-12;

/// Wave-vector of a mode; the lowest mode leaves the real axis when
/// `|J|/Δ > (N+1)/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum WaveVector<T: Real> {
    Real(T),
    /// `k = iκ` (ferromagnet).
    Imag(T),
    /// `k = π − iκ` (antiferromagnet).
    PiMinusImag(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FermionMode<T: Real> {
    /// Position in order of increasing energy.
    pub label: usize,
    pub wave_vector: WaveVector<T>,
    pub energy: T,
    /// Parity factor `δ_k`.
    pub delta: Z2,
}

/// `sin((N+1)k) / sin(Nk)`.
pub fn mode_function<T: Real>(n: usize, k: T) -> T {
    let nn = lit::<T>(n as f64);
    ((nn + T::one()) * k).sin() / (nn * k).sin()
}

/// `sinh((N+1)κ) / sinh(Nκ)` without overflow.
fn hyperbolic_ratio<T: Real>(n: usize, kappa: T) -> T {
    let nn = lit::<T>(n as f64);
    let two = lit::<T>(2.0);
    kappa.exp() * (-two * (nn + T::one()) * kappa).exp_m1() / (-two * nn * kappa).exp_m1()
}

/// `2Δ sinh κ / sinh(Nκ)`, equal to the dispersion at `k = iκ` or `π − iκ`
/// on the mode equation, free of the cancellation in the direct form.
fn complex_mode_energy<T: Real>(n: usize, delta: T, kappa: T) -> T {
    let nn = lit::<T>(n as f64);
    let two = lit::<T>(2.0);
    two * delta * (-(nn - T::one()) * kappa).exp() * (-two * kappa).exp_m1() / (-two * nn * kappa).exp_m1()
}

/// `2√((J−Δ)² + 4JΔ sin²(k/2))`.
fn real_mode_energy<T: Real>(j: T, delta: T, k: T) -> T {
    let two = lit::<T>(2.0);
    let s = (k / two).sin();
    let arg = (j - delta) * (j - delta) + lit::<T>(4.0) * j * delta * s * s;
    two * arg.max(T::zero()).sqrt()
}

/// `sign(sin k / sin Nk)` evaluated on the wave-vector, continued to the
/// complex branches.
pub fn delta_from_wave_vector<T: Real>(n: usize, wv: WaveVector<T>) -> Z2 {
    match wv {
        WaveVector::Real(k) => Z2::from_sign(k.sin() / (lit::<T>(n as f64) * k).sin()),
        WaveVector::Imag(_) => Z2::Plus,
        WaveVector::PiMinusImag(_) => {
            if n % 2 == 0 {
                Z2::Minus
            } else {
                Z2::Plus
            }
        }
    }
}

/// All `N` modes ordered by increasing energy.
pub fn solve_modes<T: Real>(n: usize, j: T, delta: T) -> Result<Vec<FermionMode<T>>, OracleError> {
    if n == 0 {
        return Err(OracleError::Domain("chain needs at least one site".into()));
    }
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(OracleError::Domain(format!("transverse field must be positive, got {}", to_f64(delta))));
    }
    if j == T::zero() || !j.is_finite() {
        return Err(OracleError::Domain("coupling must be nonzero and finite".into()));
    }
    let g = j / delta;
    let nn = lit::<T>(n as f64);
    let pi = T::PI();
    let shrink = lit::<T>(POLE_SHRINK).max(lit::<T>(16.0) * T::epsilon() * pi);
    let xtol = lit::<T>(4.0) * T::epsilon() * pi;
    let ferro = j > T::zero();
    // Interval that loses its real root past the threshold.
    let edge = if ferro { 0 } else { n - 1 };
    let sign_j = if ferro { Z2::Plus } else { Z2::Minus };
    let sign_pow = if n % 2 == 1 { Z2::Plus } else { sign_j };

    let mut modes = Vec::with_capacity(n);
    for i in 0..n {
        let lo = pi * lit(i as f64) / nn + shrink;
        let hi = pi * lit((i + 1) as f64) / nn - shrink;
        let label = if ferro { i } else { n - 1 - i };
        let h = |k: T| mode_function(n, k) - g;
        let wave_vector = match bisect(h, lo, hi, xtol) {
            Ok(k) => WaveVector::Real(k),
            Err(OracleError::NoSignChange { .. }) if i == edge => complex_branch(n, g, xtol, ferro, pi)?,
            Err(e) => return Err(e),
        };
        let energy = match wave_vector {
            WaveVector::Real(k) => real_mode_energy(j, delta, k),
            WaveVector::Imag(kappa) | WaveVector::PiMinusImag(kappa) => complex_mode_energy(n, delta, kappa),
        };
        let parity = if label % 2 == 0 { Z2::Plus } else { Z2::Minus };
        modes.push(FermionMode {
            label,
            wave_vector,
            energy,
            delta: sign_pow * parity,
        });
    }
    modes.sort_by_key(|m| m.label);
    Ok(modes)
}

/// Root of `sinh((N+1)κ)/sinh(Nκ) = |g|`; collapses onto the real edge when
/// `|g|` sits on the threshold within rounding.
fn complex_branch<T: Real>(n: usize, g: T, xtol: T, ferro: bool, pi: T) -> Result<WaveVector<T>, OracleError> {
    let ga = g.abs();
    let lo = lit::<T>(POLE_SHRINK);
    let hi = ga.ln().max(lit::<T>(2.0) * lo);
    match bisect(|kappa| hyperbolic_ratio(n, kappa) - ga, lo, hi, xtol) {
        Ok(kappa) => Ok(if ferro {
            WaveVector::Imag(kappa)
        } else {
            WaveVector::PiMinusImag(kappa)
        }),
        Err(OracleError::NoSignChange { .. }) if hyperbolic_ratio(n, lo) >= ga => {
            Ok(WaveVector::Real(if ferro { T::zero() } else { pi }))
        }
        Err(e) => Err(e),
    }
}
