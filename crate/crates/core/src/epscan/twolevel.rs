//! Two-level reductions: projected Hamiltonians, the critical gain of a level
//! pair, and the splitting of a crossing into a pair of EP2s.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::ep2::{bisect_pair, EpRecord};
use super::family::{Axis, ChainFamily, ParameterFamily};
use super::sweep::{linspace, restore_state, sweep};
use super::EpScanError;
use crate::biortho::{spectrum, BiorthoSpectrum, LevelKind, Z2};
use crate::model::{coupling_derivative, gain_generator};
use crate::numerics::{inner, ComplexMatrix};
use crate::scalar::{lit, to_f64, Real};

/// `|w|` below this fraction of `‖V‖_F` counts as an accidental zero.
pub const ZERO_COUPLING: f64 = 1e-10;

/// `M_ij = ⟨L_i|H|R_j⟩` on the levels `a`, `b` of `basis`.
pub fn project_two_level<T: Real>(
    h: &ComplexMatrix<T>,
    basis: &BiorthoSpectrum<T>,
    a: usize,
    b: usize,
) -> Result<ComplexMatrix<T>, EpScanError> {
    let sys = &basis.eigensystem;
    for l in [a, b] {
        if l >= basis.len() {
            return Err(EpScanError::InvalidGrid(format!("level {l} out of range")));
        }
        if basis.levels[l].kind != LevelKind::Real {
            return Err(EpScanError::IndexIllDefined { level: l });
        }
    }
    let idx = [a, b];
    Ok(ComplexMatrix::from_fn(2, |i, j| inner(&sys.left[idx[i]], &h.mul_vec(&sys.right[idx[j]]))))
}

/// `⟨L_+|V|R_−⟩` between two real levels of opposite index.
pub fn coupling_element<T: Real>(
    basis: &BiorthoSpectrum<T>,
    v: &ComplexMatrix<T>,
    a: usize,
    b: usize,
) -> Result<Complex<T>, EpScanError> {
    let m = project_two_level(v, basis, a, b)?;
    let (za, zb) = (basis.levels[a].z2_index, basis.levels[b].z2_index);
    match (za, zb) {
        (Some(x), Some(y)) if x == y => Err(EpScanError::SameIndexPair),
        (Some(Z2::Plus), _) => Ok(m[(0, 1)]),
        _ => Ok(m[(1, 0)]),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GammaPrediction<T: Real> {
    /// `|λ_a − λ_b|` at zero gain.
    pub gap: T,
    /// `|⟨L_+|V|R_−⟩|`.
    pub coupling: T,
    /// `gap / (2|w|)`.
    pub gamma_cr: T,
}

/// Two-level estimate of the gain at which levels `a`, `b` of `h0` coalesce
/// under `h0 + γV`.
pub fn predict_gamma_cr<T: Real>(
    h0: &ComplexMatrix<T>,
    zeta: &ComplexMatrix<T>,
    v: &ComplexMatrix<T>,
    pair: (usize, usize),
) -> Result<GammaPrediction<T>, EpScanError> {
    let basis = spectrum(h0, zeta)?;
    let (a, b) = pair;
    let w = coupling_element(&basis, v, a, b)?;
    if w.norm() <= lit::<T>(ZERO_COUPLING) * v.frobenius_norm() {
        return Err(EpScanError::AccidentallyZeroElement { w: to_f64(w.norm()) });
    }
    let gap = (basis.levels[a].eigenvalue - basis.levels[b].eigenvalue).norm();
    Ok(GammaPrediction {
        gap,
        coupling: w.norm(),
        gamma_cr: gap / (lit::<T>(2.0) * w.norm()),
    })
}

/// [`predict_gamma_cr`] for the staggered chain at `(j̃, 0)`; `pair` are
/// positions in the energy-sorted zero-gain spectrum.
pub fn predict_chain_gamma_cr<T: Real>(n: usize, j_tilde: T, pair: (usize, usize)) -> Result<GammaPrediction<T>, EpScanError> {
    let fam = ChainFamily::new(n, Axis::GammaTilde, j_tilde)?;
    let h0 = fam.hamiltonian(T::zero())?;
    predict_gamma_cr(&h0, fam.metric(), &gain_generator(n)?, pair)
}

/// Linear-in-γ̃ data of a zero-gain crossing of opposite-index levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CrossingSlope<T: Real> {
    /// Half the difference of the level slopes `dE/dj̃`.
    pub alpha: T,
    /// `|⟨L_+|V|R_−⟩|`.
    pub coupling: T,
    /// Predicted half-width per unit gain, `|w|/α`.
    pub slope: T,
    /// Positions of the two levels at the crossing.
    pub levels: (usize, usize),
}

/// Two-level data at a zero-gain crossing `(j_c, energy)`.
pub fn crossing_two_level<T: Real>(n: usize, j_c: T, energy: T) -> Result<CrossingSlope<T>, EpScanError> {
    let fam = ChainFamily::new(n, Axis::GammaTilde, j_c)?;
    let basis = spectrum(&fam.hamiltonian(T::zero())?, fam.metric())?;
    let mut near: Vec<(usize, T)> = basis
        .levels
        .iter()
        .map(|l| (l.index, (l.eigenvalue.re - energy).abs()))
        .collect();
    near.sort_by(|x, y| to_f64(x.1).total_cmp(&to_f64(y.1)).then(x.0.cmp(&y.0)));
    let (a, b) = (near[0].0.min(near[1].0), near[0].0.max(near[1].0));
    let dh = coupling_derivative(n, j_c)?;
    let slopes = project_two_level(&dh, &basis, a, b)?;
    let alpha = (slopes[(0, 0)].re - slopes[(1, 1)].re).abs() * lit::<T>(0.5);
    let w = coupling_element(&basis, &gain_generator(n)?, a, b)?;
    if !(alpha > T::zero()) {
        return Err(EpScanError::Ambiguous("levels have equal slopes at the crossing".into()));
    }
    Ok(CrossingSlope {
        alpha,
        coupling: w.norm(),
        slope: w.norm() / alpha,
        levels: (a, b),
    })
}

/// The two EP2s bounding the complex window opened by a crossing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CrossingSplit<T: Real> {
    pub gamma_tilde: T,
    pub left: EpRecord<T>,
    pub right: EpRecord<T>,
    pub half_width: T,
}

/// Sweeps `j̃ ∈ [j_c − window, j_c + window]` at fixed `γ̃` with `points`
/// samples and bisects both ends of the complex pair nearest `(j_c, energy)`.
pub fn crossing_split<T: Real>(
    n: usize,
    j_c: T,
    energy: T,
    gamma_tilde: T,
    window: T,
    points: usize,
    tol: T,
) -> Result<CrossingSplit<T>, EpScanError> {
    let one = T::one();
    let lo = (j_c - window).max(-one);
    let hi = (j_c + window).min(one);
    let fam = ChainFamily::new(n, Axis::JTilde, gamma_tilde)?;
    let grid = linspace(lo, hi, points)?;
    let result = sweep(&fam, &grid)?;
    let i0 = (0..grid.len())
        .min_by(|&x, &y| to_f64((grid[x] - j_c).abs()).total_cmp(&to_f64((grid[y] - j_c).abs())))
        .unwrap_or(0);

    let (x, y) = result
        .tracks
        .iter()
        .enumerate()
        .filter_map(|(t, tr)| tr.samples[i0].partner.filter(|&u| u > t).map(|u| (t, u, tr.samples[i0].eigenvalue.re)))
        .min_by(|p, q| to_f64((p.2 - energy).abs()).total_cmp(&to_f64((q.2 - energy).abs())))
        .map(|(t, u, _)| (t, u))
        .ok_or_else(|| EpScanError::NoSplit(format!("no complex pair at j̃ = {}", to_f64(grid[i0]))))?;

    let paired = |i: usize| result.sample(x, i).partner == Some(y);
    let mut l = i0;
    while l > 0 && paired(l - 1) {
        l -= 1;
    }
    let mut r = i0;
    while r + 1 < grid.len() && paired(r + 1) {
        r += 1;
    }
    if l == 0 || r + 1 == grid.len() {
        return Err(EpScanError::NoSplit("complex window reaches the sweep boundary".into()));
    }
    let left = bisect_pair(&fam, restore_state(&fam, &result, l - 1)?, restore_state(&fam, &result, l)?, (x, y), tol)?.0;
    let right = bisect_pair(&fam, restore_state(&fam, &result, r + 1)?, restore_state(&fam, &result, r)?, (x, y), tol)?.0;
    let half_width = (right.parameter - left.parameter) * lit::<T>(0.5);
    Ok(CrossingSplit {
        gamma_tilde,
        left,
        right,
        half_width,
    })
}

/// Least-squares slope through the origin.
pub fn fit_slope<T: Real>(x: &[T], y: &[T]) -> T {
    let num: T = x.iter().zip(y).map(|(&a, &b)| a * b).sum();
    let den: T = x.iter().map(|&a| a * a).sum();
    num / den
}
