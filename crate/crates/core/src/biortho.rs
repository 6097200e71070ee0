//! ζ-rescaled biorthogonal spectra: Z2-indices of real levels, conjugate
//! pairing of complex levels, and the EP-proximity indicator
//! `|⟨R|ζ|R⟩| / (‖R‖‖ζR‖)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{decompose, inner, vec_norm, ComplexMatrix, EigenSystem, NumericsError};
use crate::scalar::{lit, to_f64, Real};

/// Relative reality tolerance, in units of the spectral radius.
pub const REALITY_TOL: f64 = 1e-8;
/// Indicator value below which the index of a real level is not assigned.
pub const INDICATOR_FLOOR: f64 = 1e-6;
/// Relative tolerance for matching `λ_b ≈ conj(λ_a)`.
pub const PAIRING_TOL: f64 = 1e-6;
/// Condition estimate treated as sitting on an exceptional point.
pub const EP_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BiorthoError {
    #[error("matrix is defective at working precision (condition {condition:.3e})")]
    AtExceptionalPoint { condition: f64 },
    #[error("Z2-index ill-defined: indicator {indicator:.3e} is below the floor")]
    IndexIllDefined { indicator: f64 },
    #[error("zero vector has no indicator")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Z2-index `sign⟨R|ζ|R⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Z2 {
    Plus,
    Minus,
}

impl Z2 {
    pub fn from_sign<T: Real>(x: T) -> Self {
        if x >= T::zero() {
            Z2::Plus
        } else {
            Z2::Minus
        }
    }

    pub fn from_i32(x: i32) -> Self {
        if x >= 0 {
            Z2::Plus
        } else {
            Z2::Minus
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Z2::Plus => 1,
            Z2::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Z2::Plus => Z2::Minus,
            Z2::Minus => Z2::Plus,
        }
    }
}

impl std::ops::Mul for Z2 {
    type Output = Z2;

    fn mul(self, rhs: Z2) -> Z2 {
        Z2::from_i32(self.value() * rhs.value())
    }
}

/// `-1`, `0` (undefined) or `+1` for tabular output.
pub fn index_code(z: Option<Z2>) -> i32 {
    z.map_or(0, Z2::value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelKind {
    /// Real eigenvalue with a definite index.
    Real,
    /// Member of a complex-conjugate pair.
    Complex,
    /// Real eigenvalue whose indicator is below the floor.
    IllDefined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LevelRecord<T: Real> {
    pub index: usize,
    pub eigenvalue: Complex<T>,
    pub z2_index: Option<Z2>,
    pub ep_indicator: T,
    pub conjugate_partner: Option<usize>,
    pub kind: LevelKind,
}

impl<T: Real> LevelRecord<T> {
    pub fn is_real(&self) -> bool {
        self.kind != LevelKind::Complex
    }
}

/// Eigenvalues sorted by `(Re, Im)` with per-level indices. Right vectors of
/// real levels are rescaled by `1/√|⟨R|ζ|R⟩|` and their left vectors equal
/// `ζ_α ζ|R⟩`.
#[derive(Clone, Debug)]
pub struct BiorthoSpectrum<T: Real> {
    pub levels: Vec<LevelRecord<T>>,
    pub eigensystem: EigenSystem<T>,
    pub reality_tol: T,
}

impl<T: Real> BiorthoSpectrum<T> {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        self.levels.iter().map(|l| l.eigenvalue).collect()
    }

    pub fn indices(&self) -> Vec<Option<Z2>> {
        self.levels.iter().map(|l| l.z2_index).collect()
    }

    pub fn undefined_count(&self) -> usize {
        self.levels.iter().filter(|l| l.z2_index.is_none()).count()
    }
}

/// `⟨R|ζ|R⟩`.
pub fn zeta_norm<T: Real>(r: &[Complex<T>], zeta: &ComplexMatrix<T>) -> Complex<T> {
    inner(r, &zeta.mul_vec(r))
}

/// Normalized `|⟨R|ζ|R⟩| / (‖R‖·‖ζR‖)`, in `[0, 1]`.
pub fn ep_indicator<T: Real>(r: &[Complex<T>], zeta: &ComplexMatrix<T>) -> Result<T, BiorthoError> {
    if r.len() != zeta.dim() {
        return Err(BiorthoError::DimensionMismatch(r.len(), zeta.dim()));
    }
    let zr = zeta.mul_vec(r);
    let denom = vec_norm(r) * vec_norm(&zr);
    if denom == T::zero() {
        return Err(BiorthoError::ZeroVector);
    }
    Ok((inner(r, &zr).norm() / denom).min(T::one()))
}

/// Sign of the real quadratic form `⟨R|ζ|R⟩`.
pub fn z2_index<T: Real>(r: &[Complex<T>], zeta: &ComplexMatrix<T>) -> Result<Z2, BiorthoError> {
    z2_index_with_floor(r, zeta, lit(INDICATOR_FLOOR))
}

pub fn z2_index_with_floor<T: Real>(r: &[Complex<T>], zeta: &ComplexMatrix<T>, floor: T) -> Result<Z2, BiorthoError> {
    let ind = ep_indicator(r, zeta)?;
    if ind < floor {
        return Err(BiorthoError::IndexIllDefined { indicator: to_f64(ind) });
    }
    Ok(Z2::from_sign(zeta_norm(r, zeta).re))
}

/// Absolute reality tolerance for a spectrum of radius `radius`; never
/// below `64ε` of the scalar type.
pub fn reality_tol<T: Real>(radius: T) -> T {
    lit::<T>(REALITY_TOL).max(lit::<T>(64.0) * T::epsilon()) * radius.max(T::one())
}

/// Spectrum with default tolerances: reality [`reality_tol`] of the spectral radius,
/// indicator floor `1e-6`.
pub fn spectrum<T: Real>(h: &ComplexMatrix<T>, zeta: &ComplexMatrix<T>) -> Result<BiorthoSpectrum<T>, BiorthoError> {
    let sys = decompose(h, lit(crate::numerics::DEFAULT_TOL))?;
    let radius = sys.eigenvalues.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let tol = reality_tol(radius);
    from_eigensystem(sys, zeta, tol, lit(INDICATOR_FLOOR))
}

/// Spectrum with an explicit absolute reality tolerance.
pub fn spectrum_with_indices<T: Real>(
    h: &ComplexMatrix<T>,
    zeta: &ComplexMatrix<T>,
    reality_tol: T,
) -> Result<BiorthoSpectrum<T>, BiorthoError> {
    let sys = decompose(h, lit(crate::numerics::DEFAULT_TOL))?;
    from_eigensystem(sys, zeta, reality_tol, lit(INDICATOR_FLOOR))
}

/// Assigns indices to an existing decomposition.
pub fn from_eigensystem<T: Real>(
    mut sys: EigenSystem<T>,
    zeta: &ComplexMatrix<T>,
    reality_tol: T,
    floor: T,
) -> Result<BiorthoSpectrum<T>, BiorthoError> {
    let n = sys.dim();
    if zeta.dim() != n {
        return Err(BiorthoError::DimensionMismatch(n, zeta.dim()));
    }
    if !(sys.condition <= lit(EP_CONDITION)) {
        return Err(BiorthoError::AtExceptionalPoint {
            condition: to_f64(sys.condition),
        });
    }
    let real: Vec<bool> = sys.eigenvalues.iter().map(|z| z.im.abs() <= reality_tol).collect();

    // Inside a real cluster, diagonalize the ζ-Gram matrix so that the
    // vectors are mutually ζ-orthogonal.
    for cluster in sys.clusters(lit(crate::numerics::CLUSTER_TOL)) {
        let members: Vec<usize> = cluster.into_iter().filter(|&k| real[k]).collect();
        if members.len() > 1 {
            rotate_cluster(&mut sys, zeta, &members)?;
        }
    }

    let scale = sys.eigenvalues.iter().map(|z| z.norm()).fold(T::zero(), T::max).max(T::one());
    let pair_tol = lit::<T>(PAIRING_TOL) * scale;
    let mut levels = Vec::with_capacity(n);
    for k in 0..n {
        let indicator = ep_indicator(&sys.right[k], zeta)?;
        let (kind, z2) = if !real[k] {
            (LevelKind::Complex, None)
        } else if indicator < floor {
            (LevelKind::IllDefined, None)
        } else {
            let q = zeta_norm(&sys.right[k], zeta);
            let s = Z2::from_sign(q.re);
            let w = q.norm().sqrt();
            let sign = lit::<T>(s.value() as f64);
            for x in sys.right[k].iter_mut() {
                *x = *x / w;
            }
            sys.left[k] = zeta.mul_vec(&sys.right[k]).into_iter().map(|x| x * sign).collect();
            (LevelKind::Real, Some(s))
        };
        levels.push(LevelRecord {
            index: k,
            eigenvalue: sys.eigenvalues[k],
            z2_index: z2,
            ep_indicator: indicator,
            conjugate_partner: None,
            kind,
        });
    }
    link_partners(&mut levels, pair_tol);
    Ok(BiorthoSpectrum {
        levels,
        eigensystem: sys,
        reality_tol,
    })
}

fn rotate_cluster<T: Real>(sys: &mut EigenSystem<T>, zeta: &ComplexMatrix<T>, members: &[usize]) -> Result<(), BiorthoError> {
    let k = members.len();
    let gram = ComplexMatrix::from_fn(k, |a, b| inner(&sys.right[members[a]], &zeta.mul_vec(&sys.right[members[b]])));
    let g = decompose(&hermitize(&gram), lit(crate::numerics::DEFAULT_TOL))?;
    // Unitary U from the Hermitian eigenproblem; R' = R U, L' = L U.
    let dim = sys.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let old_r: Vec<Vec<Complex<T>>> = members.iter().map(|&m| sys.right[m].clone()).collect();
    let old_l: Vec<Vec<Complex<T>>> = members.iter().map(|&m| sys.left[m].clone()).collect();
    // Column c of U goes to the member it overlaps most, so an already
    // ζ-orthogonal cluster keeps its labels.
    let mut taken = vec![false; k];
    let mut assign = vec![0usize; k];
    let mut order: Vec<(usize, usize, f64)> = Vec::with_capacity(k * k);
    for c in 0..k {
        for a in 0..k {
            order.push((c, a, to_f64(g.right[c][a].norm())));
        }
    }
    order.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let mut col_done = vec![false; k];
    for (c, a, _) in order {
        if !col_done[c] && !taken[a] {
            col_done[c] = true;
            taken[a] = true;
            assign[c] = a;
        }
    }
    for (c, u) in g.right.iter().enumerate() {
        let mut r = vec![zero; dim];
        let mut l = vec![zero; dim];
        for (a, ua) in u.iter().enumerate() {
            for i in 0..dim {
                r[i] = r[i] + old_r[a][i] * *ua;
                l[i] = l[i] + old_l[a][i] * *ua;
            }
        }
        let target = members[assign[c]];
        sys.right[target] = r;
        sys.left[target] = l;
    }
    Ok(())
}

fn hermitize<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let half = Complex::new(lit::<T>(0.5), T::zero());
    m.add(&m.adjoint()).scale(half)
}

fn link_partners<T: Real>(levels: &mut [LevelRecord<T>], tol: T) {
    let n = levels.len();
    let best: Vec<Option<usize>> = (0..n)
        .map(|a| {
            if levels[a].kind != LevelKind::Complex {
                return None;
            }
            let target = levels[a].eigenvalue.conj();
            (0..n)
                .filter(|&b| b != a && levels[b].kind == LevelKind::Complex)
                .map(|b| (b, (levels[b].eigenvalue - target).norm()))
                .filter(|&(_, d)| d <= tol)
                .min_by(|x, y| to_f64(x.1).total_cmp(&to_f64(y.1)).then(x.0.cmp(&y.0)))
                .map(|(b, _)| b)
        })
        .collect();
    for a in 0..n {
        if let Some(b) = best[a] {
            if best[b] == Some(a) {
                levels[a].conjugate_partner = Some(b);
            }
        }
    }
}
