//! Many-body states as occupation sets of Bogolyubov modes.

use serde::{Deserialize, Serialize};

use super::modes::{solve_modes, FermionMode};
use super::OracleError;
use crate::biortho::Z2;
use crate::scalar::{lit, to_f64, Real};

/// Largest chain whose 2^N states are enumerated.
pub const MAX_ORACLE_SITES: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OracleState<T: Real> {
    /// Bit `i` set when mode `i` is occupied.
    pub occupation: u32,
    pub energy: T,
    pub parity: Z2,
    /// Number of occupied modes.
    pub r: usize,
}

impl<T: Real> OracleState<T> {
    /// Occupied modes other than the lowest one.
    pub fn excited_nonzero(&self) -> usize {
        self.r - (self.occupation & 1) as usize
    }

    pub fn occupies(&self, mode: usize) -> bool {
        (self.occupation >> mode) & 1 == 1
    }
}

/// `(−1)^{r(r−1)/2}` for `r` occupied modes.
fn ordering_sign(r: usize) -> Z2 {
    if (r * r.saturating_sub(1) / 2) % 2 == 0 {
        Z2::Plus
    } else {
        Z2::Minus
    }
}

/// All `2^N` states sorted by `(energy, parity)`.
pub fn full_spectrum<T: Real>(n: usize, j: T, delta: T) -> Result<Vec<OracleState<T>>, OracleError> {
    if n > MAX_ORACLE_SITES {
        return Err(OracleError::ResourceLimit {
            n,
            max: MAX_ORACLE_SITES,
        });
    }
    let modes = solve_modes(n, j, delta)?;
    let half = lit::<T>(0.5);
    let vacuum = -half * modes.iter().map(|m| m.energy).sum::<T>();
    let mut states: Vec<OracleState<T>> = (0u32..(1u32 << n))
        .map(|mask| {
            let occupied = modes.iter().filter(|m| (mask >> m.label) & 1 == 1);
            let energy = occupied.clone().fold(vacuum, |acc, m| acc + m.energy);
            let parity = occupied.fold(ordering_sign(mask.count_ones() as usize), |acc, m| acc * m.delta);
            OracleState {
                occupation: mask,
                energy,
                parity,
                r: mask.count_ones() as usize,
            }
        })
        .collect();
    states.sort_by(|a, b| {
        to_f64(a.energy)
            .total_cmp(&to_f64(b.energy))
            .then(a.parity.value().cmp(&b.parity.value()))
            .then(a.occupation.cmp(&b.occupation))
    });
    Ok(states)
}

/// Excitation band of a state: its occupied modes, not counting the lowest
/// one when it is an almost-zero mode (`|J| > Δ`).
pub fn excitation_band<T: Real>(state: &OracleState<T>, j: T, delta: T) -> usize {
    if j.abs() > delta {
        state.excited_nonzero()
    } else {
        state.r
    }
}

/// Parity built by adding modes one at a time in the given order; each
/// addition to a state with `r` modes multiplies by `(−1)^r δ_k`.
pub fn parity_by_recursion<T: Real>(modes: &[FermionMode<T>], order: &[usize]) -> Z2 {
    order.iter().enumerate().fold(Z2::Plus, |acc, (r, &label)| {
        let sign = if r % 2 == 0 { Z2::Plus } else { Z2::Minus };
        acc * sign * modes[label].delta
    })
}

/// `2|J|(1 − Δ²/J²)(Δ/|J|)^N`, the large-coupling asymptote of the lowest mode energy.
pub fn almost_zero_energy<T: Real>(n: usize, j: T, delta: T) -> Result<T, OracleError> {
    let ja = j.abs();
    if !(ja > delta) {
        return Err(OracleError::Domain(format!(
            "almost-zero mode requires |J| > Δ, got |J| = {}, Δ = {}",
            to_f64(ja),
            to_f64(delta)
        )));
    }
    let ratio = delta / ja;
    Ok(lit::<T>(2.0) * ja * (T::one() - ratio * ratio) * ratio.powi(n as i32))
}

/// Relative parity `sign(J)(−1)^r` of two states that differ only by the
/// lowest mode, with `r` other modes occupied.
pub fn pair_relative_parity<T: Real>(r: usize, j: T) -> Z2 {
    let band = if r % 2 == 0 { Z2::Plus } else { Z2::Minus };
    Z2::from_sign(j) * band
}

/// Oracle-versus-numeric comparison of a Hermitian spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub max_energy_error: f64,
    /// Levels whose index disagrees with the oracle parity (undefined counts).
    pub parity_mismatches: usize,
    /// Groups of oracle energies closer than the cluster tolerance.
    pub degenerate_clusters: usize,
}

/// Matches sorted energies position by position and compares parity
/// multisets inside each degenerate cluster.
pub fn compare_with_numeric<T: Real>(
    states: &[OracleState<T>],
    energies: &[T],
    indices: &[Option<Z2>],
    cluster_tol: T,
) -> OracleComparison {
    let mut num: Vec<(T, Option<Z2>)> = energies.iter().copied().zip(indices.iter().copied()).collect();
    num.sort_by(|a, b| to_f64(a.0).total_cmp(&to_f64(b.0)));
    let len = states.len().min(num.len());
    let mut max_err = if states.len() == num.len() { 0.0 } else { f64::INFINITY };
    for k in 0..len {
        max_err = max_err.max(to_f64((states[k].energy - num[k].0).abs()));
    }
    let mut mismatches = states.len().abs_diff(num.len());
    let mut clusters = 0;
    let mut start = 0;
    while start < len {
        let mut end = start + 1;
        while end < len && states[end].energy - states[end - 1].energy <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            clusters += 1;
        }
        let oracle_plus = states[start..end].iter().filter(|s| s.parity == Z2::Plus).count();
        let numeric_plus = num[start..end].iter().filter(|x| x.1 == Some(Z2::Plus)).count();
        let undefined = num[start..end].iter().filter(|x| x.1.is_none()).count();
        mismatches += undefined + oracle_plus.abs_diff(numeric_plus);
        start = end;
    }
    OracleComparison {
        max_energy_error: max_err,
        parity_mismatches: mismatches,
        degenerate_clusters: clusters,
    }
}
