//! Real-level crossings along a sweep and their index classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::ParameterFamily;
use super::sweep::{restore_state, solve_exact, SweepResult, TrackedState};
use super::EpScanError;
use crate::biortho::Z2;
use crate::scalar::{lit, to_f64, Real};

/// Default bracket width for crossing bisection.
pub const CROSSING_TOL: f64 = 1e-12;
/// Relative gap below which a grid minimum without a sign change is flagged.
pub const NEAR_MISS_GAP: f64 = 1e-6;
/// Relative distance within which other levels make a crossing multi-level.
pub const MULTI_LEVEL_TOL: f64 = 1e-6;
/// Relative gap above which a bisected sign change is not a crossing.
pub const CONVERGED_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    /// Equal Z2-indices.
    Same,
    /// Opposite Z2-indices.
    Opposite,
    /// Undefined index, near miss, or more than two levels involved.
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Crossing<T: Real> {
    pub parameter: T,
    pub location: Vec<T>,
    pub tracks: (usize, usize),
    pub energy: T,
    /// `|λ_a − λ_b|` at the located point.
    pub gap: T,
    pub indices: (Option<Z2>, Option<Z2>),
    pub kind: CrossingKind,
    pub bracket_width: T,
}

fn kind_of(indices: (Option<Z2>, Option<Z2>)) -> CrossingKind {
    match indices {
        (Some(a), Some(b)) if a == b => CrossingKind::Same,
        (Some(_), Some(_)) => CrossingKind::Opposite,
        _ => CrossingKind::Ambiguous,
    }
}

fn gap_re<T: Real>(s: &TrackedState<T>, a: usize, b: usize) -> T {
    s.level(a).eigenvalue.re - s.level(b).eigenvalue.re
}

/// Bisects the sign change of `Re(λ_a − λ_b)` for tracks real on both ends.
pub fn locate_crossing<T: Real, F: ParameterFamily<T>>(
    family: &F,
    left: &TrackedState<T>,
    right: &TrackedState<T>,
    pair: (usize, usize),
    tol: T,
) -> Result<Crossing<T>, EpScanError> {
    let (a, b) = pair;
    for (s, t) in [(left, a), (left, b), (right, a), (right, b)] {
        if !s.is_real(t) {
            return Err(EpScanError::LevelNotReal { level: t });
        }
    }
    let d_lo = gap_re(left, a, b);
    if d_lo * gap_re(right, a, b) > T::zero() {
        return Err(EpScanError::Ambiguous(format!("no sign change for tracks ({a}, {b})")));
    }
    let indices = (left.level(a).z2_index, left.level(b).z2_index);
    let mut lo = left.clone();
    let mut hi_param = right.param;
    let two = lit::<T>(2.0);
    let mut iterations = 0;
    while (hi_param - lo.param).abs() > tol && iterations < 200 {
        iterations += 1;
        let mid = lo.param + (hi_param - lo.param) / two;
        if mid == lo.param || mid == hi_param {
            break;
        }
        let (m, _) = lo.advance(mid, solve_exact(family, mid)?);
        if !(m.is_real(a) && m.is_real(b)) {
            return Err(EpScanError::Ambiguous(format!("tracks ({a}, {b}) leave the real axis near {}", to_f64(mid))));
        }
        let d = gap_re(&m, a, b);
        if d == T::zero() {
            lo = m;
            hi_param = mid;
            break;
        }
        if (d > T::zero()) == (d_lo > T::zero()) {
            lo = m;
        } else {
            hi_param = mid;
        }
    }
    let (la, lb) = (lo.level(a).eigenvalue, lo.level(b).eigenvalue);
    let energy = (la.re + lb.re) / two;
    let scale = lo.spectrum.eigensystem.matrix_norm.max(T::one());
    let near = lo
        .spectrum
        .levels
        .iter()
        .filter(|l| (l.eigenvalue - num_complex::Complex::new(energy, T::zero())).norm() <= lit::<T>(MULTI_LEVEL_TOL) * scale)
        .count();
    let gap = (la - lb).norm();
    let kind = if near > 2 || gap > lit::<T>(CONVERGED_GAP) * scale {
        CrossingKind::Ambiguous
    } else {
        kind_of(indices)
    };
    let param = (lo.param + hi_param) / two;
    Ok(Crossing {
        parameter: param,
        location: family.location(param),
        tracks: (a.min(b), a.max(b)),
        energy,
        gap,
        indices: if a < b { indices } else { (indices.1, indices.0) },
        kind,
        bracket_width: (hi_param - lo.param).abs(),
    })
}

/// Every crossing of real tracks along a sweep, plus grid-level near misses.
pub fn classify_crossings<T: Real, F: ParameterFamily<T>>(
    family: &F,
    sweep: &SweepResult<T>,
    tol: T,
) -> Result<Vec<Crossing<T>>, EpScanError> {
    let nt = sweep.tracks.len();
    let real_at = |t: usize, i: usize| sweep.sample(t, i).is_real();
    let d = |x: usize, y: usize, i: usize| sweep.sample(x, i).eigenvalue.re - sweep.sample(y, i).eigenvalue.re;

    let mut candidates: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    for i in 0..sweep.len().saturating_sub(1) {
        let mut pairs = Vec::new();
        for x in 0..nt {
            if !(real_at(x, i) && real_at(x, i + 1)) {
                continue;
            }
            for y in x + 1..nt {
                if real_at(y, i) && real_at(y, i + 1) && (d(x, y, i) >= T::zero()) != (d(x, y, i + 1) >= T::zero()) {
                    pairs.push((x, y));
                }
            }
        }
        if !pairs.is_empty() {
            candidates.push((i, pairs));
        }
    }

    let located: Vec<Result<Vec<Crossing<T>>, EpScanError>> = candidates
        .par_iter()
        .map(|(i, pairs)| {
            let left = restore_state(family, sweep, *i)?;
            let right = restore_state(family, sweep, *i + 1)?;
            let mut out = Vec::with_capacity(pairs.len());
            for &pair in pairs {
                match locate_crossing(family, &left, &right, pair, tol) {
                    Ok(c) => out.push(c),
                    Err(EpScanError::Ambiguous(_)) | Err(EpScanError::LevelNotReal { .. }) => out.push(Crossing {
                        parameter: (left.param + right.param) * lit::<T>(0.5),
                        location: family.location((left.param + right.param) * lit::<T>(0.5)),
                        tracks: pair,
                        energy: left.level(pair.0).eigenvalue.re,
                        gap: (left.level(pair.0).eigenvalue - left.level(pair.1).eigenvalue).norm(),
                        indices: (left.level(pair.0).z2_index, left.level(pair.1).z2_index),
                        kind: CrossingKind::Ambiguous,
                        bracket_width: (right.param - left.param).abs(),
                    }),
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for part in located {
        all.extend(part?);
    }
    // A sign change that converges onto an end of the sweep is not resolved by it.
    if let (Some(&first), Some(&last)) = (sweep.points.first(), sweep.points.last()) {
        let edge = lit::<T>(NEAR_MISS_GAP) * (last - first).abs();
        for c in &mut all {
            if (c.parameter - first).abs() <= edge || (c.parameter - last).abs() <= edge {
                c.kind = CrossingKind::Ambiguous;
            }
        }
    }

    // Near misses: interior grid minima of the gap with no sign change nearby.
    for x in 0..nt {
        for y in x + 1..nt {
            for i in 1..sweep.len().saturating_sub(1) {
                if !(real_at(x, i - 1) && real_at(x, i) && real_at(x, i + 1) && real_at(y, i - 1) && real_at(y, i) && real_at(y, i + 1)) {
                    continue;
                }
                let (g0, g1, g2) = (d(x, y, i - 1), d(x, y, i), d(x, y, i + 1));
                let same_sign = (g0 >= T::zero()) == (g1 >= T::zero()) && (g1 >= T::zero()) == (g2 >= T::zero());
                let scale = sweep.sample(x, i).eigenvalue.norm().max(T::one());
                if same_sign && g1.abs() < g0.abs() && g1.abs() <= g2.abs() && g1.abs() <= lit::<T>(NEAR_MISS_GAP) * scale {
                    let p = sweep.points[i];
                    all.push(Crossing {
                        parameter: p,
                        location: family.location(p),
                        tracks: (x, y),
                        energy: sweep.sample(x, i).eigenvalue.re,
                        gap: g1.abs(),
                        indices: (sweep.sample(x, i).z2_index, sweep.sample(y, i).z2_index),
                        kind: CrossingKind::Ambiguous,
                        bracket_width: sweep.points[i + 1] - sweep.points[i - 1],
                    });
                }
            }
        }
    }
    all.sort_by(|a, b| to_f64(a.parameter).total_cmp(&to_f64(b.parameter)).then(a.tracks.cmp(&b.tracks)));
    Ok(all)
}

/// Crossings of the given kind.
pub fn crossings_of_kind<T: Real>(all: &[Crossing<T>], kind: CrossingKind) -> Vec<&Crossing<T>> {
    all.iter().filter(|c| c.kind == kind).collect()
}
