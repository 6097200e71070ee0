//! Second-order exceptional points: detection from pairing changes along a
//! sweep, adaptive refinement of unclean steps, and bisection.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::ParameterFamily;
use super::sweep::{solve_point, SweepResult, TrackedState, restore_state};
use super::EpScanError;
use crate::biortho::Z2;
use crate::scalar::{lit, to_f64, Real};

/// Default bracket width for EP bisection.
pub const EP_TOL: f64 = 1e-8;
/// Subdivision depth for steps with several simultaneous pairing changes.
pub const MAX_REFINE_DEPTH: usize = 40;
/// Eigensolves allowed when refining one sweep step.
pub const REFINE_BUDGET: usize = 256;

/// A located exceptional point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EpRecord<T: Real> {
    /// 2 or 3.
    pub order: u8,
    /// Coordinates in the family's parameter space (`[j̃, γ̃]` for chains).
    pub location: Vec<T>,
    /// Swept parameter at the located point.
    pub parameter: T,
    /// Coalescing levels: track ids from a sweep, or level positions on the
    /// real side for a direct call.
    pub levels: Vec<usize>,
    /// Z2-indices of the levels on the real side, in the order of `levels`.
    pub indices: Vec<Option<Z2>>,
    pub eigenvalue: Complex<T>,
    /// Spread of the coalescing eigenvalues at the real-side end of the bracket.
    pub residual: T,
    pub bracket_width: T,
    /// EP indicators of the levels at the real-side end of the bracket.
    pub indicators: Vec<T>,
    /// Whether the levels are complex above `parameter`; `None` for EP3.
    pub complex_above: Option<bool>,
}

impl<T: Real> EpRecord<T> {
    /// Indices defined and opposite, as the selection rule requires.
    pub fn indices_opposite(&self) -> Option<bool> {
        match (self.indices.first().copied().flatten(), self.indices.get(1).copied().flatten()) {
            (Some(a), Some(b)) => Some(a != b),
            _ => None,
        }
    }
}

/// A sweep step whose pairing change could not be reduced to single EP2s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UnresolvedEvent<T: Real> {
    pub lo: T,
    pub hi: T,
    pub tracks: Vec<usize>,
    /// Conjugate pairs involving `tracks` at `lo` and at `hi`.
    pub pairs_before: Vec<(usize, usize)>,
    pub pairs_after: Vec<(usize, usize)>,
    pub reason: String,
}

/// Pairs `(t, u)`, `t < u`, containing any of `tracks`.
fn pairs_among<T: Real>(s: &TrackedState<T>, tracks: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = tracks
        .iter()
        .filter_map(|&t| s.partner_track(t).map(|u| (t.min(u), t.max(u))))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Ep2Scan<T: Real> {
    pub records: Vec<EpRecord<T>>,
    pub unresolved: Vec<UnresolvedEvent<T>>,
}

/// Bisects between a point where levels `a`, `b` (positions in the spectrum
/// at `real_side`) are both real and a point where their continuations form
/// a conjugate pair.
pub fn find_ep2<T: Real, F: ParameterFamily<T>>(
    family: &F,
    real_side: T,
    levels: (usize, usize),
    complex_side: T,
    tol: T,
) -> Result<EpRecord<T>, EpScanError> {
    let step = (complex_side - real_side).abs();
    let (pr, spec_r) = solve_point(family, real_side, step)?;
    let (pc, spec_c) = solve_point(family, complex_side, step)?;
    let n = spec_r.len();
    if levels.0 >= n || levels.1 >= n || levels.0 == levels.1 {
        return Err(EpScanError::InvalidGrid(format!("invalid level pair {levels:?}")));
    }
    let real = TrackedState::new(pr, spec_r, (0..n).collect());
    let (complex, _) = real.advance(pc, spec_c);
    let (mut rec, _) = bisect_pair(family, real, complex, (levels.0, levels.1), tol)?;
    rec.levels = vec![levels.0, levels.1];
    Ok(rec)
}

/// Fallback probe position within a bracket whose midpoint is defective.
const OFF_CENTRE: f64 = 0.381_966_011_250_105;

/// Bisection on tracked states; tracks `a`, `b` are real in `real` and
/// paired in `complex`.
pub(crate) fn bisect_pair<T: Real, F: ParameterFamily<T>>(
    family: &F,
    real: TrackedState<T>,
    complex: TrackedState<T>,
    pair: (usize, usize),
    tol: T,
) -> Result<(EpRecord<T>, TrackedState<T>), EpScanError> {
    let (a, b) = pair;
    if !(real.is_real(a) && real.is_real(b)) {
        return Err(EpScanError::LevelNotReal { level: if real.is_real(a) { b } else { a } });
    }
    if complex.partner_track(a) != Some(b) {
        return Err(EpScanError::NoEPInBracket {
            lo: to_f64(real.param),
            hi: to_f64(complex.param),
        });
    }
    let indices = vec![real.level(a).z2_index, real.level(b).z2_index];
    let mut r_state = real;
    let mut c_param = complex.param;
    let two = lit::<T>(2.0);
    let mut iterations = 0;
    while (c_param - r_state.param).abs() > tol && iterations < 200 {
        iterations += 1;
        let mut mid = r_state.param + (c_param - r_state.param) / two;
        if mid == r_state.param || mid == c_param {
            break;
        }
        let spec = match super::sweep::solve_exact(family, mid) {
            Ok(s) => s,
            // A midpoint on the EP itself: retry off-centre once.
            Err(EpScanError::Numerics(_)) | Err(EpScanError::Biortho(_)) => {
                mid = r_state.param + (c_param - r_state.param) * lit::<T>(OFF_CENTRE);
                match super::sweep::solve_exact(family, mid) {
                    Ok(s) => s,
                    Err(EpScanError::Numerics(_)) | Err(EpScanError::Biortho(_)) => break,
                    Err(e) => return Err(e),
                }
            }
            Err(e) => return Err(e),
        };
        let (m_state, _) = r_state.advance(mid, spec);
        if m_state.partner_track(a) == Some(b) {
            c_param = mid;
        } else if m_state.is_real(a) && m_state.is_real(b) {
            r_state = m_state;
        } else {
            return Err(EpScanError::Ambiguous(format!(
                "a third level interferes with the pair near {}",
                to_f64(mid)
            )));
        }
    }
    let (la, lb) = (r_state.level(a), r_state.level(b));
    let param = (r_state.param + c_param) / two;
    let rec = EpRecord {
        order: 2,
        location: family.location(param),
        parameter: param,
        levels: vec![a, b],
        indices,
        eigenvalue: (la.eigenvalue + lb.eigenvalue) * lit::<T>(0.5),
        residual: (la.eigenvalue - lb.eigenvalue).norm(),
        bracket_width: (c_param - r_state.param).abs(),
        indicators: vec![la.ep_indicator, lb.ep_indicator],
        complex_above: Some(c_param > r_state.param),
    };
    Ok((rec, r_state))
}

enum Step {
    Quiet,
    /// `(a, b, forms)`, `forms` true when the pair exists at the right end.
    Clean(Vec<(usize, usize, bool)>),
    Unclean(Vec<usize>),
}

/// Pairing changes between two tracked states.
fn classify_step<T: Real>(left: &TrackedState<T>, right: &TrackedState<T>) -> Step {
    let lone_real = |s: &TrackedState<T>, t: usize, u: usize| s.is_real(t) && s.is_real(u) && s.partner_track(u).is_none();
    let mut clean = Vec::new();
    let mut unclean = Vec::new();
    for t in 0..left.perm.len() {
        match (left.partner_track(t), right.partner_track(t)) {
            (pl, pr) if pl == pr => {}
            (None, Some(u)) if lone_real(left, t, u) => {
                if t < u {
                    clean.push((t, u, true));
                }
            }
            (Some(u), None) if lone_real(right, t, u) => {
                if t < u {
                    clean.push((t, u, false));
                }
            }
            _ => unclean.push(t),
        }
    }
    if !unclean.is_empty() {
        Step::Unclean(unclean)
    } else if clean.is_empty() {
        Step::Quiet
    } else {
        Step::Clean(clean)
    }
}

fn resolve_interval<T: Real, F: ParameterFamily<T>>(
    family: &F,
    left: &TrackedState<T>,
    right: &TrackedState<T>,
    tol: T,
    depth: usize,
    budget: &mut usize,
    out: &mut Ep2Scan<T>,
) -> Result<(), EpScanError> {
    match classify_step(left, right) {
        Step::Quiet => Ok(()),
        Step::Clean(events) => {
            let results: Vec<_> = events
                .iter()
                .map(|&(a, b, forms)| {
                    if forms {
                        bisect_pair(family, left.clone(), right.clone(), (a, b), tol)
                    } else {
                        bisect_pair(family, right.clone(), left.clone(), (a, b), tol)
                    }
                })
                .collect();
            if depth < MAX_REFINE_DEPTH && *budget > 0 && results.iter().any(|r| matches!(r, Err(EpScanError::Ambiguous(_)))) {
                return split(family, left, right, tol, depth, budget, out);
            }
            for (&(a, b, _), result) in events.iter().zip(results) {
                match result {
                    Ok((rec, _)) => out.records.push(rec),
                    Err(e) => out.unresolved.push(UnresolvedEvent {
                        lo: left.param,
                        hi: right.param,
                        tracks: vec![a, b],
                        pairs_before: pairs_among(left, &[a, b]),
                        pairs_after: pairs_among(right, &[a, b]),
                        reason: e.to_string(),
                    }),
                }
            }
            Ok(())
        }
        Step::Unclean(tracks) => {
            let width = (right.param - left.param).abs();
            let floor = (lit::<T>(4.0) * T::epsilon() * left.param.abs().max(T::one())).max(tol);
            if depth >= MAX_REFINE_DEPTH || width <= floor || *budget == 0 {
                out.unresolved.push(UnresolvedEvent {
                    lo: left.param,
                    hi: right.param,
                    pairs_before: pairs_among(left, &tracks),
                    pairs_after: pairs_among(right, &tracks),
                    tracks,
                    reason: "several pairing changes within one step".into(),
                });
                return Ok(());
            }
            split(family, left, right, tol, depth, budget, out)
        }
    }
}

fn split<T: Real, F: ParameterFamily<T>>(
    family: &F,
    left: &TrackedState<T>,
    right: &TrackedState<T>,
    tol: T,
    depth: usize,
    budget: &mut usize,
    out: &mut Ep2Scan<T>,
) -> Result<(), EpScanError> {
    *budget = budget.saturating_sub(1);
    let mid = left.param + (right.param - left.param) * lit::<T>(0.5);
    let spec = match super::sweep::solve_exact(family, mid) {
        Ok(s) => s,
        Err(EpScanError::Numerics(_)) | Err(EpScanError::Biortho(_)) => {
            let tracks: Vec<usize> = (0..left.perm.len())
                .filter(|&t| left.partner_track(t) != right.partner_track(t))
                .collect();
            out.unresolved.push(UnresolvedEvent {
                lo: left.param,
                hi: right.param,
                pairs_before: pairs_among(left, &tracks),
                pairs_after: pairs_among(right, &tracks),
                tracks,
                reason: format!("near-defective midpoint {}", to_f64(mid)),
            });
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let (m_state, _) = left.advance(mid, spec);
    resolve_interval(family, left, &m_state, tol, depth + 1, budget, out)?;
    resolve_interval(family, &m_state, right, tol, depth + 1, budget, out)
}

/// Every EP2 along a finished sweep, bisected to `tol`.
pub fn scan_ep2<T: Real, F: ParameterFamily<T>>(family: &F, sweep: &SweepResult<T>, tol: T) -> Result<Ep2Scan<T>, EpScanError> {
    let steps: Vec<usize> = (0..sweep.len().saturating_sub(1))
        .filter(|&i| sweep.tracks.iter().any(|t| t.samples[i].partner != t.samples[i + 1].partner))
        .collect();
    let parts: Vec<Result<Ep2Scan<T>, EpScanError>> = steps
        .par_iter()
        .map(|&i| {
            let left = restore_state(family, sweep, i)?;
            let right = restore_state(family, sweep, i + 1)?;
            let mut out = Ep2Scan {
                records: Vec::new(),
                unresolved: Vec::new(),
            };
            let mut budget = REFINE_BUDGET;
            resolve_interval(family, &left, &right, tol, 0, &mut budget, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut scan = Ep2Scan {
        records: Vec::new(),
        unresolved: Vec::new(),
    };
    for part in parts {
        let part = part?;
        scan.records.extend(part.records);
        scan.unresolved.extend(part.unresolved);
    }
    scan.records
        .sort_by(|x, y| to_f64(x.parameter).total_cmp(&to_f64(y.parameter)).then(x.levels.cmp(&y.levels)));
    Ok(scan)
}
