//! Parameter sweeps with eigenvector-continuity tracking.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::ParameterFamily;
use super::EpScanError;
use crate::biortho::{from_eigensystem, BiorthoSpectrum, LevelKind, Z2, INDICATOR_FLOOR, reality_tol};
use crate::numerics::{decompose, inner, DEFAULT_TOL, DEFECT_THRESHOLD};
use crate::scalar::{lit, to_f64, Real};

/// Continuity fidelity below which a match is reported as a break.
pub const BREAK_FIDELITY: f64 = 0.5;
/// Offsets tried around a near-defective grid point, in units of the local step.
pub const SHIFT_FRACTION: f64 = 1e-3;
const SHIFT_ATTEMPTS: usize = 6;
const CHUNK: usize = 64;

/// Ordered sample points along one axis of the normalized plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepGrid<T: Real> {
    pub n: usize,
    pub axis: super::Axis,
    pub fixed_value: T,
    pub points: Vec<T>,
}

impl<T: Real> SweepGrid<T> {
    /// `count` equally spaced points on `[start, end]`.
    pub fn linspace(n: usize, axis: super::Axis, fixed_value: T, start: T, end: T, count: usize) -> Result<Self, EpScanError> {
        let points = linspace(start, end, count)?;
        let grid = Self {
            n,
            axis,
            fixed_value,
            points,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), EpScanError> {
        if self.points.len() < 2 {
            return Err(EpScanError::InvalidGrid("a sweep needs at least two points".into()));
        }
        if self.points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(EpScanError::InvalidGrid("grid must be strictly increasing".into()));
        }
        let one = T::one();
        let (fixed_ok, points_ok) = match self.axis {
            super::Axis::JTilde => (
                self.fixed_value.is_finite(),
                self.points.iter().all(|p| p.abs() <= one),
            ),
            super::Axis::GammaTilde => (
                self.fixed_value.abs() <= one,
                self.points.iter().all(|p| p.is_finite()),
            ),
        };
        if !fixed_ok || !points_ok {
            return Err(EpScanError::InvalidGrid("j̃ must lie in [-1, 1] and all values must be finite".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<super::ChainFamily<T>, EpScanError> {
        super::ChainFamily::new(self.n, self.axis, self.fixed_value)
    }
}

/// `count ≥ 2` equally spaced points, endpoints exact.
pub fn linspace<T: Real>(start: T, end: T, count: usize) -> Result<Vec<T>, EpScanError> {
    if count < 2 || !start.is_finite() || !end.is_finite() || !(end > start) {
        return Err(EpScanError::InvalidGrid(format!(
            "need count ≥ 2 and start < end, got {count} points on [{}, {}]",
            to_f64(start),
            to_f64(end)
        )));
    }
    let last = count - 1;
    Ok((0..count)
        .map(|i| {
            if i == last {
                end
            } else {
                start + (end - start) * lit::<T>(i as f64) / lit::<T>(last as f64)
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrackSample<T: Real> {
    pub grid_value: T,
    /// Position of the level in the spectrum at this point.
    pub level: usize,
    pub eigenvalue: Complex<T>,
    pub z2_index: Option<Z2>,
    pub ep_indicator: T,
    /// Track id of the conjugate partner.
    pub partner: Option<usize>,
    pub kind: LevelKind,
}

impl<T: Real> TrackSample<T> {
    pub fn is_real(&self) -> bool {
        self.kind != LevelKind::Complex
    }
}

/// One level followed across the sweep; `level_id` is its position at the
/// first point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LevelTrack<T: Real> {
    pub level_id: usize,
    pub samples: Vec<TrackSample<T>>,
    /// Smallest matching fidelity along the track.
    pub continuity_score: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrackBreak<T: Real> {
    /// Index of the later grid point of the step.
    pub point: usize,
    pub grid_value: T,
    pub level_id: usize,
    pub fidelity: T,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SweepResult<T: Real> {
    pub points: Vec<T>,
    /// Parameter actually diagonalized at each point.
    pub solved_at: Vec<T>,
    pub tracks: Vec<LevelTrack<T>>,
    pub breaks: Vec<TrackBreak<T>>,
}

impl<T: Real> SweepResult<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Track → level map at point `i`.
    pub fn perm(&self, i: usize) -> Vec<usize> {
        self.tracks.iter().map(|t| t.samples[i].level).collect()
    }

    pub fn sample(&self, track: usize, i: usize) -> &TrackSample<T> {
        &self.tracks[track].samples[i]
    }

    /// Number of complex levels at each point.
    pub fn complex_counts(&self) -> Vec<usize> {
        (0..self.len())
            .map(|i| self.tracks.iter().filter(|t| t.samples[i].partner.is_some()).count())
            .collect()
    }
}

/// A solved point with its track labelling.
#[derive(Clone, Debug)]
pub struct TrackedState<T: Real> {
    pub param: T,
    pub spectrum: BiorthoSpectrum<T>,
    /// Track → level.
    pub perm: Vec<usize>,
    /// Level → track.
    pub inverse: Vec<usize>,
}

impl<T: Real> TrackedState<T> {
    pub fn new(param: T, spectrum: BiorthoSpectrum<T>, perm: Vec<usize>) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (t, &l) in perm.iter().enumerate() {
            inverse[l] = t;
        }
        Self {
            param,
            spectrum,
            perm,
            inverse,
        }
    }

    pub fn level(&self, track: usize) -> &crate::biortho::LevelRecord<T> {
        &self.spectrum.levels[self.perm[track]]
    }

    pub fn partner_track(&self, track: usize) -> Option<usize> {
        self.level(track).conjugate_partner.map(|l| self.inverse[l])
    }

    pub fn is_real(&self, track: usize) -> bool {
        self.level(track).kind != LevelKind::Complex
    }

    /// Labels `next` by continuity from `self`.
    pub fn advance(&self, next_param: T, next: BiorthoSpectrum<T>) -> (TrackedState<T>, Vec<T>) {
        let (assign, fid) = match_levels(&self.spectrum, &next);
        let perm: Vec<usize> = self.perm.iter().map(|&l| assign[l]).collect();
        let fid_tracks: Vec<T> = self.perm.iter().map(|&l| fid[l]).collect();
        (TrackedState::new(next_param, next, perm), fid_tracks)
    }
}

/// Greedy assignment of levels of `prev` to levels of `next` by the
/// biorthogonal fidelity `|⟨L_a|R'_b⟩⟨L'_b|R_a⟩|`; returns the map and the
/// fidelity of each chosen match.
pub fn match_levels<T: Real>(prev: &BiorthoSpectrum<T>, next: &BiorthoSpectrum<T>) -> (Vec<usize>, Vec<T>) {
    let n = prev.len();
    let (a_sys, b_sys) = (&prev.eigensystem, &next.eigensystem);
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    let mut fid = vec![T::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            let f = (inner(&a_sys.left[a], &b_sys.right[b]) * inner(&b_sys.left[b], &a_sys.right[a])).norm();
            fid[a * n + b] = f;
            cand.push((to_f64(f), a, b));
        }
    }
    cand.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, a, b) in cand {
        if assign[a] == usize::MAX && !used[b] {
            assign[a] = b;
            used[b] = true;
        }
    }
    let f = (0..n).map(|a| fid[a * n + assign[a]]).collect();
    (assign, f)
}

/// Diagonalizes `family` at `p`, stepping off near-defective points by
/// `± step · 1e-3 · k`; returns the parameter used.
pub fn solve_point<T: Real, F: ParameterFamily<T>>(family: &F, p: T, step: T) -> Result<(T, BiorthoSpectrum<T>), EpScanError> {
    let mut last_err = None;
    for attempt in 0..=SHIFT_ATTEMPTS {
        let q = if attempt == 0 {
            p
        } else {
            let k = lit::<T>(attempt.div_ceil(2) as f64);
            let sign = if attempt % 2 == 1 { T::one() } else { -T::one() };
            p + sign * step.abs() * lit::<T>(SHIFT_FRACTION) * k
        };
        if !family.admits(q) {
            continue;
        }
        match solve_exact(family, q) {
            Ok(s) => return Ok((q, s)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| EpScanError::InvalidGrid(format!("no admissible point near {}", to_f64(p)))))
}

/// Diagonalizes at exactly `p`, failing on near-defective matrices.
pub fn solve_exact<T: Real, F: ParameterFamily<T>>(family: &F, p: T) -> Result<BiorthoSpectrum<T>, EpScanError> {
    let h = family.hamiltonian(p)?;
    let sys = decompose(&h, lit(DEFAULT_TOL))?;
    if !(sys.condition <= lit(DEFECT_THRESHOLD)) {
        return Err(EpScanError::Numerics(crate::numerics::NumericsError::NearDefective {
            condition: to_f64(sys.condition),
        }));
    }
    let radius = sys.eigenvalues.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let tol = reality_tol(radius);
    Ok(from_eigensystem(sys, family.metric(), tol, lit(INDICATOR_FLOOR))?)
}

/// Local grid step at point `i`.
fn local_step<T: Real>(points: &[T], i: usize) -> T {
    let left = if i > 0 { points[i] - points[i - 1] } else { T::infinity() };
    let right = if i + 1 < points.len() { points[i + 1] - points[i] } else { T::infinity() };
    let s = left.min(right);
    if s.is_finite() {
        s
    } else {
        T::one()
    }
}

/// Solves all points in parallel and labels them sequentially; the result
/// does not depend on the thread count.
pub fn sweep<T: Real, F: ParameterFamily<T>>(family: &F, points: &[T]) -> Result<SweepResult<T>, EpScanError> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(EpScanError::InvalidGrid("sweep needs at least two strictly increasing points".into()));
    }
    let mut solved_at = Vec::with_capacity(points.len());
    let mut tracks: Vec<LevelTrack<T>> = Vec::new();
    let mut breaks = Vec::new();
    let mut prev: Option<TrackedState<T>> = None;

    for (chunk_idx, chunk) in points.chunks(CHUNK).enumerate() {
        let base = chunk_idx * CHUNK;
        let solved: Vec<Result<(T, BiorthoSpectrum<T>), EpScanError>> = chunk
            .par_iter()
            .enumerate()
            .map(|(k, &p)| solve_point(family, p, local_step(points, base + k)))
            .collect();
        for (k, res) in solved.into_iter().enumerate() {
            let i = base + k;
            let (q, spec) = res?;
            solved_at.push(q);
            let (state, fid) = match &prev {
                None => {
                    let n = spec.len();
                    tracks = (0..n)
                        .map(|t| LevelTrack {
                            level_id: t,
                            samples: Vec::with_capacity(points.len()),
                            continuity_score: T::one(),
                        })
                        .collect();
                    (TrackedState::new(q, spec, (0..n).collect()), vec![T::one(); n])
                }
                Some(p) => {
                    if p.spectrum.len() != spec.len() {
                        return Err(EpScanError::InvalidGrid("dimension changed along the sweep".into()));
                    }
                    p.advance(q, spec)
                }
            };
            for (t, track) in tracks.iter_mut().enumerate() {
                let lvl = state.level(t);
                track.continuity_score = track.continuity_score.min(fid[t]);
                if fid[t] < lit(BREAK_FIDELITY) {
                    breaks.push(TrackBreak {
                        point: i,
                        grid_value: points[i],
                        level_id: t,
                        fidelity: fid[t],
                    });
                }
                track.samples.push(TrackSample {
                    grid_value: points[i],
                    level: state.perm[t],
                    eigenvalue: lvl.eigenvalue,
                    z2_index: lvl.z2_index,
                    ep_indicator: lvl.ep_indicator,
                    partner: state.partner_track(t),
                    kind: lvl.kind,
                });
            }
            prev = Some(state);
        }
    }
    Ok(SweepResult {
        points: points.to_vec(),
        solved_at,
        tracks,
        breaks,
    })
}

/// Re-solves grid point `i` of a finished sweep with its recorded labels.
pub fn restore_state<T: Real, F: ParameterFamily<T>>(family: &F, result: &SweepResult<T>, i: usize) -> Result<TrackedState<T>, EpScanError> {
    let q = result.solved_at[i];
    let spec = solve_exact(family, q)?;
    Ok(TrackedState::new(q, spec, result.perm(i)))
}
