//! Third-order exceptional points as collisions of two EP2 loci.
//!
//! Along a γ̃-sweep at fixed j̃, a triple of levels `(l, m, u)` with indices
//! `(s, −s, s)` can pass through a "switch": one pair dissolves back onto the
//! real axis and one of its members then pairs with the third level. The
//! switch exists on one side of the EP3 only, and the real window between
//! the two EP2s closes as j̃ approaches it.

use serde::{Deserialize, Serialize};

use super::ep2::{scan_ep2, Ep2Scan, EpRecord, EP_TOL};
use super::family::{Axis, ChainFamily};
use super::sweep::{linspace, solve_exact, sweep, SweepResult};
use super::EpScanError;
use crate::biortho::Z2;
use crate::scalar::{lit, to_f64, Real};

/// Search rectangle in the normalized plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Ep3Box<T: Real> {
    pub j_lo: T,
    pub j_hi: T,
    pub gamma_lo: T,
    pub gamma_hi: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Ep3Options<T: Real> {
    /// Samples of each γ̃-sweep on `[0, gamma_hi + margin]`.
    pub gamma_points: usize,
    /// Extra γ̃ swept past the box, also the offset of the exchange check.
    pub margin: T,
    /// j̃ bracket width at which bisection stops.
    pub j_tol: T,
    /// Largest real window accepted as a closing one at the located j̃.
    pub collision_tol: T,
    pub ep2_tol: T,
}

impl<T: Real> Default for Ep3Options<T> {
    fn default() -> Self {
        Self {
            gamma_points: 451,
            margin: lit(0.05),
            j_tol: lit(1e-7),
            collision_tol: lit(1e-3),
            ep2_tol: lit(1e-10),
        }
    }
}

/// State of a triple at one point of a γ̃-sweep, with lower/middle/upper
/// taken in the energy order of the real window of a switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleConfig {
    AllReal,
    /// Lower and middle levels paired, upper level real.
    LowerPaired,
    /// Middle and upper levels paired, lower level real.
    UpperPaired,
    Other,
}

/// Pair `(x, y)` dissolving at `gamma_a`, then `(y', z)` forming at `gamma_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TripleSwitch<T: Real> {
    pub triple: [usize; 3],
    pub first_pair: (usize, usize),
    pub second_pair: (usize, usize),
    pub gamma_a: T,
    pub gamma_b: T,
    /// Indices of the two pairs on their real sides, in pair order, when resolved.
    pub first_indices: Option<(Option<Z2>, Option<Z2>)>,
    pub second_indices: Option<(Option<Z2>, Option<Z2>)>,
    /// Real parts of the two coalescence eigenvalues, when resolved.
    pub first_energy: Option<T>,
    pub second_energy: Option<T>,
}

impl<T: Real> TripleSwitch<T> {
    pub fn window(&self) -> T {
        self.gamma_b - self.gamma_a
    }

    pub fn center(&self) -> T {
        (self.gamma_a + self.gamma_b) * lit::<T>(0.5)
    }

    /// `(a, m, b)`: `a` leaves the first pair, `m` is in both, `b` joins.
    pub fn members(&self) -> (usize, usize, usize) {
        let (p, q) = (self.first_pair, self.second_pair);
        let m = if p.0 == q.0 || p.0 == q.1 { p.0 } else { p.1 };
        let a = if p.0 == m { p.1 } else { p.0 };
        let b = if q.0 == m { q.1 } else { q.0 };
        (a, m, b)
    }
}

fn indices_in_pair_order<T: Real>(rec: &EpRecord<T>, pair: (usize, usize)) -> (Option<Z2>, Option<Z2>) {
    if rec.levels[0] == pair.0 {
        (rec.indices[0], rec.indices[1])
    } else {
        (rec.indices[1], rec.indices[0])
    }
}

fn norm_pair(levels: &[usize]) -> (usize, usize) {
    (levels[0].min(levels[1]), levels[0].max(levels[1]))
}

fn triple_of(p: (usize, usize), q: (usize, usize)) -> Option<[usize; 3]> {
    let shared = [p.0, p.1].iter().filter(|&&x| x == q.0 || x == q.1).count();
    if shared != 1 {
        return None;
    }
    let mut t = vec![p.0, p.1, q.0, q.1];
    t.sort_unstable();
    t.dedup();
    Some([t[0], t[1], t[2]])
}

/// Switches in the EP2 events of one γ̃-sweep.
pub fn triple_switches<T: Real>(scan: &Ep2Scan<T>) -> Vec<TripleSwitch<T>> {
    let mut out = Vec::new();
    let recs = &scan.records;
    for (i, a) in recs.iter().enumerate() {
        if a.complex_above != Some(false) || a.order != 2 {
            continue;
        }
        let p = norm_pair(&a.levels);
        let next = recs[i + 1..]
            .iter()
            .find(|b| b.levels.iter().any(|l| *l == p.0 || *l == p.1));
        if let Some(b) = next {
            let q = norm_pair(&b.levels);
            if b.complex_above == Some(true) {
                if let Some(triple) = triple_of(p, q) {
                    out.push(TripleSwitch {
                        triple,
                        first_pair: p,
                        second_pair: q,
                        gamma_a: a.parameter,
                        gamma_b: b.parameter,
                        first_indices: Some(indices_in_pair_order(a, p)),
                        second_indices: Some(indices_in_pair_order(b, q)),
                        first_energy: Some(a.eigenvalue.re),
                        second_energy: Some(b.eigenvalue.re),
                    });
                }
            }
        }
    }
    for ev in &scan.unresolved {
        if let ([p], [q]) = (ev.pairs_before.as_slice(), ev.pairs_after.as_slice()) {
            if let Some(triple) = triple_of(*p, *q) {
                out.push(TripleSwitch {
                    triple,
                    first_pair: *p,
                    second_pair: *q,
                    gamma_a: ev.lo,
                    gamma_b: ev.hi,
                    first_indices: None,
                    second_indices: None,
                    first_energy: None,
                    second_energy: None,
                });
            }
        }
    }
    out.sort_by(|x, y| to_f64(x.gamma_a).total_cmp(&to_f64(y.gamma_a)).then(x.triple.cmp(&y.triple)));
    out
}

/// A γ̃-sweep at fixed j̃ with its EP2 events.
pub struct GammaProfile<T: Real> {
    pub j_tilde: T,
    pub sweep: SweepResult<T>,
    pub scan: Ep2Scan<T>,
    pub switches: Vec<TripleSwitch<T>>,
}

impl<T: Real> GammaProfile<T> {
    pub fn compute(n: usize, j_tilde: T, gamma_max: T, points: usize, ep2_tol: T) -> Result<Self, EpScanError> {
        let fam = ChainFamily::new(n, Axis::GammaTilde, j_tilde)?;
        let grid = linspace(T::zero(), gamma_max, points)?;
        let sweep = sweep(&fam, &grid)?;
        let scan = scan_ep2(&fam, &sweep, ep2_tol)?;
        let switches = triple_switches(&scan);
        Ok(Self {
            j_tilde,
            sweep,
            scan,
            switches,
        })
    }

    /// Switch of `triple` with its window centre in `[lo, hi]`.
    pub fn switch_for(&self, triple: [usize; 3], lo: T, hi: T) -> Option<&TripleSwitch<T>> {
        self.switches
            .iter()
            .find(|s| s.triple == triple && s.center() >= lo && s.center() <= hi)
    }

    fn nearest(&self, gamma: T) -> usize {
        let pts = &self.sweep.points;
        (0..pts.len())
            .min_by(|&a, &b| to_f64((pts[a] - gamma).abs()).total_cmp(&to_f64((pts[b] - gamma).abs())))
            .unwrap_or(0)
    }

    /// Whether the pair that dissolves in `sw` is the lower one. Falls back
    /// to the last sample before the window when the EP2s are unresolved.
    pub fn first_is_lower(&self, sw: &TripleSwitch<T>) -> bool {
        if let (Some(ea), Some(eb)) = (sw.first_energy, sw.second_energy) {
            return ea <= eb;
        }
        let (a, _, b) = sw.members();
        let i = self.nearest(sw.gamma_a).saturating_sub(1);
        self.sweep.sample(a, i).eigenvalue.re <= self.sweep.sample(b, i).eigenvalue.re
    }

    /// Pairing of the levels of `sw` at the grid point nearest `gamma`.
    /// Labels inside the dissolving pair may differ between profiles, so it
    /// enters as a set; the joining level is tracked from below the window.
    pub fn config_at(&self, sw: &TripleSwitch<T>, first_is_lower: bool, gamma: T) -> TripleConfig {
        let i = self.nearest(gamma);
        let (x, y) = sw.first_pair;
        let (_, _, b) = sw.members();
        let s = |t: usize| self.sweep.sample(t, i);
        let (kept, switched) = if first_is_lower {
            (TripleConfig::LowerPaired, TripleConfig::UpperPaired)
        } else {
            (TripleConfig::UpperPaired, TripleConfig::LowerPaired)
        };
        if [x, y, b].iter().all(|&t| s(t).is_real()) {
            TripleConfig::AllReal
        } else if s(x).partner == Some(y) && s(b).is_real() {
            kept
        } else if (s(b).partner == Some(x) && s(y).is_real()) || (s(b).partner == Some(y) && s(x).is_real()) {
            switched
        } else {
            TripleConfig::Other
        }
    }
}

/// A triple whose switch appears or disappears between two j̃ values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Ep3Candidate<T: Real> {
    pub j_lo: T,
    pub j_hi: T,
    pub triple: [usize; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Ep3Result<T: Real> {
    pub record: EpRecord<T>,
    /// Final j̃ bracket.
    pub j_bracket: (T, T),
    /// Real window `(γ_a, γ_b)` on the side where the switch exists.
    pub window: (T, T),
    /// Configurations just above the EP3 in γ̃, at the smaller and larger j̃.
    pub config_smaller_j: TripleConfig,
    pub config_larger_j: TripleConfig,
    /// Both pairs that coalesce in the switch have opposite indices.
    pub pairs_opposite: Option<bool>,
}

impl<T: Real> Ep3Result<T> {
    /// The configurations on both sides of the EP3 are the two different pairings.
    pub fn exchanges(&self) -> bool {
        matches!(
            (self.config_smaller_j, self.config_larger_j),
            (TripleConfig::LowerPaired, TripleConfig::UpperPaired) | (TripleConfig::UpperPaired, TripleConfig::LowerPaired)
        )
    }

    /// Index signature `(s, −s, s)` in energy order.
    pub fn alternating(&self) -> Option<bool> {
        let ix: Option<Vec<Z2>> = self.record.indices.iter().copied().collect();
        ix.map(|v| v.len() == 3 && v[0] == v[2] && v[0] != v[1])
    }
}

/// Flags j̃ steps of `j_grid` where a switch with centre in the box's γ̃
/// range appears or disappears.
pub fn scan_ep3_candidates<T: Real>(
    n: usize,
    j_grid: &[T],
    bx: &Ep3Box<T>,
    opts: &Ep3Options<T>,
) -> Result<Vec<Ep3Candidate<T>>, EpScanError> {
    use rayon::prelude::*;
    let gamma_max = bx.gamma_hi + opts.margin;
    let sets: Vec<Result<Vec<[usize; 3]>, EpScanError>> = j_grid
        .par_iter()
        .map(|&j| {
            let prof = GammaProfile::compute(n, j, gamma_max, opts.gamma_points, lit(EP_TOL))?;
            let mut v: Vec<[usize; 3]> = prof
                .switches
                .iter()
                .filter(|s| s.center() >= bx.gamma_lo && s.center() <= bx.gamma_hi)
                .map(|s| s.triple)
                .collect();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        })
        .collect();
    let sets: Vec<Vec<[usize; 3]>> = sets.into_iter().collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for i in 0..sets.len().saturating_sub(1) {
        let mut diff: Vec<[usize; 3]> = sets[i]
            .iter()
            .filter(|t| !sets[i + 1].contains(t))
            .chain(sets[i + 1].iter().filter(|t| !sets[i].contains(t)))
            .copied()
            .collect();
        diff.sort_unstable();
        for triple in diff {
            out.push(Ep3Candidate {
                j_lo: j_grid[i],
                j_hi: j_grid[i + 1],
                triple,
            });
        }
    }
    Ok(out)
}

/// Bisects in j̃ between a side where the switch of `triple` exists and one
/// where it does not, then checks that the window has closed.
pub fn find_ep3<T: Real>(n: usize, bx: &Ep3Box<T>, triple: [usize; 3], opts: &Ep3Options<T>) -> Result<Ep3Result<T>, EpScanError> {
    let gamma_max = bx.gamma_hi + opts.margin;
    let profile = |j: T| GammaProfile::compute(n, j, gamma_max, opts.gamma_points, opts.ep2_tol);
    let has = |p: &GammaProfile<T>| p.switch_for(triple, bx.gamma_lo, bx.gamma_hi).is_some();

    let mut lo = profile(bx.j_lo)?;
    let mut hi = profile(bx.j_hi)?;
    let (q_lo, q_hi) = (has(&lo), has(&hi));
    if q_lo == q_hi {
        return Err(EpScanError::NoEP3InBox(format!(
            "switch of {triple:?} is {} at both ends of the j̃ range",
            if q_lo { "present" } else { "absent" }
        )));
    }
    let two = lit::<T>(2.0);
    while hi.j_tilde - lo.j_tilde > opts.j_tol {
        let mid = lo.j_tilde + (hi.j_tilde - lo.j_tilde) / two;
        if mid == lo.j_tilde || mid == hi.j_tilde {
            break;
        }
        let p = profile(mid)?;
        if has(&p) == q_lo {
            lo = p;
        } else {
            hi = p;
        }
    }
    let exist = if q_lo { &lo } else { &hi };
    let sw = exist
        .switch_for(triple, bx.gamma_lo, bx.gamma_hi)
        .cloned()
        .ok_or_else(|| EpScanError::NoEP3InBox("switch lost during bisection".into()))?;
    if sw.window() > opts.collision_tol {
        return Err(EpScanError::NoEP3InBox(format!(
            "EP2 loci do not collide: real window {:.3e} at j̃ = {}",
            to_f64(sw.window()),
            to_f64(exist.j_tilde)
        )));
    }
    let gamma_star = sw.center();
    let j_star = (lo.j_tilde + hi.j_tilde) / two;

    // Signature in the energy order of the real window: the shared level is
    // the middle one, the dissolving pair holds the lower level iff it
    // coalesces lower.
    let first_is_lower = exist.first_is_lower(&sw);
    let (a, m, b) = sw.members();
    let of_pair = |ix: Option<(Option<Z2>, Option<Z2>)>, pair: (usize, usize), t: usize| {
        ix.and_then(|(x, y)| if pair.0 == t { x } else { y })
    };
    let za = of_pair(sw.first_indices, sw.first_pair, a);
    let zm = of_pair(sw.first_indices, sw.first_pair, m);
    let zb = of_pair(sw.second_indices, sw.second_pair, b);
    let ordered = if first_is_lower {
        [(a, za), (m, zm), (b, zb)]
    } else {
        [(b, zb), (m, zm), (a, za)]
    };

    // Spread of the three eigenvalues closest to the switch at the located point.
    let fam = ChainFamily::new(n, Axis::GammaTilde, exist.j_tilde)?;
    let spec = match solve_exact(&fam, gamma_star) {
        Ok(s) => Some(s),
        Err(EpScanError::Numerics(_)) | Err(EpScanError::Biortho(_)) => None,
        Err(e) => return Err(e),
    };
    let centre = exist
        .scan
        .records
        .iter()
        .find(|r| (r.parameter - sw.gamma_a).abs() <= opts.ep2_tol * lit(10.0) || (r.parameter - sw.gamma_b).abs() <= opts.ep2_tol * lit(10.0))
        .map(|r| r.eigenvalue);
    let (residual, indicators, eigenvalue) = match (spec, centre) {
        (Some(spec), Some(c)) => {
            let mut near: Vec<_> = spec.levels.iter().collect();
            near.sort_by(|a, b| to_f64((a.eigenvalue - c).norm()).total_cmp(&to_f64((b.eigenvalue - c).norm())));
            let three = &near[..3.min(near.len())];
            let mut spread = T::zero();
            for a in three {
                for b in three {
                    spread = spread.max((a.eigenvalue - b.eigenvalue).norm());
                }
            }
            let mean = three.iter().fold(num_complex::Complex::new(T::zero(), T::zero()), |acc, l| acc + l.eigenvalue)
                / lit::<T>(three.len() as f64);
            (spread, three.iter().map(|l| l.ep_indicator).collect(), mean)
        }
        (_, c) => (T::zero(), Vec::new(), c.unwrap_or_default()),
    };

    let check = (gamma_star + opts.margin * lit(0.4)).min(gamma_max);
    let pairs_opposite = match (sw.first_indices, sw.second_indices) {
        (Some((Some(a), Some(b))), Some((Some(c), Some(d)))) => Some(a != b && c != d),
        _ => None,
    };
    Ok(Ep3Result {
        record: EpRecord {
            order: 3,
            location: vec![j_star, gamma_star],
            parameter: gamma_star,
            levels: ordered.iter().map(|o| o.0).collect(),
            indices: ordered.iter().map(|o| o.1).collect(),
            eigenvalue,
            residual,
            bracket_width: (hi.j_tilde - lo.j_tilde).max(sw.window()),
            indicators,
            complex_above: None,
        },
        j_bracket: (lo.j_tilde, hi.j_tilde),
        window: (sw.gamma_a, sw.gamma_b),
        config_smaller_j: lo.config_at(&sw, first_is_lower, check),
        config_larger_j: hi.config_at(&sw, first_is_lower, check),
        pairs_opposite,
    })
}

/// Outcome of a box search: located EP3s and rejected candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Ep3Search<T: Real> {
    pub found: Vec<Ep3Result<T>>,
    pub rejected: Vec<(Ep3Candidate<T>, String)>,
}

/// Candidate scan over `j_points` values in the box, then [`find_ep3`] on
/// every flagged step.
pub fn search_ep3<T: Real>(n: usize, bx: &Ep3Box<T>, j_points: usize, opts: &Ep3Options<T>) -> Result<Ep3Search<T>, EpScanError> {
    let grid = linspace(bx.j_lo, bx.j_hi, j_points)?;
    let candidates = scan_ep3_candidates(n, &grid, bx, opts)?;
    let mut search = Ep3Search {
        found: Vec::new(),
        rejected: Vec::new(),
    };
    for c in candidates {
        let sub = Ep3Box {
            j_lo: c.j_lo,
            j_hi: c.j_hi,
            ..*bx
        };
        match find_ep3(n, &sub, c.triple, opts) {
            Ok(r) => search.found.push(r),
            Err(EpScanError::NoEP3InBox(reason)) => search.rejected.push((c, reason)),
            Err(e) => return Err(e),
        }
    }
    Ok(search)
}
