//! Parameter sweeps with level tracking, EP2 and EP3 location, crossing
//! classification and two-level reductions.

mod crossings;
mod ep2;
mod ep3;
mod family;
mod selection;
mod sweep;
mod twolevel;

pub use crossings::{classify_crossings, crossings_of_kind, locate_crossing, Crossing, CrossingKind, CONVERGED_GAP, CROSSING_TOL, MULTI_LEVEL_TOL, NEAR_MISS_GAP};
pub use ep2::{find_ep2, scan_ep2, Ep2Scan, EpRecord, UnresolvedEvent, EP_TOL, MAX_REFINE_DEPTH, REFINE_BUDGET};
pub use ep3::{
    find_ep3, scan_ep3_candidates, search_ep3, triple_switches, Ep3Box, Ep3Candidate, Ep3Options, Ep3Result, Ep3Search,
    GammaProfile, TripleConfig, TripleSwitch,
};
pub use family::{Axis, ChainFamily, FnFamily, ParameterFamily};
pub use selection::{verify_selection_rule, SelectionReport};
pub use sweep::{
    linspace, match_levels, restore_state, solve_exact, solve_point, sweep, LevelTrack, SweepGrid, SweepResult, TrackBreak,
    TrackSample, TrackedState, BREAK_FIDELITY, SHIFT_FRACTION,
};
pub use twolevel::{
    coupling_element, crossing_split, crossing_two_level, fit_slope, predict_chain_gamma_cr, predict_gamma_cr,
    project_two_level, CrossingSlope, CrossingSplit, GammaPrediction, ZERO_COUPLING,
};

use thiserror::Error;

use crate::biortho::BiorthoError;
use crate::model::ModelError;
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpScanError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Biortho(#[from] BiorthoError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no EP2 in [{lo}, {hi}]: the pair is not complex at the far end")]
    NoEPInBracket { lo: f64, hi: f64 },
    #[error("no EP3 in box: {0}")]
    NoEP3InBox(String),
    #[error("levels have the same Z2-index; two-level theory predicts no coalescence")]
    SameIndexPair,
    #[error("coupling element vanishes (|w| = {w:.3e})")]
    AccidentallyZeroElement { w: f64 },
    #[error("level {level} has no defined index")]
    IndexIllDefined { level: usize },
    #[error("level {level} is not real")]
    LevelNotReal { level: usize },
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("no crossing split: {0}")]
    NoSplit(String),
}
