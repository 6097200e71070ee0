//! Command implementations.

use std::io::Write;

use serde::Serialize;

use super::config::{CommandKind, Format, RunConfig};
use super::output::{self, sink, write_json, EpFile};
use super::CliError;
use crate::biortho::{from_eigensystem, BiorthoSpectrum};
use crate::epscan::{
    classify_crossings, scan_ep2, search_ep3, sweep, verify_selection_rule, Axis, ChainFamily, Ep3Box, Ep3Options, SelectionReport,
    SweepGrid, SweepResult,
};
use crate::model::{build_hamiltonian, build_parity, psh_residual, ChainSpec, NormalizedPoint};
use crate::numerics::{decompose, CLUSTER_TOL, DEFAULT_TOL};
use crate::oracle::{compare_with_numeric, full_spectrum, OracleComparison, OracleState};

/// Largest chain whose oracle spectrum is also diagonalized numerically.
const ORACLE_NUMERIC_SITES: usize = 10;
/// Pseudo-Hermiticity residual, relative to `‖H‖_F`, tolerated by `spectrum`.
const PSH_TOL: f64 = 1e-12;

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Dispatches `cfg.command`.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Some(CommandKind::Spectrum) => spectrum(cfg),
        Some(CommandKind::Oracle) => oracle(cfg),
        Some(CommandKind::Sweep) => sweep_cmd(cfg),
        Some(CommandKind::FindEp) => find_ep(cfg),
        Some(CommandKind::Verify) => verify(cfg),
        Some(CommandKind::Crossings) => crossings(cfg),
        None => Err(CliError::Usage("command: missing".into())),
    }
}

fn path(cfg: &RunConfig) -> Option<&std::path::Path> {
    cfg.output.path.as_deref()
}

fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.chain;
    let spec = ChainSpec::from_normalized(c.n, NormalizedPoint::new(c.j_tilde, c.gamma_tilde)).map_err(numeric)?;
    let h = build_hamiltonian(&spec).map_err(numeric)?;
    let zeta = build_parity(c.n).map_err(numeric)?;
    let residual = psh_residual(&h, &zeta).map_err(numeric)?;
    if residual > PSH_TOL * h.frobenius_norm().max(1.0) {
        return Err(CliError::Invariant(format!("‖ζH − H†ζ‖ = {residual:e}")));
    }
    let sys = decompose(&h, DEFAULT_TOL).map_err(numeric)?;
    let radius = sys.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let spec: BiorthoSpectrum<f64> =
        from_eigensystem(sys, &zeta, cfg.tol("reality") * radius.max(1.0), cfg.tol("indicator_floor")).map_err(numeric)?;
    match cfg.output.format {
        Format::Csv => {
            let mut w = sink(path(cfg))?;
            output::write_spectrum_csv(&mut w, &spec)?;
            w.flush()?;
            Ok(())
        }
        Format::Json => write_json(path(cfg), &spec.levels),
    }
}

#[derive(Serialize)]
struct OracleReport<'a> {
    n: usize,
    j: f64,
    delta: f64,
    states: &'a [OracleState<f64>],
    comparison: Option<OracleComparison>,
}

fn oracle(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.chain;
    let (j, delta) = match (c.j, c.delta) {
        (Some(j), Some(d)) => (j, d),
        _ => {
            let p = NormalizedPoint::new(c.j_tilde, 0.0);
            (c.j_tilde, p.delta())
        }
    };
    let states = full_spectrum(c.n, j, delta).map_err(numeric)?;
    let scale = (j * j + delta * delta).sqrt();
    let comparison = if c.n <= ORACLE_NUMERIC_SITES {
        let spec = ChainSpec::staggered(c.n, delta, j, 0.0).map_err(numeric)?;
        let h = build_hamiltonian(&spec).map_err(numeric)?;
        let zeta = build_parity(c.n).map_err(numeric)?;
        let s = crate::biortho::spectrum(&h, &zeta).map_err(numeric)?;
        let energies: Vec<f64> = s.levels.iter().map(|l| l.eigenvalue.re).collect();
        Some(compare_with_numeric(&states, &energies, &s.indices(), CLUSTER_TOL * scale.max(1.0)))
    } else {
        None
    };
    match cfg.output.format {
        Format::Csv => {
            let mut w = sink(path(cfg))?;
            output::write_oracle_csv(&mut w, &states)?;
            w.flush()?;
        }
        Format::Json => write_json(
            path(cfg),
            &OracleReport {
                n: c.n,
                j,
                delta,
                states: &states,
                comparison: comparison.clone(),
            },
        )?,
    }
    if let Some(cmp) = comparison {
        eprintln!(
            "oracle vs diagonalization: max |ΔE| = {:.3e}, parity mismatches {}, degenerate clusters {}",
            cmp.max_energy_error, cmp.parity_mismatches, cmp.degenerate_clusters
        );
        if cmp.max_energy_error > cfg.tol("oracle_energy") * scale || cmp.parity_mismatches > 0 {
            return Err(CliError::Invariant("oracle disagrees with diagonalization".into()));
        }
    }
    Ok(())
}

/// Sweep of `cfg.grid` with its EP2 scan.
pub(crate) fn sweep_with_records(cfg: &RunConfig, fixed: f64) -> Result<(SweepResult<f64>, EpFile), CliError> {
    let g = &cfg.grid;
    let grid = SweepGrid::linspace(cfg.chain.n, g.axis, fixed, g.start, g.end, g.points)?;
    let family = grid.family()?;
    let result = sweep(&family, &grid.points)?;
    let scan = scan_ep2(&family, &result, cfg.tol("ep2"))?;
    let selection = verify_selection_rule(&scan.records);
    let file = EpFile {
        n: cfg.chain.n,
        axis: g.axis,
        fixed_value: fixed,
        records: scan.records,
        unresolved: scan.unresolved,
        breaks: result.breaks.clone(),
        selection,
    };
    Ok((result, file))
}

fn check_selection(report: &SelectionReport) -> Result<(), CliError> {
    if report.holds() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "{} of {} EP records join equal indices",
            report.violations.len(),
            report.checked
        )))
    }
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    tracks: &'a SweepResult<f64>,
    ep: &'a EpFile,
}

fn sweep_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let (result, file) = sweep_with_records(cfg, cfg.grid.fixed_value)?;
    match (cfg.output.format, path(cfg)) {
        (Format::Csv, Some(p)) => {
            let json = output::emit_figure_data(&result, &file, p)?;
            eprintln!("wrote {} and {}", p.display(), json.display());
        }
        (Format::Csv, None) => {
            let mut w = sink(None)?;
            output::write_tracks_csv(&mut w, &result)?;
            w.flush()?;
        }
        (Format::Json, p) => write_json(p, &SweepDocument { tracks: &result, ep: &file })?,
    }
    eprintln!(
        "{} EP2 records, {} unresolved events, {} tracking breaks",
        file.records.len(),
        file.unresolved.len(),
        file.breaks.len()
    );
    check_selection(&file.selection)
}

fn find_ep(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.order() == 3 {
        let e = &cfg.ep3;
        let bx = Ep3Box {
            j_lo: e.j_lo,
            j_hi: e.j_hi,
            gamma_lo: e.gamma_lo,
            gamma_hi: e.gamma_hi,
        };
        let opts = Ep3Options {
            gamma_points: e.gamma_points,
            j_tol: cfg.tol("ep3_j"),
            collision_tol: cfg.tol("collision"),
            ep2_tol: cfg.tol("ep2").min(1e-10),
            ..Ep3Options::default()
        };
        let search = search_ep3(cfg.chain.n, &bx, e.j_points, &opts)?;
        let records: Vec<_> = search.found.iter().map(|f| f.record.clone()).collect();
        match cfg.output.format {
            Format::Json => write_json(path(cfg), &search)?,
            Format::Csv => {
                let mut w = sink(path(cfg))?;
                output::write_records_csv(&mut w, &records)?;
                w.flush()?;
            }
        }
        eprintln!("{} EP3 found, {} candidates rejected", search.found.len(), search.rejected.len());
        if let Some(bad) = search.found.iter().find(|f| !f.exchanges()) {
            return Err(CliError::Invariant(format!(
                "EP3 at {:?} does not exchange the pairings",
                bad.record.location
            )));
        }
        return check_selection(&verify_selection_rule(&records));
    }
    let (_, file) = sweep_with_records(cfg, cfg.grid.fixed_value)?;
    match cfg.output.format {
        Format::Json => write_json(path(cfg), &file)?,
        Format::Csv => {
            let mut w = sink(path(cfg))?;
            output::write_records_csv(&mut w, &file.records)?;
            w.flush()?;
        }
    }
    eprintln!("{} EP2 records, {} unresolved events", file.records.len(), file.unresolved.len());
    check_selection(&file.selection)
}

#[derive(Serialize)]
struct VerifyReport {
    n: usize,
    points: usize,
    sweeps: Vec<EpFile>,
    selection: SelectionReport,
}

fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.grid.axis != Axis::JTilde {
        return Err(CliError::Usage("grid.axis: verify sweeps j̃ on each γ̃ in grid.gammas".into()));
    }
    let mut sweeps = Vec::with_capacity(cfg.grid.gammas.len());
    for &g in &cfg.grid.gammas {
        sweeps.push(sweep_with_records(cfg, g)?.1);
    }
    let all: Vec<_> = sweeps.iter().flat_map(|s| s.records.iter().cloned()).collect();
    let report = VerifyReport {
        n: cfg.chain.n,
        points: cfg.grid.points,
        selection: verify_selection_rule(&all),
        sweeps,
    };
    if cfg.output.path.is_some() || cfg.output.format == Format::Json {
        write_json(path(cfg), &report)?;
    } else {
        let mut w = sink(None)?;
        output::write_records_csv(&mut w, &all)?;
        w.flush()?;
    }
    let unresolved: usize = report.sweeps.iter().map(|s| s.unresolved.len()).sum();
    eprintln!(
        "{} EP records on {} sweeps: {} violations, {} undetermined, {} unresolved events",
        report.selection.checked,
        report.sweeps.len(),
        report.selection.violations.len(),
        report.selection.undetermined.len(),
        unresolved
    );
    check_selection(&report.selection)
}

fn crossings(cfg: &RunConfig) -> Result<(), CliError> {
    let g = &cfg.grid;
    let grid = SweepGrid::linspace(cfg.chain.n, g.axis, g.fixed_value, g.start, g.end, g.points)?;
    let family: ChainFamily<f64> = grid.family()?;
    let result = sweep(&family, &grid.points)?;
    let found = classify_crossings(&family, &result, cfg.tol("crossing"))?;
    match cfg.output.format {
        Format::Json => write_json(path(cfg), &found)?,
        Format::Csv => {
            let mut w = sink(path(cfg))?;
            output::write_crossings_csv(&mut w, &found)?;
            w.flush()?;
        }
    }
    Ok(())
}
