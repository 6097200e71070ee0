//! CSV and JSON emitters.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::biortho::{index_code, BiorthoSpectrum};
use crate::epscan::{verify_selection_rule, Axis, Crossing, EpRecord, SelectionReport, SweepResult, TrackBreak, UnresolvedEvent};
use crate::oracle::OracleState;

/// 17 significant digits: lossless for `f64`.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// `out.csv` → `out.ep.json`.
pub fn sibling_json(path: &Path) -> PathBuf {
    path.with_extension("ep.json")
}

pub(crate) fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub(crate) fn write_json<S: Serialize>(path: Option<&Path>, value: &S) -> Result<(), CliError> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub(crate) fn write_spectrum_csv<W: Write>(w: W, spec: &BiorthoSpectrum<f64>) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["level_id", "re_eps", "im_eps", "z2_index", "ep_indicator"])?;
    for l in &spec.levels {
        out.write_record([
            l.index.to_string(),
            fmt_f(l.eigenvalue.re),
            fmt_f(l.eigenvalue.im),
            index_code(l.z2_index).to_string(),
            fmt_f(l.ep_indicator),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn write_oracle_csv<W: Write>(w: W, states: &[OracleState<f64>]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["state", "energy", "parity", "occupation", "r"])?;
    for (k, s) in states.iter().enumerate() {
        out.write_record([
            k.to_string(),
            fmt_f(s.energy),
            s.parity.value().to_string(),
            s.occupation.to_string(),
            s.r.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn write_tracks_csv<W: Write>(w: W, sweep: &SweepResult<f64>) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["grid_value", "level_id", "re_eps", "im_eps", "z2_index", "ep_indicator"])?;
    for i in 0..sweep.len() {
        for t in &sweep.tracks {
            let s = &t.samples[i];
            out.write_record([
                fmt_f(s.grid_value),
                t.level_id.to_string(),
                fmt_f(s.eigenvalue.re),
                fmt_f(s.eigenvalue.im),
                index_code(s.z2_index).to_string(),
                fmt_f(s.ep_indicator),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn write_records_csv<W: Write>(w: W, records: &[EpRecord<f64>]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["order", "j_tilde", "gamma_tilde", "levels", "z2_indices", "re_eps", "im_eps", "bracket_width"])?;
    for r in records {
        let join = |v: Vec<String>| v.join(" ");
        out.write_record([
            r.order.to_string(),
            fmt_f(r.location.first().copied().unwrap_or(f64::NAN)),
            fmt_f(r.location.get(1).copied().unwrap_or(f64::NAN)),
            join(r.levels.iter().map(|l| l.to_string()).collect()),
            join(r.indices.iter().map(|z| index_code(*z).to_string()).collect()),
            fmt_f(r.eigenvalue.re),
            fmt_f(r.eigenvalue.im),
            fmt_f(r.bracket_width),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn write_crossings_csv<W: Write>(w: W, crossings: &[Crossing<f64>]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["parameter", "track_a", "track_b", "energy", "gap", "z2_a", "z2_b", "kind"])?;
    for c in crossings {
        out.write_record([
            fmt_f(c.parameter),
            c.tracks.0.to_string(),
            c.tracks.1.to_string(),
            fmt_f(c.energy),
            fmt_f(c.gap),
            index_code(c.indices.0).to_string(),
            index_code(c.indices.1).to_string(),
            serde_json::to_value(c.kind)?.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Contents of the JSON file written next to a sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpFile {
    pub n: usize,
    pub axis: Axis,
    pub fixed_value: f64,
    pub records: Vec<EpRecord<f64>>,
    pub unresolved: Vec<UnresolvedEvent<f64>>,
    pub breaks: Vec<TrackBreak<f64>>,
    pub selection: SelectionReport,
}

/// Writes the track table to `path` and the EP records to its sibling JSON;
/// returns the sibling's path.
pub fn emit_figure_data(sweep: &SweepResult<f64>, ep: &EpFile, path: &Path) -> Result<PathBuf, CliError> {
    let mut w = sink(Some(path))?;
    write_tracks_csv(&mut w, sweep)?;
    w.flush()?;
    let json = sibling_json(path);
    write_json(Some(&json), ep)?;
    Ok(json)
}

/// Reads an EP file and re-checks its records against the selection rule.
pub fn load_records(path: &Path) -> Result<EpFile, CliError> {
    let file: EpFile = serde_json::from_reader(io::BufReader::new(File::open(path)?))?;
    let report = verify_selection_rule(&file.records);
    if !report.holds() {
        return Err(CliError::Invariant(format!(
            "{}: {} records break the selection rule",
            path.display(),
            report.violations.len()
        )));
    }
    Ok(file)
}
