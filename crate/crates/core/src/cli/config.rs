//! Run configuration: JSON file plus command-line overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::epscan::Axis;
use crate::model::MAX_SITES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Spectrum,
    Oracle,
    Sweep,
    FindEp,
    Verify,
    Crossings,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Chain in normalized units; `j` and `delta` give raw couplings for `oracle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub n: usize,
    pub j_tilde: f64,
    pub gamma_tilde: f64,
    pub j: Option<f64>,
    pub delta: Option<f64>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n: 4,
            j_tilde: 0.5,
            gamma_tilde: 0.0,
            j: None,
            delta: None,
        }
    }
}

/// One-axis sweep; `gammas` lists the γ̃ lines scanned by `verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub axis: Axis,
    pub fixed_value: f64,
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub gammas: Vec<f64>,
}

pub const DEFAULT_GAMMAS: [f64; 4] = [0.05, 0.21, 0.40125, 0.48375];

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            axis: Axis::JTilde,
            fixed_value: 0.0,
            start: -1.0,
            end: 1.0,
            points: 801,
            gammas: DEFAULT_GAMMAS.to_vec(),
        }
    }
}

/// Box and resolution of the EP3 search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ep3Config {
    pub j_lo: f64,
    pub j_hi: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub j_points: usize,
    pub gamma_points: usize,
}

impl Default for Ep3Config {
    fn default() -> Self {
        Self {
            j_lo: -0.76,
            j_hi: -0.74,
            gamma_lo: 0.35,
            gamma_hi: 0.45,
            j_points: 9,
            gamma_points: 451,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Named tolerances: `(name, default, meaning)`.
pub const TOLERANCES: &[(&str, f64, &str)] = &[
    ("ep2", 1e-8, "EP2 bisection bracket in the swept parameter"),
    ("crossing", 1e-12, "crossing bisection bracket in the swept parameter"),
    ("ep3_j", 1e-7, "EP3 bisection bracket in j̃"),
    ("collision", 1e-3, "largest real window between colliding EP2s"),
    ("reality", 1e-8, "|Im λ| counted as real, relative to the spectral radius"),
    ("indicator_floor", 1e-6, "EP indicator below which an index is undefined"),
    ("oracle_energy", 1e-9, "oracle energy agreement in normalized units"),
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    pub chain: ChainConfig,
    pub grid: GridConfig,
    pub ep3: Ep3Config,
    /// EP order searched by `find-ep`.
    pub order: Option<u8>,
    pub tolerances: BTreeMap<String, f64>,
    pub output: OutputConfig,
    pub threads: Option<usize>,
}

fn usage(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Named tolerance, falling back to its default.
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            TOLERANCES
                .iter()
                .find(|t| t.0 == name)
                .map(|t| t.1)
                .unwrap_or_else(|| panic!("undocumented tolerance {name}"))
        })
    }

    pub fn order(&self) -> u8 {
        self.order.unwrap_or(2)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.chain;
        if c.n == 0 || c.n % 2 == 1 || c.n > MAX_SITES {
            return Err(usage("chain.n", format!("must be even and in 2..={MAX_SITES}, got {}", c.n)));
        }
        if !(c.j_tilde.abs() <= 1.0) {
            return Err(usage("chain.j_tilde", format!("must lie in [-1, 1], got {}", c.j_tilde)));
        }
        if !c.gamma_tilde.is_finite() {
            return Err(usage("chain.gamma_tilde", "must be finite"));
        }
        match (c.j, c.delta) {
            (Some(j), Some(d)) => {
                if !j.is_finite() || j == 0.0 {
                    return Err(usage("chain.j", "must be finite and nonzero"));
                }
                if !(d > 0.0) || !d.is_finite() {
                    return Err(usage("chain.delta", "must be positive"));
                }
            }
            (None, None) => {}
            _ => return Err(usage("chain", "j and delta must be given together")),
        }

        let g = &self.grid;
        if g.points < 2 {
            return Err(usage("grid.points", "need at least 2"));
        }
        if !(g.start < g.end) {
            return Err(usage("grid.start", format!("must be below grid.end ({} ≥ {})", g.start, g.end)));
        }
        match g.axis {
            Axis::JTilde => {
                if g.start < -1.0 || g.end > 1.0 {
                    return Err(usage("grid", "j̃ range must lie in [-1, 1]"));
                }
                if !g.fixed_value.is_finite() {
                    return Err(usage("grid.fixed_value", "must be finite"));
                }
            }
            Axis::GammaTilde => {
                if !(g.fixed_value.abs() <= 1.0) {
                    return Err(usage("grid.fixed_value", "j̃ must lie in [-1, 1]"));
                }
                if !g.start.is_finite() || !g.end.is_finite() {
                    return Err(usage("grid", "γ̃ range must be finite"));
                }
            }
        }
        if g.gammas.is_empty() || g.gammas.iter().any(|x| !x.is_finite()) {
            return Err(usage("grid.gammas", "need at least one finite value"));
        }

        let e = &self.ep3;
        if !(e.j_lo < e.j_hi) || e.j_lo < -1.0 || e.j_hi > 1.0 {
            return Err(usage("ep3.j_lo", "need -1 ≤ j_lo < j_hi ≤ 1"));
        }
        if !(e.gamma_lo < e.gamma_hi) || e.gamma_lo < 0.0 {
            return Err(usage("ep3.gamma_lo", "need 0 ≤ gamma_lo < gamma_hi"));
        }
        if e.j_points < 2 || e.gamma_points < 2 {
            return Err(usage("ep3.j_points", "need at least 2 points per axis"));
        }
        if let Some(o) = self.order {
            if o != 2 && o != 3 {
                return Err(usage("order", format!("must be 2 or 3, got {o}")));
            }
        }
        for (name, value) in &self.tolerances {
            if !TOLERANCES.iter().any(|t| t.0 == name) {
                let known: Vec<&str> = TOLERANCES.iter().map(|t| t.0).collect();
                return Err(usage(&format!("tolerances.{name}"), format!("unknown name; expected one of {}", known.join(", "))));
            }
            if !(*value > 0.0) || !value.is_finite() {
                return Err(usage(&format!("tolerances.{name}"), "must be positive"));
            }
        }
        if self.threads == Some(0) {
            return Err(usage("threads", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "psh-spectra", version, about = "Spectra, Z2-indices and exceptional points of the staggered-gain Ising chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Eigenvalues, indices and EP indicators at one point.
    Spectrum(Flags),
    /// Exact zero-gain spectrum and parities, checked against diagonalization.
    Oracle(Flags),
    /// Tracked sweep with EP2 records.
    Sweep(Flags),
    /// EP2s along a sweep (`--order 2`) or an EP3 search in a box (`--order 3`).
    FindEp(Flags),
    /// Selection rule over a set of j̃ sweeps.
    Verify(Flags),
    /// Level crossings along a j̃ sweep.
    Crossings(Flags),
    /// Command taken from the config file.
    Run(Flags),
}

impl CommandArgs {
    pub fn split(self) -> (Option<CommandKind>, Flags) {
        match self {
            CommandArgs::Spectrum(f) => (Some(CommandKind::Spectrum), f),
            CommandArgs::Oracle(f) => (Some(CommandKind::Oracle), f),
            CommandArgs::Sweep(f) => (Some(CommandKind::Sweep), f),
            CommandArgs::FindEp(f) => (Some(CommandKind::FindEp), f),
            CommandArgs::Verify(f) => (Some(CommandKind::Verify), f),
            CommandArgs::Crossings(f) => (Some(CommandKind::Crossings), f),
            CommandArgs::Run(f) => (None, f),
        }
    }
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    match s {
        "j_tilde" | "j-tilde" | "jt" => Ok(Axis::JTilde),
        "gamma_tilde" | "gamma-tilde" | "gt" => Ok(Axis::GammaTilde),
        _ => Err(format!("unknown axis {s:?}; use j_tilde or gamma_tilde")),
    }
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.to_string(), v))
}

/// Flags shared by all commands; each overrides the matching config field.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of sites.
    #[arg(long)]
    pub n: Option<usize>,
    /// Normalized coupling j̃.
    #[arg(long = "jt", allow_hyphen_values = true)]
    pub j_tilde: Option<f64>,
    /// Normalized gain γ̃.
    #[arg(long = "gt", allow_hyphen_values = true)]
    pub gamma_tilde: Option<f64>,
    /// Raw coupling J (oracle).
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<f64>,
    /// Raw transverse field Δ (oracle).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Swept axis: j_tilde or gamma_tilde.
    #[arg(long, value_parser = parse_axis)]
    pub axis: Option<Axis>,
    /// Value of the axis held fixed.
    #[arg(long, allow_hyphen_values = true)]
    pub fixed: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub end: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// γ̃ lines for verify, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    /// `default`: j̃ ∈ [-1, 1] with 801 points on the standard γ̃ lines.
    #[arg(long)]
    pub grid: Option<String>,
    /// EP order for find-ep.
    #[arg(long)]
    pub order: Option<u8>,
    #[arg(long = "j-lo", allow_hyphen_values = true)]
    pub j_lo: Option<f64>,
    #[arg(long = "j-hi", allow_hyphen_values = true)]
    pub j_hi: Option<f64>,
    #[arg(long = "gamma-lo")]
    pub gamma_lo: Option<f64>,
    #[arg(long = "gamma-hi")]
    pub gamma_hi: Option<f64>,
    #[arg(long = "j-points")]
    pub j_points: Option<usize>,
    #[arg(long = "gamma-points")]
    pub gamma_points: Option<usize>,
    /// Tolerance override, NAME=VALUE; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    pub tolerances: Vec<(String, f64)>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the eigensolves.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Flags {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        if let Some(g) = &self.grid {
            if g != "default" {
                return Err(usage("grid", format!("unknown preset {g:?}; only `default` exists")));
            }
            cfg.grid = GridConfig::default();
        }
        set!(self.n, cfg.chain.n);
        set!(self.j_tilde, cfg.chain.j_tilde);
        set!(self.gamma_tilde, cfg.chain.gamma_tilde);
        if self.j.is_some() {
            cfg.chain.j = self.j;
        }
        if self.delta.is_some() {
            cfg.chain.delta = self.delta;
        }
        set!(self.axis, cfg.grid.axis);
        // Without --fixed, the chain flag of the held axis fixes it.
        let held = match cfg.grid.axis {
            Axis::JTilde => self.gamma_tilde,
            Axis::GammaTilde => self.j_tilde,
        };
        set!(self.fixed.or(held), cfg.grid.fixed_value);
        set!(self.start, cfg.grid.start);
        set!(self.end, cfg.grid.end);
        set!(self.points, cfg.grid.points);
        set!(self.gammas, cfg.grid.gammas);
        if self.order.is_some() {
            cfg.order = self.order;
        }
        set!(self.j_lo, cfg.ep3.j_lo);
        set!(self.j_hi, cfg.ep3.j_hi);
        set!(self.gamma_lo, cfg.ep3.gamma_lo);
        set!(self.gamma_hi, cfg.ep3.gamma_hi);
        set!(self.j_points, cfg.ep3.j_points);
        set!(self.gamma_points, cfg.ep3.gamma_points);
        for (k, v) in &self.tolerances {
            cfg.tolerances.insert(k.clone(), *v);
        }
        if self.output.is_some() {
            cfg.output.path = self.output.clone();
        }
        set!(self.format, cfg.output.format);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_documented_tolerance_has_a_default() {
        let cfg = RunConfig::default();
        for (name, value, _) in TOLERANCES {
            assert_eq!(cfg.tol(name), *value);
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"grid": {"step": 0.1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command": "find-ep", "order": 3}"#).unwrap().validate().is_ok());
    }

    #[test]
    fn held_axis_follows_the_chain_flag() {
        let mut cfg = RunConfig::default();
        let flags = Flags {
            gamma_tilde: Some(0.21),
            ..Default::default()
        };
        flags.apply(&mut cfg).unwrap();
        assert_eq!(cfg.grid.fixed_value, 0.21);
        let flags = Flags {
            axis: Some(Axis::GammaTilde),
            j_tilde: Some(-0.3),
            fixed: Some(-0.5),
            ..Default::default()
        };
        flags.apply(&mut cfg).unwrap();
        assert_eq!(cfg.grid.fixed_value, -0.5);
    }
}
