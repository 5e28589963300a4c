//! Dataset recipes for the published figure panels.
//!
//! Each recipe is a list of runs with fully spelled-out configurations.
//! `reproduce_figure` writes `<id>.csv` (or `<id>.json`) and a sidecar
//! `<id>.resolved.json` holding the recipe itself, every assumed default and
//! a summary of what the solve needed. Feeding the sidecar back through
//! [`reproduce_from_sidecar`] regenerates the same dataset.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{Grid, ObservableSpec, RunConfig, SolverMode, SweepAxis, SweepSpec, UNITS_NOTE};
use super::sweep::{run_sweep, run_time_series};
use super::table::{Provenance, SweepTable, ARTIFACT_VERSION};
use super::OutputFormat;
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::solvers::EvolveConfig;

const KERR: f64 = 0.05;
const WEAK_DRIVE: f64 = 0.005;
const FIG4_OMEGA: f64 = 0.01;
const KAPPA: f64 = 0.001;
const WINDOW: f64 = 1500.0;
const WINDOW_SAMPLES: usize = 15001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig5a,
    Fig5b,
}

impl FigureId {
    pub const ALL: [FigureId; 12] = [
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig2d,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig4c,
        FigureId::Fig4d,
        FigureId::Fig5a,
        FigureId::Fig5b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig2d => "fig2d",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig4c => "fig4c",
            FigureId::Fig4d => "fig4d",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    TimeSeries,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureRun {
    pub label: String,
    pub kind: RunKind,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub truncation_used: usize,
    pub max_tail_mass: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unconverged: Vec<f64>,
}

/// A figure recipe; also the sidecar format once `results` is filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub figure: FigureId,
    pub description: String,
    pub artifact_version: String,
    pub units: String,
    /// Choices the figure itself leaves open.
    pub assumed: Vec<String>,
    pub runs: Vec<FigureRun>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<RunSummary>,
}

fn closed_time_series(delta_plus: f64, populations: bool) -> RunConfig {
    let mut cfg = RunConfig::new(SystemParams::effective(delta_plus, KERR, WEAK_DRIVE, WEAK_DRIVE, 0.0));
    cfg.evolve = EvolveConfig::new(0.0, WINDOW, WINDOW_SAMPLES);
    cfg.observables = ObservableSpec {
        j_max: 4,
        populations,
        mean_excitation: !populations,
        fidelities_up_to: None,
    };
    cfg
}

fn fidelity_vs_drive(delta_plus: f64, n: usize) -> RunConfig {
    let params = SystemParams::effective(delta_plus, KERR, WEAK_DRIVE, WEAK_DRIVE, 0.0).with_n_target(n);
    let mut cfg = RunConfig::new(params);
    cfg.evolve = EvolveConfig::new(0.0, WINDOW, WINDOW_SAMPLES);
    cfg.sweep = Some(SweepSpec {
        axis: SweepAxis::Omega,
        grid: Grid::Linear {
            start: 0.1 * KERR,
            stop: 2.0 * KERR,
            count: 100,
        },
        mode: SolverMode::ClosedPeak,
    });
    cfg
}

fn detuning_scan(g2: f64, populations: bool) -> RunConfig {
    let mut cfg = RunConfig::new(SystemParams::effective(0.0, KERR, FIG4_OMEGA, g2, KAPPA));
    // Up to P6 so every resonance in the scan range has its own column.
    cfg.observables = ObservableSpec {
        j_max: 6,
        populations,
        mean_excitation: !populations,
        fidelities_up_to: None,
    };
    cfg.sweep = Some(SweepSpec {
        axis: SweepAxis::DeltaPlus,
        grid: Grid::Linear {
            start: -0.09,
            stop: 0.01,
            count: 401,
        },
        mode: SolverMode::SteadyState,
    });
    cfg
}

fn drive_scan(axis: SweepAxis) -> Vec<FigureRun> {
    (2..=5)
        .map(|n| {
            let dp = -(n as f64) * KERR / 4.0;
            let params = SystemParams::effective(dp, KERR, WEAK_DRIVE, WEAK_DRIVE, KAPPA).with_n_target(n);
            let mut cfg = RunConfig::new(params);
            cfg.observables = ObservableSpec {
                j_max: 4,
                populations: false,
                mean_excitation: true,
                fidelities_up_to: None,
            };
            cfg.sweep = Some(SweepSpec {
                axis,
                grid: Grid::Linear {
                    start: 0.005,
                    stop: 0.02,
                    count: 31,
                },
                mode: SolverMode::SteadyState,
            });
            FigureRun {
                label: format!("n{n}"),
                kind: RunKind::Sweep,
                config: cfg,
            }
        })
        .collect()
}

fn single(label: &str, kind: RunKind, config: RunConfig) -> Vec<FigureRun> {
    vec![FigureRun {
        label: label.to_string(),
        kind,
        config,
    }]
}

/// The recipe behind a panel.
pub fn recipe(id: FigureId) -> FigureSpec {
    let window_note = format!("time window [0, {WINDOW}] with {WINDOW_SAMPLES} samples, vacuum start");
    let trunc_note = "effective model on 21 levels, raised by 8 when the top 3 levels hold more than 1e-8".to_string();
    let (description, assumed, runs) = match id {
        FigureId::Fig2a | FigureId::Fig2b | FigureId::Fig2c | FigureId::Fig2d => {
            let (dp, n) = match id {
                FigureId::Fig2a | FigureId::Fig2b => (-0.025, 2),
                _ => (-0.0375, 3),
            };
            let pops = matches!(id, FigureId::Fig2a | FigureId::Fig2c);
            let what = if pops { "populations P0..P4" } else { "mean excitation" };
            (
                format!("closed evolution, {what} versus time, {n}-quantum blockade detuning"),
                vec![window_note, trunc_note],
                single("main", RunKind::TimeSeries, closed_time_series(dp, pops)),
            )
        }
        FigureId::Fig3a | FigureId::Fig3b => {
            let (dp, n) = if id == FigureId::Fig3a {
                (-0.025, 2)
            } else {
                (-0.0375, 3)
            };
            (
                format!(
                    "fidelities Fp1..Fp{n} versus single-quantum drive omega (= omega/K x {KERR}), closed evolution"
                ),
                vec![
                    "omega/K scanned over [0.1, 2.0] with 100 points".into(),
                    "fidelities and mean excitation taken where P_n peaks; P_j columns are window maxima".into(),
                    format!("{window_note}, doubled while any peak still moves by more than 0.01"),
                    trunc_note,
                ],
                single("main", RunKind::Sweep, fidelity_vs_drive(dp, n)),
            )
        }
        FigureId::Fig4a | FigureId::Fig4b | FigureId::Fig4c | FigureId::Fig4d => {
            let g2 = if matches!(id, FigureId::Fig4a | FigureId::Fig4b) {
                0.005
            } else {
                0.01
            };
            let pops = matches!(id, FigureId::Fig4a | FigureId::Fig4c);
            let what = if pops { "populations P0..P6" } else { "mean excitation" };
            (
                format!("steady-state {what} versus delta_plus at g2 = {g2}"),
                vec![
                    "delta_plus scanned over [-0.09, 0.01] with 401 points".into(),
                    trunc_note,
                ],
                single("main", RunKind::Sweep, detuning_scan(g2, pops)),
            )
        }
        FigureId::Fig5a | FigureId::Fig5b => {
            let (axis, fixed) = if id == FigureId::Fig5a {
                (SweepAxis::G2, "omega")
            } else {
                (SweepAxis::Omega, "g2")
            };
            (
                format!(
                    "steady-state mean excitation and fidelities versus {} at the n = 2..5 blockade detunings",
                    axis.name()
                ),
                vec![
                    format!("{} scanned over [0.005, 0.02] with 31 points", axis.name()),
                    format!("{fixed} held at {WEAK_DRIVE}"),
                    "columns suffixed _n<n> per blockade order".into(),
                    trunc_note,
                ],
                drive_scan(axis),
            )
        }
    };
    FigureSpec {
        figure: id,
        description,
        artifact_version: ARTIFACT_VERSION.to_string(),
        units: UNITS_NOTE.to_string(),
        assumed,
        runs,
        results: Vec::new(),
    }
}

fn run_one(run: &FigureRun) -> Result<SweepTable> {
    match run.kind {
        RunKind::TimeSeries => run_time_series(&run.config),
        RunKind::Sweep => run_sweep(&run.config),
    }
}

/// Computes the dataset of a recipe and fills in its result summaries.
pub fn run_figure(spec: &FigureSpec) -> Result<(SweepTable, FigureSpec)> {
    if spec.runs.is_empty() {
        return Err(Error::config("runs", "a figure needs at least one run"));
    }
    let mut parts = Vec::with_capacity(spec.runs.len());
    let mut results = Vec::with_capacity(spec.runs.len());
    for run in &spec.runs {
        run.config.validate()?;
        let table = run_one(run)?;
        results.push(RunSummary {
            label: run.label.clone(),
            truncation_used: table.provenance.truncation_used,
            max_tail_mass: table.provenance.max_tail_mass,
            unconverged: table.provenance.unconverged.clone(),
        });
        parts.push((run.label.clone(), table));
    }
    let mut resolved = spec.clone();
    resolved.results = results;
    let table = if parts.len() == 1 {
        let (_, mut t) = parts.pop().expect("one part");
        t.provenance.resolved = serde_json::to_value(&resolved).expect("spec serializes");
        t
    } else {
        let first = &parts[0].1.provenance;
        let provenance = Provenance {
            artifact_version: ARTIFACT_VERSION.to_string(),
            units: spec.units.clone(),
            resolved: serde_json::to_value(&resolved).expect("spec serializes"),
            truncation_used: resolved.results.iter().map(|r| r.truncation_used).max().unwrap_or(0),
            max_tail_mass: resolved.results.iter().map(|r| r.max_tail_mass).fold(0.0, f64::max),
            rel_tol: first.rel_tol,
            abs_tol: first.abs_tol,
            unconverged: Vec::new(),
        };
        SweepTable::join(&parts, provenance)?
    };
    Ok((table, resolved))
}

fn write_outputs(
    table: &SweepTable,
    resolved: &FigureSpec,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let id = resolved.figure.as_str();
    let data_path = out_dir.join(format!("{id}.{}", format.extension()));
    let body = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    fs::write(&data_path, body)?;
    let sidecar = out_dir.join(format!("{id}.resolved.json"));
    fs::write(
        &sidecar,
        serde_json::to_string_pretty(resolved).expect("spec serializes"),
    )?;
    Ok(vec![data_path, sidecar])
}

pub fn reproduce_figure(id: FigureId, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let (table, resolved) = run_figure(&recipe(id))?;
    write_outputs(&table, &resolved, out_dir, format)
}

/// Re-runs the recipe stored in a sidecar written by [`reproduce_figure`].
pub fn reproduce_from_sidecar(sidecar: &Path, out_dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(sidecar)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let mut spec: FigureSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())
    })?;
    spec.results.clear();
    let (table, resolved) = run_figure(&spec)?;
    write_outputs(&table, &resolved, out_dir, format)
}
