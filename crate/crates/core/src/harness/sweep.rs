//! Single-point solves and parameter sweeps.
//!
//! Every point is solved at the configured truncation first; when the top
//! `tail_levels` carry more than `threshold` of the probability (or a steady
//! state comes out non-positive) the truncation grows by `grow_by` and the
//! point is redone, at most `max_retries` times.
//!
//! Closed-peak points evolve from vacuum and report, for each level, the
//! largest population seen in the window. Mean excitation and fidelities are
//! taken at the sample where the target level `n_target` peaks.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ModelKind, RunConfig, SolverMode};
use super::table::{Provenance, SweepTable, ARTIFACT_VERSION};
use crate::error::{Error, Result};
use crate::fock::{FockOperator, QuantumState, SpaceDescriptor};
use crate::model::{
    build_effective_h, build_full_h, effective_liouvillian, full_liouvillian, Liouvillian, SystemParams,
};
use crate::observables::{cumulative, weighted_mean, BlockadeReport, PopulationProbe, ReportSource};
use crate::solvers::{eigenspectrum, evolve_density, evolve_pure, steady_state_detailed, tail_mass, EvolveConfig};

pub fn space_for(model: ModelKind, size: usize) -> Result<SpaceDescriptor> {
    match model {
        ModelKind::Effective => SpaceDescriptor::single_mode(size),
        ModelKind::Full => SpaceDescriptor::two_mode(size),
    }
}

pub fn hamiltonian(params: &SystemParams, model: ModelKind, size: usize) -> Result<FockOperator> {
    let space = space_for(model, size)?;
    match model {
        ModelKind::Effective => build_effective_h(params, space),
        ModelKind::Full => build_full_h(params, space),
    }
}

pub fn liouvillian(params: &SystemParams, model: ModelKind, size: usize) -> Result<Liouvillian> {
    match model {
        ModelKind::Effective => effective_liouvillian(params, size),
        ModelKind::Full => full_liouvillian(params, size),
    }
}

/// Column names after the leading axis column.
pub fn value_columns(cfg: &RunConfig) -> Vec<String> {
    let mut cols = Vec::new();
    if cfg.observables.populations {
        cols.extend((0..=cfg.observables.j_max).map(|j| format!("P{j}")));
    }
    if cfg.observables.mean_excitation {
        cols.push("nbar".into());
    }
    if let Some(n) = cfg.fidelity_order() {
        cols.extend((1..=n).map(|k| format!("Fp{k}")));
    }
    cols
}

/// Row values in [`value_columns`] order. `peaks` replaces the population
/// columns when given.
fn row_values(cfg: &RunConfig, pops: &[f64], peaks: Option<&[f64]>) -> Vec<f64> {
    let mut row = Vec::new();
    if cfg.observables.populations {
        let shown = peaks.unwrap_or(pops);
        row.extend_from_slice(&shown[..=cfg.observables.j_max]);
    }
    if cfg.observables.mean_excitation {
        row.push(weighted_mean(pops));
    }
    if let Some(n) = cfg.fidelity_order() {
        let fid = cumulative(pops);
        row.extend_from_slice(&fid[1..=n]);
    }
    row
}

/// One solved point.
#[derive(Clone, Debug, Serialize)]
pub struct PointRecord {
    pub values: Vec<f64>,
    pub truncation_used: usize,
    pub tail_mass: f64,
    /// Closed-peak only: whether the window rule was met.
    pub converged: bool,
    /// Window the reported peaks were taken over (closed-peak only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BlockadeReport>,
}

/// Runs `attempt` at growing truncations until its tail mass is acceptable.
fn with_truncation<T>(
    cfg: &RunConfig,
    context: &str,
    mut attempt: impl FnMut(usize) -> Result<(T, f64)>,
) -> Result<(T, usize, f64)> {
    let policy = &cfg.truncation;
    let mut size = cfg.initial_size();
    let mut last_tail = f64::NAN;
    for _ in 0..=policy.max_retries {
        match attempt(size) {
            Ok((value, tail)) if tail <= policy.threshold => return Ok((value, size, tail)),
            Ok((_, tail)) => last_tail = tail,
            Err(Error::NotPositive { min_eigenvalue }) => last_tail = min_eigenvalue.abs(),
            Err(e) => return Err(e),
        }
        size += policy.grow_by;
    }
    Err(Error::TruncationInadequate {
        context: context.to_string(),
        tail_mass: last_tail,
        dim: size - policy.grow_by,
    })
}

fn report_order(params: &SystemParams, cfg: &RunConfig) -> Option<usize> {
    params.n_target.or(cfg.fidelity_order())
}

/// Steady state of one parameter set.
pub fn steady_point(params: &SystemParams, cfg: &RunConfig, context: &str) -> Result<(PointRecord, QuantumState)> {
    let ((state, _), size, tail) = with_truncation(cfg, context, |size| {
        let l = liouvillian(params, cfg.model, size)?;
        let (state, diag) = steady_state_detailed(&l)?;
        let tail = tail_mass(&state, cfg.truncation.tail_levels);
        Ok(((state, diag), tail))
    })?;
    let pops = PopulationProbe::natural(state.space()).populations(&state)?;
    let report = report_order(params, cfg)
        .map(|n| BlockadeReport::from_state(&state, n, ReportSource::SteadyState, &cfg.thresholds))
        .transpose()?;
    Ok((
        PointRecord {
            values: row_values(cfg, &pops, None),
            truncation_used: size,
            tail_mass: tail,
            converged: true,
            window: None,
            report,
        },
        state,
    ))
}

fn closed_series(
    params: &SystemParams,
    cfg: &RunConfig,
    size: usize,
    evolve: &EvolveConfig,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let h = hamiltonian(params, cfg.model, size)?;
    let vac = QuantumState::vacuum(h.space());
    let traj = evolve_pure(&h, &vac, evolve)?;
    let probe = PopulationProbe::natural(h.space());
    let series = traj
        .states
        .iter()
        .map(|s| probe.populations(s))
        .collect::<Result<Vec<_>>>()?;
    let tail = traj
        .states
        .iter()
        .map(|s| tail_mass(s, cfg.truncation.tail_levels))
        .fold(0.0, f64::max);
    Ok((traj.times, series, tail))
}

fn level_maxima(series: &[Vec<f64>]) -> Vec<f64> {
    let mut m = vec![f64::NEG_INFINITY; series[0].len()];
    for row in series {
        for (a, b) in m.iter_mut().zip(row) {
            *a = a.max(*b);
        }
    }
    m
}

/// Peak populations of a closed evolution from vacuum, with the window
/// doubled until one more doubling changes no reported maximum by more than
/// the configured tolerance.
pub fn closed_peak_point(params: &SystemParams, cfg: &RunConfig, context: &str) -> Result<PointRecord> {
    let n_target = params
        .n_target
        .ok_or_else(|| Error::config("params.n_target", "closed-peak evaluation needs the blockade order"))?;
    let t0 = cfg.evolve.t_start;
    let span = cfg.evolve.t_end - t0;
    let intervals = cfg.evolve.n_samples.max(2) - 1;
    let j_max = cfg.observables.j_max;

    let mut doubling = 0usize;
    loop {
        let scale = 1usize << doubling;
        let mut evolve = cfg.evolve.clone();
        evolve.t_end = t0 + span * (2 * scale) as f64;
        evolve.n_samples = 2 * scale * intervals + 1;
        let ((times, series), size, tail) = with_truncation(cfg, context, |size| {
            let (times, series, tail) = closed_series(params, cfg, size, &evolve)?;
            Ok(((times, series), tail))
        })?;
        let half = scale * intervals + 1;
        let short = level_maxima(&series[..half]);
        let long = level_maxima(&series);
        let converged = (0..=j_max).all(|j| long[j] - short[j] <= cfg.peak_window.tolerance);
        if converged || doubling >= cfg.peak_window.max_doublings {
            let report = BlockadeReport::from_series(&times[..half], &series[..half], n_target, &cfg.thresholds);
            let values = row_values(cfg, &report.populations, report.peak_populations.as_deref());
            return Ok(PointRecord {
                values,
                truncation_used: size,
                tail_mass: tail,
                converged,
                window: Some(span * scale as f64),
                report: Some(report),
            });
        }
        doubling += 1;
    }
}

fn provenance(cfg: &RunConfig, records: &[PointRecord], unconverged: Vec<f64>) -> Provenance {
    Provenance {
        artifact_version: ARTIFACT_VERSION.to_string(),
        units: cfg.units.clone(),
        resolved: serde_json::to_value(cfg).expect("config serializes"),
        truncation_used: records.iter().map(|r| r.truncation_used).max().unwrap_or(0),
        max_tail_mass: records.iter().map(|r| r.tail_mass).fold(0.0, f64::max),
        rel_tol: cfg.evolve.rel_tol,
        abs_tol: cfg.evolve.abs_tol,
        unconverged,
    }
}

/// Solves every grid point (in parallel) and assembles the table in grid
/// order. The first failing point, in grid order, aborts the sweep.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "a sweep section is required"))?;
    let grid = sweep.grid.values();
    let results: Vec<Result<PointRecord>> = grid
        .par_iter()
        .map(|&v| {
            let params = sweep.axis.apply(&cfg.params, v);
            let context = format!("{} = {v}", sweep.axis.name());
            match sweep.mode {
                SolverMode::SteadyState => steady_point(&params, cfg, &context).map(|(r, _)| r),
                SolverMode::ClosedPeak => closed_peak_point(&params, cfg, &context),
            }
        })
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut columns = vec![sweep.axis.name().to_string()];
    columns.extend(value_columns(cfg));
    let rows = grid
        .iter()
        .zip(&records)
        .map(|(&v, r)| std::iter::once(v).chain(r.values.iter().copied()).collect())
        .collect();
    let unconverged = grid
        .iter()
        .zip(&records)
        .filter(|(_, r)| !r.converged)
        .map(|(&v, _)| v)
        .collect();
    SweepTable::new(columns, rows, provenance(cfg, &records, unconverged))
}

/// Time series from vacuum over `cfg.evolve`: closed evolution when
/// `kappa = 0`, the master equation otherwise.
pub fn run_time_series(cfg: &RunConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let params = &cfg.params;
    let ((times, series), size, tail) = with_truncation(cfg, "time series", |size| {
        let states = if params.kappa > 0.0 {
            let l = liouvillian(params, cfg.model, size)?;
            evolve_density(&l, &QuantumState::vacuum(l.space()), &cfg.evolve)?
        } else {
            let h = hamiltonian(params, cfg.model, size)?;
            evolve_pure(&h, &QuantumState::vacuum(h.space()), &cfg.evolve)?
        };
        let probe = PopulationProbe::natural(states.states[0].space());
        let series = states
            .states
            .iter()
            .map(|s| probe.populations(s))
            .collect::<Result<Vec<_>>>()?;
        let tail = states
            .states
            .iter()
            .map(|s| tail_mass(s, cfg.truncation.tail_levels))
            .fold(0.0, f64::max);
        Ok(((states.times, series), tail))
    })?;
    let mut columns = vec!["t".to_string()];
    columns.extend(value_columns(cfg));
    let rows = times
        .iter()
        .zip(&series)
        .map(|(&t, pops)| std::iter::once(t).chain(row_values(cfg, pops, None)).collect())
        .collect();
    let record = PointRecord {
        values: Vec::new(),
        truncation_used: size,
        tail_mass: tail,
        converged: true,
        window: None,
        report: None,
    };
    SweepTable::new(columns, rows, provenance(cfg, &[record], Vec::new()))
}

/// Steady-state summary for a single parameter set.
#[derive(Clone, Debug, Serialize)]
pub struct SteadySummary {
    pub populations: Vec<f64>,
    pub mean_excitation: f64,
    pub fidelities: Vec<f64>,
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub truncation_used: usize,
    pub tail_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blockade: Option<BlockadeReport>,
}

pub fn run_steady(cfg: &RunConfig) -> Result<SteadySummary> {
    cfg.validate()?;
    let (record, state) = steady_point(&cfg.params, cfg, "steady state")?;
    let l = liouvillian(&cfg.params, cfg.model, record.truncation_used)?;
    let (_, diag) = steady_state_detailed(&l)?;
    let pops = PopulationProbe::natural(state.space()).populations(&state)?;
    Ok(SteadySummary {
        mean_excitation: weighted_mean(&pops),
        fidelities: cumulative(&pops),
        populations: pops,
        residual: diag.residual,
        min_eigenvalue: diag.min_eigenvalue,
        truncation_used: record.truncation_used,
        tail_mass: record.tail_mass,
        blockade: record.report,
    })
}

/// Lowest `k` (or all) eigenvalues of the configured Hamiltonian.
pub fn run_spectrum(cfg: &RunConfig, k: Option<usize>) -> Result<SweepTable> {
    cfg.validate()?;
    let size = cfg.initial_size();
    let h = hamiltonian(&cfg.params, cfg.model, size)?;
    let energies = eigenspectrum(&h, k)?;
    let rows = energies.iter().enumerate().map(|(i, &e)| vec![i as f64, e]).collect();
    let record = PointRecord {
        values: Vec::new(),
        truncation_used: size,
        tail_mass: 0.0,
        converged: true,
        window: None,
        report: None,
    };
    SweepTable::new(
        vec!["index".into(), "energy".into()],
        rows,
        provenance(cfg, &[record], Vec::new()),
    )
}
