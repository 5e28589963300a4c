//! Time evolution, steady states and spectra.
//!
//! Both evolution routines sample the solution on a uniform grid of
//! `n_samples` points spanning `[t_start, t_end]` (a single sample means
//! `t_end` only). Two propagation methods are available: adaptive
//! Dormand–Prince 5(4) with per-step error control, and exact propagation by
//! the matrix exponential of the (time-independent) generator, which is the
//! right choice for long dissipative horizons.

mod integrator;
mod spectrum;
mod steady;
mod truncation;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use spectrum::eigenspectrum;
pub use steady::{steady_state, steady_state_detailed, SteadyStateDiagnostics, STEADY_RESIDUAL_TOL};
pub use truncation::{tail_mass, truncation_check, TruncationReport, DEFAULT_TAIL_LEVELS, DEFAULT_TAIL_THRESHOLD};

use crate::error::{Error, Result};
use crate::fock::{FockOperator, QuantumState};
use crate::model::{unvectorize, vectorize, Liouvillian};
use crate::C64;
use integrator::StepControl;

/// Bound on `|‖ψ(t)‖ − 1|` before renormalization.
pub const NORM_DRIFT_BOUND: f64 = 1e-6;
/// Bound on `|Tr ρ(t) − 1|` before renormalization.
pub const TRACE_DRIFT_BOUND: f64 = 1e-8;
/// Bound on `max|ρ − ρ†|` before symmetrization.
pub const HERMITICITY_DRIFT_BOUND: f64 = 1e-8;

const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Adaptive,
    Exponential,
}

fn default_t_end() -> f64 {
    1500.0
}
fn default_n_samples() -> usize {
    15001
}
fn default_rel_tol() -> f64 {
    1e-8
}
fn default_abs_tol() -> f64 {
    1e-10
}
fn default_max_steps() -> usize {
    20_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub method: Integrator,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: default_t_end(),
            n_samples: default_n_samples(),
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_step: None,
            max_steps: default_max_steps(),
            method: Integrator::Adaptive,
        }
    }
}

impl EvolveConfig {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Self {
        Self {
            t_start,
            t_end,
            n_samples,
            ..Self::default()
        }
    }

    pub fn with_method(mut self, method: Integrator) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) || self.t_end <= self.t_start {
            return Err(Error::param("t_end", "must be finite and greater than t_start"));
        }
        if self.n_samples == 0 {
            return Err(Error::param("n_samples", "must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::param("rel_tol", "must be positive"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::param("abs_tol", "must be positive"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::param("max_step", "must be positive"));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::param("max_steps", "must be positive"));
        }
        Ok(())
    }

    pub fn sample_times(&self) -> Vec<f64> {
        if self.n_samples == 1 {
            return vec![self.t_end];
        }
        let span = self.t_end - self.t_start;
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|i| {
                if i + 1 == self.n_samples {
                    self.t_end
                } else {
                    self.t_start + span * (i as f64 / last)
                }
            })
            .collect()
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            max_steps: self.max_steps,
        }
    }
}

/// Sampled solution of a closed or dissipative evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Normalized (pure) or sanitized (density) states, one per sample.
    pub states: Vec<QuantumState>,
    /// `|‖ψ‖ − 1|` or `|Tr ρ − 1|` of the raw solution at each sample.
    pub drift: Vec<f64>,
    /// Integrator steps (adaptive) or propagator evaluations (exponential).
    pub work: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectories have at least one sample")
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }
}

fn propagate<F>(
    gen: &DMatrix<C64>,
    y0: nalgebra::DVector<C64>,
    cfg: &EvolveConfig,
    times: &[f64],
    emit: F,
) -> Result<usize>
where
    F: FnMut(usize, f64, &nalgebra::DVector<C64>) -> Result<()>,
{
    match cfg.method {
        Integrator::Adaptive => integrator::dopri5(gen, y0, cfg.t_start, times, &cfg.step_control(), emit),
        Integrator::Exponential => integrator::exponential(gen, y0, cfg.t_start, times, emit),
    }
}

/// Integrates `dψ/dt = −i h ψ`.
pub fn evolve_pure(h: &FockOperator, psi0: &QuantumState, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if psi0.space() != h.space() {
        return Err(Error::SpaceMismatch {
            left: h.space().to_string(),
            right: psi0.space().to_string(),
        });
    }
    let psi = psi0
        .as_pure()
        .ok_or_else(|| Error::InvalidState("evolve_pure needs a pure initial state".into()))?;
    let herm = h.hermiticity_error();
    if herm > HAMILTONIAN_HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let space = h.space();
    let gen = h.matrix() * C64::new(0.0, -1.0);
    let times = cfg.sample_times();
    let mut states = Vec::with_capacity(times.len());
    let mut drift = Vec::with_capacity(times.len());
    let work = propagate(&gen, psi.clone(), cfg, &times, |_, t, y| {
        let norm = y.norm();
        let d = (norm - 1.0).abs();
        if d > NORM_DRIFT_BOUND {
            return Err(Error::Drift {
                time: t,
                drift: d,
                bound: NORM_DRIFT_BOUND,
            });
        }
        drift.push(d);
        states.push(QuantumState::pure(space, y.clone())?);
        Ok(())
    })?;
    Ok(Trajectory {
        times,
        states,
        drift,
        work,
    })
}

/// Integrates the vectorized master equation `dρ/dt = L ρ`. A pure initial
/// state is promoted to its density matrix.
pub fn evolve_density(l: &Liouvillian, rho0: &QuantumState, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let space = l.space();
    if rho0.space() != space {
        return Err(Error::SpaceMismatch {
            left: space.to_string(),
            right: rho0.space().to_string(),
        });
    }
    let d = space.basis_size();
    let times = cfg.sample_times();
    let mut states = Vec::with_capacity(times.len());
    let mut drift = Vec::with_capacity(times.len());
    let work = propagate(l.matrix(), vectorize(&rho0.density_matrix()), cfg, &times, |_, t, y| {
        let rho = unvectorize(y, d);
        let trace = rho.trace();
        let tr_drift = (trace - C64::new(1.0, 0.0)).norm();
        if tr_drift > TRACE_DRIFT_BOUND {
            return Err(Error::Drift {
                time: t,
                drift: tr_drift,
                bound: TRACE_DRIFT_BOUND,
            });
        }
        let herm = crate::fock::max_abs_diff(&rho, &rho.adjoint());
        if herm > HERMITICITY_DRIFT_BOUND {
            return Err(Error::Drift {
                time: t,
                drift: herm,
                bound: HERMITICITY_DRIFT_BOUND,
            });
        }
        drift.push(tr_drift);
        states.push(QuantumState::density_sanitized(space, &rho)?);
        Ok(())
    })?;
    Ok(Trajectory {
        times,
        states,
        drift,
        work,
    })
}
