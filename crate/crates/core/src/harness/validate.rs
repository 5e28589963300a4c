//! Numerical check of the single-mode reduction against the two-mode model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{QuantumState, SpaceDescriptor};
use crate::model::{build_effective_h, build_full_h, SystemParams};
use crate::observables::PopulationProbe;
use crate::solvers::{evolve_pure, tail_mass, EvolveConfig, Integrator, DEFAULT_TAIL_LEVELS, DEFAULT_TAIL_THRESHOLD};

/// Sampling interval of the comparison, in units of `1/g`.
pub const VALIDATION_DT: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub coupling: f64,
    pub n_total_max: usize,
    pub t_end: f64,
    pub n_samples: usize,
    /// `max_t |P_j^full(t) − P_j^eff(t)|` per upper-polariton level.
    pub per_level_max: Vec<f64>,
    pub max_discrepancy: f64,
    pub time_of_max: f64,
    pub full_tail_mass: f64,
    pub effective_tail_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Evolves both models from vacuum (closed dynamics, exact propagation) and
/// reports how far apart their upper-polariton populations get. The
/// effective model runs on `n_total_max + 1` levels so both ladders match.
pub fn validate_effective_model(params: &SystemParams, n_total_max: usize, t_end: f64) -> Result<ValidationReport> {
    params.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::param("t_end", "must be positive and finite"));
    }
    let intervals = (t_end / VALIDATION_DT).round().max(1.0) as usize;
    let cfg = EvolveConfig::new(0.0, t_end, intervals + 1).with_method(Integrator::Exponential);

    let full_space = SpaceDescriptor::two_mode(n_total_max)?;
    let eff_space = SpaceDescriptor::single_mode(n_total_max + 1)?;
    let full = evolve_pure(
        &build_full_h(params, full_space)?,
        &QuantumState::vacuum(full_space),
        &cfg,
    )?;
    let eff = evolve_pure(
        &build_effective_h(params, eff_space)?,
        &QuantumState::vacuum(eff_space),
        &cfg,
    )?;

    let tails = |states: &[QuantumState]| {
        states
            .iter()
            .map(|s| tail_mass(s, DEFAULT_TAIL_LEVELS))
            .fold(0.0, f64::max)
    };
    let full_tail_mass = tails(&full.states);
    let effective_tail_mass = tails(&eff.states);
    for (tail, dim) in [
        (full_tail_mass, full_space.basis_size()),
        (effective_tail_mass, eff_space.basis_size()),
    ] {
        if tail > DEFAULT_TAIL_THRESHOLD {
            return Err(Error::TruncationInadequate {
                context: format!("effective-model validation at n_total_max = {n_total_max}"),
                tail_mass: tail,
                dim,
            });
        }
    }

    let full_probe = PopulationProbe::natural(full_space);
    let eff_probe = PopulationProbe::natural(eff_space);
    let mut per_level_max = vec![0.0; n_total_max + 1];
    let mut max_discrepancy = 0.0;
    let mut time_of_max = 0.0;
    for ((t, a), b) in full.times.iter().zip(&full.states).zip(&eff.states) {
        let pa = full_probe.populations(a)?;
        let pb = eff_probe.populations(b)?;
        for (j, (x, y)) in pa.iter().zip(&pb).enumerate() {
            let d = (x - y).abs();
            per_level_max[j] = f64::max(per_level_max[j], d);
            if d > max_discrepancy {
                max_discrepancy = d;
                time_of_max = *t;
            }
        }
    }
    let warning = (params.kerr > 0.1 * params.coupling).then(|| {
        format!(
            "kerr/coupling = {:.3}; the reduction assumes a coupling much larger than the nonlinearity",
            params.kerr / params.coupling
        )
    });
    Ok(ValidationReport {
        coupling: params.coupling,
        n_total_max,
        t_end,
        n_samples: cfg.n_samples,
        per_level_max,
        max_discrepancy,
        time_of_max,
        full_tail_mass,
        effective_tail_mass,
        warning,
    })
}
