use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::QuantumState;

pub const DEFAULT_TAIL_LEVELS: usize = 3;
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationReport {
    pub passed: bool,
    pub max_tail_mass: f64,
    pub tail_levels: usize,
    pub threshold: f64,
}

/// Probability carried by the top `tail_levels` occupancies: Fock levels on
/// a single mode, total excitation shells on two modes.
pub fn tail_mass(state: &QuantumState, tail_levels: usize) -> f64 {
    let space = state.space();
    let top = space.max_occupancy();
    let cut = (top + 1).saturating_sub(tail_levels);
    state
        .basis_probabilities()
        .iter()
        .zip(space.total_excitations())
        .filter(|(_, n)| *n >= cut)
        .map(|(p, _)| *p)
        .sum()
}

/// Checks that no state places more than `threshold` in the truncation tail.
pub fn truncation_check<'a, I>(states: I, tail_levels: usize, threshold: f64) -> Result<TruncationReport>
where
    I: IntoIterator<Item = &'a QuantumState>,
{
    if tail_levels == 0 {
        return Err(Error::param("tail_levels", "must be positive"));
    }
    if !(threshold > 0.0) {
        return Err(Error::param("threshold", "must be positive"));
    }
    let max_tail_mass = states
        .into_iter()
        .map(|s| tail_mass(s, tail_levels))
        .fold(0.0, f64::max);
    Ok(TruncationReport {
        passed: max_tail_mass <= threshold,
        max_tail_mass,
        tail_levels,
        threshold,
    })
}
