//! Populations, mean excitation and blockade fidelity.
//!
//! The fidelity `F(n)` is the cumulative population of levels `0..=n` of the
//! upper-polariton ladder, extended to mixed states through `Tr(|j⟩⟨j|ρ)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Basis, Mode, QuantumState, SpaceDescriptor, StatePayload};
use crate::model::polariton_unitary;
use crate::solvers::Trajectory;
use crate::C64;

/// Population extractor for one space and ladder. Building it once caches
/// the polariton frame rotation across many states.
#[derive(Clone, Debug)]
pub struct PopulationProbe {
    space: SpaceDescriptor,
    basis: Basis,
    /// `U†`, present for the polariton ladder.
    to_frame: Option<DMatrix<C64>>,
    level_of: Vec<usize>,
}

impl PopulationProbe {
    pub fn new(space: SpaceDescriptor, basis: Basis) -> Result<Self> {
        basis.check(&space)?;
        let to_frame = match basis {
            Basis::Polariton => Some(polariton_unitary(space)?.into_matrix().adjoint()),
            Basis::Fock(_) => None,
        };
        let level_of = space
            .occupations()
            .into_iter()
            .map(|(n_a, n_m)| match basis {
                Basis::Fock(Mode::Magnon) => n_m,
                _ => n_a,
            })
            .collect();
        Ok(Self {
            space,
            basis,
            to_frame,
            level_of,
        })
    }

    pub fn natural(space: SpaceDescriptor) -> Self {
        Self::new(space, Basis::natural(&space)).expect("natural basis is valid on its own space")
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// `P_j` for `j = 0..=max_occupancy`.
    pub fn populations(&self, state: &QuantumState) -> Result<Vec<f64>> {
        if state.space() != self.space {
            return Err(Error::SpaceMismatch {
                left: self.space.to_string(),
                right: state.space().to_string(),
            });
        }
        let probs: Vec<f64> = match (&self.to_frame, state.payload()) {
            (None, _) => state.basis_probabilities(),
            (Some(ud), StatePayload::Pure(psi)) => (ud * psi).iter().map(|c| c.norm_sqr()).collect(),
            (Some(ud), StatePayload::Density(rho)) => {
                let rotated = ud * rho * ud.adjoint();
                rotated.diagonal().iter().map(|c| c.re).collect()
            }
        };
        let mut out = vec![0.0; self.space.max_occupancy() + 1];
        for (p, &j) in probs.iter().zip(&self.level_of) {
            out[j] += p;
        }
        Ok(out)
    }
}

pub fn populations(state: &QuantumState, basis: Basis) -> Result<Vec<f64>> {
    PopulationProbe::new(state.space(), basis)?.populations(state)
}

/// `Σ_j j P_j` on the given ladder.
pub fn mean_excitation(state: &QuantumState, basis: Basis) -> Result<f64> {
    Ok(weighted_mean(&populations(state, basis)?))
}

pub fn weighted_mean(pops: &[f64]) -> f64 {
    pops.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
}

/// Running sums `F(0), F(1), …` of a population list.
pub fn cumulative(pops: &[f64]) -> Vec<f64> {
    pops.iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// `F(n)` on the natural (upper-polariton) ladder.
pub fn fidelity_fp(state: &QuantumState, n: usize) -> Result<f64> {
    let max = state.space().max_occupancy();
    if n > max {
        return Err(Error::IndexOutOfRange { index: n, max });
    }
    let pops = PopulationProbe::natural(state.space()).populations(state)?;
    Ok(pops[..=n].iter().sum())
}

/// Thresholds for calling an n-quantum blockade successful. The defaults
/// are conventions of this crate, not physical constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockadeThresholds {
    /// Minimum `F(n)`.
    pub fidelity_min: f64,
    /// Maximum `F(n − 1)`.
    pub lower_max: f64,
}

impl Default for BlockadeThresholds {
    fn default() -> Self {
        Self {
            fidelity_min: 0.9,
            lower_max: 0.5,
        }
    }
}

impl BlockadeThresholds {
    pub fn accepts(&self, fidelities: &[f64], n_target: usize) -> bool {
        let high = fidelities[n_target] >= self.fidelity_min;
        let low = n_target == 0 || fidelities[n_target - 1] <= self.lower_max;
        high && low
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportSource {
    /// Evaluated at the sample where `P_n` peaks.
    TimePeak {
        time: f64,
    },
    SteadyState,
    Snapshot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockadeReport {
    pub n_target: usize,
    /// `F(0..=n_target)` at the evaluation point.
    pub fidelities: Vec<f64>,
    /// `P_0..=P_max` at the evaluation point.
    pub populations: Vec<f64>,
    pub mean_excitation: f64,
    pub source: ReportSource,
    /// Per-level maximum over the window (trajectories only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_populations: Option<Vec<f64>>,
    /// Populations at the last sample (trajectories only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_populations: Option<Vec<f64>>,
    pub success: bool,
}

fn check_target(space: &SpaceDescriptor, n_target: usize) -> Result<()> {
    let max = space.max_occupancy();
    if n_target > max {
        return Err(Error::IndexOutOfRange { index: n_target, max });
    }
    Ok(())
}

impl BlockadeReport {
    fn assemble(pops: Vec<f64>, n_target: usize, source: ReportSource, thresholds: &BlockadeThresholds) -> Self {
        let mut fidelities = cumulative(&pops);
        fidelities.truncate(n_target + 1);
        let success = thresholds.accepts(&fidelities, n_target);
        Self {
            n_target,
            mean_excitation: weighted_mean(&pops),
            fidelities,
            populations: pops,
            source,
            peak_populations: None,
            final_populations: None,
            success,
        }
    }

    /// Report for a single state, on the natural ladder.
    pub fn from_state(
        state: &QuantumState,
        n_target: usize,
        source: ReportSource,
        thresholds: &BlockadeThresholds,
    ) -> Result<Self> {
        check_target(&state.space(), n_target)?;
        let pops = PopulationProbe::natural(state.space()).populations(state)?;
        Ok(Self::assemble(pops, n_target, source, thresholds))
    }

    /// Report for a trajectory, evaluated where `P_n` is largest (first
    /// occurrence) and carrying the per-level window maxima.
    pub fn from_trajectory(traj: &Trajectory, n_target: usize, thresholds: &BlockadeThresholds) -> Result<Self> {
        let first = traj
            .states
            .first()
            .ok_or_else(|| Error::InvalidState("empty trajectory".into()))?;
        check_target(&first.space(), n_target)?;
        let probe = PopulationProbe::natural(first.space());
        let series = traj
            .states
            .iter()
            .map(|s| probe.populations(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_series(&traj.times, &series, n_target, thresholds))
    }

    /// As [`Self::from_trajectory`] from precomputed population rows.
    pub fn from_series(times: &[f64], series: &[Vec<f64>], n_target: usize, thresholds: &BlockadeThresholds) -> Self {
        let levels = series[0].len();
        let mut peak = vec![f64::NEG_INFINITY; levels];
        let mut best = 0usize;
        for (i, row) in series.iter().enumerate() {
            for (m, p) in peak.iter_mut().zip(row) {
                *m = m.max(*p);
            }
            if row[n_target] > series[best][n_target] {
                best = i;
            }
        }
        let mut report = Self::assemble(
            series[best].clone(),
            n_target,
            ReportSource::TimePeak { time: times[best] },
            thresholds,
        );
        report.peak_populations = Some(peak);
        report.final_populations = series.last().cloned();
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{expectation, number_op, total_number_op};
    use crate::model::polariton_plus;
    use nalgebra::DVector;

    fn single(dim: usize) -> SpaceDescriptor {
        SpaceDescriptor::single_mode(dim).unwrap()
    }

    fn superpose(space: SpaceDescriptor, terms: &[(usize, f64)]) -> QuantumState {
        let mut v = DVector::zeros(space.basis_size());
        for &(i, a) in terms {
            v[i] = C64::new(a, 0.0);
        }
        QuantumState::pure(space, v).unwrap()
    }

    #[test]
    fn fock_populations() {
        let s = single(5);
        let p = populations(&QuantumState::fock(s, 2).unwrap(), Basis::Fock(Mode::Single)).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let mixed = QuantumState::maximally_mixed(single(4));
        for p in populations(&mixed, Basis::Fock(Mode::Single)).unwrap() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_single_excitation_is_one_upper_polariton() {
        let s = SpaceDescriptor::two_mode(3).unwrap();
        let i10 = s.index_of(1, 0).unwrap();
        let i01 = s.index_of(0, 1).unwrap();
        let st = superpose(s, &[(i10, 1.0), (i01, 1.0)]);
        let p = populations(&st, Basis::Polariton).unwrap();
        assert!((p[1] - 1.0).abs() <= 1e-12);
        assert!(p[0].abs() <= 1e-12);
        let anti = superpose(s, &[(i10, 1.0), (i01, -1.0)]);
        assert!(populations(&anti, Basis::Polariton).unwrap()[0] > 1.0 - 1e-12);
    }

    #[test]
    fn polariton_populations_match_projectors_and_number() {
        let s = SpaceDescriptor::two_mode(4).unwrap();
        let v = DVector::from_fn(s.basis_size(), |i, _| {
            C64::new((i as f64 * 0.7).cos(), (i as f64 * 0.3).sin())
        });
        let st = QuantumState::pure(s, v).unwrap();
        for state in [st.clone(), st.to_density()] {
            let pops = populations(&state, Basis::Polariton).unwrap();
            for (j, p) in pops.iter().enumerate() {
                let proj = crate::fock::projector(s, Basis::Polariton, j).unwrap();
                assert!((expectation(&state, &proj).unwrap().re - p).abs() <= 1e-12);
            }
            let pp = polariton_plus(s).unwrap();
            let n_plus = pp.dag().matmul(&pp).unwrap();
            let direct = expectation(&state, &n_plus).unwrap().re;
            assert!((weighted_mean(&pops) - direct).abs() <= 1e-10);
            let total: f64 = pops.iter().sum();
            assert!((total - 1.0).abs() <= 1e-9);
            let n_tot = expectation(&state, &total_number_op(s)).unwrap().re;
            let lower = mean_excitation(&state, Basis::Fock(Mode::Cavity)).unwrap()
                + mean_excitation(&state, Basis::Fock(Mode::Magnon)).unwrap();
            assert!((lower - n_tot).abs() <= 1e-12);
        }
    }

    #[test]
    fn mean_excitation_examples() {
        let s = single(6);
        assert!(
            (mean_excitation(&QuantumState::fock(s, 3).unwrap(), Basis::Fock(Mode::Single)).unwrap() - 3.0).abs()
                < 1e-14
        );
        let st = superpose(s, &[(0, 1.0), (2, 1.0)]);
        let m = mean_excitation(&st, Basis::Fock(Mode::Single)).unwrap();
        assert!((m - 1.0).abs() < 1e-14);
        let n = number_op(s, Mode::Single).unwrap();
        assert!((expectation(&st, &n).unwrap().re - m).abs() <= 1e-10);
    }

    #[test]
    fn fidelity_examples() {
        let s = single(6);
        assert!((fidelity_fp(&QuantumState::fock(s, 1).unwrap(), 2).unwrap() - 1.0).abs() < 1e-14);
        let st = superpose(s, &[(0, 1.0), (3, 1.0)]);
        assert!((fidelity_fp(&st, 2).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(fidelity_fp(&st, 6), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn wrong_basis_is_rejected() {
        let st = QuantumState::vacuum(single(3));
        assert!(populations(&st, Basis::Polariton).is_err());
        assert!(populations(&st, Basis::Fock(Mode::Cavity)).is_err());
        let probe = PopulationProbe::natural(single(4));
        assert!(probe.populations(&st).is_err());
    }

    #[test]
    fn vacuum_is_not_a_blockade() {
        let st = QuantumState::vacuum(single(4));
        let r = BlockadeReport::from_state(&st, 1, ReportSource::Snapshot, &BlockadeThresholds::default()).unwrap();
        assert_eq!(r.fidelities, vec![1.0, 1.0]);
        assert!(!r.success);
    }

    #[test]
    fn report_from_series_picks_target_peak() {
        let times = [0.0, 1.0, 2.0];
        let series = vec![vec![1.0, 0.0, 0.0], vec![0.05, 0.0, 0.95], vec![0.3, 0.2, 0.5]];
        let r = BlockadeReport::from_series(&times, &series, 2, &BlockadeThresholds::default());
        assert_eq!(r.source, ReportSource::TimePeak { time: 1.0 });
        assert!(r.success);
        assert_eq!(r.peak_populations.as_deref(), Some(&[1.0, 0.2, 0.95][..]));
        assert_eq!(r.final_populations.as_deref(), Some(&series[2][..]));
        assert!((r.mean_excitation - 1.9).abs() < 1e-14);
    }
}
