//! JSON run configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::observables::BlockadeThresholds;
use crate::solvers::EvolveConfig;

pub const UNITS_NOTE: &str = "all rates in units of g; times in units of 1/g";

fn units_note() -> String {
    UNITS_NOTE.to_string()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Single-mode polariton Hamiltonian.
    #[default]
    Effective,
    /// Cavity and magnon modes with total-excitation truncation.
    Full,
}

fn d_dim() -> usize {
    21
}
fn d_n_total_max() -> usize {
    12
}
fn d_tail_levels() -> usize {
    3
}
fn d_threshold() -> f64 {
    1e-8
}
fn d_grow_by() -> usize {
    8
}
fn d_max_retries() -> usize {
    3
}

/// Starting truncation and the rule for raising it when the top levels
/// carry too much probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationPolicy {
    #[serde(default = "d_dim")]
    pub dim: usize,
    #[serde(default = "d_n_total_max")]
    pub n_total_max: usize,
    #[serde(default = "d_tail_levels")]
    pub tail_levels: usize,
    #[serde(default = "d_threshold")]
    pub threshold: f64,
    #[serde(default = "d_grow_by")]
    pub grow_by: usize,
    #[serde(default = "d_max_retries")]
    pub max_retries: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            dim: d_dim(),
            n_total_max: d_n_total_max(),
            tail_levels: d_tail_levels(),
            threshold: d_threshold(),
            grow_by: d_grow_by(),
            max_retries: d_max_retries(),
        }
    }
}

fn d_j_max() -> usize {
    4
}
fn yes() -> bool {
    true
}

/// Which columns a run reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    /// Highest population index reported (`P0..=P{j_max}`).
    #[serde(default = "d_j_max")]
    pub j_max: usize,
    #[serde(default = "yes")]
    pub populations: bool,
    #[serde(default = "yes")]
    pub mean_excitation: bool,
    /// Reports `Fp1..=Fp{n}`; defaults to `params.n_target` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelities_up_to: Option<usize>,
}

impl Default for ObservableSpec {
    fn default() -> Self {
        Self {
            j_max: d_j_max(),
            populations: true,
            mean_excitation: true,
            fidelities_up_to: None,
        }
    }
}

fn d_window_tol() -> f64 {
    0.01
}
fn d_max_doublings() -> usize {
    3
}

/// Convergence rule for peak values of closed evolutions: doubling the
/// window must not raise any reported maximum by more than `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakWindow {
    #[serde(default = "d_window_tol")]
    pub tolerance: f64,
    #[serde(default = "d_max_doublings")]
    pub max_doublings: usize,
}

impl Default for PeakWindow {
    fn default() -> Self {
        Self {
            tolerance: d_window_tol(),
            max_doublings: d_max_doublings(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    DeltaPlus,
    Omega,
    G2,
    Kappa,
    Kerr,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::DeltaPlus => "delta_plus",
            SweepAxis::Omega => "omega",
            SweepAxis::G2 => "g2",
            SweepAxis::Kappa => "kappa",
            SweepAxis::Kerr => "kerr",
        }
    }

    /// Copy of `base` with this axis set to `value`. Setting the detuning
    /// drops any mode detunings so the two stay consistent.
    pub fn apply(self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = base.clone();
        match self {
            SweepAxis::DeltaPlus => {
                p.delta_plus = Some(value);
                p.delta_c = None;
                p.delta_m = None;
            }
            SweepAxis::Omega => p.omega = value,
            SweepAxis::G2 => p.g2 = value,
            SweepAxis::Kappa => p.kappa = value,
            SweepAxis::Kerr => p.kerr = value,
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Explicit(Vec<f64>),
    Linear { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Explicit(ref v) => v.clone(),
            Grid::Linear { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![start],
                _ => (0..count)
                    .map(|i| {
                        if i + 1 == count {
                            stop
                        } else {
                            start + (stop - start) * (i as f64 / (count - 1) as f64)
                        }
                    })
                    .collect(),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let v = self.values();
        if v.is_empty() {
            return Err(Error::config("sweep.grid", "grid is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("sweep.grid", "grid values must be finite"));
        }
        let up = v.windows(2).all(|w| w[1] > w[0]);
        let down = v.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::config("sweep.grid", "grid must be strictly monotone"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// Closed evolution from vacuum; peak values over a converged window.
    ClosedPeak,
    #[default]
    SteadyState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Grid,
    #[serde(default)]
    pub mode: SolverMode,
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "units_note")]
    pub units: String,
    pub params: SystemParams,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub observables: ObservableSpec,
    #[serde(default)]
    pub thresholds: BlockadeThresholds,
    #[serde(default)]
    pub peak_window: PeakWindow,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn new(params: SystemParams) -> Self {
        Self {
            units: units_note(),
            params,
            model: ModelKind::default(),
            truncation: TruncationPolicy::default(),
            evolve: EvolveConfig::default(),
            observables: ObservableSpec::default(),
            thresholds: BlockadeThresholds::default(),
            peak_window: PeakWindow::default(),
            sweep: None,
        }
    }

    /// Parses and validates; errors carry the JSON path of the culprit.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Highest fidelity index reported, if any.
    pub fn fidelity_order(&self) -> Option<usize> {
        self.observables.fidelities_up_to.or(self.params.n_target)
    }

    /// Starting size parameter: `dim` (effective) or `n_total_max` (full).
    pub fn initial_size(&self) -> usize {
        match self.model {
            ModelKind::Effective => self.truncation.dim,
            ModelKind::Full => self.truncation.n_total_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| match e {
            Error::InvalidParameter { field, message } => Error::Config {
                field: format!("params.{field}"),
                message,
            },
            other => other,
        })?;
        self.evolve.validate().map_err(|e| match e {
            Error::InvalidParameter { field, message } => Error::Config {
                field: format!("evolve.{field}"),
                message,
            },
            other => other,
        })?;
        let t = &self.truncation;
        if t.dim < 2 {
            return Err(Error::config("truncation.dim", "must be at least 2"));
        }
        if t.n_total_max < 1 {
            return Err(Error::config("truncation.n_total_max", "must be at least 1"));
        }
        if t.tail_levels == 0 {
            return Err(Error::config("truncation.tail_levels", "must be positive"));
        }
        if !(t.threshold > 0.0) {
            return Err(Error::config("truncation.threshold", "must be positive"));
        }
        let size = self.initial_size();
        let top = match self.model {
            ModelKind::Effective => size - 1,
            ModelKind::Full => size,
        };
        if t.tail_levels > top {
            return Err(Error::config("truncation.tail_levels", "exceeds the truncation"));
        }
        if self.observables.j_max > top {
            return Err(Error::config(
                "observables.j_max",
                format!("exceeds the largest level {top}"),
            ));
        }
        if let Some(n) = self.fidelity_order() {
            if n == 0 || n > top {
                return Err(Error::config(
                    "observables.fidelities_up_to",
                    format!("must lie in 1..={top}"),
                ));
            }
        }
        if !(self.peak_window.tolerance > 0.0) {
            return Err(Error::config("peak_window.tolerance", "must be positive"));
        }
        for (name, v) in [
            ("thresholds.fidelity_min", self.thresholds.fidelity_min),
            ("thresholds.lower_max", self.thresholds.lower_max),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(name, "must lie in [0, 1]"));
            }
        }
        if let Some(sweep) = &self.sweep {
            sweep.grid.validate()?;
            if sweep.mode == SolverMode::ClosedPeak && self.params.n_target.is_none() {
                return Err(Error::config(
                    "params.n_target",
                    "closed-peak sweeps need the blockade order",
                ));
            }
            if sweep.mode == SolverMode::SteadyState && sweep.axis != SweepAxis::Kappa && !(self.params.kappa > 0.0) {
                return Err(Error::config("params.kappa", "steady-state sweeps need kappa > 0"));
            }
            for v in sweep.grid.values() {
                sweep
                    .axis
                    .apply(&self.params, v)
                    .validate()
                    .map_err(|e| Error::config("sweep.grid", format!("{} = {v}: {e}", sweep.axis.name())))?;
            }
        }
        Ok(())
    }
}
