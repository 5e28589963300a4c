//! Configuration, sweeps and figure datasets.

pub mod config;
pub mod figures;
pub mod sweep;
pub mod table;
pub mod validate;

use serde::{Deserialize, Serialize};

pub use config::{
    Grid, ModelKind, ObservableSpec, PeakWindow, RunConfig, SolverMode, SweepAxis, SweepSpec, TruncationPolicy,
};
pub use figures::{recipe, reproduce_figure, reproduce_from_sidecar, run_figure, FigureId, FigureSpec};
pub use sweep::{
    closed_peak_point, run_spectrum, run_steady, run_sweep, run_time_series, steady_point, PointRecord, SteadySummary,
};
pub use table::{format_number, Provenance, SweepTable};
pub use validate::{validate_effective_model, ValidationReport};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}
