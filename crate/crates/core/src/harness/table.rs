//! Rectangular numeric tables with provenance.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where a table came from and how it was computed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact_version: String,
    pub units: String,
    /// The fully resolved configuration that produced the table.
    pub resolved: serde_json::Value,
    /// Largest truncation size used by any point (`dim` or `n_total_max`).
    pub truncation_used: usize,
    /// Largest truncation-tail mass seen at any point.
    pub max_tail_mass: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Sweep values whose peak window never converged.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unconverged: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

/// `x` rounded to 12 significant digits, in its shortest round-trip form.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".to_string()
    } else if (1e-4..1e12).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

impl SweepTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            return Err(Error::InvalidState(format!(
                "row {i} has {} values for {} columns",
                r.len(),
                columns.len()
            )));
        }
        Ok(Self {
            columns,
            rows,
            provenance,
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            writeln!(out, "{}", cells.join(",")).expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// Joins tables that share their first column, suffixing every other
    /// column with `_{label}`.
    pub fn join(parts: &[(String, SweepTable)], provenance: Provenance) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidState("nothing to join".into()))?;
        let axis = first.column(&first.columns[0]).unwrap_or_default();
        let mut columns = vec![first.columns[0].clone()];
        let mut rows: Vec<Vec<f64>> = axis.iter().map(|&x| vec![x]).collect();
        for (label, t) in parts {
            if t.columns[0] != columns[0] || t.column(&t.columns[0]).as_deref() != Some(&axis[..]) {
                return Err(Error::InvalidState(format!("series `{label}` has a different axis")));
            }
            columns.extend(t.columns[1..].iter().map(|c| format!("{c}_{label}")));
            for (row, src) in rows.iter_mut().zip(&t.rows) {
                row.extend_from_slice(&src[1..]);
            }
        }
        Self::new(columns, rows, provenance)
    }
}
