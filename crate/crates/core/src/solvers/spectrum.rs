use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, SpaceKind};
use crate::C64;

const HERMITIAN_TOL: f64 = 1e-10;

/// Ascending eigenvalues of a hermitian operator, optionally only the lowest
/// `k`. On a two-mode space an operator that conserves the total excitation
/// number is diagonalized block by block.
pub fn eigenspectrum(h: &FockOperator, k: Option<usize>) -> Result<Vec<f64>> {
    let herm = h.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let m = h.matrix();
    let mut values = match h.space().kind() {
        SpaceKind::TwoModeTotalN { n_total_max } if conserves_total_n(m, n_total_max) => {
            let mut out = Vec::with_capacity(m.nrows());
            for n in 0..=n_total_max {
                let start = n * (n + 1) / 2;
                let block = m.view((start, start), (n + 1, n + 1)).clone_owned();
                out.extend(hermitian_eigenvalues(block));
            }
            out
        }
        _ => hermitian_eigenvalues(m.clone()),
    };
    values.sort_by(f64::total_cmp);
    if let Some(k) = k {
        values.truncate(k);
    }
    Ok(values)
}

fn hermitian_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    m.symmetric_eigen().eigenvalues.iter().copied().collect()
}

fn conserves_total_n(m: &DMatrix<C64>, n_total_max: usize) -> bool {
    let block_of = |i: usize| (0..=n_total_max).find(|&n| i < (n + 1) * (n + 2) / 2).unwrap_or(0);
    let blocks: Vec<usize> = (0..m.nrows()).map(block_of).collect();
    let scale = m.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if blocks[r] != blocks[c] && m[(r, c)].norm() > 1e-14 * scale {
                return false;
            }
        }
    }
    true
}
