use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{min_eigenvalue, QuantumState};
use crate::model::{unvectorize, Liouvillian};
use crate::C64;

/// Largest acceptable `‖L vec(ρ)‖∞` for a reported steady state.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

// Relative pivot size below which the constrained system is declared singular.
const PIVOT_RATIO_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateDiagnostics {
    pub residual: f64,
    /// Smallest eigenvalue of the raw solution, before clipping.
    pub min_eigenvalue: f64,
}

/// Null vector of `L` with unit trace, found by replacing the first row of
/// `L` with the trace functional and solving the resulting square system.
pub fn steady_state(l: &Liouvillian) -> Result<QuantumState> {
    steady_state_detailed(l).map(|(s, _)| s)
}

pub fn steady_state_detailed(l: &Liouvillian) -> Result<(QuantumState, SteadyStateDiagnostics)> {
    if !l.is_dissipative() {
        return Err(Error::NoUniqueSteadyState(
            "no dissipation; the kernel is degenerate".into(),
        ));
    }
    let space = l.space();
    let d = space.basis_size();
    let dd = d * d;
    let lm = l.matrix();

    let mut a = lm.clone();
    for c in 0..dd {
        a[(0, c)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i * d + i)] = C64::new(1.0, 0.0);
    }
    let mut rhs = DVector::<C64>::zeros(dd);
    rhs[0] = C64::new(1.0, 0.0);

    let lu = a.clone().lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..dd).map(|i| u[(i, i)].norm()).collect();
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    let smallest = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > PIVOT_RATIO_FLOOR * largest) {
        return Err(Error::NoUniqueSteadyState(format!(
            "constrained system is singular (pivot ratio {:e})",
            smallest / largest
        )));
    }
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::NoUniqueSteadyState("LU solve failed".into()))?;
    // One round of iterative refinement.
    let r = &rhs - &a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }

    let residual = (lm * &x).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(residual <= STEADY_RESIDUAL_TOL) {
        return Err(Error::NoUniqueSteadyState(format!(
            "residual {residual:e} exceeds {STEADY_RESIDUAL_TOL:e}"
        )));
    }
    let rho: DMatrix<C64> = unvectorize(&x, d);
    let herm = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let min_eig = min_eigenvalue(&herm);
    let state = QuantumState::density_sanitized(space, &rho)?;
    Ok((
        state,
        SteadyStateDiagnostics {
            residual,
            min_eigenvalue: min_eig,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{destroy, expectation, number_op, FockOperator, Mode, SpaceDescriptor};
    use crate::model::{build_liouvillian, effective_liouvillian, SystemParams};

    #[test]
    fn damped_oscillator_relaxes_to_vacuum() {
        let s = SpaceDescriptor::single_mode(6).unwrap();
        let a = destroy(s, Mode::Single).unwrap();
        let h = number_op(s, Mode::Single).unwrap().scale(C64::new(0.3, 0.0));
        let l = build_liouvillian(&h, &[(a, 0.1)]).unwrap();
        let (ss, diag) = steady_state_detailed(&l).unwrap();
        assert!((ss.basis_probabilities()[0] - 1.0).abs() <= 1e-10);
        assert!(diag.residual <= STEADY_RESIDUAL_TOL);
    }

    #[test]
    fn closed_system_is_rejected() {
        let s = SpaceDescriptor::single_mode(4).unwrap();
        let l = build_liouvillian(&FockOperator::zeros(s), &[]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::NoUniqueSteadyState(_))));
    }

    #[test]
    fn decoupled_subspaces_are_rejected() {
        // Dissipation only inside {|0>,|1>}; |2> is a second dark state.
        let s = SpaceDescriptor::single_mode(3).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let c = FockOperator::new(s, m).unwrap();
        let l = build_liouvillian(&FockOperator::zeros(s), &[(c, 0.5)]).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::NoUniqueSteadyState(_))));
    }

    #[test]
    fn driven_kerr_mean_photon_number() {
        // Frozen from an independent dense solve of the same master equation.
        let cases = [(0.005, 1.5690527), (0.01, 2.5061942)];
        for (g2, expected) in cases {
            let p = SystemParams::effective(-0.0625, 0.05, 0.01, g2, 0.001);
            let l = effective_liouvillian(&p, 21).unwrap();
            let ss = steady_state(&l).unwrap();
            let n = number_op(l.space(), Mode::Single).unwrap();
            let nbar = expectation(&ss, &n).unwrap().re;
            assert!((nbar - expected).abs() <= 1e-6, "G={g2}: {nbar}");
        }
    }
}
