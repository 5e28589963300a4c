//! Truncated Fock spaces, operators and states.
//!
//! Two kinds of space are supported:
//!
//! - a single bosonic mode with Fock states `|0⟩..|dim−1⟩`;
//! - two modes (cavity `a`, magnon `m`) truncated by *total* excitation,
//!   i.e. all `|n_a, n_m⟩` with `n_a + n_m ≤ n_total_max`.
//!
//! Two-mode basis states are enumerated lexicographically in
//! `(N = n_a + n_m, n_a)`: `|0,0⟩, |0,1⟩, |1,0⟩, |0,2⟩, |1,1⟩, |2,0⟩, ...`,
//! so the state `|n_a, n_m⟩` sits at index `N(N+1)/2 + n_a`. Every
//! excitation-conserving operator is block diagonal in this order.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Allowed deviation of a pure state's norm from one.
pub const NORM_TOL: f64 = 1e-10;
/// Allowed deviation of a density matrix's trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Allowed elementwise deviation of a density matrix from its adjoint.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues at or above this are accepted (and clipped to zero when negative).
pub const POSITIVITY_FLOOR: f64 = -1e-10;
/// Eigenvalues below this signal a broken state rather than roundoff.
pub const POSITIVITY_ERROR: f64 = -1e-8;

/// Shape of a truncated Fock space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceKind {
    SingleMode { dim: usize },
    TwoModeTotalN { n_total_max: usize },
}

/// A validated [`SpaceKind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpaceKind", into = "SpaceKind")]
pub struct SpaceDescriptor(SpaceKind);

impl TryFrom<SpaceKind> for SpaceDescriptor {
    type Error = Error;

    fn try_from(kind: SpaceKind) -> Result<Self> {
        match kind {
            SpaceKind::SingleMode { dim } => Self::single_mode(dim),
            SpaceKind::TwoModeTotalN { n_total_max } => Self::two_mode(n_total_max),
        }
    }
}

impl From<SpaceDescriptor> for SpaceKind {
    fn from(space: SpaceDescriptor) -> Self {
        space.0
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SpaceKind::SingleMode { dim } => write!(f, "single-mode(dim={dim})"),
            SpaceKind::TwoModeTotalN { n_total_max } => {
                write!(f, "two-mode(n_total_max={n_total_max})")
            }
        }
    }
}

impl SpaceDescriptor {
    pub fn single_mode(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpace(format!(
                "single-mode dim must be at least 2, got {dim}"
            )));
        }
        Ok(Self(SpaceKind::SingleMode { dim }))
    }

    pub fn two_mode(n_total_max: usize) -> Result<Self> {
        if n_total_max < 1 {
            return Err(Error::InvalidSpace("two-mode n_total_max must be at least 1".into()));
        }
        Ok(Self(SpaceKind::TwoModeTotalN { n_total_max }))
    }

    pub fn kind(&self) -> SpaceKind {
        self.0
    }

    pub fn is_single_mode(&self) -> bool {
        matches!(self.0, SpaceKind::SingleMode { .. })
    }

    pub fn basis_size(&self) -> usize {
        match self.0 {
            SpaceKind::SingleMode { dim } => dim,
            SpaceKind::TwoModeTotalN { n_total_max: n } => (n + 1) * (n + 2) / 2,
        }
    }

    /// Largest occupation any single ladder (mode or polariton) can hold.
    pub fn max_occupancy(&self) -> usize {
        match self.0 {
            SpaceKind::SingleMode { dim } => dim - 1,
            SpaceKind::TwoModeTotalN { n_total_max } => n_total_max,
        }
    }

    /// Index of `|n_a, n_m⟩` on a two-mode space.
    pub fn index_of(&self, n_a: usize, n_m: usize) -> Option<usize> {
        match self.0 {
            SpaceKind::TwoModeTotalN { n_total_max } => {
                let total = n_a + n_m;
                (total <= n_total_max).then(|| total * (total + 1) / 2 + n_a)
            }
            SpaceKind::SingleMode { .. } => None,
        }
    }

    /// Occupations `(n_a, n_m)` of every basis state, in basis order. A
    /// single-mode space reports `(n, 0)`.
    pub fn occupations(&self) -> Vec<(usize, usize)> {
        match self.0 {
            SpaceKind::SingleMode { dim } => (0..dim).map(|n| (n, 0)).collect(),
            SpaceKind::TwoModeTotalN { n_total_max } => (0..=n_total_max)
                .flat_map(|total| (0..=total).map(move |n_a| (n_a, total - n_a)))
                .collect(),
        }
    }

    /// Total excitation of every basis state, in basis order.
    pub fn total_excitations(&self) -> Vec<usize> {
        self.occupations().into_iter().map(|(a, m)| a + m).collect()
    }

    fn check_same(&self, other: &SpaceDescriptor) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch {
                left: self.to_string(),
                right: other.to_string(),
            });
        }
        Ok(())
    }
}

/// Selects a bosonic mode of a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The only mode of a single-mode space.
    Single,
    /// Cavity photon `a` of a two-mode space.
    Cavity,
    /// Magnon `m` of a two-mode space.
    Magnon,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Single => "single",
            Mode::Cavity => "cavity",
            Mode::Magnon => "magnon",
        };
        f.write_str(name)
    }
}

impl Mode {
    fn check(self, space: &SpaceDescriptor) -> Result<()> {
        let ok = match space.kind() {
            SpaceKind::SingleMode { .. } => self == Mode::Single,
            SpaceKind::TwoModeTotalN { .. } => self != Mode::Single,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMode {
                mode: self.to_string(),
                space: space.to_string(),
            })
        }
    }

    fn occupation(self, (n_a, n_m): (usize, usize)) -> usize {
        match self {
            Mode::Single | Mode::Cavity => n_a,
            Mode::Magnon => n_m,
        }
    }
}

/// The ladder whose occupations are counted by projectors and populations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Fock states of a bare mode.
    Fock(Mode),
    /// Fock states of the upper polariton `p₊ = (a + m)/√2` (two-mode only).
    Polariton,
}

impl Basis {
    /// The `p₊` ladder of a space: the mode itself for the single-mode
    /// effective model, the upper polariton for the two-mode model.
    pub fn natural(space: &SpaceDescriptor) -> Basis {
        if space.is_single_mode() {
            Basis::Fock(Mode::Single)
        } else {
            Basis::Polariton
        }
    }

    pub(crate) fn check(self, space: &SpaceDescriptor) -> Result<()> {
        match self {
            Basis::Fock(mode) => mode.check(space),
            Basis::Polariton if space.is_single_mode() => Err(Error::InvalidMode {
                mode: "polariton".into(),
                space: space.to_string(),
            }),
            Basis::Polariton => Ok(()),
        }
    }
}

/// A dense complex matrix acting on a truncated Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    space: SpaceDescriptor,
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(space: SpaceDescriptor, matrix: DMatrix<C64>) -> Result<Self> {
        let n = space.basis_size();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidState(format!(
                "operator is {}x{} but {space} has {n} basis states",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub(crate) fn from_parts(space: SpaceDescriptor, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), space.basis_size());
        Self { space, matrix }
    }

    pub fn zeros(space: SpaceDescriptor) -> Self {
        let n = space.basis_size();
        Self::from_parts(space, DMatrix::zeros(n, n))
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        let n = space.basis_size();
        Self::from_parts(space, DMatrix::identity(n, n))
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dag(&self) -> Self {
        Self::from_parts(self.space, self.matrix.adjoint())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self::from_parts(self.space, &self.matrix + &other.matrix))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self::from_parts(self.space, &self.matrix - &other.matrix))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.space.check_same(&other.space)?;
        Ok(Self::from_parts(self.space, &self.matrix * &other.matrix))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_parts(self.space, &self.matrix * factor)
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Largest elementwise `|A − A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        self.space.check_same(&state.space)?;
        match &state.payload {
            StatePayload::Pure(psi) => QuantumState::pure(self.space, &self.matrix * psi),
            StatePayload::Density(_) => Err(Error::InvalidState("operators apply to pure states only".into())),
        }
    }
}

/// Largest elementwise modulus of `a − b`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Truncated annihilation operator of `mode`: `⟨…n−1…|op|…n…⟩ = √n`.
pub fn destroy(space: SpaceDescriptor, mode: Mode) -> Result<FockOperator> {
    mode.check(&space)?;
    let n = space.basis_size();
    let mut m = DMatrix::zeros(n, n);
    match space.kind() {
        SpaceKind::SingleMode { dim } => {
            for k in 1..dim {
                m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
            }
        }
        SpaceKind::TwoModeTotalN { .. } => {
            for (col, (n_a, n_m)) in space.occupations().into_iter().enumerate() {
                let (occ, lowered) = match mode {
                    Mode::Cavity if n_a > 0 => (n_a, (n_a - 1, n_m)),
                    Mode::Magnon if n_m > 0 => (n_m, (n_a, n_m - 1)),
                    _ => continue,
                };
                let row = space
                    .index_of(lowered.0, lowered.1)
                    .expect("lowering stays inside the truncated space");
                m[(row, col)] = C64::new((occ as f64).sqrt(), 0.0);
            }
        }
    }
    Ok(FockOperator::from_parts(space, m))
}

/// `a†a` for the selected mode.
pub fn number_op(space: SpaceDescriptor, mode: Mode) -> Result<FockOperator> {
    mode.check(&space)?;
    let diag: Vec<C64> = space
        .occupations()
        .into_iter()
        .map(|occ| C64::new(mode.occupation(occ) as f64, 0.0))
        .collect();
    Ok(FockOperator::from_parts(
        space,
        DMatrix::from_diagonal(&DVector::from_vec(diag)),
    ))
}

/// `a + m`-excitation count `a†a + m†m` on a two-mode space, or `a†a` on a
/// single-mode space.
pub fn total_number_op(space: SpaceDescriptor) -> FockOperator {
    let diag: Vec<C64> = space
        .total_excitations()
        .into_iter()
        .map(|n| C64::new(n as f64, 0.0))
        .collect();
    FockOperator::from_parts(space, DMatrix::from_diagonal(&DVector::from_vec(diag)))
}

/// Projector onto the `j`-quanta eigenspace of the number operator of
/// `basis`. Polariton projectors are `U P_j^(a) U†` with `U` from
/// [`crate::model::polariton_unitary`].
pub fn projector(space: SpaceDescriptor, basis: Basis, j: usize) -> Result<FockOperator> {
    basis.check(&space)?;
    if j > space.max_occupancy() {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: space.max_occupancy(),
        });
    }
    match basis {
        Basis::Fock(mode) => Ok(fock_projector(space, mode, j)),
        Basis::Polariton => {
            let u = crate::model::polariton_unitary(space)?;
            let p = fock_projector(space, Mode::Cavity, j);
            Ok(FockOperator::from_parts(
                space,
                &u.matrix * &p.matrix * u.matrix.adjoint(),
            ))
        }
    }
}

fn fock_projector(space: SpaceDescriptor, mode: Mode, j: usize) -> FockOperator {
    let diag: Vec<C64> = space
        .occupations()
        .into_iter()
        .map(|occ| {
            if mode.occupation(occ) == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    FockOperator::from_parts(space, DMatrix::from_diagonal(&DVector::from_vec(diag)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum StatePayload {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

/// A normalized pure state or a valid density matrix on a given space.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: SpaceDescriptor,
    payload: StatePayload,
}

impl QuantumState {
    /// Normalizes `amplitudes` into a pure state.
    pub fn pure(space: SpaceDescriptor, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.basis_size() {
            return Err(Error::InvalidState(format!(
                "vector has length {} but {space} has {} basis states",
                amplitudes.len(),
                space.basis_size()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("state vector has zero or non-finite norm".into()));
        }
        Ok(Self {
            space,
            payload: StatePayload::Pure(amplitudes.unscale(norm)),
        })
    }

    /// Fock state `|n⟩` on a single-mode space.
    pub fn fock(space: SpaceDescriptor, n: usize) -> Result<Self> {
        Mode::Single.check(&space)?;
        Self::basis_state(space, n)
    }

    /// Fock state `|n_a, n_m⟩` on a two-mode space.
    pub fn two_mode_fock(space: SpaceDescriptor, n_a: usize, n_m: usize) -> Result<Self> {
        let index = space.index_of(n_a, n_m).ok_or(Error::IndexOutOfRange {
            index: n_a + n_m,
            max: space.max_occupancy(),
        })?;
        Self::basis_state(space, index)
    }

    pub fn vacuum(space: SpaceDescriptor) -> Self {
        Self::basis_state(space, 0).expect("vacuum is always a basis state")
    }

    fn basis_state(space: SpaceDescriptor, index: usize) -> Result<Self> {
        let n = space.basis_size();
        if index >= n {
            return Err(Error::IndexOutOfRange { index, max: n - 1 });
        }
        let mut v = DVector::zeros(n);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            payload: StatePayload::Pure(v),
        })
    }

    /// Validates `rho` against the trace, hermiticity and positivity
    /// tolerances without modifying it.
    pub fn density(space: SpaceDescriptor, rho: DMatrix<C64>) -> Result<Self> {
        let n = space.basis_size();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::InvalidState(format!(
                "density matrix is {}x{} but {space} has {n} basis states",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let herm = max_abs_diff(&rho, &rho.adjoint());
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix is not hermitian (deviation {herm:e})"
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let min_eig = min_eigenvalue(&rho);
        if min_eig < POSITIVITY_FLOOR {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self {
            space,
            payload: StatePayload::Density(rho),
        })
    }

    /// Symmetrizes `rho`, clips eigenvalues in `[POSITIVITY_ERROR, 0)` to zero
    /// and renormalizes the trace. Anything more negative is an error.
    pub fn density_sanitized(space: SpaceDescriptor, rho: &DMatrix<C64>) -> Result<Self> {
        let mut herm = (rho + rho.adjoint()).unscale(2.0);
        let eig = herm.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if min_eig < POSITIVITY_ERROR {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        if min_eig < 0.0 {
            let clipped = eig.eigenvalues.map(|v| C64::new(v.max(0.0), 0.0));
            let vecs = &eig.eigenvectors;
            herm = vecs * DMatrix::from_diagonal(&clipped) * vecs.adjoint();
            herm = (&herm + herm.adjoint()).unscale(2.0);
        }
        let trace = herm.trace().re;
        if !(trace.is_finite() && trace > 0.0) {
            return Err(Error::InvalidState(format!("density matrix has trace {trace}")));
        }
        Ok(Self {
            space,
            payload: StatePayload::Density(herm.unscale(trace)),
        })
    }

    pub fn maximally_mixed(space: SpaceDescriptor) -> Self {
        let n = space.basis_size();
        let rho = DMatrix::identity(n, n).unscale(n as f64);
        Self {
            space,
            payload: StatePayload::Density(rho),
        }
    }

    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn payload(&self) -> &StatePayload {
        &self.payload
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.payload, StatePayload::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&DVector<C64>> {
        match &self.payload {
            StatePayload::Pure(psi) => Some(psi),
            StatePayload::Density(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&DMatrix<C64>> {
        match &self.payload {
            StatePayload::Density(rho) => Some(rho),
            StatePayload::Pure(_) => None,
        }
    }

    /// Density-matrix form of the state (`|ψ⟩⟨ψ|` for pure states).
    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.payload {
            StatePayload::Pure(psi) => psi * psi.adjoint(),
            StatePayload::Density(rho) => rho.clone(),
        }
    }

    pub fn to_density(&self) -> Self {
        Self {
            space: self.space,
            payload: StatePayload::Density(self.density_matrix()),
        }
    }

    /// Probability of each basis state, in basis order.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        match &self.payload {
            StatePayload::Pure(psi) => psi.iter().map(|c| c.norm_sqr()).collect(),
            StatePayload::Density(rho) => rho.diagonal().iter().map(|c| c.re).collect(),
        }
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &QuantumState) -> Result<f64> {
        self.space.check_same(&other.space)?;
        let diff = self.density_matrix() - other.density_matrix();
        let diff = (&diff + diff.adjoint()).unscale(2.0);
        let eig = diff.symmetric_eigen();
        Ok(0.5 * eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// Smallest eigenvalue of the hermitian part of `rho`.
pub fn min_eigenvalue(rho: &DMatrix<C64>) -> f64 {
    let herm = (rho + rho.adjoint()).unscale(2.0);
    herm.symmetric_eigen().eigenvalues.min()
}

/// `⟨ψ|op|ψ⟩` for pure states, `Tr(op ρ)` for density matrices.
pub fn expectation(state: &QuantumState, op: &FockOperator) -> Result<C64> {
    state.space.check_same(&op.space)?;
    Ok(match &state.payload {
        StatePayload::Pure(psi) => psi.dotc(&(&op.matrix * psi)),
        StatePayload::Density(rho) => (&op.matrix * rho).trace(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn assert_mat_close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) {
        let d = max_abs_diff(a, b);
        assert!(d <= tol, "matrices differ by {d:e}");
    }

    fn single(dim: usize) -> SpaceDescriptor {
        SpaceDescriptor::single_mode(dim).unwrap()
    }

    fn two(n: usize) -> SpaceDescriptor {
        SpaceDescriptor::two_mode(n).unwrap()
    }

    #[test]
    fn space_invariants() {
        assert!(SpaceDescriptor::single_mode(1).is_err());
        assert!(SpaceDescriptor::two_mode(0).is_err());
        for n in 1..8 {
            assert_eq!(two(n).basis_size(), (n + 1) * (n + 2) / 2);
        }
        let occ = two(2).occupations();
        assert_eq!(occ, vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
        for (i, (a, m)) in occ.into_iter().enumerate() {
            assert_eq!(two(2).index_of(a, m), Some(i));
        }
        assert_eq!(two(2).index_of(2, 1), None);
    }

    #[test]
    fn space_serde_rejects_invalid() {
        let ok: SpaceDescriptor = serde_json::from_str(r#"{"kind":"single-mode","dim":5}"#).unwrap();
        assert_eq!(ok, single(5));
        assert!(serde_json::from_str::<SpaceDescriptor>(r#"{"kind":"single-mode","dim":1}"#).is_err());
    }

    #[test]
    fn destroy_dim2() {
        let a = destroy(single(2), Mode::Single).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert_eq!(a.matrix(), &expected);
        let ad = a.dag();
        let expected = DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)]);
        assert_eq!(ad.matrix(), &expected);
    }

    #[test]
    fn destroy_lowers_one_to_vacuum() {
        let s = single(3);
        let a = destroy(s, Mode::Single).unwrap();
        let out = a.apply(&QuantumState::fock(s, 1).unwrap()).unwrap();
        assert_eq!(out, QuantumState::fock(s, 0).unwrap());
    }

    #[test]
    fn destroy_rejects_wrong_mode() {
        assert!(matches!(
            destroy(single(3), Mode::Cavity),
            Err(Error::InvalidMode { .. })
        ));
        assert!(destroy(two(2), Mode::Single).is_err());
    }

    #[test]
    fn two_mode_photon_number_spectrum() {
        // Photon counts over |0,0>,|0,1>,|1,0>,|0,2>,|1,1>,|2,0>.
        let n = number_op(two(2), Mode::Cavity).unwrap();
        let mut eig: Vec<f64> = n
            .matrix()
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(f64::total_cmp);
        let expected = [0.0, 0.0, 0.0, 1.0, 1.0, 2.0];
        for (e, x) in eig.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn destroy_entries_exhaustive() {
        for dim in 2..=12 {
            let a = destroy(single(dim), Mode::Single).unwrap();
            for r in 0..dim {
                for col in 0..dim {
                    let expected = if col == r + 1 { (col as f64).sqrt() } else { 0.0 };
                    assert_eq!(a.matrix()[(r, col)], c(expected));
                }
            }
        }
        for n_max in 1..=4 {
            let s = two(n_max);
            for mode in [Mode::Cavity, Mode::Magnon] {
                let a = destroy(s, mode).unwrap();
                let occ = s.occupations();
                for (r, ro) in occ.iter().enumerate() {
                    for (col, co) in occ.iter().enumerate() {
                        let expected = match mode {
                            Mode::Cavity if co.0 >= 1 && ro.0 + 1 == co.0 && ro.1 == co.1 => (co.0 as f64).sqrt(),
                            Mode::Magnon if co.1 >= 1 && ro.1 + 1 == co.1 && ro.0 == co.0 => (co.1 as f64).sqrt(),
                            _ => 0.0,
                        };
                        assert_eq!(a.matrix()[(r, col)], c(expected));
                    }
                }
            }
        }
    }

    #[test]
    fn number_op_examples() {
        let n = number_op(single(4), Mode::Single).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0), c(1.0), c(2.0), c(3.0)]));
        assert_mat_close(n.matrix(), &expected, 1e-14);
        for dim in 2..10 {
            let n = number_op(single(dim), Mode::Single).unwrap();
            assert_eq!(n.matrix().trace().re, (dim * (dim - 1) / 2) as f64);
        }
        let s = two(3);
        let psi = QuantumState::two_mode_fock(s, 1, 2).unwrap();
        let nm = number_op(s, Mode::Magnon).unwrap();
        assert!((expectation(&psi, &nm).unwrap() - c(2.0)).norm() < 1e-14);
    }

    #[test]
    fn commutator_truncation_artifact() {
        for dim in 2..=8 {
            let a = destroy(single(dim), Mode::Single).unwrap();
            let comm = a.commutator(&a.dag()).unwrap();
            let mut expected = DMatrix::<C64>::identity(dim, dim);
            expected[(dim - 1, dim - 1)] = c(1.0 - dim as f64);
            assert_mat_close(comm.matrix(), &expected, 1e-12);
        }
    }

    #[test]
    fn scale_and_space_mismatch() {
        let i = FockOperator::identity(single(3));
        assert_mat_close(i.scale(c(2.0)).matrix(), &(DMatrix::identity(3, 3) * c(2.0)), 0.0);
        let j = FockOperator::identity(single(4));
        assert!(matches!(i.add(&j), Err(Error::SpaceMismatch { .. })));
        assert!(i.matmul(&j).is_err());
        assert!(i.sub(&j).is_err());
    }

    #[test]
    fn fock_projector_family() {
        let s = single(3);
        let p1 = projector(s, Basis::Fock(Mode::Single), 1).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0), c(1.0), c(0.0)]));
        assert_mat_close(p1.matrix(), &expected, 0.0);
        assert!(matches!(
            projector(s, Basis::Fock(Mode::Single), 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(projector(s, Basis::Polariton, 0).is_err());
    }

    #[test]
    fn projector_family_properties() {
        let spaces = [
            (single(6), Basis::Fock(Mode::Single)),
            (two(4), Basis::Polariton),
            (two(4), Basis::Fock(Mode::Magnon)),
        ];
        for (s, basis) in spaces {
            let ps: Vec<_> = (0..=s.max_occupancy())
                .map(|j| projector(s, basis, j).unwrap())
                .collect();
            let mut sum = DMatrix::zeros(s.basis_size(), s.basis_size());
            for (i, p) in ps.iter().enumerate() {
                assert!(p.is_hermitian(1e-12));
                let sq = p.matmul(p).unwrap();
                assert_mat_close(sq.matrix(), p.matrix(), 1e-12);
                for q in &ps[i + 1..] {
                    let prod = p.matmul(q).unwrap();
                    assert_mat_close(prod.matrix(), &DMatrix::zeros(s.basis_size(), s.basis_size()), 1e-12);
                }
                sum += p.matrix();
            }
            assert_mat_close(&sum, &DMatrix::identity(s.basis_size(), s.basis_size()), 1e-12);
        }
    }

    #[test]
    fn expectation_examples() {
        let s = single(4);
        let n = number_op(s, Mode::Single).unwrap();
        let two_q = QuantumState::fock(s, 2).unwrap();
        assert!((expectation(&two_q, &n).unwrap() - c(2.0)).norm() < 1e-14);
        let mixed = QuantumState::maximally_mixed(s);
        assert!((expectation(&mixed, &n).unwrap() - c(1.5)).norm() < 1e-14);
        let psi = QuantumState::pure(s, DVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)])).unwrap();
        let p3 = projector(s, Basis::Fock(Mode::Single), 3).unwrap();
        assert!((expectation(&psi, &p3).unwrap() - c(0.5)).norm() < 1e-14);
        assert!(expectation(&psi, &FockOperator::identity(single(5))).is_err());
    }

    #[test]
    fn density_validation() {
        let s = single(3);
        assert!(QuantumState::density(s, DMatrix::identity(3, 3)).is_err());
        let mut bad = DMatrix::zeros(3, 3);
        bad[(0, 0)] = c(1.5);
        bad[(1, 1)] = c(-0.5);
        assert!(matches!(QuantumState::density(s, bad), Err(Error::NotPositive { .. })));
        let mut nonherm = DMatrix::zeros(3, 3);
        nonherm[(0, 0)] = c(1.0);
        nonherm[(0, 1)] = c(1e-9);
        assert!(QuantumState::density(s, nonherm).is_err());
        let pure = QuantumState::fock(s, 1).unwrap().to_density();
        assert!(QuantumState::density(s, pure.density_matrix()).is_ok());
    }

    #[test]
    fn sanitize_clips_small_negative_eigenvalues() {
        let s = single(2);
        let mut rho = DMatrix::zeros(2, 2);
        rho[(0, 0)] = c(1.0 + 5e-11);
        rho[(1, 1)] = c(-5e-11);
        let st = QuantumState::density_sanitized(s, &rho).unwrap();
        assert!(min_eigenvalue(st.as_density().unwrap()) >= 0.0);
        assert!((st.as_density().unwrap().trace().re - 1.0).abs() < 1e-15);
        rho[(0, 0)] = c(1.0 + 1e-6);
        rho[(1, 1)] = c(-1e-6);
        assert!(QuantumState::density_sanitized(s, &rho).is_err());
    }

    #[test]
    fn pure_rejects_zero() {
        assert!(QuantumState::pure(single(2), DVector::zeros(2)).is_err());
        assert!(QuantumState::pure(single(2), DVector::zeros(3)).is_err());
    }
}
