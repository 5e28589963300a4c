//! Hamiltonians, the polariton basis change and the Lindblad generator.
//!
//! Frequencies are measured in units of the coupling `g` and all operators
//! live in the frame rotating at the drive frequency, where
//!
//! ```text
//! H₀   = Δ_c a†a + Δ_m m†m + K (a†a)² + g (a†m + a m†)
//! H_d  = Ω (a† + a) + G (a†² + a²)
//! H_eff = Δ₊ n₊ + (K/4) n₊² + (Ω/√2)(p₊† + p₊) + (G/2)(p₊†² + p₊²)
//! ```
//!
//! with `p₊ = (a + m)/√2` and `Δ₊ = Δ₀ + g + K/4` on resonance
//! (`Δ_c = Δ_m = Δ₀`).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{destroy, number_op, FockOperator, Mode, SpaceDescriptor, SpaceKind};
use crate::C64;

/// Tolerance for agreement between a directly supplied `Δ₊` and the one
/// implied by `Δ_c = Δ_m = Δ₀`.
pub const DETUNING_CONSISTENCY_TOL: f64 = 1e-12;

fn unit_coupling() -> f64 {
    1.0
}

/// Physical parameters, all in units of `g`.
///
/// The detuning can be given either as `delta_plus` (the polariton detuning
/// used by the effective model) or as the pair `delta_c`/`delta_m`; when
/// both are present they must agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_plus: Option<f64>,
    #[serde(default)]
    pub kerr: f64,
    #[serde(default = "unit_coupling")]
    pub coupling: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub g2: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_target: Option<usize>,
}

impl SystemParams {
    /// Parameters specified through the polariton detuning, with `g = 1`.
    pub fn effective(delta_plus: f64, kerr: f64, omega: f64, g2: f64, kappa: f64) -> Self {
        Self {
            delta_c: None,
            delta_m: None,
            delta_plus: Some(delta_plus),
            kerr,
            coupling: 1.0,
            omega,
            g2,
            kappa,
            n_target: None,
        }
    }

    pub fn with_n_target(mut self, n: usize) -> Self {
        self.n_target = Some(n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("kerr", Some(self.kerr)),
            ("coupling", Some(self.coupling)),
            ("omega", Some(self.omega)),
            ("g2", Some(self.g2)),
            ("kappa", Some(self.kappa)),
            ("delta_c", self.delta_c),
            ("delta_m", self.delta_m),
            ("delta_plus", self.delta_plus),
        ];
        for (name, value) in finite {
            if let Some(v) = value {
                if !v.is_finite() {
                    return Err(Error::param(name, "must be finite"));
                }
            }
        }
        if self.coupling <= 0.0 {
            return Err(Error::param("coupling", "must be positive"));
        }
        for (name, v) in [
            ("kerr", self.kerr),
            ("omega", self.omega),
            ("g2", self.g2),
            ("kappa", self.kappa),
        ] {
            if v < 0.0 {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        if self.n_target == Some(0) {
            return Err(Error::param("n_target", "must be at least 1"));
        }
        match (self.delta_c, self.delta_m, self.delta_plus) {
            (None, None, None) => Err(Error::param(
                "delta_plus",
                "no detuning given; set delta_plus or delta_c and delta_m",
            )),
            (Some(_), None, _) => Err(Error::param("delta_m", "delta_c given without delta_m")),
            (None, Some(_), _) => Err(Error::param("delta_c", "delta_m given without delta_c")),
            (Some(dc), Some(dm), Some(dp)) => {
                if (dc - dm).abs() > DETUNING_CONSISTENCY_TOL {
                    return Err(Error::param(
                        "delta_plus",
                        "delta_plus requires resonant delta_c = delta_m",
                    ));
                }
                let implied = self.plus_from_zero(dc);
                if (implied - dp).abs() > DETUNING_CONSISTENCY_TOL {
                    return Err(Error::param(
                        "delta_plus",
                        format!("inconsistent with delta_c = delta_m (implies {implied})"),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn plus_from_zero(&self, delta_zero: f64) -> f64 {
        delta_zero + self.coupling + self.kerr / 4.0
    }

    /// `Δ₊`, either as given or derived from resonant `Δ_c = Δ_m`.
    pub fn delta_plus(&self) -> Result<f64> {
        self.validate()?;
        match (self.delta_plus, self.delta_c, self.delta_m) {
            (Some(dp), _, _) => Ok(dp),
            (None, Some(dc), Some(dm)) if (dc - dm).abs() <= DETUNING_CONSISTENCY_TOL => Ok(self.plus_from_zero(dc)),
            _ => Err(Error::param("delta_c", "the effective model needs delta_c = delta_m")),
        }
    }

    /// `(Δ_c, Δ_m)`, derived from `Δ₊` when not given explicitly.
    pub fn mode_detunings(&self) -> Result<(f64, f64)> {
        self.validate()?;
        match (self.delta_c, self.delta_m, self.delta_plus) {
            (Some(dc), Some(dm), _) => Ok((dc, dm)),
            (_, _, Some(dp)) => {
                let d0 = dp - self.coupling - self.kerr / 4.0;
                Ok((d0, d0))
            }
            _ => unreachable!("validate rejects a missing detuning"),
        }
    }
}

fn two_mode_check(space: &SpaceDescriptor) -> Result<()> {
    match space.kind() {
        SpaceKind::TwoModeTotalN { .. } => Ok(()),
        SpaceKind::SingleMode { .. } => Err(Error::InvalidSpace(format!(
            "two-mode model needs a two-mode space, got {space}"
        ))),
    }
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// `H₀ = Δ_c a†a + Δ_m m†m + K (a†a)² + g (a†m + a m†)` on a two-mode space.
pub fn build_full_h0(params: &SystemParams, space: SpaceDescriptor) -> Result<FockOperator> {
    two_mode_check(&space)?;
    let (dc, dm) = params.mode_detunings()?;
    let a = destroy(space, Mode::Cavity)?.into_matrix();
    let m = destroy(space, Mode::Magnon)?.into_matrix();
    let na = number_op(space, Mode::Cavity)?.into_matrix();
    let nm = number_op(space, Mode::Magnon)?.into_matrix();
    let hop = a.adjoint() * &m;
    let h = &na * re(dc) + &nm * re(dm) + (&na * &na) * re(params.kerr) + (&hop + hop.adjoint()) * re(params.coupling);
    Ok(FockOperator::from_parts(space, h))
}

/// `H_d = Ω (a† + a) + G (a†² + a²)`; only the cavity is driven.
pub fn build_full_drive(params: &SystemParams, space: SpaceDescriptor) -> Result<FockOperator> {
    two_mode_check(&space)?;
    params.validate()?;
    let a = destroy(space, Mode::Cavity)?.into_matrix();
    let a2 = &a * &a;
    let h = (&a + a.adjoint()) * re(params.omega) + (&a2 + a2.adjoint()) * re(params.g2);
    Ok(FockOperator::from_parts(space, h))
}

/// `H₀ + H_d`.
pub fn build_full_h(params: &SystemParams, space: SpaceDescriptor) -> Result<FockOperator> {
    build_full_h0(params, space)?.add(&build_full_drive(params, space)?)
}

/// Effective single-mode polariton Hamiltonian.
pub fn build_effective_h(params: &SystemParams, space: SpaceDescriptor) -> Result<FockOperator> {
    if !space.is_single_mode() {
        return Err(Error::InvalidSpace(format!(
            "effective model needs a single-mode space, got {space}"
        )));
    }
    let dp = params.delta_plus()?;
    let p = destroy(space, Mode::Single)?.into_matrix();
    let n = number_op(space, Mode::Single)?.into_matrix();
    let p2 = &p * &p;
    let h = &n * re(dp)
        + (&n * &n) * re(params.kerr / 4.0)
        + (&p + p.adjoint()) * re(params.omega * FRAC_1_SQRT_2)
        + (&p2 + p2.adjoint()) * re(params.g2 / 2.0);
    Ok(FockOperator::from_parts(space, h))
}

/// Beamsplitter `U = exp(π/4 (a m† − a† m))`.
///
/// Convention: `U a† U† = p₊† = (a† + m†)/√2`, so `U|n, k⟩` is the state with
/// `n` upper and `k` lower polaritons and `⟨1,0|U|1,0⟩ = +1/√2`. The
/// generator conserves total excitation, so `U` is built block by block.
pub fn polariton_unitary(space: SpaceDescriptor) -> Result<FockOperator> {
    two_mode_check(&space)?;
    let a = destroy(space, Mode::Cavity)?.into_matrix();
    let m = destroy(space, Mode::Magnon)?.into_matrix();
    // Written lowering-first so no factor leaves the truncated space.
    let generator = (m.adjoint() * &a - a.adjoint() * &m) * re(FRAC_PI_4);
    let n = space.basis_size();
    let mut u = DMatrix::zeros(n, n);
    for total in 0..=space.max_occupancy() {
        let start = total * (total + 1) / 2;
        let len = total + 1;
        let block = generator.view((start, start), (len, len)).clone_owned();
        u.view_mut((start, start), (len, len)).copy_from(&block.exp());
    }
    Ok(FockOperator::from_parts(space, u))
}

/// Upper-polariton annihilator `p₊ = (a + m)/√2`.
pub fn polariton_plus(space: SpaceDescriptor) -> Result<FockOperator> {
    two_mode_check(&space)?;
    let a = destroy(space, Mode::Cavity)?;
    let m = destroy(space, Mode::Magnon)?;
    Ok(a.add(&m)?.scale(re(FRAC_1_SQRT_2)))
}

/// `Δ₊ = −nK/4`, the detuning that puts the n-quantum level on resonance.
pub fn blockade_detuning(n: usize, kerr: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::param("n", "blockade order must be at least 1"));
    }
    Ok(-(n as f64) * kerr / 4.0)
}

/// Lab-frame drive frequency `ω₀ + g + K/4 + nK/4` realising the n-quantum
/// blockade.
pub fn drive_frequency_for_blockade(n: usize, omega_0: f64, g: f64, kerr: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::param("n", "blockade order must be at least 1"));
    }
    Ok(omega_0 + g + kerr / 4.0 + n as f64 * kerr / 4.0)
}

/// Lindblad generator acting on column-stacked density matrices:
/// `vec(ρ)[i + j·d] = ρ[i, j]`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    space: SpaceDescriptor,
    hamiltonian: FockOperator,
    collapses: Vec<(FockOperator, f64)>,
    matrix: DMatrix<C64>,
}

impl Liouvillian {
    pub fn space(&self) -> SpaceDescriptor {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn hamiltonian(&self) -> &FockOperator {
        &self.hamiltonian
    }

    pub fn collapses(&self) -> &[(FockOperator, f64)] {
        &self.collapses
    }

    /// Whether any collapse channel has a nonzero rate.
    pub fn is_dissipative(&self) -> bool {
        self.collapses.iter().any(|(_, rate)| *rate > 0.0)
    }

    /// `L ρ`, un-vectorized.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.space.basis_size();
        unvectorize(&(&self.matrix * vectorize(rho)), d)
    }
}

pub fn vectorize(rho: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(rho.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// `L ρ = −i[h, ρ] + Σ_k κ_k (2 c_k ρ c_k† − ρ c_k†c_k − c_k†c_k ρ)/2`.
pub fn build_liouvillian(h: &FockOperator, collapses: &[(FockOperator, f64)]) -> Result<Liouvillian> {
    let space = h.space();
    let d = space.basis_size();
    let id = DMatrix::<C64>::identity(d, d);
    let hm = h.matrix();
    let mut l = (id.kronecker(hm) - hm.transpose().kronecker(&id)) * C64::new(0.0, -1.0);
    for (c, rate) in collapses {
        if c.space() != space {
            return Err(Error::SpaceMismatch {
                left: space.to_string(),
                right: c.space().to_string(),
            });
        }
        if *rate < 0.0 || !rate.is_finite() {
            return Err(Error::NegativeRate(*rate));
        }
        if *rate == 0.0 {
            continue;
        }
        let cm = c.matrix();
        let cdc = cm.adjoint() * cm;
        let jump = cm.conjugate().kronecker(cm);
        let anti = id.kronecker(&cdc) + cdc.transpose().kronecker(&id);
        l += (jump - anti * re(0.5)) * re(*rate);
    }
    Ok(Liouvillian {
        space,
        hamiltonian: h.clone(),
        collapses: collapses.to_vec(),
        matrix: l,
    })
}

/// Effective-model generator: `H_eff` with polariton decay `κ L[p₊]`.
pub fn effective_liouvillian(params: &SystemParams, dim: usize) -> Result<Liouvillian> {
    let space = SpaceDescriptor::single_mode(dim)?;
    let h = build_effective_h(params, space)?;
    let p = destroy(space, Mode::Single)?;
    build_liouvillian(&h, &[(p, params.kappa)])
}

/// Two-mode generator: `H₀ + H_d` with decay `κ L[p₊]`, `p₊ = (a + m)/√2`.
pub fn full_liouvillian(params: &SystemParams, n_total_max: usize) -> Result<Liouvillian> {
    let space = SpaceDescriptor::two_mode(n_total_max)?;
    let h = build_full_h(params, space)?;
    let p = polariton_plus(space)?;
    build_liouvillian(&h, &[(p, params.kappa)])
}
