//! Acceptance suite. Every test prints one `[PASS]`/`[FAIL]` line naming
//! its criterion, then asserts. Run with `--nocapture` to see the lines.

use nalgebra::DMatrix;
use polariton_blockade::fock::{destroy, max_abs_diff, min_eigenvalue, total_number_op, POSITIVITY_ERROR};
use polariton_blockade::harness::{
    closed_peak_point, recipe, run_figure, run_sweep, validate_effective_model, FigureId, Grid, RunConfig,
};
use polariton_blockade::model::{
    build_effective_h, build_full_h, build_full_h0, build_liouvillian, effective_liouvillian, full_liouvillian,
    polariton_plus, polariton_unitary,
};
use polariton_blockade::observables::{cumulative, populations, weighted_mean};
use polariton_blockade::solvers::{evolve_density, evolve_pure, steady_state};
use polariton_blockade::{
    Basis, EvolveConfig, FockOperator, Integrator, Mode, QuantumState, SpaceDescriptor, SystemParams, C64,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const KERR: f64 = 0.05;
const WEAK: f64 = 0.005;
const WINDOW: f64 = 1500.0;
const WINDOW_SAMPLES: usize = 15001;

const C1_P2_RANGE: (f64, f64) = (0.91, 0.95);
const C1_P3_MAX: f64 = 0.05;
const C2_P3_RANGE: (f64, f64) = (0.93, 0.97);
const C2_P4_MAX: f64 = 0.01;
const C3_TOL: f64 = 1e-12;
const C5_NBAR: (f64, f64) = (0.5, 2.0);
const C5_REL: f64 = 0.2;
const C5_FIDELITY_MIN: f64 = 0.95;
const C6_TRACE_DISTANCE: f64 = 1e-6;
const C6_POPULATION_TOL: f64 = 1e-7;
const C7_ACTION_TOL: f64 = 1e-12;
const C7_DECAY_TOL: f64 = 1e-6;
const C8_HERMITIAN_TOL: f64 = 1e-12;
const C8_COMMUTATOR_TOL: f64 = 1e-12;
const C8_TRACE_TOL: f64 = 1e-8;
const C8_UNITARY_TOL: f64 = 1e-10;
const C8_FIDELITY_TOL: f64 = 1e-9;
const C9_N_TOTAL_MAX: usize = 12;
const FIG5_FIDELITY_MIN: f64 = 0.95;

fn verdict(id: &str, ok: bool, detail: String) {
    println!("[{}] {id}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn closed_peaks(delta_plus: f64, n_target: usize) -> (Vec<f64>, bool, f64) {
    let params = SystemParams::effective(delta_plus, KERR, WEAK, WEAK, 0.0).with_n_target(n_target);
    let mut cfg = RunConfig::new(params.clone());
    cfg.evolve = EvolveConfig::new(0.0, WINDOW, WINDOW_SAMPLES);
    let rec = closed_peak_point(&params, &cfg, "acceptance").unwrap();
    let report = rec.report.unwrap();
    (report.peak_populations.unwrap(), rec.converged, rec.window.unwrap())
}

fn in_range(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

fn random_density(rng: &mut StdRng, d: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

#[test]
fn c1_two_polariton_blockade_peaks() {
    let (peaks, converged, window) = closed_peaks(-0.025, 2);
    let ok = converged && in_range(peaks[2], C1_P2_RANGE) && peaks[3] <= C1_P3_MAX;
    verdict(
        "C1 two-quantum blockade",
        ok,
        format!(
            "max P2 = {:.6}, max P3 = {:.6}, window {window}, converged {converged}",
            peaks[2], peaks[3]
        ),
    );
    assert!(ok);
}

#[test]
fn c2_three_polariton_blockade_peaks() {
    let (peaks, converged, window) = closed_peaks(-0.0375, 3);
    let ok = converged && in_range(peaks[3], C2_P3_RANGE) && peaks[4] <= C2_P4_MAX;
    verdict(
        "C2 three-quantum blockade",
        ok,
        format!(
            "max P3 = {:.6} (want {:?}), max P4 = {:.6} (want <= {C2_P4_MAX}), window {window}, converged {converged}",
            peaks[3], C2_P3_RANGE, peaks[4]
        ),
    );
    assert!(ok);
}

#[test]
fn c3_resonant_level_has_zero_energy() {
    let mut worst = 0.0f64;
    for kerr in [0.01, 0.05, 0.2] {
        for n in 1..=6usize {
            let p = SystemParams::effective(-(n as f64) * kerr / 4.0, kerr, 0.0, 0.0, 0.0);
            let space = SpaceDescriptor::single_mode(10).unwrap();
            let h = build_effective_h(&p, space).unwrap();
            // H|n⟩ is the n-th column; zero means |n⟩ sits at zero energy.
            let column = h.matrix().column(n).iter().map(|c| c.norm()).fold(0.0, f64::max);
            worst = worst.max(column);
        }
    }
    let ok = worst <= C3_TOL;
    verdict("C3 resonant-level energy", ok, format!("max |E_n| = {worst:e}"));
    assert!(ok);
}

#[test]
fn c4_steady_state_peaks_at_blockade_detunings() {
    let (table, _) = run_figure(&recipe(FigureId::Fig4a)).unwrap();
    let axis = table.column("delta_plus").unwrap();
    let step = (axis[1] - axis[0]).abs();
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 2..=5usize {
        let p = table.column(&format!("P{n}")).unwrap();
        let target = -(n as f64) * KERR / 4.0;
        let maxima: Vec<f64> = (1..p.len() - 1)
            .filter(|&i| p[i] >= p[i - 1] && p[i] >= p[i + 1])
            .map(|i| axis[i])
            .collect();
        let nearest = maxima
            .iter()
            .copied()
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
            .unwrap_or(f64::NAN);
        let hit = (nearest - target).abs() <= step + 1e-12;
        ok &= hit;
        detail.push(format!(
            "n={n}: max at {nearest:.5} vs {target:.5} {}",
            if hit { "ok" } else { "off" }
        ));
    }
    verdict("C4 steady-state resonances", ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn c5_five_quantum_drive_enhancement() {
    let nbar_and_fidelity = |omega: f64, g2: f64| {
        let p = SystemParams::effective(-0.0625, KERR, omega, g2, 0.001);
        let l = effective_liouvillian(&p, 21).unwrap();
        let ss = steady_state(&l).unwrap();
        let pops = populations(&ss, Basis::Fock(Mode::Single)).unwrap();
        (weighted_mean(&pops), cumulative(&pops)[5])
    };
    // Blockade scan drive (omega = 0.005).
    let lo = nbar_and_fidelity(WEAK, 0.005);
    let hi = nbar_and_fidelity(WEAK, 0.01);
    let close = |x: f64, want: f64| (x - want).abs() <= C5_REL * want;
    let ok = close(lo.0, C5_NBAR.0) && close(hi.0, C5_NBAR.1) && lo.1 >= C5_FIDELITY_MIN && hi.1 >= C5_FIDELITY_MIN;
    // Detuning-scan drive (omega = 0.01), reported for comparison only.
    let alt_lo = nbar_and_fidelity(0.01, 0.005);
    let alt_hi = nbar_and_fidelity(0.01, 0.01);
    verdict(
        "C5 five-quantum drive enhancement",
        ok,
        format!(
            "omega=0.005: nbar {:.4} -> {:.4}, Fp5 {:.4} -> {:.4}; omega=0.01: nbar {:.4} -> {:.4}",
            lo.0, hi.0, lo.1, hi.1, alt_lo.0, alt_hi.0
        ),
    );
    assert!(ok);
}

/// Smallest nonzero decay rate of a generator.
fn slowest_rate(l: &DMatrix<C64>) -> f64 {
    let ev = l.clone().schur().eigenvalues().expect("complex schur");
    let mut rates: Vec<f64> = ev.iter().map(|z| -z.re).collect();
    rates.sort_by(f64::total_cmp);
    rates[1]
}

#[test]
fn c6_solver_oracles_agree() {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst_td = 0.0f64;
    let mut worst_pop = 0.0f64;
    let mut slowest = f64::INFINITY;
    for _ in 0..10 {
        let dim = rng.gen_range(4..=12);
        let mut p = SystemParams::effective(
            rng.gen_range(-0.1..0.05),
            rng.gen_range(0.0..0.1),
            rng.gen_range(0.0..0.03),
            rng.gen_range(0.0..0.03),
            rng.gen_range(0.02..0.2),
        );
        let l = effective_liouvillian(&p, dim).unwrap();
        let ss = steady_state(&l).unwrap();
        // Strong two-photon drive nearly conserves parity, so relaxation can
        // be far slower than kappa. "Long" is measured against the gap.
        let gap = slowest_rate(l.matrix());
        slowest = slowest.min(gap);
        let cfg = EvolveConfig::new(0.0, 40.0 / gap, 2).with_method(Integrator::Exponential);
        let vac = QuantumState::vacuum(l.space());
        let late = evolve_density(&l, &vac, &cfg).unwrap();
        worst_td = worst_td.max(late.final_state().trace_distance(&ss).unwrap());

        p.kappa = 0.0;
        let l = effective_liouvillian(&p, dim).unwrap();
        let h = build_effective_h(&p, l.space()).unwrap();
        let cfg = EvolveConfig::new(0.0, 200.0, 201);
        let pure = evolve_pure(&h, &vac, &cfg).unwrap();
        let mixed = evolve_density(&l, &vac, &cfg.clone().with_tolerances(1e-10, 1e-12)).unwrap();
        for (a, b) in pure.states.iter().zip(&mixed.states) {
            let (pa, pb) = (a.basis_probabilities(), b.basis_probabilities());
            for (x, y) in pa.iter().zip(&pb) {
                worst_pop = worst_pop.max((x - y).abs());
            }
        }
    }
    let ok = worst_td <= C6_TRACE_DISTANCE && worst_pop <= C6_POPULATION_TOL;
    verdict(
        "C6 solver oracle equivalence",
        ok,
        format!(
            "max trace distance {worst_td:e} (slowest relaxation rate {slowest:.2e}), max closed population gap {worst_pop:e}"
        ),
    );
    assert!(ok);
}

fn direct_rhs(h: &FockOperator, c: &FockOperator, kappa: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let (h, c) = (h.matrix(), c.matrix());
    let cd = c.adjoint();
    let cdc = &cd * c;
    let comm = h * rho - rho * h;
    comm * C64::new(0.0, -1.0) + (c * rho * &cd * C64::from(2.0) - rho * &cdc - &cdc * rho) * C64::from(kappa / 2.0)
}

#[test]
fn c7_liouvillian_matches_master_equation() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p = SystemParams::effective(
            rng.gen_range(-0.1..0.05),
            rng.gen_range(0.0..0.1),
            rng.gen_range(0.0..0.03),
            rng.gen_range(0.0..0.03),
            rng.gen_range(0.0..0.2),
        );
        let eff = effective_liouvillian(&p, 8).unwrap();
        let full = full_liouvillian(&p, 4).unwrap();
        let c_eff = destroy(eff.space(), Mode::Single).unwrap();
        let c_full = polariton_plus(full.space()).unwrap();
        for (l, c) in [(&eff, &c_eff), (&full, &c_full)] {
            let rho = random_density(&mut rng, l.space().basis_size());
            let want = direct_rhs(l.hamiltonian(), c, p.kappa, &rho);
            worst = worst.max(max_abs_diff(&l.apply(&rho), &want));
        }
    }

    let kappa = 0.05;
    let l = effective_liouvillian(&SystemParams::effective(0.0, 0.0, 0.0, 0.0, kappa), 6).unwrap();
    let one = QuantumState::fock(l.space(), 1).unwrap();
    let traj = evolve_density(&l, &one, &EvolveConfig::new(0.0, 100.0, 101)).unwrap();
    let decay = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| (weighted_mean(&s.basis_probabilities()) - (-kappa * t).exp()).abs())
        .fold(0.0, f64::max);
    let ok = worst <= C7_ACTION_TOL && decay <= C7_DECAY_TOL;
    verdict(
        "C7 Liouvillian correctness",
        ok,
        format!("max action error {worst:e}, max decay error {decay:e}"),
    );
    assert!(ok);
}

#[test]
fn c8_invariant_suite() {
    let mut rng = StdRng::seed_from_u64(8);
    let mut herm = 0.0f64;
    let mut comm = 0.0f64;
    for _ in 0..5 {
        let mut p = SystemParams::effective(
            rng.gen_range(-0.1..0.05),
            rng.gen_range(0.0..0.1),
            rng.gen_range(0.0..0.03),
            rng.gen_range(0.0..0.03),
            0.0,
        );
        p.coupling = rng.gen_range(0.5..5.0);
        let two = SpaceDescriptor::two_mode(6).unwrap();
        let one = SpaceDescriptor::single_mode(9).unwrap();
        let h0 = build_full_h0(&p, two).unwrap();
        for h in [
            &h0,
            &build_full_h(&p, two).unwrap(),
            &build_effective_h(&p, one).unwrap(),
        ] {
            herm = herm.max(h.hermiticity_error());
        }
        let c = h0.commutator(&total_number_op(two)).unwrap();
        comm = comm.max(c.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    let p = SystemParams::effective(-0.025, KERR, 0.01, 0.005, 0.01);
    let l = effective_liouvillian(&p, 10).unwrap();
    let traj = evolve_density(&l, &QuantumState::vacuum(l.space()), &EvolveConfig::new(0.0, 300.0, 31)).unwrap();
    let trace = traj
        .states
        .iter()
        .map(|s| (s.density_matrix().trace().re - 1.0).abs())
        .fold(0.0, f64::max);

    let space = SpaceDescriptor::single_mode(3).unwrap();
    let slightly = DMatrix::from_diagonal(&nalgebra::dvector![0.6, 0.4 + 5e-11, -5e-11].map(C64::from));
    let clipped = QuantumState::density_sanitized(space, &slightly).unwrap();
    let clip_ok = min_eigenvalue(clipped.as_density().unwrap()) >= 0.0
        && (clipped.density_matrix().trace().re - 1.0).abs() <= 1e-15;
    let badly = DMatrix::from_diagonal(
        &nalgebra::dvector![0.6, 0.4 - 2.0 * POSITIVITY_ERROR, 2.0 * POSITIVITY_ERROR].map(C64::from),
    );
    let reject_ok = QuantumState::density_sanitized(space, &badly).is_err();

    let two = SpaceDescriptor::two_mode(8).unwrap();
    let u = polariton_unitary(two).unwrap();
    let n = two.basis_size();
    let unitary = max_abs_diff(&(u.matrix().adjoint() * u.matrix()), &DMatrix::identity(n, n));
    let blocks = u
        .commutator(&total_number_op(two))
        .unwrap()
        .matrix()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);

    let mut fid = 0.0f64;
    for s in &traj.states {
        let f = cumulative(&populations(s, Basis::Fock(Mode::Single)).unwrap());
        fid = fid.max((f[f.len() - 1] - 1.0).abs());
        fid = fid.max(f.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max));
    }

    let ok = herm <= C8_HERMITIAN_TOL
        && comm <= C8_COMMUTATOR_TOL
        && trace <= C8_TRACE_TOL
        && clip_ok
        && reject_ok
        && unitary <= C8_UNITARY_TOL
        && blocks <= C8_UNITARY_TOL
        && fid <= C8_FIDELITY_TOL;
    verdict(
        "C8 invariant suite",
        ok,
        format!(
            "hermiticity {herm:e}, [H0,N] {comm:e}, trace drift {trace:e}, clip {clip_ok}, reject {reject_ok}, \
             U unitarity {unitary:e}, U blocks {blocks:e}, Fp defect {fid:e}"
        ),
    );
    assert!(ok);
}

#[test]
fn c9_effective_model_validity_improves_with_coupling() {
    let mut p = SystemParams::effective(-0.025, KERR, WEAK, WEAK, 0.0);
    let base = validate_effective_model(&p, C9_N_TOTAL_MAX, WINDOW).unwrap();
    p.coupling = 10.0;
    let strong = validate_effective_model(&p, C9_N_TOTAL_MAX, WINDOW).unwrap();
    let ok = base.max_discrepancy.is_finite() && strong.max_discrepancy < base.max_discrepancy;
    verdict(
        "C9 effective-model validity",
        ok,
        format!(
            "discrepancy {:.6} at g, {:.6} at 10g (N = {C9_N_TOTAL_MAX}, T = {WINDOW})",
            base.max_discrepancy, strong.max_discrepancy
        ),
    );
    assert!(ok);
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn fig3_fidelity_trends_down_with_drive() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (id, n) in [(FigureId::Fig3a, 2usize), (FigureId::Fig3b, 3)] {
        let mut cfg = recipe(id).runs[0].config.clone();
        cfg.sweep.as_mut().unwrap().grid = Grid::Linear {
            start: 0.1 * KERR,
            stop: 2.0 * KERR,
            count: 12,
        };
        let table = run_sweep(&cfg).unwrap();
        let x = table.column("omega").unwrap();
        let f = table.column(&format!("Fp{n}")).unwrap();
        let s = slope(&x, &f);
        let pass = s < 0.0 && f[f.len() - 1] < f[0];
        ok &= pass;
        detail.push(format!(
            "{id}: Fp{n} {:.4} -> {:.4}, slope {s:.3}",
            f[0],
            f[f.len() - 1]
        ));
    }
    verdict("Fig3 fidelity trend", ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn fig5a_excitation_rises_at_high_fidelity() {
    let (table, _) = run_figure(&recipe(FigureId::Fig5a)).unwrap();
    let g2 = table.column("g2").unwrap();
    let nbar = table.column("nbar_n5").unwrap();
    let fp5 = table.column("Fp5_n5").unwrap();
    let idx: Vec<usize> = (0..g2.len()).filter(|&i| g2[i] <= 0.01 + 1e-12).collect();
    let rising = idx.windows(2).all(|w| nbar[w[1]] > nbar[w[0]]);
    let min_f = idx.iter().map(|&i| fp5[i]).fold(f64::INFINITY, f64::min);
    let ok = rising && min_f >= FIG5_FIDELITY_MIN;
    let (first, last) = (idx[0], idx[idx.len() - 1]);
    verdict(
        "Fig5a five-quantum series",
        ok,
        format!(
            "nbar {:.4} -> {:.4} over g2 in [{:.4}, {:.4}], monotone {rising}, min Fp5 {min_f:.4}",
            nbar[first], nbar[last], g2[first], g2[last]
        ),
    );
    assert!(ok);
}

#[test]
fn polariton_frame_builder_matches_liouvillian_builder() {
    // The generic builder reproduces the model-specific one.
    let p = SystemParams::effective(-0.025, KERR, 0.01, 0.005, 0.001);
    let l = effective_liouvillian(&p, 8).unwrap();
    let c = destroy(l.space(), Mode::Single).unwrap();
    let again = build_liouvillian(l.hamiltonian(), &[(c, p.kappa)]).unwrap();
    assert!(max_abs_diff(l.matrix(), again.matrix()) == 0.0);
}
