//! Propagation of `dy/dt = G y` for a constant complex generator `G`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

// Dormand–Prince 5(4) tableau. The generator is time independent, so the
// stage nodes never enter.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug)]
pub(crate) struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

fn error_norm(err: &DVector<C64>, y: &DVector<C64>, y_new: &DVector<C64>, ctl: &StepControl) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new.iter()))
        .map(|(e, (a, b))| {
            let scale = ctl.abs_tol + ctl.rel_tol * a.norm().max(b.norm());
            (e.norm() / scale).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn rms_scaled(v: &DVector<C64>, y: &DVector<C64>, ctl: &StepControl) -> f64 {
    let n = v.len() as f64;
    let sum: f64 = v
        .iter()
        .zip(y.iter())
        .map(|(x, yi)| (x.norm() / (ctl.abs_tol + ctl.rel_tol * yi.norm())).powi(2))
        .sum();
    (sum / n).sqrt()
}

fn initial_step(gen: &DMatrix<C64>, y0: &DVector<C64>, f0: &DVector<C64>, ctl: &StepControl) -> f64 {
    let d0 = rms_scaled(y0, y0, ctl);
    let d1 = rms_scaled(f0, y0, ctl);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = y0 + f0 * C64::new(h0, 0.0);
    let f1 = gen * &y1;
    let d2 = rms_scaled(&(f1 - f0), y0, ctl) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(ctl.max_step)
}

/// Adaptive Dormand–Prince integration, stepping exactly onto each sample
/// time. `emit` receives the solution at every entry of `times` (which must
/// be sorted and not precede `t0`). Returns the number of attempted steps.
pub(crate) fn dopri5<F>(
    gen: &DMatrix<C64>,
    y0: DVector<C64>,
    t0: f64,
    times: &[f64],
    ctl: &StepControl,
    mut emit: F,
) -> Result<usize>
where
    F: FnMut(usize, f64, &DVector<C64>) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0;
    let mut t = t0;
    let mut k1 = gen * &y;
    let mut h = initial_step(gen, &y, &k1, ctl);
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
    );
    let mut stage = DVector::<C64>::zeros(n);
    let mut y_new = DVector::<C64>::zeros(n);
    let mut err = DVector::<C64>::zeros(n);
    let mut steps = 0usize;
    let mut last_rejected = false;

    // stage = y + h Σ a_i k_i
    let combine = |out: &mut DVector<C64>, y: &DVector<C64>, h: f64, terms: &[(f64, &DVector<C64>)]| {
        out.copy_from(y);
        for (a, k) in terms {
            out.axpy(C64::new(h * a, 0.0), k, C64::new(1.0, 0.0));
        }
    };

    for (idx, &target) in times.iter().enumerate() {
        while t < target {
            if steps >= ctl.max_steps {
                return Err(Error::Integration {
                    time: t,
                    message: format!("step budget of {} exhausted", ctl.max_steps),
                });
            }
            let remaining = target - t;
            let mut h_try = h.min(ctl.max_step);
            let lands = h_try >= remaining * (1.0 - 1e-12);
            if lands {
                h_try = remaining;
            }

            combine(&mut stage, &y, h_try, &[(A21, &k1)]);
            gen.mul_to(&stage, &mut k2);
            combine(&mut stage, &y, h_try, &[(A31, &k1), (A32, &k2)]);
            gen.mul_to(&stage, &mut k3);
            combine(&mut stage, &y, h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            gen.mul_to(&stage, &mut k4);
            combine(&mut stage, &y, h_try, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            gen.mul_to(&stage, &mut k5);
            combine(
                &mut stage,
                &y,
                h_try,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            gen.mul_to(&stage, &mut k6);
            combine(
                &mut y_new,
                &y,
                h_try,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            gen.mul_to(&y_new, &mut k7);
            err.fill(C64::new(0.0, 0.0));
            for (e, k) in [(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)] {
                err.axpy(C64::new(h_try * e, 0.0), k, C64::new(1.0, 0.0));
            }
            steps += 1;

            let err_norm = error_norm(&err, &y, &y_new, ctl);
            if !err_norm.is_finite() {
                return Err(Error::Integration {
                    time: t,
                    message: "non-finite error estimate".into(),
                });
            }
            if err_norm <= 1.0 {
                t = if lands { target } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                let mut factor = if err_norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                if last_rejected {
                    factor = factor.min(1.0);
                }
                let proposed = h_try * factor;
                h = if lands { h.max(proposed) } else { proposed };
                last_rejected = false;
            } else {
                h = h_try * (SAFETY * err_norm.powf(-0.2)).max(MIN_FACTOR);
                last_rejected = true;
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integration {
                        time: t,
                        message: "step size underflow; tolerance not achievable".into(),
                    });
                }
            }
        }
        emit(idx, target, &y)?;
    }
    Ok(steps)
}

/// Exact propagation by the matrix exponential of the generator, reusing
/// the propagator across equally spaced samples.
pub(crate) fn exponential<F>(gen: &DMatrix<C64>, y0: DVector<C64>, t0: f64, times: &[f64], mut emit: F) -> Result<usize>
where
    F: FnMut(usize, f64, &DVector<C64>) -> Result<()>,
{
    let mut y = y0;
    let mut t = t0;
    let mut cached: Option<(f64, DMatrix<C64>)> = None;
    let mut exponentials = 0usize;
    for (idx, &target) in times.iter().enumerate() {
        let dt = target - t;
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt.max(1.0));
            if !reuse {
                cached = Some((dt, (gen * C64::new(dt, 0.0)).exp()));
                exponentials += 1;
            }
            let (_, prop) = cached.as_ref().expect("propagator cached above");
            y = prop * &y;
            t = target;
        }
        emit(idx, target, &y)?;
    }
    Ok(exponentials)
}
