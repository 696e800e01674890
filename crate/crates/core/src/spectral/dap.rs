//! Discrete all-pole modeling: an all-pole fit that minimizes the
//! Itakura-Saito error over a discrete set of frequencies (here the harmonics
//! of a known f0), iterated from a linear-prediction start.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::lpc::{lpc, AllPoleModel};
use crate::error::{Error, Result};
use crate::roots::{polynomial_from_roots, polynomial_roots};

#[derive(Debug, Clone)]
pub struct DapOutcome {
    /// Best iterate found (lowest Itakura-Saito error).
    pub model: AllPoleModel,
    pub iterations: usize,
    /// False when `max_iter` ran out before the error settled.
    pub converged: bool,
    pub error: f64,
}

/// Angular frequencies (rad/sample) of the harmonics of `f0` below `fs / 2`.
pub fn harmonic_frequencies(f0: f64, fs: u32) -> Vec<f64> {
    let nyq = fs as f64 / 2.0;
    (1..)
        .map(|k| k as f64 * f0)
        .take_while(|&f| f < nyq)
        .map(|f| 2.0 * PI * f / fs as f64)
        .collect()
}

fn power_at(frame: &[f64], w: f64) -> f64 {
    let (re, im) = frame.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, &x)| {
        (re + x * (w * n as f64).cos(), im - x * (w * n as f64).sin())
    });
    re * re + im * im
}

fn a_response(coeffs: &[f64], w: f64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &a)| Complex64::from_polar(a, -w * k as f64))
        .sum()
}

/// Itakura-Saito error of `coeffs` against `power` on `freqs`, with the
/// model gain set to its optimum.
pub fn itakura_saito_error(power: &[f64], freqs: &[f64], coeffs: &[f64]) -> f64 {
    let m = freqs.len() as f64;
    let weighted: Vec<f64> = power
        .iter()
        .zip(freqs)
        .map(|(&p, &w)| p * a_response(coeffs, w).norm_sqr())
        .collect();
    let g2 = weighted.iter().sum::<f64>() / m;
    g2.ln() - weighted.iter().map(|v| v.ln()).sum::<f64>() / m
}

fn optimal_gain(power: &[f64], freqs: &[f64], coeffs: &[f64]) -> f64 {
    let g2 = power
        .iter()
        .zip(freqs)
        .map(|(&p, &w)| p * a_response(coeffs, w).norm_sqr())
        .sum::<f64>()
        / freqs.len() as f64;
    g2.sqrt()
}

/// Reflects any root of `A(z)` on or outside the unit circle to its
/// conjugate reciprocal. `|A|` changes only by a constant factor.
fn make_minimum_phase(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() < 2 {
        return coeffs.to_vec();
    }
    let Ok(roots) = polynomial_roots(coeffs) else {
        return coeffs.to_vec();
    };
    if roots.iter().all(|z| z.norm() < 1.0) {
        return coeffs.to_vec();
    }
    let fixed: Vec<Complex64> = roots
        .into_iter()
        .map(|z| {
            if z.norm() < 1.0 {
                return z;
            }
            let w = 1.0 / z.conj();
            if w.norm() >= 1.0 {
                w * (1.0 - 1e-9)
            } else {
                w
            }
        })
        .collect();
    polynomial_from_roots(&fixed)
}

/// Discrete autocorrelation of the sampled power spectrum.
fn discrete_autocorrelation(power: &[f64], freqs: &[f64], order: usize) -> Vec<f64> {
    let m = freqs.len() as f64;
    (0..=order)
        .map(|i| {
            power
                .iter()
                .zip(freqs)
                .map(|(&p, &w)| p * (w * i as f64).cos())
                .sum::<f64>()
                / m
        })
        .collect()
}

/// One fixed-point update: solve `R a = h` where `h` is the model's
/// discrete-frequency impulse response at negative lags.
fn dap_update(r: &DMatrix<f64>, freqs: &[f64], coeffs: &[f64]) -> Option<Vec<f64>> {
    let order = coeffs.len() - 1;
    let m = freqs.len() as f64;
    let inv: Vec<Complex64> = freqs.iter().map(|&w| a_response(coeffs, w).inv()).collect();
    let h = DVector::from_iterator(
        order + 1,
        (0..=order).map(|i| {
            freqs
                .iter()
                .zip(&inv)
                .map(|(&w, hi)| (Complex64::from_polar(1.0, -w * i as f64) * hi).re)
                .sum::<f64>()
                / m
        }),
    );
    let b = r.clone().lu().solve(&h)?;
    if !(b[0].abs() > 0.0) || b.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(b.iter().map(|v| v / b[0]).collect())
}

/// Iterates the discrete all-pole fixed point from `init`.
pub fn dap_fit(
    power: &[f64],
    freqs: &[f64],
    init: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<DapOutcome> {
    if power.len() != freqs.len() || freqs.is_empty() {
        return Err(Error::InvalidParameter(
            "power and frequency sets must be non-empty and of equal length".into(),
        ));
    }
    if power.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::DegenerateFrame("zero power at a harmonic".into()));
    }
    let order = init.len() - 1;
    let lags = discrete_autocorrelation(power, freqs, order);
    let r = DMatrix::from_fn(order + 1, order + 1, |i, j| lags[i.abs_diff(j)]);

    let mut current = init.to_vec();
    let mut err = itakura_saito_error(power, freqs, &current);
    let mut iterations = 0;
    let mut converged = max_iter == 0;
    while iterations < max_iter {
        iterations += 1;
        let Some(mut next) = dap_update(&r, freqs, &current) else {
            break;
        };
        next = make_minimum_phase(&next);
        let mut next_err = itakura_saito_error(power, freqs, &next);
        // damp towards the current iterate until the error does not grow
        let mut damping = 0;
        while !(next_err <= err) && damping < 20 {
            next = current.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
            next = make_minimum_phase(&next);
            next_err = itakura_saito_error(power, freqs, &next);
            damping += 1;
        }
        if !(next_err <= err) {
            converged = true;
            break;
        }
        let change = (err - next_err).abs() / err.abs().max(1e-300);
        current = next;
        err = next_err;
        if change < tol {
            converged = true;
            break;
        }
    }
    let gain = optimal_gain(power, freqs, &current);
    Ok(DapOutcome {
        model: AllPoleModel {
            coeffs: current,
            gain,
        },
        iterations,
        converged,
        error: err,
    })
}

/// Discrete all-pole model of `frame` on the harmonics of `f0`, started from
/// the autocorrelation LPC solution.
pub fn dap(
    frame: &[f64],
    order: usize,
    f0: f64,
    fs: u32,
    max_iter: usize,
    tol: f64,
) -> Result<DapOutcome> {
    let init = lpc(frame, order)?;
    let freqs = harmonic_frequencies(f0, fs);
    if freqs.len() <= order {
        log::warn!(
            "only {} harmonics for an order-{order} discrete all-pole fit; keeping LPC",
            freqs.len()
        );
        return Ok(DapOutcome {
            model: init,
            iterations: 0,
            converged: false,
            error: f64::NAN,
        });
    }
    let power: Vec<f64> = freqs.iter().map(|&w| power_at(frame, w)).collect();
    if power.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::DegenerateFrame("zero power at a harmonic".into()));
    }
    if max_iter == 0 {
        let error = itakura_saito_error(&power, &freqs, &init.coeffs);
        return Ok(DapOutcome {
            model: init,
            iterations: 0,
            converged: true,
            error,
        });
    }
    let out = dap_fit(&power, &freqs, &init.coeffs, max_iter, tol)?;
    if !out.converged {
        log::debug!("discrete all-pole fit stopped after {} iterations", out.iterations);
    }
    Ok(out)
}

#[cfg(test)]
/// Linear prediction computed from the discrete spectrum itself.
pub(crate) fn discrete_lpc(power: &[f64], freqs: &[f64], order: usize) -> Vec<f64> {
    let lags = discrete_autocorrelation(power, freqs, order);
    super::lpc::levinson(&lags, order).0
}
