use std::f64::consts::PI;

use crate::error::{Error, Result};

/// FIR filtering by `A(z)`: `y(n) = sum_k a[k] x(n - k)`, zero history.
pub fn inverse_filter(x: &[f64], a: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|n| {
            a.iter()
                .enumerate()
                .take(n + 1)
                .map(|(k, &ak)| ak * x[n - k])
                .sum()
        })
        .collect()
}

/// Recursive filtering by `1 / A(z)` with `a[0] == 1`, zero history.
pub fn all_pole_filter(x: &[f64], a: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for n in 0..x.len() {
        let mut acc = x[n];
        for (k, &ak) in a.iter().enumerate().skip(1).take(n) {
            acc -= ak * y[n - k];
        }
        y[n] = acc / a[0];
    }
    y
}

/// Leaky integrator `y(n) = x(n) + rho y(n - 1)`.
pub fn integrate(x: &[f64], rho: f64) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .map(|&v| {
            acc = v + rho * acc;
            acc
        })
        .collect()
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

const KAISER_BETA: f64 = 3.4;
/// Placement of the lowpass edge relative to the requested cutoff; the
/// transition band then ends below twice the cutoff.
const LOWPASS_EDGE: f64 = 0.85;

/// Taps of the linear-phase high-pass: spectral inversion of a Kaiser
/// windowed-sinc lowpass whose DC gain is exactly one.
pub fn highpass_taps(cutoff_hz: f64, fs: u32) -> Result<Vec<f64>> {
    let nyq = fs as f64 / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyq) {
        return Err(Error::InvalidParameter(format!(
            "high-pass cutoff {cutoff_hz} Hz outside (0, {nyq})"
        )));
    }
    let mut len = 1 + (fs as f64 / cutoff_hz).round() as usize;
    if len % 2 == 0 {
        len += 1;
    }
    let mid = (len / 2) as f64;
    let fc = LOWPASS_EDGE * cutoff_hz / fs as f64;
    let norm = bessel_i0(KAISER_BETA);
    let mut lp: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            let r = t / mid;
            sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect();
    let dc: f64 = lp.iter().sum();
    lp.iter_mut().for_each(|v| *v = -*v / dc);
    lp[len / 2] += 1.0;
    Ok(lp)
}

/// Zero-phase application of the high-pass: the filter delay is removed and
/// the input is extended by repeating its end samples.
pub fn highpass(x: &[f64], cutoff_hz: f64, fs: u32) -> Result<Vec<f64>> {
    let h = highpass_taps(cutoff_hz, fs)?;
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let mid = (h.len() / 2) as isize;
    let last = x.len() as isize - 1;
    Ok((0..x.len() as isize)
        .map(|n| {
            h.iter()
                .enumerate()
                .map(|(k, &hk)| hk * x[(n + mid - k as isize).clamp(0, last) as usize])
                .sum()
        })
        .collect())
}
