//! Liljencrants-Fant glottal flow derivative model.
//!
//! A period of length `N = round(fs / f0)` samples is split at the closure
//! instant `Te = round(oq * N)`. The open phase `[0, Te]` is an exponentially
//! growing sinusoid whose half-period places the flow maximum at `Tp = am * Te`
//! and which reaches `-ee` exactly at `Te`. The return phase `(Te, N)` is an
//! exponential recovery with time constant `Ta = qa * (N - Te)`.
//!
//! Both shape constants are solved numerically: the return constant from its
//! continuity equation, the open-phase growth rate so that the sampled period
//! sums to zero (no net flow gain).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::spectral::magnitude_spectrum_db;

pub const MIN_SAMPLES_PER_PERIOD: usize = 16;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;
const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfParams {
    /// Fundamental frequency in Hz.
    pub f0: f64,
    /// Excitation amplitude: the flow derivative reaches `-ee` at closure.
    pub ee: f64,
    /// Open quotient, `Te / T0`.
    pub oq: f64,
    /// Asymmetry coefficient, `Tp / Te`.
    pub am: f64,
    /// Return quotient, `Ta / (T0 - Te)`.
    pub qa: f64,
}

impl Default for LfParams {
    fn default() -> Self {
        Self {
            f0: 100.0,
            ee: 1.0,
            oq: 0.6,
            am: 0.67,
            qa: 0.05,
        }
    }
}

impl LfParams {
    pub fn with_f0(self, f0: f64) -> Self {
        Self { f0, ..self }
    }

    pub fn with_shape(self, shape: LfShape) -> Self {
        Self {
            oq: shape.oq,
            am: shape.am,
            qa: shape.qa,
            ..self
        }
    }

    pub fn shape(&self) -> LfShape {
        LfShape {
            oq: self.oq,
            am: self.am,
            qa: self.qa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.f0.is_finite() && self.f0 > 0.0) {
            return bad("f0 must be positive");
        }
        if !(self.ee.is_finite() && self.ee > 0.0) {
            return bad("ee must be positive");
        }
        if !(self.oq > 0.0 && self.oq < 1.0) {
            return bad("oq must lie in (0, 1)");
        }
        if !(self.am > 0.5 && self.am < 1.0) {
            return bad("am must lie in (0.5, 1)");
        }
        if !(self.qa >= 0.0 && self.qa < 1.0) {
            return bad("qa must lie in [0, 1)");
        }
        Ok(())
    }

    /// Period length in samples.
    pub fn period_samples(&self, fs: u32) -> usize {
        (fs as f64 / self.f0).round() as usize
    }

    /// Sample index of the closure instant within one period.
    pub fn te_index(&self, fs: u32) -> usize {
        (self.oq * self.period_samples(fs) as f64).round() as usize
    }
}

/// Source shape without pitch or amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfShape {
    pub oq: f64,
    pub am: f64,
    pub qa: f64,
}

impl LfShape {
    pub const MODAL: LfShape = LfShape {
        oq: 0.6,
        am: 0.67,
        qa: 0.05,
    };
    pub const TENSE: LfShape = LfShape {
        oq: 0.45,
        am: 0.75,
        qa: 0.02,
    };
    pub const LAX: LfShape = LfShape {
        oq: 0.75,
        am: 0.6,
        qa: 0.1,
    };

    pub fn presets() -> Vec<LfShape> {
        vec![Self::TENSE, Self::MODAL, Self::LAX]
    }
}

/// Written as `oq/am/qa`.
impl fmt::Display for LfShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.oq, self.am, self.qa)
    }
}

/// Accepts a preset name (`tense`, `modal`, `lax`) or `oq/am/qa`.
impl FromStr for LfShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "tense" => return Ok(Self::TENSE),
            "modal" => return Ok(Self::MODAL),
            "lax" => return Ok(Self::LAX),
            _ => {}
        }
        let parts: Vec<f64> = s
            .split('/')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidParameter(format!("bad LF shape {s:?}")))?;
        match parts[..] {
            [oq, am, qa] => {
                let shape = LfShape { oq, am, qa };
                LfParams::default().with_shape(shape).validate()?;
                Ok(shape)
            }
            _ => Err(Error::InvalidParameter(format!("bad LF shape {s:?}, expected oq/am/qa"))),
        }
    }
}

/// Solved constants of one sampled pulse (all in per-sample units).
#[derive(Debug, Clone, Copy)]
struct PulseShape {
    period: usize,
    te: usize,
    omega: f64,
    alpha: f64,
    epsilon: f64,
    ta: f64,
}

fn solve_shape(params: &LfParams, fs: u32) -> Result<PulseShape> {
    params.validate()?;
    if !(params.f0 < fs as f64) {
        return Err(Error::TooFewSamples {
            samples: 0,
            min: MIN_SAMPLES_PER_PERIOD,
        });
    }
    let period = params.period_samples(fs);
    if period < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::TooFewSamples {
            samples: period,
            min: MIN_SAMPLES_PER_PERIOD,
        });
    }
    let te = params.te_index(fs);
    if te < 2 || te >= period {
        return Err(Error::InvalidParameter(format!(
            "closure instant {te} falls outside the period of {period} samples"
        )));
    }
    let tp = params.am * te as f64;
    let omega = std::f64::consts::PI / tp;

    let tb = (period - te) as f64;
    let ta = params.qa * tb;
    let epsilon = if ta > 0.0 { solve_return_constant(ta, tb)? } else { 0.0 };

    let return_sum: f64 = (te + 1..period)
        .map(|n| return_sample(params.ee, epsilon, ta, tb, (n - te) as f64))
        .sum();
    let alpha = solve_growth(params.ee, omega, te, -return_sum);

    Ok(PulseShape {
        period,
        te,
        omega,
        alpha,
        epsilon,
        ta,
    })
}

/// Newton iteration on `eps * ta = 1 - exp(-eps * tb)`, the positive root.
fn solve_return_constant(ta: f64, tb: f64) -> Result<f64> {
    // f is convex with f(0) = 0 and f'(0) < 0 when ta < tb, so Newton from the
    // right of the positive root decreases monotonically onto it.
    let f = |e: f64| e * ta - 1.0 + (-e * tb).exp();
    let df = |e: f64| ta - tb * (-e * tb).exp();
    let mut eps = 1.0 / ta;
    for _ in 0..NEWTON_MAX_ITER {
        let step = f(eps) / df(eps);
        eps -= step;
        if step.abs() <= NEWTON_TOL * eps.abs().max(1.0) {
            return Ok(eps);
        }
    }
    if f(eps).abs() < 1e-8 {
        Ok(eps)
    } else {
        Err(Error::NoConvergence)
    }
}

fn return_sample(ee: f64, eps: f64, ta: f64, tb: f64, dt: f64) -> f64 {
    if ta <= 0.0 {
        return 0.0;
    }
    -(ee / (eps * ta)) * ((-eps * dt).exp() - (-eps * tb).exp())
}

/// Open-phase sample normalized so that sample `te` equals `-ee`.
fn open_sample(ee: f64, omega: f64, alpha: f64, te: usize, n: usize) -> f64 {
    let rel = n as f64 - te as f64;
    -ee * (alpha * rel).exp() * (omega * n as f64).sin() / (omega * te as f64).sin()
}

/// Bisection for the growth rate that makes the open phase sum to `target`.
///
/// The open-phase sum is strictly decreasing in `alpha` (one sign change in
/// the sample weights), so the root is unique.
fn solve_growth(ee: f64, omega: f64, te: usize, target: f64) -> f64 {
    let open_sum = |alpha: f64| -> f64 { (0..=te).map(|n| open_sample(ee, omega, alpha, te, n)).sum() };
    let limit = 700.0 / te as f64;
    let mut lo = -1.0 / te as f64;
    let mut hi = 1.0 / te as f64;
    while open_sum(lo) < target && lo > -limit {
        lo = (lo * 2.0).max(-limit);
    }
    while open_sum(hi) > target && hi < limit {
        hi = (hi * 2.0).min(limit);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if open_sum(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_TOL * 1e-3 * mid.abs().max(1.0 / te as f64) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn render(params: &LfParams, shape: &PulseShape) -> Vec<f64> {
    let tb = (shape.period - shape.te) as f64;
    (0..shape.period)
        .map(|n| {
            if n <= shape.te {
                open_sample(params.ee, shape.omega, shape.alpha, shape.te, n)
            } else {
                return_sample(params.ee, shape.epsilon, shape.ta, tb, (n - shape.te) as f64)
            }
        })
        .collect()
}

/// One period of the LF flow derivative, `round(fs / f0)` samples long.
pub fn lf_pulse(params: &LfParams, fs: u32) -> Result<SampledSignal> {
    let shape = solve_shape(params, fs)?;
    let mut out = SampledSignal::with_gcis(render(params, &shape), fs, vec![shape.te])?;
    out.gcis = Some(vec![shape.te]);
    Ok(out)
}

/// `n_periods` identical pulses; `gcis` holds the closure index of each.
pub fn lf_pulse_train(params: &LfParams, n_periods: usize, fs: u32) -> Result<SampledSignal> {
    if n_periods < 3 {
        return Err(Error::InvalidParameter(format!(
            "pulse train needs at least 3 periods, got {n_periods}"
        )));
    }
    let shape = solve_shape(params, fs)?;
    let pulse = render(params, &shape);
    let samples: Vec<f64> = pulse.iter().copied().cycle().take(n_periods * shape.period).collect();
    let gcis = (0..n_periods).map(|k| k * shape.period + shape.te).collect();
    SampledSignal::with_gcis(samples, fs, gcis)
}

/// Frequency of the spectral maximum of a single pulse, on a 1 Hz grid over
/// `[20, fs/2]`.
pub fn reference_glottal_formant(params: &LfParams, fs: u32) -> Result<f64> {
    let pulse = lf_pulse(params, fs)?;
    let spec = magnitude_spectrum_db(&pulse.samples, fs);
    let (hz, _) = spec
        .values_db
        .iter()
        .enumerate()
        .skip(20)
        .fold((20usize, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    Ok(hz as f64)
}
