//! Iterative adaptive inverse filtering.
//!
//! Two passes of glottal-contribution estimation, vocal-tract estimation and
//! inverse filtering recover the source from a speech frame:
//!
//! ```text
//!  1 high-pass s(n)                 7 order-G fit on the first estimate
//!  2 order-1 fit                    8 inverse filter by it
//!  3 inverse filter by it           9 integrate
//!  4 order-V fit                   10 order-V fit
//!  5 inverse filter by it          11 inverse filter by it
//!  6 integrate -> first estimate   12 integrate -> g(n)
//! ```
//!
//! Every inverse filter is applied to the high-passed speech. The returned
//! estimate is `g(n)` differentiated with the integrator's own leak,
//! `1 - rho z^-1`, i.e. a flow derivative, the same domain as the LF
//! reference.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use crate::spectral::{dap, highpass, integrate, inverse_filter, lpc, window, AllPoleModel, WindowKind};
use crate::zzt::{extract_frame, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IaifConfig {
    pub vt_order: usize,
    pub glottal_order_pass2: usize,
    pub rho: f64,
    pub hp_cutoff_hz: f64,
    pub use_dap: bool,
    pub dap_max_iter: usize,
    pub dap_tol: f64,
    /// Window applied to each segment before an all-pole fit.
    pub fit_window: Option<WindowKind>,
}

impl Default for IaifConfig {
    fn default() -> Self {
        Self {
            vt_order: 10,
            glottal_order_pass2: 4,
            rho: 0.99,
            hp_cutoff_hz: 40.0,
            use_dap: false,
            dap_max_iter: 30,
            dap_tol: 1e-6,
            fit_window: Some(WindowKind::Hann),
        }
    }
}

impl IaifConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=6).contains(&self.glottal_order_pass2) {
            return Err(Error::InvalidParameter(format!(
                "glottal order {} outside [1, 6]",
                self.glottal_order_pass2
            )));
        }
        if !(4..=30).contains(&self.vt_order) {
            return Err(Error::InvalidParameter(format!(
                "vocal tract order {} outside [4, 30]",
                self.vt_order
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidParameter(format!("leak {} outside (0, 1)", self.rho)));
        }
        Ok(())
    }
}

struct Fitter<'a> {
    cfg: &'a IaifConfig,
    fs: u32,
    f0_hint: Option<f64>,
}

impl Fitter<'_> {
    fn fit(&self, x: &[f64], order: usize) -> Result<AllPoleModel> {
        let weighted: Vec<f64> = match self.cfg.fit_window {
            Some(kind) => window(kind, x.len())?
                .iter()
                .zip(x)
                .map(|(w, v)| w * v)
                .collect(),
            None => x.to_vec(),
        };
        if self.cfg.use_dap {
            let f0 = self.f0_hint.ok_or_else(|| {
                Error::InvalidParameter("discrete all-pole fitting needs an f0 hint".into())
            })?;
            let out = dap(&weighted, order, f0, self.fs, self.cfg.dap_max_iter, self.cfg.dap_tol)?;
            Ok(out.model)
        } else {
            lpc(&weighted, order)
        }
    }
}

/// Source estimate (flow derivative) of one speech frame.
pub fn iaif(s: &[f64], fs: u32, cfg: &IaifConfig, f0_hint: Option<f64>) -> Result<Vec<f64>> {
    cfg.validate()?;
    if s.len() < 4 * cfg.vt_order {
        return Err(Error::DegenerateFrame(format!(
            "frame of {} samples is shorter than 4 x order {}",
            s.len(),
            cfg.vt_order
        )));
    }
    if s.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateFrame("frame is all zeros".into()));
    }
    let fitter = Fitter { cfg, fs, f0_hint };
    let hp = highpass(s, cfg.hp_cutoff_hz, fs)?;

    // first pass
    let tilt = fitter.fit(&hp, 1)?;
    let detilted = inverse_filter(&hp, &tilt.coeffs);
    let vt1 = fitter.fit(&detilted, cfg.vt_order)?;
    let g1 = integrate(&inverse_filter(&hp, &vt1.coeffs), cfg.rho);

    // second pass
    let glottal = fitter.fit(&g1, cfg.glottal_order_pass2)?;
    let no_glottal = integrate(&inverse_filter(&hp, &glottal.coeffs), cfg.rho);
    let vt2 = fitter.fit(&no_glottal, cfg.vt_order)?;
    let g = integrate(&inverse_filter(&hp, &vt2.coeffs), cfg.rho);

    // leaky first difference, the exact inverse of the integrator
    Ok(inverse_filter(&g, &[1.0, -cfg.rho]))
}

/// Runs [`iaif`] on the two-period frame of every interior GCI.
pub fn iaif_full_signal(s: &SampledSignal, cfg: &IaifConfig) -> Result<BTreeMap<usize, Frame>> {
    iaif_frames(&s.samples, s.gcis(), s.fs, cfg)
}

pub(crate) fn iaif_frames(
    samples: &[f64],
    gcis: &[usize],
    fs: u32,
    cfg: &IaifConfig,
) -> Result<BTreeMap<usize, Frame>> {
    if gcis.len() < 5 {
        return Err(Error::TooFewGcis {
            found: gcis.len(),
            min: 5,
        });
    }
    (1..gcis.len() - 1)
        .map(|k| Ok((k, iaif_frame(samples, gcis, k, fs, cfg)?)))
        .collect()
}

/// IAIF estimate over the frame of GCI `k`, framed like [`extract_frame`].
pub fn iaif_frame(samples: &[f64], gcis: &[usize], k: usize, fs: u32, cfg: &IaifConfig) -> Result<Frame> {
    let frame = extract_frame(samples, gcis, k)?;
    let f0_hint = 2.0 * fs as f64 / frame.samples.len() as f64;
    let est = iaif(&frame.samples, fs, cfg, Some(f0_hint))?;
    Ok(Frame {
        samples: est,
        ..frame
    })
}
