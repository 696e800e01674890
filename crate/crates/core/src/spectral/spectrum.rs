use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Floor applied to bins whose magnitude is exactly zero.
pub const DB_FLOOR: f64 = -300.0;

/// Magnitude in dB at every integer frequency `0..=fs/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrum {
    pub values_db: Vec<f64>,
    pub fs: u32,
}

impl MagnitudeSpectrum {
    pub fn new(values_db: Vec<f64>, fs: u32) -> Result<Self> {
        if values_db.len() != fs as usize / 2 + 1 {
            return Err(Error::InvalidParameter(format!(
                "spectrum has {} bins, expected {} for fs = {fs}",
                values_db.len(),
                fs / 2 + 1
            )));
        }
        Ok(Self { values_db, fs })
    }

    /// Spectrum sampled from a closure over frequency in Hz.
    pub fn from_fn(fs: u32, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values_db: (0..=fs / 2).map(|hz| f(hz as f64)).collect(),
            fs,
        }
    }

    pub fn flat(fs: u32, level_db: f64) -> Self {
        Self::from_fn(fs, |_| level_db)
    }

    pub fn len(&self) -> usize {
        self.values_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_db.is_empty()
    }

    pub fn at(&self, hz: usize) -> f64 {
        self.values_db[hz]
    }

    /// Mean dB level over the inclusive band `[lo, hi]` Hz.
    pub fn mean_db(&self, lo: usize, hi: usize) -> f64 {
        let band = &self.values_db[lo..=hi];
        band.iter().sum::<f64>() / band.len() as f64
    }

    /// Copy shifted so that its mean over `[lo, hi]` is 0 dB.
    pub fn normalized(&self, lo: usize, hi: usize) -> Self {
        let mean = self.mean_db(lo, hi);
        Self {
            values_db: self.values_db.iter().map(|v| v - mean).collect(),
            fs: self.fs,
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// dB magnitude of the zero-padded DFT of `frame` at integer Hz.
///
/// The transform length is the smallest multiple of `fs` not shorter than the
/// frame, so integer frequencies fall exactly on DFT bins.
pub fn magnitude_spectrum_db(frame: &[f64], fs: u32) -> MagnitudeSpectrum {
    let fs_len = fs as usize;
    let len = frame.len().div_ceil(fs_len).max(1) * fs_len;
    let stride = len / fs_len;
    let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    plan(len).process(&mut buf);
    let values_db = (0..=fs_len / 2)
        .map(|hz| {
            let mag = buf[hz * stride].norm();
            if mag > 0.0 {
                20.0 * mag.log10()
            } else {
                DB_FLOOR
            }
        })
        .collect();
    MagnitudeSpectrum { values_db, fs }
}
