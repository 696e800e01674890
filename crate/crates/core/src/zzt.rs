//! Mixed-phase decomposition by the zeros of the z-transform.
//!
//! A two-period frame centered on a closure instant is treated as the
//! polynomial `x(0) z^{N-1} + x(1) z^{N-2} + ... + x(N-1)`. Its roots outside
//! the unit circle carry the anticausal (open phase) part of the source; the
//! roots inside carry the causal part (return phase and vocal tract).

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{centered_window, MagnitudeSpectrum, WindowKind};

pub use crate::roots::polynomial_roots;

/// Roots within this distance of the unit circle are classed as causal.
pub const UNIT_CIRCLE_BAND: f64 = 1e-8;

/// A GCI-centered analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    /// Index of the closure instant inside `samples`.
    pub gci_offset: usize,
    /// Index of `samples[0]` in the source signal.
    pub start: usize,
}

/// Frame spanning the periods on both sides of `gcis[k]`.
pub fn extract_frame(samples: &[f64], gcis: &[usize], k: usize) -> Result<Frame> {
    if k == 0 || k + 1 >= gcis.len() {
        return Err(Error::EdgeGci { index: k });
    }
    let (prev, cur, next) = (gcis[k - 1], gcis[k], gcis[k + 1]);
    if !(prev < cur && cur < next) || next > samples.len() {
        return Err(Error::GciOutOfRange(next as i64));
    }
    Ok(Frame {
        samples: samples[prev..next].to_vec(),
        gci_offset: cur - prev,
        start: prev,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZztDecomposition {
    /// Leading coefficient of the trimmed frame polynomial.
    pub gain: f64,
    /// Roots with modulus greater than one.
    pub anticausal_roots: Vec<Complex64>,
    /// Roots with modulus at most one.
    pub causal_roots: Vec<Complex64>,
    /// Frame length before trimming.
    pub n: usize,
    /// Zero samples removed from the two ends before root finding.
    pub trimmed: usize,
}

impl ZztDecomposition {
    pub fn root_count(&self) -> usize {
        self.anticausal_roots.len() + self.causal_roots.len()
    }

    pub fn gain_db(&self) -> f64 {
        20.0 * self.gain.abs().log10()
    }

    /// Writes `re,im,modulus,class` rows.
    pub fn write_roots_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "re,im,modulus,class")?;
        for (roots, class) in [
            (&self.anticausal_roots, "anticausal"),
            (&self.causal_roots, "causal"),
        ] {
            for z in roots {
                writeln!(out, "{:.12e},{:.12e},{:.12e},{class}", z.re, z.im, z.norm())?;
            }
        }
        Ok(())
    }
}

/// Windows the frame around its closure instant (when `window` is set),
/// strips zero samples at both ends and splits the roots by modulus.
pub fn zzt_decompose(frame: &Frame, window: Option<WindowKind>) -> Result<ZztDecomposition> {
    let n = frame.samples.len();
    let weighted: Vec<f64> = match window {
        Some(kind) => centered_window(kind, n, frame.gci_offset)
            .iter()
            .zip(&frame.samples)
            .map(|(w, x)| w * x)
            .collect(),
        None => frame.samples.clone(),
    };
    let first = weighted
        .iter()
        .position(|&v| v != 0.0)
        .ok_or(Error::ZeroPolynomial)?;
    let last = weighted.iter().rposition(|&v| v != 0.0).unwrap();
    let poly = &weighted[first..=last];
    let roots = if poly.len() > 1 {
        polynomial_roots(poly)?
    } else {
        Vec::new()
    };
    let (anticausal_roots, causal_roots) = roots
        .into_iter()
        .partition(|z| z.norm() > 1.0 + UNIT_CIRCLE_BAND);
    Ok(ZztDecomposition {
        gain: poly[0],
        anticausal_roots,
        causal_roots,
        n,
        trimmed: n - poly.len(),
    })
}

/// `sum_m 20 log10 |e^{jw} - z_m|` on the 1 Hz grid.
fn roots_spectrum(roots: &[Complex64], fs: u32) -> MagnitudeSpectrum {
    let mut values = vec![0.0; fs as usize / 2 + 1];
    for (hz, v) in values.iter_mut().enumerate() {
        let e = Complex64::from_polar(1.0, 2.0 * PI * hz as f64 / fs as f64);
        // product of squared distances, renormalized to avoid overflow
        let mut log_sum = 0.0;
        let mut prod = 1.0;
        for z in roots {
            prod *= (e - z).norm_sqr();
            if !(1e-100..=1e100).contains(&prod) {
                log_sum += prod.log10();
                prod = 1.0;
            }
        }
        *v = 10.0 * (log_sum + prod.log10());
    }
    MagnitudeSpectrum { values_db: values, fs }
}

/// Magnitude spectrum of the anticausal factor, without gain. An empty
/// anticausal set yields a flat 0 dB spectrum and a warning.
pub fn anticausal_spectrum(d: &ZztDecomposition, fs: u32) -> MagnitudeSpectrum {
    if d.anticausal_roots.is_empty() {
        log::warn!("ZZT frame has no roots outside the unit circle");
    }
    roots_spectrum(&d.anticausal_roots, fs)
}

/// Magnitude spectrum of the causal factor, without gain.
pub fn causal_spectrum(d: &ZztDecomposition, fs: u32) -> MagnitudeSpectrum {
    roots_spectrum(&d.causal_roots, fs)
}
