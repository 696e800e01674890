//! Anticausality dominated region estimation.
//!
//! A sharp window centered on the closure instant suppresses the causal
//! response of the previous period, so the windowed samples just before the
//! GCI approximate the open phase of the source. The same principle applies
//! to speech or to a first source estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iaif::{iaif_frame, IaifConfig};
use crate::spectral::{centered_window, WindowKind};
use crate::zzt::{extract_frame, Frame};

pub const DEFAULT_WINDOW: WindowKind = WindowKind::HanningPoisson { alpha: 2.0 };

/// Which part of the windowed frame is returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcdrRegion {
    /// Samples `[0, gci_offset]`.
    #[default]
    PreGci,
    /// The whole windowed frame.
    FullFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcdrConfig {
    pub window: WindowKind,
    pub region: AcdrRegion,
}

impl Default for AcdrConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            region: AcdrRegion::PreGci,
        }
    }
}

/// Windows `frame` around `gci_offset` and keeps the requested region.
pub fn acdr_estimate(frame: &[f64], gci_offset: usize, cfg: &AcdrConfig) -> Result<Vec<f64>> {
    if gci_offset >= frame.len() {
        return Err(Error::InvalidParameter(format!(
            "GCI offset {gci_offset} outside a frame of {} samples",
            frame.len()
        )));
    }
    let w = centered_window(cfg.window, frame.len(), gci_offset);
    let end = match cfg.region {
        AcdrRegion::PreGci => gci_offset + 1,
        AcdrRegion::FullFrame => frame.len(),
    };
    Ok(frame[..end].iter().zip(&w).map(|(x, w)| x * w).collect())
}

pub fn acdr_on_frame(frame: &Frame, cfg: &AcdrConfig) -> Result<Vec<f64>> {
    acdr_estimate(&frame.samples, frame.gci_offset, cfg)
}

/// ACDR applied directly to the speech frame of GCI `k`.
pub fn acdr_on_speech(samples: &[f64], gcis: &[usize], k: usize, cfg: &AcdrConfig) -> Result<Vec<f64>> {
    acdr_on_frame(&extract_frame(samples, gcis, k)?, cfg)
}

/// ACDR applied to the IAIF estimate of the frame of GCI `k`.
pub fn acdr_on_iaif(
    samples: &[f64],
    gcis: &[usize],
    k: usize,
    fs: u32,
    iaif_cfg: &IaifConfig,
    cfg: &AcdrConfig,
) -> Result<Vec<f64>> {
    acdr_on_frame(&iaif_frame(samples, gcis, k, fs, iaif_cfg)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::magnitude_spectrum_db;

    #[test]
    fn estimate_length_and_peak() {
        let frame: Vec<f64> = (0..160).map(|n| (n as f64 * 0.2).cos() + 2.0).collect();
        let est = acdr_estimate(&frame, 80, &AcdrConfig::default()).unwrap();
        assert_eq!(est.len(), 81);
        assert_eq!(est[80], frame[80]);
        assert_eq!(est[0], 0.0);
    }

    #[test]
    fn offset_outside_frame() {
        assert!(acdr_estimate(&[1.0; 10], 10, &AcdrConfig::default()).is_err());
    }

    #[test]
    fn full_frame_region() {
        let frame = vec![1.0; 100];
        let cfg = AcdrConfig {
            region: AcdrRegion::FullFrame,
            ..Default::default()
        };
        assert_eq!(acdr_estimate(&frame, 50, &cfg).unwrap().len(), 100);
    }

    #[test]
    fn linear_in_the_frame() {
        let frame: Vec<f64> = (0..120).map(|n| (n as f64 * 0.37).sin()).collect();
        let scaled: Vec<f64> = frame.iter().map(|v| 3.5 * v).collect();
        let cfg = AcdrConfig::default();
        let a = acdr_estimate(&frame, 61, &cfg).unwrap();
        let b = acdr_estimate(&scaled, 61, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((3.5 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn purely_anticausal_frame_loses_nothing() {
        // time-reversed decaying exponential ending at the GCI, zero after
        let mut frame = vec![0.0; 160];
        for n in 0..=80 {
            frame[n] = 0.8f64.powi(80 - n as i32);
        }
        let cfg = AcdrConfig::default();
        let est = acdr_estimate(&frame, 80, &cfg).unwrap();
        let full: Vec<f64> = frame
            .iter()
            .zip(centered_window(cfg.window, 160, 80))
            .map(|(x, w)| x * w)
            .collect();
        let (a, b) = (magnitude_spectrum_db(&est, 8000), magnitude_spectrum_db(&full, 8000));
        for hz in 20..=4000 {
            assert!((a.at(hz) - b.at(hz)).abs() < 0.5);
        }
    }
}
