//! Spectral distortion and glottal formant determination.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::MagnitudeSpectrum;

/// Lowest frequency (Hz) of the distortion sum and the formant search.
pub const BAND_LOW_HZ: usize = 20;
pub const DETERMINATION_BOUND: f64 = 0.10;
const SEARCH_CAP_HZ: f64 = 1000.0;
const SEARCH_F0_MULTIPLE: f64 = 5.0;

/// RMS dB difference over `[20, fs/2]` Hz, weighted `2 / fs` per 1 Hz bin.
///
/// Both spectra are used as given; gain normalization happens upstream.
pub fn spectral_distortion(est: &MagnitudeSpectrum, reference: &MagnitudeSpectrum) -> Result<f64> {
    if est.fs != reference.fs {
        return Err(Error::MismatchedFs(est.fs, reference.fs));
    }
    let hi = est.fs as usize / 2;
    let sum: f64 = (BAND_LOW_HZ..=hi)
        .map(|hz| (est.at(hz) - reference.at(hz)).powi(2))
        .sum();
    Ok((2.0 / est.fs as f64 * sum).sqrt())
}

/// Upper end of the glottal formant search band.
pub fn search_band_high(f0: f64, fs: u32) -> usize {
    (SEARCH_CAP_HZ.min(SEARCH_F0_MULTIPLE * f0).floor() as usize).min(fs as usize / 2)
}

/// Spectral maximum inside `[20, min(1000, 5 f0)]` Hz, refined by a parabola
/// through the three bins around it.
pub fn detect_glottal_formant(spec: &MagnitudeSpectrum, f0: f64) -> Result<f64> {
    let lo = BAND_LOW_HZ;
    let hi = search_band_high(f0, spec.fs);
    if hi <= lo {
        return Err(Error::NoPeak);
    }
    let v = &spec.values_db;
    let peak = (lo..=hi).fold(lo, |best, hz| if v[hz] > v[best] { hz } else { best });
    // an edge maximum only counts when the spectrum falls beyond the edge too
    let at_edge_without_peak = (peak == lo && !(v[lo] > v[lo - 1]))
        || (peak == hi && v.get(hi + 1).map_or(true, |&next| !(v[hi] > next)));
    if at_edge_without_peak {
        return Err(Error::NoPeak);
    }
    let (a, b, c) = (v[peak - 1], v[peak], v[peak + 1]);
    let denom = a - 2.0 * b + c;
    let delta = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Ok(peak as f64 + delta.clamp(-0.5, 0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgError {
    pub fg_est: f64,
    pub fg_ref: f64,
    pub rel_error: f64,
}

impl FgError {
    pub fn new(fg_est: f64, fg_ref: f64) -> Result<Self> {
        if !(fg_ref > 0.0) {
            return Err(Error::InvalidParameter("reference glottal formant must be positive".into()));
        }
        let rel_error = (fg_est - fg_ref) / fg_ref;
        if !rel_error.is_finite() {
            return Err(Error::InvalidParameter("non-finite relative error".into()));
        }
        Ok(Self {
            fg_est,
            fg_ref,
            rel_error,
        })
    }
}

/// Fraction of outcomes with `|rel_error| <= bound`; `None` marks a failed
/// detection and counts as outside.
pub fn determination_rate(rel_errors: &[Option<f64>], bound: f64) -> Result<f64> {
    if rel_errors.is_empty() {
        return Err(Error::Empty("relative error list"));
    }
    let hits = rel_errors
        .iter()
        .filter(|e| matches!(e, Some(v) if v.abs() <= bound))
        .count();
    Ok(hits as f64 / rel_errors.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorHistogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    pub below: usize,
    pub above: usize,
    /// Failed detections.
    pub failed: usize,
}

impl ErrorHistogram {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.below + self.above + self.failed
    }

    /// Writes `bin_center,count` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_center,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(out, "{:.4},{c}", self.bin_center(i))?;
        }
        Ok(())
    }
}

/// Histogram of relative errors with `bins` bins over `[lo, hi)`.
pub fn error_histogram(rel_errors: &[Option<f64>], bins: usize, lo: f64, hi: f64) -> Result<ErrorHistogram> {
    if rel_errors.is_empty() {
        return Err(Error::Empty("relative error list"));
    }
    let mut h = ErrorHistogram {
        lo,
        hi,
        counts: vec![0; bins],
        below: 0,
        above: 0,
        failed: 0,
    };
    for e in rel_errors {
        match *e {
            None => h.failed += 1,
            Some(v) if v < lo => h.below += 1,
            Some(v) if v >= hi => h.above += 1,
            Some(v) => {
                let i = ((v - lo) * bins as f64 / (hi - lo)).floor() as usize;
                h.counts[i.min(bins - 1)] += 1;
            }
        }
    }
    Ok(h)
}

/// Fifty bins of width 0.02 over `[-0.5, 0.5)`.
pub fn default_error_histogram(rel_errors: &[Option<f64>]) -> Result<ErrorHistogram> {
    error_histogram(rel_errors, 50, -0.5, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::{lf_pulse, reference_glottal_formant, LfParams};
    use crate::spectral::magnitude_spectrum_db;
    use proptest::prelude::*;

    fn spectrum(f: impl Fn(f64) -> f64) -> MagnitudeSpectrum {
        MagnitudeSpectrum::from_fn(8000, f)
    }

    #[test]
    fn distortion_closed_forms() {
        let r = spectrum(|f| (f / 300.0).sin() * 10.0);
        assert_eq!(spectral_distortion(&r, &r).unwrap(), 0.0);
        let one = spectrum(|f| (f / 300.0).sin() * 10.0 + 1.0);
        let sd = spectral_distortion(&one, &r).unwrap();
        assert!((sd - (2.0 * 3981.0 / 8000.0f64).sqrt()).abs() < 1e-9);
        assert!((sd - 0.99762).abs() < 1e-5);
        let two = spectrum(|f| (f / 300.0).sin() * 10.0 + 2.0);
        assert!((spectral_distortion(&two, &r).unwrap() - 1.99525).abs() < 1e-5);
    }

    #[test]
    fn distortion_needs_same_rate() {
        let a = MagnitudeSpectrum::flat(8000, 0.0);
        let b = MagnitudeSpectrum::flat(16000, 0.0);
        assert!(matches!(spectral_distortion(&a, &b), Err(Error::MismatchedFs(8000, 16000))));
    }

    #[test]
    fn parabolic_peak() {
        let s = spectrum(|f| -0.01 * (f - 150.3) * (f - 150.3));
        let fg = detect_glottal_formant(&s, 100.0).unwrap();
        assert!((fg - 150.3).abs() < 0.5, "{fg}");
        let s = spectrum(|f| -0.01 * (f - 150.0) * (f - 150.0));
        assert!((detect_glottal_formant(&s, 100.0).unwrap() - 150.0).abs() < 1e-9);
    }

    #[test]
    fn flat_spectrum_has_no_peak() {
        assert!(matches!(
            detect_glottal_formant(&MagnitudeSpectrum::flat(8000, 0.0), 100.0),
            Err(Error::NoPeak)
        ));
        // rising through the upper edge
        assert!(matches!(detect_glottal_formant(&spectrum(|f| f), 100.0), Err(Error::NoPeak)));
    }

    #[test]
    fn search_band() {
        assert_eq!(search_band_high(100.0, 8000), 500);
        assert_eq!(search_band_high(240.0, 8000), 1000);
        // the band excludes F1 of /a/
        let s = spectrum(|f| -((f - 728.0) / 50.0).powi(2));
        assert!(detect_glottal_formant(&s, 100.0).is_err());
    }

    #[test]
    fn lf_dense_spectrum_formant() {
        let params = LfParams::default();
        let pulse = lf_pulse(&params, 8000).unwrap();
        let fg = detect_glottal_formant(&magnitude_spectrum_db(&pulse.samples, 8000), 100.0).unwrap();
        let reference = reference_glottal_formant(&params, 8000).unwrap();
        assert!((fg - reference).abs() <= 1.0, "{fg} vs {reference}");
    }

    #[test]
    fn determination_examples() {
        assert_eq!(determination_rate(&[Some(0.0); 5], 0.1).unwrap(), 1.0);
        let e = [Some(0.05), Some(-0.2), Some(0.09), Some(0.5)];
        assert_eq!(determination_rate(&e, DETERMINATION_BOUND).unwrap(), 0.5);
        assert_eq!(determination_rate(&[Some(0.0), None], 0.1).unwrap(), 0.5);
        assert!(matches!(determination_rate(&[], 0.1), Err(Error::Empty(_))));
    }

    #[test]
    fn histogram_examples() {
        let h = default_error_histogram(&[Some(0.0); 7]).unwrap();
        assert_eq!(h.counts.len(), 50);
        assert_eq!(h.counts[25], 7);
        assert!((h.bin_center(25) - 0.01).abs() < 1e-12);
        let h = default_error_histogram(&[Some(0.9)]).unwrap();
        assert_eq!(h.above, 1);
        assert!(default_error_histogram(&[]).is_err());
    }

    #[test]
    fn histogram_csv() {
        let h = default_error_histogram(&[Some(0.0), Some(-0.3)]).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 51);
        assert_eq!(text.lines().next(), Some("bin_center,count"));
    }

    fn rel_error_strategy() -> impl Strategy<Value = Option<f64>> {
        prop_oneof![
            9 => (-1.0f64..1.0).prop_map(Some),
            1 => Just(None),
        ]
    }

    proptest! {
        #[test]
        fn histogram_conserves_count(errors in prop::collection::vec(rel_error_strategy(), 1..200)) {
            let h = default_error_histogram(&errors).unwrap();
            prop_assert_eq!(h.total(), errors.len());
        }

        #[test]
        fn rate_matches_histogram_surface(errors in prop::collection::vec(rel_error_strategy(), 1..200)) {
            // skip values that sit exactly on a bin edge
            prop_assume!(errors.iter().flatten().all(|v| (v.abs() - 0.1).abs() > 1e-12));
            let h = default_error_histogram(&errors).unwrap();
            let inside: usize = h.counts[20..30].iter().sum();
            let rate = determination_rate(&errors, 0.1).unwrap();
            prop_assert!((rate - inside as f64 / errors.len() as f64).abs() < 1e-12);
        }

        #[test]
        fn distortion_is_a_metric(
            a in prop::collection::vec(-40.0f64..40.0, 4001),
            b in prop::collection::vec(-40.0f64..40.0, 4001),
            c in prop::collection::vec(-40.0f64..40.0, 4001),
        ) {
            let (a, b, c) = (
                MagnitudeSpectrum::new(a, 8000).unwrap(),
                MagnitudeSpectrum::new(b, 8000).unwrap(),
                MagnitudeSpectrum::new(c, 8000).unwrap(),
            );
            let ab = spectral_distortion(&a, &b).unwrap();
            prop_assert!((ab - spectral_distortion(&b, &a).unwrap()).abs() < 1e-12);
            let ac = spectral_distortion(&a, &c).unwrap();
            let bc = spectral_distortion(&b, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }
    }
}
