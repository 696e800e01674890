//! Uniformly sampled real signals with optional glottal closure annotations.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A real signal sampled at `fs` Hz. `gcis`, when set, are strictly increasing
/// sample indices of glottal closure instants.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<f64>,
    pub fs: u32,
    pub gcis: Option<Vec<usize>>,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, fs: u32) -> Result<Self> {
        if fs == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        Ok(Self {
            samples,
            fs,
            gcis: None,
        })
    }

    pub fn with_gcis(samples: Vec<f64>, fs: u32, gcis: Vec<usize>) -> Result<Self> {
        let mut s = Self::new(samples, fs)?;
        validate_gcis(&gcis, s.samples.len())?;
        s.gcis = Some(gcis);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn gcis(&self) -> &[usize] {
        self.gcis.as_deref().unwrap_or(&[])
    }

    /// Mean square value.
    pub fn power(&self) -> f64 {
        power(&self.samples)
    }

    /// Writes the signal as 16-bit mono PCM, peak-normalized to 0.9 full scale.
    pub fn write_wav(&self, path: &Path) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.fs,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let wav_err = |source| Error::Wav {
            path: path.to_path_buf(),
            source,
        };
        let peak = self.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = if peak > 0.0 { 0.9 * i16::MAX as f64 / peak } else { 0.0 };
        let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
        for &x in &self.samples {
            writer
                .write_sample((x * scale).round() as i16)
                .map_err(wav_err)?;
        }
        writer.finalize().map_err(wav_err)
    }

    /// One sample per line, full precision.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.samples.len() * 24);
        for x in &self.samples {
            out.push_str(&format!("{x:e}\n"));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn validate_gcis(gcis: &[usize], len: usize) -> Result<()> {
    if let Some(&last) = gcis.last() {
        if last >= len {
            return Err(Error::GciOutOfRange(last as i64));
        }
    }
    if gcis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "GCIs must be strictly increasing".into(),
        ));
    }
    Ok(())
}

pub fn power(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}
