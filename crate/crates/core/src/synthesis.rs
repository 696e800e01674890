//! Synthetic vowels: LF pulse trains through fixed all-pole vocal tracts,
//! plus the two perturbations of the benchmark (additive white noise and
//! displaced closure instants).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lf::{lf_pulse_train, LfParams};
use crate::signal::SampledSignal;
use crate::spectral::all_pole_filter;

pub const DEFAULT_FS: u32 = 8000;
pub const VOWEL_ORDER: usize = 10;
/// Minimum filter warm-up before the first returned sample.
const WARMUP_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vowel {
    A,
    E,
    I,
    U,
}

impl Vowel {
    pub const ALL: [Vowel; 4] = [Vowel::A, Vowel::E, Vowel::I, Vowel::U];

    pub fn f1_hz(self) -> f64 {
        self.formants()[0].0
    }

    /// (frequency, bandwidth) pairs in Hz.
    fn formants(self) -> [(f64, f64); 5] {
        match self {
            Vowel::A => [(728.0, 80.0), (1090.0, 90.0), (2440.0, 120.0), (3350.0, 150.0), (3750.0, 200.0)],
            Vowel::E => [(520.0, 80.0), (1840.0, 100.0), (2480.0, 120.0), (3350.0, 150.0), (3750.0, 200.0)],
            Vowel::I => [(304.0, 80.0), (2200.0, 100.0), (2960.0, 120.0), (3400.0, 150.0), (3800.0, 200.0)],
            Vowel::U => [(218.0, 80.0), (870.0, 90.0), (2240.0, 120.0), (3350.0, 150.0), (3750.0, 200.0)],
        }
    }

    pub fn filter(self, fs: u32) -> Result<VowelFilter> {
        let nyq = fs as f64 / 2.0;
        let mut a = vec![1.0];
        for (f, bw) in self.formants() {
            if f >= nyq {
                return Err(Error::InvalidParameter(format!(
                    "formant {f} Hz of /{self}/ is above the Nyquist frequency at {fs} Hz"
                )));
            }
            let r = (-PI * bw / fs as f64).exp();
            let section = [1.0, -2.0 * r * (2.0 * PI * f / fs as f64).cos(), r * r];
            let mut next = vec![0.0; a.len() + 2];
            for (i, ai) in a.iter().enumerate() {
                for (j, sj) in section.iter().enumerate() {
                    next[i + j] += ai * sj;
                }
            }
            a = next;
        }
        Ok(VowelFilter {
            label: self,
            ar_coeffs: a,
            f1_hz: self.f1_hz(),
        })
    }
}

impl fmt::Display for Vowel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vowel::A => "a",
            Vowel::E => "e",
            Vowel::I => "i",
            Vowel::U => "u",
        })
    }
}

impl FromStr for Vowel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Vowel::A),
            "e" => Ok(Vowel::E),
            "i" => Ok(Vowel::I),
            "u" => Ok(Vowel::U),
            _ => Err(Error::UnknownVowel(s.to_string())),
        }
    }
}

/// Order-10 all-pole vocal tract `1 / A(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VowelFilter {
    pub label: Vowel,
    /// `A(z)` coefficients, leading 1.
    pub ar_coeffs: Vec<f64>,
    pub f1_hz: f64,
}

pub fn builtin_vowel(label: &str) -> Result<VowelFilter> {
    label.parse::<Vowel>()?.filter(DEFAULT_FS)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisCondition {
    pub lf: LfParams,
    pub vowel: Vowel,
    /// Target SNR in dB; `f64::INFINITY` for clean speech.
    pub snr_db: f64,
    /// Closure-instant displacement as a signed fraction of the period.
    pub gci_error_frac: f64,
    pub seed: u64,
    pub n_periods: usize,
    pub fs: u32,
}

impl Default for SynthesisCondition {
    fn default() -> Self {
        Self {
            lf: LfParams::default(),
            vowel: Vowel::A,
            snr_db: f64::INFINITY,
            gci_error_frac: 0.0,
            seed: 0,
            n_periods: 10,
            fs: DEFAULT_FS,
        }
    }
}

impl SynthesisCondition {
    pub fn validate(&self) -> Result<()> {
        self.lf.validate()?;
        if !(self.gci_error_frac.abs() < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "GCI error fraction {} must satisfy |x| < 0.5",
                self.gci_error_frac
            )));
        }
        if self.n_periods < 5 {
            return Err(Error::InvalidParameter(format!(
                "need at least 5 periods, got {}",
                self.n_periods
            )));
        }
        if self.snr_db.is_nan() {
            return Err(Error::InvalidParameter("SNR is NaN".into()));
        }
        Ok(())
    }
}

/// A synthetic utterance and the clean source it was made from.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    /// Speech (noisy when the condition asks for it) with the true GCIs.
    pub speech: SampledSignal,
    /// Clean flow-derivative pulse train with the same GCIs.
    pub source: SampledSignal,
    pub filter: VowelFilter,
}

/// Filters an LF pulse train through the vowel's vocal tract and adds noise.
///
/// The filter runs over enough leading periods to reach its periodic steady
/// state before the returned segment starts, so every returned period is
/// identical in the clean case.
pub fn synthesize(cond: &SynthesisCondition) -> Result<Utterance> {
    cond.validate()?;
    let filter = cond.vowel.filter(cond.fs)?;
    let source = lf_pulse_train(&cond.lf, cond.n_periods, cond.fs)?;
    let period = cond.lf.period_samples(cond.fs);
    let warmup_periods = WARMUP_SAMPLES.div_ceil(period).max(2);
    let primed = lf_pulse_train(&cond.lf, warmup_periods + cond.n_periods, cond.fs)?;
    let filtered = all_pole_filter(&primed.samples, &filter.ar_coeffs);
    let clean = filtered[warmup_periods * period..].to_vec();
    let clean = SampledSignal::with_gcis(clean, cond.fs, source.gcis().to_vec())?;
    let speech = add_noise(&clean, cond.snr_db, cond.seed)?;
    Ok(Utterance {
        speech,
        source,
        filter,
    })
}

/// Adds white Gaussian noise at `snr_db` relative to the signal power.
pub fn add_noise(x: &SampledSignal, snr_db: f64, seed: u64) -> Result<SampledSignal> {
    if snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    let p = x.power();
    if !(p > 0.0) {
        return Err(Error::SilentSignal);
    }
    let sigma = (p / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = x
        .samples
        .iter()
        .map(|&v| {
            let w: f64 = StandardNormal.sample(&mut rng);
            v + sigma * w
        })
        .collect();
    Ok(SampledSignal {
        samples,
        fs: x.fs,
        gcis: x.gcis.clone(),
    })
}

/// Shifts every GCI by `round(frac * t0_samples)`.
pub fn perturb_gcis(gcis: &[usize], frac: f64, t0_samples: usize, len: usize) -> Result<Vec<usize>> {
    let shift = (frac * t0_samples as f64).round() as i64;
    let shifted = gcis
        .iter()
        .map(|&g| {
            let v = g as i64 + shift;
            if v < 0 || v >= len as i64 {
                Err(Error::GciOutOfRange(v))
            } else {
                Ok(v as usize)
            }
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(shifted)
}
