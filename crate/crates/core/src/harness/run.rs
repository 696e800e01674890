//! Per-cell evaluation of the four estimators.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acdr::{acdr_on_frame, AcdrConfig};
use crate::error::{Error, Result};
use crate::iaif::{iaif_frame, IaifConfig};
use crate::lf::{reference_glottal_formant, LfParams, LfShape};
use crate::metrics::{detect_glottal_formant, spectral_distortion, FgError, BAND_LOW_HZ};
use crate::spectral::{magnitude_spectrum_db, MagnitudeSpectrum, WindowKind};
use crate::synthesis::{perturb_gcis, synthesize, SynthesisCondition, Utterance, Vowel};
use crate::zzt::{anticausal_spectrum, extract_frame, zzt_decompose, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Zzt,
    Iaif,
    AcdrSpeech,
    AcdrIaif,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Zzt, Method::Iaif, Method::AcdrSpeech, Method::AcdrIaif];

    pub fn name(self) -> &'static str {
        match self {
            Method::Zzt => "zzt",
            Method::Iaif => "iaif",
            Method::AcdrSpeech => "acdr_speech",
            Method::AcdrIaif => "acdr_iaif",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Parses `zzt,iaif,...`.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    Ok(methods)
}

/// One point of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellCondition {
    pub f0: f64,
    pub vowel: Vowel,
    /// `f64::INFINITY` for clean speech.
    pub snr_db: f64,
    pub gci_error_frac: f64,
    pub shape: LfShape,
}

impl CellCondition {
    /// Total order used for canonical output.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.f0
            .total_cmp(&other.f0)
            .then(self.vowel.cmp(&other.vowel))
            .then(self.snr_db.total_cmp(&other.snr_db))
            .then(self.gci_error_frac.total_cmp(&other.gci_error_frac))
            .then(self.shape.oq.total_cmp(&other.shape.oq))
            .then(self.shape.am.total_cmp(&other.shape.am))
            .then(self.shape.qa.total_cmp(&other.shape.qa))
    }

    pub fn lf(&self) -> LfParams {
        LfParams::default().with_f0(self.f0).with_shape(self.shape)
    }

    pub fn is_clean(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// Stable 64-bit seed of a cell: XXH3 of the little-endian global seed
/// followed by the bit patterns of f0, vowel letter, SNR, GCI error, oq, am
/// and qa.
pub fn cell_seed(global_seed: u64, cond: &CellCondition) -> u64 {
    let mut bytes = Vec::with_capacity(57);
    bytes.extend_from_slice(&global_seed.to_le_bytes());
    bytes.extend_from_slice(&cond.f0.to_bits().to_le_bytes());
    bytes.push(cond.vowel.to_string().as_bytes()[0]);
    for v in [
        cond.snr_db,
        cond.gci_error_frac,
        cond.shape.oq,
        cond.shape.am,
        cond.shape.qa,
    ] {
        bytes.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    xxhash_rust::xxh3::xxh3_64(&bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Decomposition succeeded but no glottal formant was found.
    NoPeak,
    Failed,
    /// Method not selected for this run.
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::NoPeak => "no_peak",
            Status::Failed => "failed",
            Status::Skipped => "skipped",
        })
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Status::Ok),
            "no_peak" => Ok(Status::NoPeak),
            "failed" => Ok(Status::Failed),
            "skipped" => Ok(Status::Skipped),
            _ => Err(Error::Config(format!("unknown status {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub status: Status,
    pub sd_db: Option<f64>,
    pub fg_rel_error: Option<f64>,
}

impl MethodResult {
    pub const SKIPPED: MethodResult = MethodResult {
        status: Status::Skipped,
        sd_db: None,
        fg_rel_error: None,
    };
    pub const FAILED: MethodResult = MethodResult {
        status: Status::Failed,
        sd_db: None,
        fg_rel_error: None,
    };
}

/// One analysed frame of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub condition: CellCondition,
    pub gci_index: usize,
    /// Indexed by [`Method::index`].
    pub results: [MethodResult; 4],
}

impl ExperimentRecord {
    pub fn result(&self, m: Method) -> &MethodResult {
        &self.results[m.index()]
    }

    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.condition
            .cmp_key(&other.condition)
            .then(self.gci_index.cmp(&other.gci_index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub zzt_window: WindowKind,
    pub iaif: IaifConfig,
    pub acdr: AcdrConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            zzt_window: WindowKind::Blackman,
            iaif: IaifConfig::default(),
            acdr: AcdrConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub seed: u64,
    pub n_periods: usize,
    pub fs: u32,
    pub methods: Vec<Method>,
    pub estimators: EstimatorConfig,
}

impl Default for RunSetup {
    fn default() -> Self {
        Self {
            seed: 0,
            n_periods: 10,
            fs: crate::synthesis::DEFAULT_FS,
            methods: Method::ALL.to_vec(),
            estimators: EstimatorConfig::default(),
        }
    }
}

/// A synthesized cell ready for per-frame analysis.
#[derive(Debug, Clone)]
pub struct PreparedCell {
    pub condition: CellCondition,
    pub utterance: Utterance,
    /// Closure instants handed to the estimators (true ones, shifted).
    pub analysis_gcis: Vec<usize>,
    pub fg_ref: f64,
    te: usize,
}

impl PreparedCell {
    pub fn new(cond: &CellCondition, setup: &RunSetup) -> Result<Self> {
        let lf = cond.lf();
        let utterance = synthesize(&SynthesisCondition {
            lf,
            vowel: cond.vowel,
            snr_db: cond.snr_db,
            gci_error_frac: cond.gci_error_frac,
            seed: cell_seed(setup.seed, cond),
            n_periods: setup.n_periods,
            fs: setup.fs,
        })?;
        let analysis_gcis = perturb_gcis(
            utterance.speech.gcis(),
            cond.gci_error_frac,
            lf.period_samples(setup.fs),
            utterance.speech.len(),
        )?;
        Ok(Self {
            condition: *cond,
            fg_ref: reference_glottal_formant(&lf, setup.fs)?,
            te: lf.te_index(setup.fs),
            utterance,
            analysis_gcis,
        })
    }

    pub fn fs(&self) -> u32 {
        self.utterance.speech.fs
    }

    /// Interior GCI indices.
    pub fn frames(&self) -> std::ops::Range<usize> {
        1..self.analysis_gcis.len() - 1
    }

    fn speech_frame(&self, k: usize) -> Result<Frame> {
        extract_frame(&self.utterance.speech.samples, &self.analysis_gcis, k)
    }

    fn true_source_frame(&self, k: usize) -> Result<Frame> {
        extract_frame(&self.utterance.source.samples, self.utterance.source.gcis(), k)
    }

    fn iaif_frame(&self, k: usize, est: &EstimatorConfig) -> Result<Frame> {
        iaif_frame(
            &self.utterance.speech.samples,
            &self.analysis_gcis,
            k,
            self.fs(),
            &est.iaif,
        )
    }

    /// Open phase of a source frame: the `te` samples before its GCI and the
    /// GCI sample itself.
    fn open_phase<'a>(&self, frame: &'a Frame) -> Result<&'a [f64]> {
        let start = frame.gci_offset.checked_sub(self.te).ok_or_else(|| {
            Error::DegenerateFrame(format!(
                "open phase of {} samples exceeds the left period of {}",
                self.te, frame.gci_offset
            ))
        })?;
        Ok(&frame.samples[start..=frame.gci_offset])
    }

    /// Estimated and reference source spectra of method `m` at GCI `k`.
    ///
    /// The reference is the true source at the true GCI, cut the way the
    /// method cuts its own estimate: windowed pre-GCI region for ZZT and both
    /// ACDR variants, rectangular open phase for IAIF.
    pub fn spectra(&self, m: Method, k: usize, est: &EstimatorConfig) -> Result<(MagnitudeSpectrum, MagnitudeSpectrum)> {
        self.spectra_with(m, k, est, None)
    }

    fn spectra_with(
        &self,
        m: Method,
        k: usize,
        est: &EstimatorConfig,
        iaif: Option<&Frame>,
    ) -> Result<(MagnitudeSpectrum, MagnitudeSpectrum)> {
        let fs = self.fs();
        let truth = self.true_source_frame(k)?;
        let owned;
        let iaif = match (m, iaif) {
            (Method::Iaif | Method::AcdrIaif, None) => {
                owned = self.iaif_frame(k, est)?;
                Some(&owned)
            }
            (_, given) => given,
        };
        Ok(match m {
            Method::Zzt => {
                let d = zzt_decompose(&self.speech_frame(k)?, Some(est.zzt_window))?;
                let reference = acdr_on_frame(
                    &truth,
                    &AcdrConfig {
                        window: est.zzt_window,
                        ..Default::default()
                    },
                )?;
                (anticausal_spectrum(&d, fs), magnitude_spectrum_db(&reference, fs))
            }
            Method::Iaif => {
                let frame = iaif.expect("IAIF frame");
                (
                    magnitude_spectrum_db(self.open_phase(frame)?, fs),
                    magnitude_spectrum_db(self.open_phase(&truth)?, fs),
                )
            }
            Method::AcdrSpeech => (
                magnitude_spectrum_db(&acdr_on_frame(&self.speech_frame(k)?, &est.acdr)?, fs),
                magnitude_spectrum_db(&acdr_on_frame(&truth, &est.acdr)?, fs),
            ),
            Method::AcdrIaif => {
                let frame = iaif.expect("IAIF frame");
                (
                    magnitude_spectrum_db(&acdr_on_frame(frame, &est.acdr)?, fs),
                    magnitude_spectrum_db(&acdr_on_frame(&truth, &est.acdr)?, fs),
                )
            }
        })
    }

    fn score(&self, est: &MagnitudeSpectrum, reference: &MagnitudeSpectrum) -> Result<MethodResult> {
        let hi = self.fs() as usize / 2;
        let sd = spectral_distortion(
            &est.normalized(BAND_LOW_HZ, hi),
            &reference.normalized(BAND_LOW_HZ, hi),
        )?;
        if !sd.is_finite() {
            return Err(Error::DegenerateFrame("non-finite spectral distortion".into()));
        }
        Ok(match detect_glottal_formant(est, self.condition.f0) {
            Ok(fg) => MethodResult {
                status: Status::Ok,
                sd_db: Some(sd),
                fg_rel_error: Some(FgError::new(fg, self.fg_ref)?.rel_error),
            },
            Err(Error::NoPeak) => MethodResult {
                status: Status::NoPeak,
                sd_db: Some(sd),
                fg_rel_error: None,
            },
            Err(e) => return Err(e),
        })
    }

    /// All selected methods on frame `k`; failures are recorded, not raised.
    pub fn evaluate(&self, k: usize, setup: &RunSetup) -> ExperimentRecord {
        let est = &setup.estimators;
        let wants = |m: Method| setup.methods.contains(&m);
        let iaif = if wants(Method::Iaif) || wants(Method::AcdrIaif) {
            Some(self.iaif_frame(k, est))
        } else {
            None
        };
        let mut results = [MethodResult::SKIPPED; 4];
        for m in Method::ALL.into_iter().filter(|&m| wants(m)) {
            let outcome = match (m, &iaif) {
                (Method::Iaif | Method::AcdrIaif, Some(Err(e))) => Err(Error::DegenerateFrame(e.to_string())),
                (_, Some(Ok(frame))) => self.spectra_with(m, k, est, Some(frame)),
                _ => self.spectra_with(m, k, est, None),
            }
            .and_then(|(e, r)| self.score(&e, &r));
            results[m.index()] = outcome.unwrap_or_else(|e| {
                log::debug!("{m} failed at GCI {k} of {:?}: {e}", self.condition);
                MethodResult::FAILED
            });
        }
        ExperimentRecord {
            condition: self.condition,
            gci_index: k,
            results,
        }
    }
}

/// Synthesizes one cell and scores every interior frame.
pub fn run_cell(cond: &CellCondition, setup: &RunSetup) -> Result<Vec<ExperimentRecord>> {
    let cell = PreparedCell::new(cond, setup)?;
    Ok(cell.frames().map(|k| cell.evaluate(k, setup)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub condition: CellCondition,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct GridOutcome {
    /// Canonically sorted.
    pub records: Vec<ExperimentRecord>,
    pub cell_failures: Vec<CellFailure>,
    pub n_cells: usize,
}

impl GridOutcome {
    /// No cell produced a single scored method result.
    pub fn is_total_failure(&self) -> bool {
        !self.records.iter().any(|r| {
            r.results
                .iter()
                .any(|m| matches!(m.status, Status::Ok | Status::NoPeak))
        })
    }
}

/// Runs `cells` on `jobs` worker threads (0 = rayon default). The output does
/// not depend on `jobs`.
pub fn run_grid(cells: &[CellCondition], setup: &RunSetup, jobs: usize) -> Result<GridOutcome> {
    if cells.is_empty() {
        return Err(Error::Empty("grid"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let per_cell: Vec<(CellCondition, Result<Vec<ExperimentRecord>>)> =
        pool.install(|| cells.par_iter().map(|c| (*c, run_cell(c, setup))).collect());
    let mut out = GridOutcome {
        n_cells: cells.len(),
        ..Default::default()
    };
    for (condition, res) in per_cell {
        match res {
            Ok(recs) => out.records.extend(recs),
            Err(e) => out.cell_failures.push(CellFailure {
                condition,
                error: e.to_string(),
            }),
        }
    }
    out.records.sort_by(|a, b| a.cmp_key(b));
    out.cell_failures.sort_by(|a, b| a.condition.cmp_key(&b.condition));
    Ok(out)
}
