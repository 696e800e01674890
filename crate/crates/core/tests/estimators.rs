use glotbench_core::acdr::{acdr_estimate, acdr_on_frame, acdr_on_iaif, acdr_on_speech, AcdrConfig, AcdrRegion};
use glotbench_core::harness::{run_grid, BenchConfig, CellCondition, Method, RunSetup};
use glotbench_core::iaif::{iaif, iaif_frame, iaif_full_signal, IaifConfig};
use glotbench_core::lf::{lf_pulse_train, reference_glottal_formant, LfParams, LfShape};
use glotbench_core::metrics::{detect_glottal_formant, spectral_distortion, BAND_LOW_HZ};
use glotbench_core::signal::SampledSignal;
use glotbench_core::spectral::{magnitude_spectrum_db, MagnitudeSpectrum, WindowKind};
use glotbench_core::synthesis::{synthesize, SynthesisCondition, Vowel};
use glotbench_core::zzt::{anticausal_spectrum, extract_frame, zzt_decompose};
use proptest::prelude::*;

const FS: u32 = 8000;

fn utterance(vowel: Vowel, f0: f64) -> (SampledSignal, SampledSignal) {
    let u = synthesize(&SynthesisCondition {
        lf: LfParams::default().with_f0(f0),
        vowel,
        snr_db: f64::INFINITY,
        gci_error_frac: 0.0,
        seed: 0,
        n_periods: 10,
        fs: FS,
    })
    .unwrap();
    (u.speech, u.source)
}

fn normalized(x: &[f64]) -> MagnitudeSpectrum {
    magnitude_spectrum_db(x, FS).normalized(BAND_LOW_HZ, FS as usize / 2)
}

fn rel_error(spec: &MagnitudeSpectrum, lf: &LfParams) -> f64 {
    let fg = detect_glottal_formant(spec, lf.f0).unwrap();
    let r = reference_glottal_formant(lf, FS).unwrap();
    (fg - r) / r
}

/// Open phase `[gci - Te, gci]` of a two-period frame.
fn open_phase(x: &[f64], gci_offset: usize, te: usize) -> &[f64] {
    &x[gci_offset - te..=gci_offset]
}

/// Mean open-phase SD of the IAIF estimate of `speech` against `source`.
fn iaif_open_phase_sd(speech: &[f64], source: &SampledSignal, cfg: &IaifConfig) -> f64 {
    let te = LfParams::default().te_index(FS);
    let gcis = source.gcis();
    let sds: Vec<f64> = (1..gcis.len() - 1)
        .map(|k| {
            let est = iaif_frame(speech, gcis, k, FS, cfg).unwrap();
            let truth = extract_frame(&source.samples, gcis, k).unwrap();
            spectral_distortion(
                &normalized(open_phase(&est.samples, est.gci_offset, te)),
                &normalized(open_phase(&truth.samples, truth.gci_offset, te)),
            )
            .unwrap()
        })
        .collect();
    sds.iter().sum::<f64>() / sds.len() as f64
}

#[test]
fn every_estimator_finds_the_glottal_formant_on_clean_a() {
    let lf = LfParams::default();
    let (speech, _) = utterance(Vowel::A, 100.0);
    let (x, g) = (&speech.samples, speech.gcis());
    let cfg = IaifConfig::default();
    let acdr = AcdrConfig::default();
    let te = lf.te_index(FS);
    for k in 1..g.len() - 1 {
        let frame = extract_frame(x, g, k).unwrap();
        let zzt = anticausal_spectrum(&zzt_decompose(&frame, Some(WindowKind::Blackman)).unwrap(), FS);
        let est = iaif_frame(x, g, k, FS, &cfg).unwrap();
        let iaif_spec = normalized(open_phase(&est.samples, est.gci_offset, te));
        let on_speech = normalized(&acdr_on_speech(x, g, k, &acdr).unwrap());
        let on_iaif = normalized(&acdr_on_iaif(x, g, k, FS, &cfg, &acdr).unwrap());
        for (name, spec) in [("zzt", zzt), ("iaif", iaif_spec), ("acdr_speech", on_speech), ("acdr_iaif", on_iaif)] {
            let e = rel_error(&spec, &lf);
            assert!(e.abs() <= 0.10, "{name} frame {k}: {e:+.3}");
        }
    }
}

#[test]
fn iaif_identity_tract_bounds_vowel_a() {
    let cfg = IaifConfig::default();
    let source = lf_pulse_train(&LfParams::default(), 10, FS).unwrap();
    let identity = iaif_open_phase_sd(&source.samples, &source, &cfg);
    let (speech, source_a) = utterance(Vowel::A, 100.0);
    let vowel_a = iaif_open_phase_sd(&speech.samples, &source_a, &cfg);
    assert!(identity <= vowel_a, "{identity} > {vowel_a}");
    assert!((identity - IDENTITY_SD).abs() < 1e-6, "identity SD {identity}");
    assert!((vowel_a - VOWEL_A_SD).abs() < 1e-6, "/a/ SD {vowel_a}");
}

const IDENTITY_SD: f64 = 1.115430087193;
const VOWEL_A_SD: f64 = 4.708864312449;

#[test]
fn iaif_degrades_with_pitch_on_u() {
    let setup = RunSetup {
        methods: vec![Method::Iaif],
        ..RunSetup::default()
    };
    let mean_sd = |f0| {
        let cell = CellCondition {
            f0,
            vowel: Vowel::U,
            snr_db: f64::INFINITY,
            gci_error_frac: 0.0,
            shape: LfShape::MODAL,
        };
        let recs = glotbench_core::harness::run_cell(&cell, &setup).unwrap();
        let sds: Vec<f64> = recs.iter().filter_map(|r| r.result(Method::Iaif).sd_db).collect();
        sds.iter().sum::<f64>() / sds.len() as f64
    };
    let (low, high) = (mean_sd(60.0), mean_sd(240.0));
    assert!(high >= low, "{high} < {low}");
}

#[test]
fn iaif_full_signal_frames() {
    let (speech, _) = utterance(Vowel::I, 120.0);
    let cfg = IaifConfig::default();
    let frames = iaif_full_signal(&speech, &cfg).unwrap();
    assert_eq!(frames.keys().copied().collect::<Vec<_>>(), (1..9).collect::<Vec<_>>());
    for (k, f) in &frames {
        let framing = extract_frame(&speech.samples, speech.gcis(), *k).unwrap();
        assert_eq!((f.start, f.gci_offset, f.samples.len()), (framing.start, framing.gci_offset, framing.samples.len()));
        assert_eq!(f, &iaif_frame(&speech.samples, speech.gcis(), *k, FS, &cfg).unwrap());
    }
}

#[test]
fn iaif_rejects_silence() {
    assert!(iaif(&[0.0; 200], FS, &IaifConfig::default(), None).is_err());
}

#[test]
fn acdr_variants_are_deterministic() {
    let (speech, _) = utterance(Vowel::E, 160.0);
    let (x, g) = (&speech.samples, speech.gcis());
    let cfg = AcdrConfig::default();
    assert_eq!(acdr_on_speech(x, g, 3, &cfg).unwrap(), acdr_on_speech(x, g, 3, &cfg).unwrap());
    let i = IaifConfig::default();
    assert_eq!(acdr_on_iaif(x, g, 3, FS, &i, &cfg).unwrap(), acdr_on_iaif(x, g, 3, FS, &i, &cfg).unwrap());
}

#[test]
fn acdr_keeps_a_purely_anticausal_frame() {
    // time-reversed decaying exponential ending at the GCI, silence after
    let n = 160;
    let gci = 80;
    let frame: Vec<f64> = (0..n)
        .map(|i| if i <= gci { (-0.08 * (gci - i) as f64).exp() } else { 0.0 })
        .collect();
    let est = acdr_estimate(&frame, gci, &AcdrConfig::default()).unwrap();
    let full = AcdrConfig {
        region: AcdrRegion::FullFrame,
        ..AcdrConfig::default()
    };
    let whole = acdr_estimate(&frame, gci, &full).unwrap();
    let (a, b) = (magnitude_spectrum_db(&est, FS), magnitude_spectrum_db(&whole, FS));
    for hz in 20..=4000 {
        assert!((a.at(hz) - b.at(hz)).abs() <= 0.5, "{hz} Hz");
    }
}

#[test]
fn sharp_acdr_window_is_no_worse_than_a_soft_one() {
    let cfg = BenchConfig::parse("f0 = 100, 160, 220\nsnr = inf\ngci_error = 0\nshapes = modal\nmethods = acdr_speech\n")
        .unwrap();
    let mean_sd = |setup: &RunSetup| {
        let out = run_grid(&cfg.grid.cells(), setup, 0).unwrap();
        let sds: Vec<f64> = out
            .records
            .iter()
            .filter_map(|r| r.result(Method::AcdrSpeech).sd_db)
            .collect();
        sds.iter().sum::<f64>() / sds.len() as f64
    };
    let sharp = cfg.setup();
    let mut soft = sharp.clone();
    soft.estimators.acdr.window = WindowKind::HanningPoisson { alpha: 0.0 };
    let (a, b) = (mean_sd(&sharp), mean_sd(&soft));
    assert!(a <= b, "alpha 2: {a}, alpha 0: {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn iaif_distortion_is_gain_invariant(c in 1e-3..1e3f64, vowel in 0usize..4) {
        let (speech, source) = utterance(Vowel::ALL[vowel], 140.0);
        let cfg = IaifConfig::default();
        let scaled: Vec<f64> = speech.samples.iter().map(|x| c * x).collect();
        let a = iaif_open_phase_sd(&speech.samples, &source, &cfg);
        let b = iaif_open_phase_sd(&scaled, &source, &cfg);
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn acdr_length_and_scaling(k in 1usize..9, c in 1e-3..1e3f64, vowel in 0usize..4) {
        let (speech, _) = utterance(Vowel::ALL[vowel], 100.0);
        let frame = extract_frame(&speech.samples, speech.gcis(), k).unwrap();
        let cfg = AcdrConfig::default();
        let est = acdr_on_frame(&frame, &cfg).unwrap();
        prop_assert_eq!(est.len(), frame.gci_offset + 1);
        let louder: Vec<f64> = frame.samples.iter().map(|x| c * x).collect();
        let est2 = acdr_estimate(&louder, frame.gci_offset, &cfg).unwrap();
        for (a, b) in est.iter().zip(&est2) {
            prop_assert!((c * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        let f0 = 100.0;
        let fa = detect_glottal_formant(&magnitude_spectrum_db(&est, FS), f0).ok();
        let fb = detect_glottal_formant(&magnitude_spectrum_db(&est2, FS), f0).ok();
        match (fa, fb) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-6),
            (a, b) => prop_assert_eq!(a.is_none(), b.is_none()),
        }
    }
}
