use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use glotbench_core::harness::{
    export, parse_methods, read_records_csv, run_grid, write_records_csv, BenchConfig, CellCondition, Method,
    PreparedCell, RunSetup,
};
use glotbench_core::lf::LfShape;
use glotbench_core::metrics::{detect_glottal_formant, spectral_distortion, BAND_LOW_HZ};
use glotbench_core::synthesis::Vowel;
use glotbench_core::zzt::{extract_frame, zzt_decompose};
use glotbench_core::Error;

#[derive(Parser)]
#[command(name = "glotbench", version, about = "Glottal source estimation benchmark on synthetic vowels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one utterance and write WAV and CSV files.
    Synth(SynthArgs),
    /// Run one method on one frame and dump its source spectrum.
    Decompose(DecomposeArgs),
    /// Run the condition grid and write the record table.
    Bench(BenchArgs),
    /// Aggregate a record table into CSV and SVG reports.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct ConditionArgs {
    #[arg(long, default_value_t = 100.0)]
    f0: f64,
    #[arg(long, default_value = "a")]
    vowel: String,
    /// dB, or `inf` for clean speech.
    #[arg(long, default_value = "inf")]
    snr: String,
    /// GCI displacement as a fraction of the period.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gci_error: f64,
    /// `tense`, `modal`, `lax` or `oq/am/qa`.
    #[arg(long, default_value = "modal")]
    shape: String,
    #[arg(long, default_value_t = 10)]
    periods: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ConditionArgs {
    fn condition(&self) -> Result<CellCondition, Error> {
        let snr_db = match self.snr.trim() {
            "inf" | "clean" => f64::INFINITY,
            s => s
                .parse()
                .map_err(|_| Error::Config(format!("bad SNR {s:?}")))?,
        };
        Ok(CellCondition {
            f0: self.f0,
            vowel: self.vowel.parse::<Vowel>()?,
            snr_db,
            gci_error_frac: self.gci_error,
            shape: self.shape.parse::<LfShape>()?,
        })
    }

    fn setup(&self) -> RunSetup {
        RunSetup {
            seed: self.seed,
            n_periods: self.periods,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    cond: ConditionArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    cond: ConditionArgs,
    #[arg(long, default_value = "acdr_speech")]
    method: String,
    /// Interior GCI index; defaults to the middle one.
    #[arg(long)]
    frame: Option<usize>,
    #[arg(long)]
    use_dap: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid config, `key = value` lines or JSON. Defaults to the desk grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of zzt,iaif,acdr_speech,acdr_iaif.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    use_dap: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory for the report files; also where `records.csv` is looked
    /// for when `--records` is absent.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    BadConfig(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::UnknownVowel(_) | Error::TooFewSamples { .. } => {
                Failure::BadConfig(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Decompose(a) => decompose(a),
        Command::Bench(a) => bench(a),
        Command::Report(a) => report(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::BadConfig(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, content: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let cond = a.cond.condition()?;
    let cell = PreparedCell::new(&cond, &a.cond.setup())?;
    create_dir(&a.out)?;
    let u = &cell.utterance;
    u.speech.write_wav(&a.out.join("speech.wav"))?;
    u.source.write_wav(&a.out.join("source.wav"))?;
    let mut csv = String::from("n,speech,source\n");
    for (n, (s, g)) in u.speech.samples.iter().zip(&u.source.samples).enumerate() {
        let _ = writeln!(csv, "{n},{s:e},{g:e}");
    }
    write_file(&a.out.join("signal.csv"), csv)?;
    let mut gcis = String::from("k,true_gci,analysis_gci\n");
    for (k, (t, e)) in u.speech.gcis().iter().zip(&cell.analysis_gcis).enumerate() {
        let _ = writeln!(gcis, "{k},{t},{e}");
    }
    write_file(&a.out.join("gcis.csv"), gcis)?;
    println!(
        "wrote {} samples, {} GCIs, reference glottal formant {} Hz to {}",
        u.speech.len(),
        cell.analysis_gcis.len(),
        cell.fg_ref,
        a.out.display()
    );
    Ok(())
}

fn decompose(a: DecomposeArgs) -> Result<(), Failure> {
    let method: Method = a.method.parse()?;
    let cond = a.cond.condition()?;
    let mut setup = a.cond.setup();
    setup.estimators.iaif.use_dap = a.use_dap;
    let cell = PreparedCell::new(&cond, &setup)?;
    let frames = cell.frames();
    let k = a.frame.unwrap_or((frames.start + frames.end) / 2);
    if !frames.contains(&k) {
        return Err(Failure::BadConfig(format!(
            "frame {k} is not an interior GCI (valid {}..{})",
            frames.start, frames.end
        )));
    }
    let (est, reference) = cell.spectra(method, k, &setup.estimators)?;
    let hi = est.fs as usize / 2;
    let (est, reference) = (est.normalized(BAND_LOW_HZ, hi), reference.normalized(BAND_LOW_HZ, hi));
    create_dir(&a.out)?;
    let mut csv = String::from("hz,estimate_db,reference_db\n");
    for hz in 0..=hi {
        let _ = writeln!(csv, "{hz},{:.6},{:.6}", est.at(hz), reference.at(hz));
    }
    let path = a.out.join(format!("spectrum_{method}.csv"));
    write_file(&path, csv)?;
    if method == Method::Zzt {
        let frame = extract_frame(&cell.utterance.speech.samples, &cell.analysis_gcis, k)?;
        let d = zzt_decompose(&frame, Some(setup.estimators.zzt_window))?;
        let mut buf = Vec::new();
        d.write_roots_csv(&mut buf)
            .map_err(|e| Failure::Run(e.to_string()))?;
        write_file(&a.out.join("roots_zzt.csv"), buf)?;
    }
    let sd = spectral_distortion(&est, &reference)?;
    let fg = match detect_glottal_formant(&est, cond.f0) {
        Ok(fg) => format!("{fg:.1} Hz (reference {} Hz)", cell.fg_ref),
        Err(e) => e.to_string(),
    };
    println!("{method} at GCI {k}: SD {sd:.3} dB, glottal formant {fg}");
    println!("wrote {}", path.display());
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let mut cfg = match &a.grid {
        Some(path) => BenchConfig::from_file(path).map_err(|e| match e {
            Error::Io { .. } => Failure::BadConfig(e.to_string()),
            e => Failure::from(e),
        })?,
        None => BenchConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(m) = &a.methods {
        cfg.methods = parse_methods(m)?;
    }
    if a.use_dap {
        cfg.iaif.use_dap = true;
    }
    cfg.validate()?;
    let cells = cfg.grid.cells();
    println!("{} cells, {} methods, seed {}", cells.len(), cfg.methods.len(), cfg.seed);
    let start = Instant::now();
    let outcome = run_grid(&cells, &cfg.setup(), a.jobs)?;
    create_dir(&a.out)?;
    let path = a.out.join("records.csv");
    let mut buf = Vec::new();
    write_records_csv(&outcome.records, &mut buf)?;
    write_file(&path, buf)?;
    let summary = serde_json::json!({
        "cells": outcome.n_cells,
        "records": outcome.records.len(),
        "failed_cells": outcome.cell_failures,
        "config": cfg,
    });
    write_file(
        &a.out.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;
    for f in &outcome.cell_failures {
        log::warn!("cell {:?} failed: {}", f.condition, f.error);
    }
    println!(
        "{} records from {} cells ({} failed) in {:.1} s -> {}",
        outcome.records.len(),
        outcome.n_cells,
        outcome.cell_failures.len(),
        start.elapsed().as_secs_f64(),
        path.display()
    );
    if outcome.is_total_failure() {
        return Err(Failure::Run("every cell and method failed".into()));
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<(), Failure> {
    let path = a.records.unwrap_or_else(|| a.out.join("records.csv"));
    let file = fs::File::open(&path).map_err(|e| Failure::BadConfig(format!("{}: {e}", path.display())))?;
    let records = read_records_csv(file)?;
    if records.is_empty() {
        return Err(Failure::Run(format!("{} holds no records", path.display())));
    }
    for p in export(&records, &a.out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
