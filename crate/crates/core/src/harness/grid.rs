//! Condition grids and their config files.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::iaif::IaifConfig;
use crate::lf::{LfParams, LfShape};
use crate::synthesis::{Vowel, DEFAULT_FS};

use super::run::{CellCondition, EstimatorConfig, Method, RunSetup};

/// Levels of every factor. Cells are the cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub f0_values: Vec<f64>,
    pub vowels: Vec<Vowel>,
    /// `inf` stands for clean speech.
    #[serde(serialize_with = "ser_snr", deserialize_with = "de_snr")]
    pub snr_values: Vec<f64>,
    pub gci_error_fracs: Vec<f64>,
    pub lf_shapes: Vec<LfShape>,
    pub n_periods: usize,
    pub fs: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            f0_values: stepped(60.0, 240.0, 20.0),
            vowels: Vowel::ALL.to_vec(),
            snr_values: vec![10.0, 20.0, 30.0, 40.0, 50.0, f64::INFINITY],
            gci_error_fracs: stepped(-0.1, 0.1, 0.02),
            lf_shapes: LfShape::presets(),
            n_periods: 10,
            fs: DEFAULT_FS,
        }
    }
}

impl GridSpec {
    pub fn cell_count(&self) -> usize {
        self.f0_values.len()
            * self.vowels.len()
            * self.snr_values.len()
            * self.gci_error_fracs.len()
            * self.lf_shapes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cell_count() == 0 {
            return Err(Error::Config("every factor needs at least one level".into()));
        }
        if self.n_periods < 5 {
            return Err(Error::Config(format!("periods must be at least 5, got {}", self.n_periods)));
        }
        if self.fs == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        for &f0 in &self.f0_values {
            let samples = self.fs as f64 / f0;
            if !(f0 > 0.0) || samples.round() < 16.0 {
                return Err(Error::Config(format!("f0 {f0} Hz gives fewer than 16 samples per period")));
            }
        }
        for &s in &self.snr_values {
            if s.is_nan() || s == f64::NEG_INFINITY {
                return Err(Error::Config(format!("bad SNR level {s}")));
            }
        }
        for &g in &self.gci_error_fracs {
            if !(g.abs() < 0.5) {
                return Err(Error::Config(format!("GCI error {g} must satisfy |x| < 0.5")));
            }
        }
        for &shape in &self.lf_shapes {
            LfParams::default()
                .with_shape(shape)
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// All cells, in canonical order.
    pub fn cells(&self) -> Vec<CellCondition> {
        let mut cells = Vec::with_capacity(self.cell_count());
        for &f0 in &self.f0_values {
            for &vowel in &self.vowels {
                for &snr_db in &self.snr_values {
                    for &gci_error_frac in &self.gci_error_fracs {
                        for &shape in &self.lf_shapes {
                            cells.push(CellCondition {
                                f0,
                                vowel,
                                snr_db,
                                gci_error_frac,
                                shape,
                            });
                        }
                    }
                }
            }
        }
        cells.sort_by(|a, b| a.cmp_key(b));
        cells
    }
}

/// `lo, lo + step, ..., hi`, rounded to 12 decimals so that e.g. the middle
/// of `-0.1..0.1 step 0.02` is exactly zero.
pub fn stepped(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as i64;
    (0..=n.max(0))
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

fn ser_snr<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    #[serde(untagged)]
    enum Level {
        Num(f64),
        Text(&'static str),
    }
    let levels: Vec<Level> = v
        .iter()
        .map(|&x| if x.is_infinite() { Level::Text("inf") } else { Level::Num(x) })
        .collect();
    levels.serialize(s)
}

fn de_snr<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Level {
        Num(f64),
        Text(String),
    }
    Vec::<Level>::deserialize(d)?
        .into_iter()
        .map(|l| match l {
            Level::Num(x) => Ok(x),
            Level::Text(t) => parse_snr(&t).map_err(serde::de::Error::custom),
        })
        .collect()
}

fn parse_snr(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "clean" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad SNR level {s:?}"))),
    }
}

/// Everything a `bench` run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub grid: GridSpec,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub iaif: IaifConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            seed: 0,
            methods: Method::ALL.to_vec(),
            iaif: IaifConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        self.iaif.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn setup(&self) -> RunSetup {
        RunSetup {
            seed: self.seed,
            n_periods: self.grid.n_periods,
            fs: self.grid.fs,
            methods: self.methods.clone(),
            estimators: EstimatorConfig {
                iaif: self.iaif,
                ..Default::default()
            },
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// JSON when the text starts with `{`, `key = value` lines otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            parse_key_values(text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Plain config syntax:
///
/// ```text
/// # comment
/// f0 = 60..240 step 20
/// vowels = a, e, i, u
/// snr = 10, 20, inf
/// gci_error = -0.1..0.1 step 0.02
/// shapes = tense, modal, 0.5/0.7/0.05
/// periods = 10
/// fs = 8000
/// seed = 7
/// methods = zzt, acdr_speech
/// use_dap = false
/// ```
fn parse_key_values(text: &str) -> Result<BenchConfig> {
    let mut cfg = BenchConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
        let value = value.trim();
        let wrap = |e: Error| bad(e.to_string());
        match key.trim() {
            "f0" => cfg.grid.f0_values = number_list(value).map_err(wrap)?,
            "vowels" => cfg.grid.vowels = list(value, |s| s.parse::<Vowel>()).map_err(wrap)?,
            "snr" => cfg.grid.snr_values = list(value, parse_snr).map_err(wrap)?,
            "gci_error" => cfg.grid.gci_error_fracs = number_list(value).map_err(wrap)?,
            "shapes" => cfg.grid.lf_shapes = list(value, |s| s.parse::<LfShape>()).map_err(wrap)?,
            "periods" => cfg.grid.n_periods = scalar(value).map_err(wrap)?,
            "fs" => cfg.grid.fs = scalar(value).map_err(wrap)?,
            "seed" => cfg.seed = scalar(value).map_err(wrap)?,
            "methods" => cfg.methods = list(value, |s| s.parse::<Method>()).map_err(wrap)?,
            "use_dap" => cfg.iaif.use_dap = scalar(value).map_err(wrap)?,
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(cfg)
}

fn scalar<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse::<T>().map_err(|_| Error::Config(format!("bad value {s:?}")))
}

fn list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| f(t).map_err(|e| Error::Config(e.to_string())))
        .collect()
}

/// Comma list whose items may be `lo..hi step s` ranges.
fn number_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            Some((lo, rest)) => {
                let (hi, step) = rest
                    .split_once("step")
                    .ok_or_else(|| Error::Config(format!("range {item:?} needs a step")))?;
                let (lo, hi, step): (f64, f64, f64) = (scalar(lo.trim())?, scalar(hi.trim())?, scalar(step.trim())?);
                if !(step > 0.0) || hi < lo {
                    return Err(Error::Config(format!("empty range {item:?}")));
                }
                out.extend(stepped(lo, hi, step));
            }
            None => out.push(scalar(item)?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_size() {
        let g = GridSpec::default();
        assert_eq!(g.f0_values.len(), 10);
        assert_eq!(g.gci_error_fracs.len(), 11);
        assert_eq!(g.cell_count(), 10 * 4 * 6 * 11 * 3);
        assert_eq!(g.cells().len(), g.cell_count());
    }

    #[test]
    fn stepped_hits_zero() {
        let v = stepped(-0.1, 0.1, 0.02);
        assert_eq!(v[5], 0.0);
        assert_eq!(v[0], -0.1);
        assert_eq!(v[10], 0.1);
        assert_eq!(stepped(60.0, 240.0, 20.0).last(), Some(&240.0));
    }

    #[test]
    fn key_value_config() {
        let cfg = BenchConfig::parse(
            "# small\nf0 = 100, 200\nvowels = a,u\nsnr = 20, inf\ngci_error = 0\nshapes = modal\nperiods = 6\nseed = 9\nmethods = zzt, acdr_speech\nuse_dap = true\n",
        )
        .unwrap();
        assert_eq!(cfg.grid.f0_values, vec![100.0, 200.0]);
        assert_eq!(cfg.grid.vowels, vec![Vowel::A, Vowel::U]);
        assert_eq!(cfg.grid.snr_values, vec![20.0, f64::INFINITY]);
        assert_eq!(cfg.grid.lf_shapes, vec![LfShape::MODAL]);
        assert_eq!(cfg.grid.n_periods, 6);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.methods, vec![Method::Zzt, Method::AcdrSpeech]);
        assert!(cfg.iaif.use_dap);
        assert_eq!(cfg.grid.cell_count(), 8);
    }

    #[test]
    fn json_config_round_trip() {
        let cfg = BenchConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(BenchConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn bad_configs() {
        for text in [
            "colour = blue",
            "f0 = fast",
            "f0 = 100..50 step 10",
            "vowels = o",
            "snr = loud",
            "gci_error = 0.6",
            "periods = 3",
            "f0 = 1000",
            "methods =",
            "{\"seed\": \"x\"}",
            "{\"grid\": {\"colour\": 1}}",
        ] {
            assert!(matches!(BenchConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
