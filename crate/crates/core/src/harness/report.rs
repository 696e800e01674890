//! Aggregation by factor and CSV/SVG export.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{default_error_histogram, determination_rate, ErrorHistogram, DETERMINATION_BOUND};
use crate::synthesis::Vowel;

use super::run::{ExperimentRecord, Method, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Snr,
    GciError,
    F0,
    Vowel,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Snr, Factor::GciError, Factor::F0, Factor::Vowel];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Snr => "snr",
            Factor::GciError => "gci_error",
            Factor::F0 => "f0",
            Factor::Vowel => "vowel",
        }
    }

    fn axis_label(self) -> &'static str {
        match self {
            Factor::Snr => "SNR (dB)",
            Factor::GciError => "GCI error (fraction of T0)",
            Factor::F0 => "F0 (Hz)",
            Factor::Vowel => "vowel",
        }
    }

    /// Records this view is computed on. Noise views use everything; the GCI
    /// view uses clean speech; the F0 and vowel views use clean speech with
    /// exact GCIs.
    pub fn admits(self, r: &ExperimentRecord) -> bool {
        let c = &r.condition;
        match self {
            Factor::Snr => true,
            Factor::GciError => c.is_clean(),
            Factor::F0 | Factor::Vowel => c.is_clean() && c.gci_error_frac == 0.0,
        }
    }

    /// Sort key and label of the level of `r`.
    fn level(self, r: &ExperimentRecord) -> (f64, String) {
        let c = &r.condition;
        match self {
            Factor::Snr => (c.snr_db, fmt_num(c.snr_db)),
            Factor::GciError => (c.gci_error_frac, fmt_num(c.gci_error_frac)),
            Factor::F0 => (c.f0, fmt_num(c.f0)),
            Factor::Vowel => (c.vowel as u8 as f64, vowel_label(c.vowel)),
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub factor: Factor,
    pub level: String,
    pub method: Method,
    /// Mean over frames with a distortion value; `None` when every frame
    /// failed.
    pub mean_sd_db: Option<f64>,
    pub determination_rate: f64,
    /// Frames evaluated by this method at this level.
    pub n: usize,
    /// Frames without a distortion value.
    pub n_failed: usize,
}

/// Mean SD and determination rate per level of `factor` and per method.
/// Levels are in ascending order (vowels in a, e, i, u order); methods that
/// were skipped throughout produce no rows.
pub fn aggregate(records: &[ExperimentRecord], factor: Factor) -> Result<Vec<ReportRow>> {
    if records.is_empty() {
        return Err(Error::Empty("records"));
    }
    let mut levels: Vec<(f64, String)> = Vec::new();
    let mut groups: Vec<Vec<&ExperimentRecord>> = Vec::new();
    for r in records.iter().filter(|r| factor.admits(r)) {
        let (key, label) = factor.level(r);
        match levels.iter().position(|(k, _)| k.total_cmp(&key).is_eq()) {
            Some(i) => groups[i].push(r),
            None => {
                levels.push((key, label));
                groups.push(vec![r]);
            }
        }
    }
    if levels.is_empty() {
        return Err(Error::Empty("no record belongs to this view"));
    }
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[a].0.total_cmp(&levels[b].0));

    let mut rows = Vec::new();
    for i in order {
        for m in Method::ALL {
            let results: Vec<_> = groups[i]
                .iter()
                .map(|r| r.result(m))
                .filter(|x| x.status != Status::Skipped)
                .collect();
            if results.is_empty() {
                continue;
            }
            let sds: Vec<f64> = results.iter().filter_map(|x| x.sd_db).collect();
            let errs: Vec<Option<f64>> = results.iter().map(|x| x.fg_rel_error).collect();
            rows.push(ReportRow {
                factor,
                level: levels[i].1.clone(),
                method: m,
                mean_sd_db: (!sds.is_empty()).then(|| sds.iter().sum::<f64>() / sds.len() as f64),
                determination_rate: determination_rate(&errs, DETERMINATION_BOUND)?,
                n: results.len(),
                n_failed: results.len() - sds.len(),
            });
        }
    }
    Ok(rows)
}

/// Every factor view whose subset is non-empty.
pub fn full_report(records: &[ExperimentRecord]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for f in Factor::ALL {
        match aggregate(records, f) {
            Ok(r) => rows.extend(r),
            Err(Error::Empty(_)) if !records.is_empty() => {
                log::info!("no records for the {} view", f.name());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

pub const REPORT_HEADER: &str = "factor,level,method,mean_sd_db,determination_rate,n";

pub fn write_report_csv<W: Write>(rows: &[ReportRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.factor.name(),
            r.level,
            r.method,
            r.mean_sd_db.map_or(String::new(), |v| format!("{v:.6}")),
            format_args!("{:.6}", r.determination_rate),
            r.n
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MeanSd,
    DeterminationRate,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::MeanSd => "sd",
            Metric::DeterminationRate => "rate",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Metric::MeanSd => "mean spectral distortion (dB)",
            Metric::DeterminationRate => "determination rate",
        }
    }

    fn value(self, r: &ReportRow) -> Option<f64> {
        match self {
            Metric::MeanSd => r.mean_sd_db,
            Metric::DeterminationRate => Some(r.determination_rate),
        }
    }
}

const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e"];

/// Line plot of `metric` against the levels of one factor, one polyline per
/// method. `rows` must all belong to `factor`.
pub fn render_svg(rows: &[ReportRow], factor: Factor, metric: Metric) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (70.0, 150.0, 30.0, 60.0);
    let mut levels: Vec<&str> = Vec::new();
    for r in rows {
        if !levels.contains(&r.level.as_str()) {
            levels.push(&r.level);
        }
    }
    let values: Vec<f64> = rows.iter().filter_map(|r| metric.value(r)).collect();
    let (mut lo, mut hi) = match metric {
        Metric::DeterminationRate => (0.0, 1.0),
        Metric::MeanSd => (
            0.0,
            values.iter().cloned().fold(0.0, f64::max).max(1e-9) * 1.05,
        ),
    };
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let x_at = |i: usize| {
        if levels.len() == 1 {
            left + pw / 2.0
        } else {
            left + pw * i as f64 / (levels.len() - 1) as f64
        }
    };
    let y_at = |v: f64| top + ph * (1.0 - (v - lo) / (hi - lo));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
        top + ph,
        left + pw
    );
    for t in 0..=4 {
        let v = lo + (hi - lo) * t as f64 / 4.0;
        let y = y_at(v);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.2}</text>"#,
            left - 6.0,
            y + 4.0,
            v
        );
    }
    for (i, l) in levels.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x_at(i),
            top + ph + 18.0,
            xml_escape(l)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        factor.axis_label()
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        metric.label()
    );
    let mut legend = 0;
    for (mi, m) in Method::ALL.into_iter().enumerate() {
        let pts: Vec<String> = levels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| {
                rows.iter()
                    .find(|r| r.method == m && r.level == *l)
                    .and_then(|r| metric.value(r))
                    .map(|v| format!("{:.1},{:.1}", x_at(i), y_at(v)))
            })
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<polyline class="{m}" fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            COLORS[mi],
            pts.join(" ")
        );
        let ly = top + 10.0 + 18.0 * legend as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{m}</text>"#,
            lx + 20.0,
            COLORS[mi],
            lx + 26.0,
            ly + 4.0
        );
        legend += 1;
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Relative-error histogram of each selected method over the frames at
/// `snr_db`.
pub fn histograms(records: &[ExperimentRecord], snr_db: f64) -> Result<Vec<(Method, ErrorHistogram)>> {
    let mut out = Vec::new();
    for m in Method::ALL {
        let errs: Vec<Option<f64>> = records
            .iter()
            .filter(|r| r.condition.snr_db == snr_db)
            .map(|r| r.result(m))
            .filter(|x| x.status != Status::Skipped)
            .map(|x| x.fg_rel_error)
            .collect();
        if !errs.is_empty() {
            out.push((m, default_error_histogram(&errs)?));
        }
    }
    Ok(out)
}

/// SNR of the histogram figure.
pub const HISTOGRAM_SNR_DB: f64 = 50.0;

/// Writes `report.csv`, one SVG per factor and metric, and the error
/// histograms at 50 dB SNR when present. Returns the written paths.
pub fn export(records: &[ExperimentRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = full_report(records)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let path = dir.join("report.csv");
    let mut buf = Vec::new();
    write_report_csv(&rows, &mut buf).map_err(|e| Error::io(&path, e))?;
    fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    for f in Factor::ALL {
        let sub: Vec<ReportRow> = rows.iter().filter(|r| r.factor == f).cloned().collect();
        if sub.is_empty() {
            continue;
        }
        for metric in [Metric::MeanSd, Metric::DeterminationRate] {
            let path = dir.join(format!("{}_{}.svg", f.name(), metric.name()));
            fs::write(&path, render_svg(&sub, f, metric)).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    for (m, hist) in histograms(records, HISTOGRAM_SNR_DB)? {
        let path = dir.join(format!("histogram_{m}.csv"));
        let mut buf = Vec::new();
        hist.write_csv(&mut buf).map_err(|e| Error::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Level label of a vowel, annotated with its F1.
pub fn vowel_label(v: Vowel) -> String {
    format!("{} (F1={} Hz)", v, v.f1_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run::{CellCondition, MethodResult};
    use crate::lf::LfShape;

    fn rec(snr: f64, vowel: Vowel, sd: f64, err: Option<f64>) -> ExperimentRecord {
        let ok = MethodResult {
            status: if err.is_some() { Status::Ok } else { Status::NoPeak },
            sd_db: Some(sd),
            fg_rel_error: err,
        };
        ExperimentRecord {
            condition: CellCondition {
                f0: 100.0,
                vowel,
                snr_db: snr,
                gci_error_frac: 0.0,
                shape: LfShape::MODAL,
            },
            gci_index: 1,
            results: [ok, ok, ok, MethodResult::SKIPPED],
        }
    }

    #[test]
    fn constant_sd_gives_constant_mean() {
        let recs: Vec<_> = [10.0, 20.0, f64::INFINITY]
            .iter()
            .flat_map(|&s| [rec(s, Vowel::A, 1.0, Some(0.0)), rec(s, Vowel::U, 1.0, Some(0.3))])
            .collect();
        let rows = aggregate(&recs, Factor::Snr).unwrap();
        assert_eq!(rows.len(), 3 * 3);
        for r in &rows {
            assert_eq!(r.mean_sd_db, Some(1.0));
            assert_eq!(r.determination_rate, 0.5);
            assert_eq!(r.n, 2);
        }
        assert_eq!(rows[0].level, "10");
        assert_eq!(rows.last().unwrap().level, "inf");
    }

    #[test]
    fn vowel_view_is_clean_only_and_ordered() {
        let recs = vec![
            rec(f64::INFINITY, Vowel::U, 2.0, Some(0.0)),
            rec(f64::INFINITY, Vowel::A, 1.0, Some(0.0)),
            rec(10.0, Vowel::A, 9.0, Some(0.0)),
        ];
        let rows = aggregate(&recs, Factor::Vowel).unwrap();
        let levels: Vec<&str> = rows.iter().map(|r| r.level.as_str()).collect();
        assert_eq!(levels[0], "a (F1=728 Hz)");
        assert_eq!(levels[3], "u (F1=218 Hz)");
        assert_eq!(rows[0].mean_sd_db, Some(1.0));
    }

    #[test]
    fn no_peak_counts_against_rate_only() {
        let recs = vec![rec(20.0, Vowel::A, 1.0, Some(0.0)), rec(20.0, Vowel::A, 3.0, None)];
        let rows = aggregate(&recs, Factor::Snr).unwrap();
        assert_eq!(rows[0].mean_sd_db, Some(2.0));
        assert_eq!(rows[0].determination_rate, 0.5);
        assert_eq!(rows[0].n_failed, 0);
    }

    #[test]
    fn empty_view_is_an_error() {
        assert!(aggregate(&[], Factor::Snr).is_err());
        let noisy = vec![rec(10.0, Vowel::A, 1.0, Some(0.0))];
        assert!(matches!(aggregate(&noisy, Factor::F0), Err(Error::Empty(_))));
    }

    #[test]
    fn svg_structure() {
        let recs: Vec<_> = [10.0, 20.0, 30.0, 40.0, 50.0, f64::INFINITY]
            .iter()
            .map(|&s| {
                let mut r = rec(s, Vowel::A, s.min(60.0) / 10.0, Some(0.01));
                r.results[3] = r.results[0];
                r
            })
            .collect();
        let rows = aggregate(&recs, Factor::Snr).unwrap();
        let svg = render_svg(&rows, Factor::Snr, Metric::MeanSd);
        assert_eq!(svg.matches("<polyline").count(), 4);
        for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
            let points = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
            assert_eq!(points.split(' ').count(), 6);
        }
    }
}
