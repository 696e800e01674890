use glotbench_core::harness::{
    aggregate, export, read_records_csv, render_svg, run_cell, run_grid, write_records_csv, write_report_csv,
    BenchConfig, CellCondition, Factor, Metric, Method, ReportRow, RunSetup, Status, REPORT_HEADER,
};
use glotbench_core::lf::LfShape;
use glotbench_core::synthesis::Vowel;

fn csv_of(cfg: &BenchConfig, jobs: usize) -> Vec<u8> {
    let out = run_grid(&cfg.grid.cells(), &cfg.setup(), jobs).unwrap();
    let mut buf = Vec::new();
    write_records_csv(&out.records, &mut buf).unwrap();
    buf
}

fn small_grid() -> BenchConfig {
    BenchConfig::parse("f0 = 120, 200\nvowels = a, u\nsnr = 30, inf\ngci_error = 0, -0.06\nshapes = modal\nperiods = 6\nseed = 5\n")
        .unwrap()
}

#[test]
fn run_cell_counts_interior_frames_and_repeats_itself() {
    let cond = CellCondition {
        f0: 100.0,
        vowel: Vowel::A,
        snr_db: f64::INFINITY,
        gci_error_frac: 0.0,
        shape: LfShape::MODAL,
    };
    let setup = RunSetup::default();
    let recs = run_cell(&cond, &setup).unwrap();
    assert_eq!(recs.len(), 8);
    assert_eq!(recs.iter().map(|r| r.gci_index).collect::<Vec<_>>(), (1..9).collect::<Vec<_>>());
    assert_eq!(recs, run_cell(&cond, &setup).unwrap());
    for m in Method::ALL {
        let errs: Vec<f64> = recs.iter().filter_map(|r| r.result(m).fg_rel_error).collect();
        assert!(!errs.is_empty() && errs.iter().all(|e| e.is_finite()), "{m}");
    }
}

#[test]
fn two_by_two_grid() {
    let cfg = BenchConfig::parse("f0 = 100, 150\nvowels = e, i\nsnr = inf\ngci_error = 0\nshapes = lax\nperiods = 6\n").unwrap();
    assert_eq!(cfg.grid.cell_count(), 4);
    let out = run_grid(&cfg.grid.cells(), &cfg.setup(), 2).unwrap();
    assert_eq!(out.n_cells, 4);
    assert!(out.cell_failures.is_empty());
    assert_eq!(out.records.len(), 4 * 4);
    assert!(out.records.windows(2).all(|w| w[0].cmp_key(&w[1]).is_lt()));
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let cfg = small_grid();
    let one = csv_of(&cfg, 1);
    assert_eq!(one, csv_of(&cfg, 8));
    assert_eq!(one, csv_of(&cfg, 3));
}

#[test]
fn seed_changes_noisy_cells_only() {
    let a = small_grid();
    let b = BenchConfig { seed: 6, ..a.clone() };
    let ra = run_grid(&a.grid.cells(), &a.setup(), 0).unwrap().records;
    let rb = run_grid(&b.grid.cells(), &b.setup(), 0).unwrap().records;
    for (x, y) in ra.iter().zip(&rb) {
        if x.condition.is_clean() {
            assert_eq!(x, y);
        }
    }
    assert_ne!(ra, rb);
}

#[test]
fn records_survive_a_csv_round_trip() {
    let cfg = small_grid();
    let out = run_grid(&cfg.grid.cells(), &cfg.setup(), 0).unwrap();
    let mut buf = Vec::new();
    write_records_csv(&out.records, &mut buf).unwrap();
    assert_eq!(read_records_csv(&buf[..]).unwrap(), out.records);
}

#[test]
fn aggregation_conserves_records() {
    let cfg = small_grid();
    let records = run_grid(&cfg.grid.cells(), &cfg.setup(), 0).unwrap().records;
    for f in Factor::ALL {
        let rows = aggregate(&records, f).unwrap();
        let admitted = records.iter().filter(|r| f.admits(r)).count();
        for m in Method::ALL {
            let n: usize = rows.iter().filter(|r| r.method == m).map(|r| r.n).sum();
            assert_eq!(n, admitted, "{} {m}", f.name());
        }
    }
    let snr_rows = aggregate(&records, Factor::Snr).unwrap();
    let total: usize = snr_rows.iter().filter(|r| r.method == Method::Zzt).map(|r| r.n).sum();
    assert_eq!(total, records.len());
}

#[test]
fn failed_method_keeps_the_others() {
    let cfg = small_grid();
    let mut records = run_grid(&cfg.grid.cells(), &cfg.setup(), 0).unwrap().records;
    records[0].results[Method::Iaif.index()].status = Status::Failed;
    records[0].results[Method::Iaif.index()].sd_db = None;
    records[0].results[Method::Iaif.index()].fg_rel_error = None;
    let rows = aggregate(&records, Factor::Snr).unwrap();
    for m in Method::ALL {
        let n: usize = rows.iter().filter(|r| r.method == m).map(|r| r.n).sum();
        assert_eq!(n, records.len());
    }
    let failed: usize = rows.iter().filter(|r| r.method == Method::Iaif).map(|r| r.n_failed).sum();
    assert!(failed >= 1);
}

#[test]
fn zzt_rate_does_not_rise_as_noise_grows() {
    let cfg = BenchConfig::parse("f0 = 100, 140\nvowels = a, e\nshapes = modal\ngci_error = 0\nmethods = zzt\n").unwrap();
    let records = run_grid(&cfg.grid.cells(), &cfg.setup(), 0).unwrap().records;
    let rows = aggregate(&records, Factor::Snr).unwrap();
    let rates: Vec<f64> = rows.iter().map(|r| r.determination_rate).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].level, "10");
    assert_eq!(rows[5].level, "inf");
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
}

#[test]
fn vowel_view_lists_first_formants_in_order() {
    let cfg = BenchConfig::parse("f0 = 160\nsnr = 20, inf\ngci_error = 0\nshapes = tense\nperiods = 6\nmethods = acdr_speech\n")
        .unwrap();
    let records = run_grid(&cfg.grid.cells(), &cfg.setup(), 0).unwrap().records;
    let rows = aggregate(&records, Factor::Vowel).unwrap();
    let levels: Vec<&str> = rows.iter().map(|r| r.level.as_str()).collect();
    assert_eq!(
        levels,
        ["a (F1=728 Hz)", "e (F1=520 Hz)", "i (F1=304 Hz)", "u (F1=218 Hz)"]
    );
    assert!(rows.iter().all(|r| r.n == 4));
}

#[test]
fn report_files() {
    let row = ReportRow {
        factor: Factor::Snr,
        level: "10".into(),
        method: Method::Zzt,
        mean_sd_db: Some(1.5),
        determination_rate: 0.25,
        n: 4,
        n_failed: 0,
    };
    let mut buf = Vec::new();
    write_report_csv(std::slice::from_ref(&row), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next().unwrap(), REPORT_HEADER);

    let cfg = small_grid();
    let records = run_grid(&cfg.grid.cells(), &cfg.setup(), 0).unwrap().records;
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let p1 = export(&records, d1.path()).unwrap();
    let p2 = export(&records, d2.path()).unwrap();
    assert_eq!(p1.len(), p2.len());
    for (a, b) in p1.iter().zip(&p2) {
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
    assert!(p1.iter().any(|p| p.ends_with("report.csv")));
    assert!(p1.iter().any(|p| p.ends_with("snr_sd.svg")));
}

#[test]
fn svg_has_one_polyline_per_method() {
    let rows: Vec<ReportRow> = ["10", "20", "30", "40", "50", "inf"]
        .iter()
        .enumerate()
        .flat_map(|(i, level)| {
            Method::ALL.map(|m| ReportRow {
                factor: Factor::Snr,
                level: level.to_string(),
                method: m,
                mean_sd_db: Some(i as f64 + m.index() as f64),
                determination_rate: 0.5,
                n: 8,
                n_failed: 0,
            })
        })
        .collect();
    let svg = render_svg(&rows, Factor::Snr, Metric::MeanSd);
    assert_eq!(svg.matches("<polyline").count(), 4);
    for line in svg.lines().filter(|l| l.contains("<polyline")) {
        let pts = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split_whitespace().count(), 6);
    }
}
