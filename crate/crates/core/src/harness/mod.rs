//! Benchmark orchestration: condition grids, per-frame scoring of the four
//! estimators, aggregation by factor and report export.
//!
//! Every cell synthesizes its own utterance from a seed derived from the
//! global seed and the cell's condition ([`cell_seed`]), so results do not
//! depend on which worker ran the cell or in which order.

mod grid;
mod records;
mod report;
mod run;

pub use grid::{stepped, BenchConfig, GridSpec};
pub use records::{read_records_csv, write_records_csv, RECORDS_HEADER};
pub use report::{
    aggregate, export, full_report, histograms, render_svg, vowel_label, write_report_csv, Factor, Metric,
    ReportRow, HISTOGRAM_SNR_DB, REPORT_HEADER,
};
pub use run::{
    cell_seed, parse_methods, run_cell, run_grid, CellCondition, CellFailure, EstimatorConfig, ExperimentRecord,
    GridOutcome, Method, MethodResult, PreparedCell, RunSetup, Status,
};
