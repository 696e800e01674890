//! Record tables on disk: one CSV row per frame and method.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lf::LfShape;
use crate::synthesis::Vowel;

use super::run::{CellCondition, ExperimentRecord, Method, MethodResult, Status};

pub const RECORDS_HEADER: &str =
    "f0,vowel,snr_db,gci_error_frac,oq,am,qa,gci_index,method,status,sd_db,fg_rel_error";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    f0: f64,
    vowel: Vowel,
    snr_db: f64,
    gci_error_frac: f64,
    oq: f64,
    am: f64,
    qa: f64,
    gci_index: usize,
    method: Method,
    status: Status,
    sd_db: Option<f64>,
    fg_rel_error: Option<f64>,
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let c = &r.condition;
        for m in Method::ALL {
            let x = r.result(m);
            w.serialize(Row {
                f0: c.f0,
                vowel: c.vowel,
                snr_db: c.snr_db,
                gci_error_frac: c.gci_error_frac,
                oq: c.shape.oq,
                am: c.shape.am,
                qa: c.shape.qa,
                gci_index: r.gci_index,
                method: m,
                status: x.status,
                sd_db: x.sd_db,
                fg_rel_error: x.fg_rel_error,
            })
            .map_err(|e| Error::Config(format!("writing records: {e}")))?;
        }
    }
    w.flush().map_err(|e| Error::Config(format!("writing records: {e}")))?;
    Ok(())
}

/// Inverse of [`write_records_csv`]. Methods missing from a frame read as
/// skipped.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| Error::Config(format!("records header: {e}")))?
        .iter()
        .map(String::from)
        .collect();
    if header.join(",") != RECORDS_HEADER {
        return Err(Error::Config(format!("not a records table: header {:?}", header.join(","))));
    }
    let mut out: Vec<ExperimentRecord> = Vec::new();
    for (i, row) in rd.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Config(format!("records row {}: {e}", i + 2)))?;
        let condition = CellCondition {
            f0: row.f0,
            vowel: row.vowel,
            snr_db: row.snr_db,
            gci_error_frac: row.gci_error_frac,
            shape: LfShape {
                oq: row.oq,
                am: row.am,
                qa: row.qa,
            },
        };
        let result = MethodResult {
            status: row.status,
            sd_db: row.sd_db,
            fg_rel_error: row.fg_rel_error,
        };
        match out.last_mut() {
            Some(last) if last.condition == condition && last.gci_index == row.gci_index => {
                last.results[row.method.index()] = result;
            }
            _ => {
                let mut results = [MethodResult::SKIPPED; 4];
                results[row.method.index()] = result;
                out.push(ExperimentRecord {
                    condition,
                    gci_index: row.gci_index,
                    results,
                });
            }
        }
    }
    Ok(out)
}
