use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::followup::{ccod_tolerance, CensorReason, PatientRecord, Snapshot};
use crate::survival::DAYS_PER_MONTH;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    #[default]
    Months,
    Days,
}

impl TimeUnit {
    fn to_months(self, x: f64) -> f64 {
        match self {
            TimeUnit::Months => x,
            TimeUnit::Days => x / DAYS_PER_MONTH,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// CCOD in months from study start (numeric entry mode).
    pub ccod: Option<f64>,
    /// CCOD as a calendar date (date entry mode).
    pub ccod_date: Option<NaiveDate>,
    /// Study start for date mode; defaults to the earliest entry date.
    pub origin_date: Option<NaiveDate>,
    /// Unit of the `time` column.
    pub time_unit: TimeUnit,
    pub label: Option<String>,
    /// Reject the whole file when any row fails validation.
    pub strict: bool,
}

/// A rejected input row. `row` is the 1-based line number (header = 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDiagnostic {
    pub row: usize,
    pub column: String,
    pub message: String,
}

impl std::fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "row {}, column `{}`: {}",
            self.row, self.column, self.message
        )
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub snapshot: Snapshot,
    pub diagnostics: Vec<RowDiagnostic>,
    pub notes: Vec<String>,
}

enum EntryColumn {
    Months(usize),
    Date(usize),
}

struct Columns {
    id: usize,
    arm: usize,
    entry: EntryColumn,
    time: usize,
    status: usize,
}

fn locate(headers: &csv::StringRecord) -> Result<Columns> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let need = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let entry = match (find("entry_time"), find("entry_date")) {
        (Some(i), _) => EntryColumn::Months(i),
        (None, Some(i)) => EntryColumn::Date(i),
        (None, None) => return Err(Error::MissingColumn("entry_time".into())),
    };
    Ok(Columns {
        id: need("patient_id")?,
        arm: need("arm")?,
        entry,
        time: need("time")?,
        status: need("status")?,
    })
}

struct RawRow {
    line: usize,
    id: String,
    arm: String,
    entry: EntryValue,
    time: f64,
    reason: CensorReason,
}

enum EntryValue {
    Months(f64),
    Date(NaiveDate),
}

fn parse_number(field: &str, line: usize, column: &str) -> std::result::Result<f64, RowDiagnostic> {
    match field.trim().parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        Ok(x) => Err(RowDiagnostic {
            row: line,
            column: column.into(),
            message: format!("value {x} must be finite and >= 0"),
        }),
        Err(_) => Err(RowDiagnostic {
            row: line,
            column: column.into(),
            message: format!("cannot parse `{}` as a number", field.trim()),
        }),
    }
}

fn parse_row(
    record: &csv::StringRecord,
    cols: &Columns,
    line: usize,
) -> std::result::Result<RawRow, RowDiagnostic> {
    let get = |i: usize| record.get(i).unwrap_or("");
    let diag = |column: &str, message: String| RowDiagnostic {
        row: line,
        column: column.into(),
        message,
    };
    let id = get(cols.id).trim().to_string();
    if id.is_empty() {
        return Err(diag("patient_id", "empty patient id".into()));
    }
    let arm = get(cols.arm).trim().to_string();
    if arm.is_empty() {
        return Err(diag("arm", "empty arm label".into()));
    }
    let entry = match cols.entry {
        EntryColumn::Months(i) => EntryValue::Months(parse_number(get(i), line, "entry_time")?),
        EntryColumn::Date(i) => EntryValue::Date(
            NaiveDate::parse_from_str(get(i).trim(), "%Y-%m-%d").map_err(|_| {
                diag(
                    "entry_date",
                    format!("cannot parse `{}` as an ISO-8601 date", get(i).trim()),
                )
            })?,
        ),
    };
    let time = parse_number(get(cols.time), line, "time")?;
    let status = get(cols.status);
    let reason = CensorReason::from_token(status)
        .ok_or_else(|| diag("status", format!("unknown status `{}`", status.trim())))?;
    Ok(RawRow {
        line,
        id,
        arm,
        entry,
        time,
        reason,
    })
}

fn days_between(from: NaiveDate, to: NaiveDate) -> f64 {
    (to - from).num_days() as f64
}

/// Reads patient records from CSV and validates them into a [`Snapshot`].
///
/// Columns: `patient_id, arm, entry_time | entry_date, time, status` with
/// status one of `event`, `admin`, `ltfu`. Rejected rows are listed in the
/// diagnostics; in strict mode any rejection fails the whole load.
pub fn ingest_csv<R: Read>(source: R, options: &IngestOptions) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let cols = locate(reader.headers()?)?;
    let date_mode = matches!(cols.entry, EntryColumn::Date(_));
    if date_mode && options.ccod_date.is_none() {
        return Err(Error::InvalidInput(
            "entry_date input needs a CCOD date".into(),
        ));
    }

    let mut diagnostics = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        match parse_row(&record, &cols, line) {
            Ok(row) if !seen.insert(row.id.clone()) => diagnostics.push(RowDiagnostic {
                row: line,
                column: "patient_id".into(),
                message: format!("duplicate patient id `{}`", row.id),
            }),
            Ok(row) => rows.push(row),
            Err(d) => diagnostics.push(d),
        }
    }

    let mut notes = Vec::new();
    let origin = if date_mode {
        let earliest = rows
            .iter()
            .filter_map(|r| match r.entry {
                EntryValue::Date(d) => Some(d),
                EntryValue::Months(_) => None,
            })
            .min();
        options.origin_date.or(earliest)
    } else {
        None
    };
    let entry_months = |r: &RawRow| match (&r.entry, origin) {
        (EntryValue::Months(m), _) => *m,
        (EntryValue::Date(d), Some(o)) => days_between(o, *d) / DAYS_PER_MONTH,
        (EntryValue::Date(_), None) => 0.0,
    };

    let ccod = match (options.ccod_date, origin, options.ccod) {
        (Some(date), Some(o), _) if date_mode => days_between(o, date) / DAYS_PER_MONTH,
        (_, _, Some(c)) => c,
        _ => {
            let inferred = rows
                .iter()
                .map(|r| entry_months(r) + options.time_unit.to_months(r.time))
                .fold(0.0, f64::max);
            notes.push(format!(
                "no CCOD given; using the latest entry + time ({inferred} months)"
            ));
            inferred
        }
    };

    let tol = ccod_tolerance(ccod);
    let mut patients = Vec::with_capacity(rows.len());
    for r in &rows {
        let entry = entry_months(r);
        let time = options.time_unit.to_months(r.time);
        if entry < 0.0 {
            diagnostics.push(RowDiagnostic {
                row: r.line,
                column: "entry_date".into(),
                message: "entry precedes the study origin".into(),
            });
        } else if entry + time > ccod + tol {
            diagnostics.push(RowDiagnostic {
                row: r.line,
                column: "time".into(),
                message: format!(
                    "entry + time = {} exceeds CCOD {} months",
                    entry + time,
                    ccod
                ),
            });
        } else {
            patients.push(PatientRecord {
                id: r.id.clone(),
                arm: r.arm.clone(),
                entry,
                time,
                reason: r.reason,
            });
        }
    }
    diagnostics.sort_by_key(|d| d.row);
    if options.strict && !diagnostics.is_empty() {
        return Err(Error::RejectedRows(diagnostics));
    }
    let label = options
        .label
        .clone()
        .or_else(|| options.ccod_date.map(|d| d.to_string()))
        .unwrap_or_else(|| format!("CCOD {ccod}"));
    Ok(Ingested {
        snapshot: Snapshot::new(ccod, patients, label)?,
        diagnostics,
        notes,
    })
}

pub fn ingest_path(path: &Path, options: &IngestOptions) -> Result<Ingested> {
    ingest_csv(std::fs::File::open(path)?, options)
}

/// Writes a snapshot in the numeric-entry input schema (months).
pub fn write_snapshot_csv<W: Write>(snapshot: &Snapshot, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["patient_id", "arm", "entry_time", "time", "status"])?;
    for p in snapshot.patients() {
        w.write_record([
            p.id.as_str(),
            p.arm.as_str(),
            &p.entry.to_string(),
            &p.time.to_string(),
            p.reason.token(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "patient_id,arm,entry_time,time,status
P1,A,0,4,event
P2,A,2,8,admin
P3,A,4,3,ltfu
P4,A,6,4,admin
";

    fn opts(ccod: f64) -> IngestOptions {
        IngestOptions {
            ccod: Some(ccod),
            strict: true,
            ..Default::default()
        }
    }

    #[test]
    fn well_formed_file() {
        let got = ingest_csv(TOY.as_bytes(), &opts(10.0)).unwrap();
        assert_eq!(got.snapshot.patients().len(), 4);
        assert!(got.diagnostics.is_empty());
        assert_eq!(
            got.snapshot.patients()[2].reason,
            CensorReason::LostToFollowUp
        );
    }

    #[test]
    fn unknown_status_is_a_row_error() {
        let text = TOY.replace("ltfu", "lost");
        match ingest_csv(text.as_bytes(), &opts(10.0)) {
            Err(Error::RejectedRows(d)) => {
                assert_eq!(d.len(), 1);
                assert_eq!(d[0].row, 4);
                assert_eq!(d[0].column, "status");
                assert!(d[0].message.contains("unknown status"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let lenient = IngestOptions {
            strict: false,
            ..opts(10.0)
        };
        let got = ingest_csv(text.as_bytes(), &lenient).unwrap();
        assert_eq!(got.snapshot.patients().len(), 3);
        assert_eq!(got.diagnostics.len(), 1);
    }

    #[test]
    fn missing_column() {
        let text = "patient_id,arm,time,status\nP1,A,1,event\n";
        assert!(matches!(
            ingest_csv(text.as_bytes(), &opts(10.0)),
            Err(Error::MissingColumn(c)) if c == "entry_time"
        ));
    }

    #[test]
    fn date_mode_exceeding_ccod() {
        let text = "patient_id,arm,entry_date,time,status
P1,A,2020-01-01,30,event
P2,A,2020-02-01,400,admin
";
        let options = IngestOptions {
            ccod_date: NaiveDate::from_ymd_opt(2020, 12, 31),
            time_unit: TimeUnit::Days,
            strict: true,
            ..Default::default()
        };
        match ingest_csv(text.as_bytes(), &options) {
            Err(Error::RejectedRows(d)) => {
                assert_eq!(d[0].row, 3);
                assert!(d[0].message.contains("exceeds CCOD"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let ok = text.replace("400", "300");
        let got = ingest_csv(ok.as_bytes(), &options).unwrap();
        let s = got.snapshot;
        assert!((s.ccod - 365.0 / DAYS_PER_MONTH).abs() < 1e-12);
        assert!((s.patients()[1].entry - 31.0 / DAYS_PER_MONTH).abs() < 1e-12);
        assert_eq!(s.label, "2020-12-31");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{TOY}P1,A,1,1,event\n");
        assert!(ingest_csv(text.as_bytes(), &opts(10.0)).is_err());
    }

    #[test]
    fn inferred_ccod_is_noted() {
        let got = ingest_csv(TOY.as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(got.snapshot.ccod, 10.0);
        assert_eq!(got.notes.len(), 1);
    }
}
