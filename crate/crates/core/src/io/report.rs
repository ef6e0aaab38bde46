use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::followup::{summary_deltas, FollowupSummary, QuantifierId};
use crate::survival::{IntervalEstimate, TimeValue};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: &str = "1.0";

/// One report cell. Missing values are explicit, never blank.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Count(u64),
    Text(String),
    NotReached,
    NotComputed,
}

impl Cell {
    /// Non-finite numbers become [`Cell::NotComputed`].
    pub fn number(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Number(x)
        } else {
            Cell::NotComputed
        }
    }

    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::NotComputed, Cell::number)
    }

    pub fn time(t: TimeValue) -> Cell {
        match t {
            TimeValue::Reached(v) => Cell::number(v),
            TimeValue::NotReached => Cell::NotReached,
        }
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    /// Human-readable rendering used in Markdown and CSV tables.
    pub fn render(&self) -> String {
        match self {
            Cell::Number(x) => format_number(*x),
            Cell::Count(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::NotReached => "not reached".into(),
            Cell::NotComputed => "not computed".into(),
        }
    }
}

fn format_number(x: f64) -> String {
    let s = if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.3e}")
    } else {
        format!("{x:.4}")
    };
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Number(x) => s.serialize_f64(*x),
            Cell::Count(n) => s.serialize_u64(*n),
            Cell::Text(t) => s.serialize_str(t),
            Cell::NotReached => s.serialize_str("not_reached"),
            Cell::NotComputed => s.serialize_str("not_computed"),
        }
    }
}

/// A scalar result with its interval, p-value and method tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportValue {
    pub name: String,
    pub estimate: Cell,
    pub lower: Cell,
    pub upper: Cell,
    pub p: Cell,
    pub method: String,
}

impl ReportValue {
    pub fn scalar(name: impl Into<String>, estimate: Cell, method: impl Into<String>) -> Self {
        ReportValue {
            name: name.into(),
            estimate,
            lower: Cell::NotComputed,
            upper: Cell::NotComputed,
            p: Cell::NotComputed,
            method: method.into(),
        }
    }

    pub fn interval(
        name: impl Into<String>,
        est: &IntervalEstimate,
        method: impl Into<String>,
    ) -> Self {
        ReportValue {
            name: name.into(),
            estimate: Cell::number(est.point),
            lower: Cell::number(est.lower),
            upper: Cell::number(est.upper),
            p: Cell::NotComputed,
            method: method.into(),
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Cell::number(p);
        self
    }

    /// Placeholder for a value that could not be computed.
    pub fn not_computed(name: impl Into<String>, method: impl Into<String>) -> Self {
        ReportValue::scalar(name, Cell::NotComputed, method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub id: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub id: String,
    pub title: String,
    pub values: Vec<ReportValue>,
    pub tables: Vec<Table>,
    /// Names of curves emitted alongside the report (plot-data `curve_id`s).
    pub curves: Vec<String>,
    pub notes: Vec<String>,
}

impl Section {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Section {
            id: id.into(),
            title: title.into(),
            values: Vec::new(),
            tables: Vec::new(),
            curves: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty() && self.tables.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub schema_version: String,
    pub metadata: BTreeMap<String, String>,
    pub sections: Vec<Section>,
}

impl ReportBundle {
    pub fn new(metadata: BTreeMap<String, String>) -> Self {
        ReportBundle {
            schema_version: REPORT_SCHEMA_VERSION.into(),
            metadata,
            sections: Vec::new(),
        }
    }

    pub fn section(&self, id: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Markdown,
    CsvDir,
}

pub fn render_json(bundle: &ReportBundle) -> Result<String> {
    let mut s = serde_json::to_string_pretty(bundle)?;
    s.push('\n');
    Ok(s)
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

fn md_table(out: &mut String, columns: &[String], rows: &[Vec<String>]) {
    let header: Vec<String> = columns.iter().map(|c| md_escape(c)).collect();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(columns.len()));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| md_escape(c)).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out.push('\n');
}

const VALUE_COLUMNS: [&str; 6] = ["quantity", "estimate", "lower", "upper", "p", "method"];

fn value_rows(values: &[ReportValue]) -> Vec<Vec<String>> {
    values
        .iter()
        .map(|v| {
            vec![
                v.name.clone(),
                v.estimate.render(),
                v.lower.render(),
                v.upper.render(),
                v.p.render(),
                v.method.clone(),
            ]
        })
        .collect()
}

pub fn render_markdown(bundle: &ReportBundle) -> String {
    let mut out = String::from("# Follow-up report\n\n");
    let meta: Vec<Vec<String>> = bundle
        .metadata
        .iter()
        .map(|(k, v)| vec![k.clone(), v.clone()])
        .collect();
    md_table(&mut out, &["key".into(), "value".into()], &meta);
    for section in &bundle.sections {
        let _ = writeln!(out, "## {}: {}\n", section.id, section.title);
        if section.is_empty() {
            md_table(
                &mut out,
                &["quantity".into(), "estimate".into()],
                &[vec!["(section)".into(), Cell::NotComputed.render()]],
            );
        }
        if !section.values.is_empty() {
            let cols: Vec<String> = VALUE_COLUMNS.iter().map(|c| c.to_string()).collect();
            md_table(&mut out, &cols, &value_rows(&section.values));
        }
        for table in &section.tables {
            let _ = writeln!(out, "### {}\n", table.title);
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::render).collect())
                .collect();
            md_table(&mut out, &table.columns, &rows);
        }
        if !section.curves.is_empty() {
            let _ = writeln!(out, "Curves: {}\n", section.curves.join(", "));
        }
        for note in &section.notes {
            let _ = writeln!(out, "- {note}");
        }
        if !section.notes.is_empty() {
            out.push('\n');
        }
    }
    out
}

fn write_csv(path: &Path, columns: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

/// One CSV per section value list and per table, plus `metadata.csv`.
pub fn write_csv_dir(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let meta = dir.join("metadata.csv");
    let mut rows: Vec<Vec<String>> =
        vec![vec!["schema_version".into(), bundle.schema_version.clone()]];
    rows.extend(
        bundle
            .metadata
            .iter()
            .map(|(k, v)| vec![k.clone(), v.clone()]),
    );
    write_csv(&meta, &["key".into(), "value".into()], &rows)?;
    written.push(meta);
    for section in &bundle.sections {
        let stem = file_stem(&section.id);
        if !section.values.is_empty() || section.is_empty() {
            let path = dir.join(format!("{stem}.csv"));
            let mut rows = value_rows(&section.values);
            if rows.is_empty() {
                rows.push(vec![
                    "(section)".into(),
                    Cell::NotComputed.render(),
                    Cell::NotComputed.render(),
                    Cell::NotComputed.render(),
                    Cell::NotComputed.render(),
                    String::new(),
                ]);
            }
            let cols: Vec<String> = VALUE_COLUMNS.iter().map(|c| c.to_string()).collect();
            write_csv(&path, &cols, &rows)?;
            written.push(path);
        }
        for table in &section.tables {
            let path = dir.join(format!("{stem}_{}.csv", file_stem(&table.id)));
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::render).collect())
                .collect();
            write_csv(&path, &table.columns, &rows)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes the bundle; `target` is a file for JSON/Markdown and a directory
/// for `CsvDir`. Returns the paths written.
pub fn emit_report(
    bundle: &ReportBundle,
    format: ReportFormat,
    target: &Path,
) -> Result<Vec<PathBuf>> {
    match format {
        ReportFormat::Json => {
            std::fs::write(target, render_json(bundle)?)?;
            Ok(vec![target.to_path_buf()])
        }
        ReportFormat::Markdown => {
            std::fs::write(target, render_markdown(bundle))?;
            Ok(vec![target.to_path_buf()])
        }
        ReportFormat::CsvDir => write_csv_dir(bundle, target),
    }
}

/// Quantifier rows × snapshot columns (median, in months) for one group.
/// With two or more snapshots, Δ and Δ% compare the last with the first.
pub fn quantifier_table(summaries: &[FollowupSummary], group: &str) -> Result<Table> {
    if summaries.is_empty() {
        return Err(Error::InvalidInput(
            "quantifier table needs a snapshot".into(),
        ));
    }
    let mut columns = vec!["quantifier".to_string()];
    columns.extend(summaries.iter().map(|s| s.label.clone()));
    let groups = summaries
        .iter()
        .map(|s| {
            s.group(group).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "group `{group}` missing from snapshot `{}`",
                    s.label
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let deltas =
        (summaries.len() >= 2).then(|| summary_deltas(groups[0], groups[groups.len() - 1]));
    if deltas.is_some() {
        columns.push("Δ".into());
        columns.push("Δ%".into());
    }
    let rows = QuantifierId::ALL
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let mut row = vec![Cell::text(format!("{}. {}", id.number(), id.title()))];
            for g in &groups {
                row.push(match g.row(id).summary {
                    Some(s) => Cell::time(s.median),
                    None => Cell::NotComputed,
                });
            }
            if let Some(d) = &deltas {
                row.push(Cell::opt(d[i].delta));
                row.push(Cell::opt(d[i].delta_pct));
            }
            row
        })
        .collect();
    Ok(Table {
        id: format!("quantifiers_{group}"),
        title: format!("Follow-up quantifier medians ({group}), months"),
        columns,
        rows,
    })
}
