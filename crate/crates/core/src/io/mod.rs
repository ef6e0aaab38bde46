//! CSV ingestion, report bundles and step-coordinate plot data.

mod ingest;
mod plot;
mod report;

pub use ingest::{
    ingest_csv, ingest_path, write_snapshot_csv, IngestOptions, Ingested, RowDiagnostic, TimeUnit,
};
pub use plot::{
    at_risk_row, emit_plotdata, render_svg, step_points, tick_grid, NamedCurve, PlotPoint,
};
pub use report::{
    emit_report, quantifier_table, render_json, render_markdown, write_csv_dir, Cell, ReportBundle,
    ReportFormat, ReportValue, Section, Table, REPORT_SCHEMA_VERSION,
};
