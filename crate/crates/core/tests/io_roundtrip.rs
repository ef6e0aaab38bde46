use followup::analysis::{analyze, AnalysisOptions};
use followup::io::{
    emit_plotdata, emit_report, ingest_csv, render_json, render_markdown, write_snapshot_csv,
    IngestOptions, NamedCurve, ReportFormat,
};
use followup::sim::{replicate_snapshot, SimConfig};
use followup::stability::{betensky_bounds, ONE_DAY};

#[test]
fn simulated_snapshot_survives_csv_round_trip() {
    let snapshot = replicate_snapshot(&SimConfig::delayed_separation(), 42, 3).unwrap();
    let mut buf = Vec::new();
    write_snapshot_csv(&snapshot, &mut buf).unwrap();
    let options = IngestOptions {
        ccod: Some(snapshot.ccod),
        label: Some(snapshot.label.clone()),
        strict: true,
        ..Default::default()
    };
    let back = ingest_csv(buf.as_slice(), &options).unwrap();
    assert!(back.diagnostics.is_empty());
    let (a, b) = (snapshot.patients(), back.snapshot.patients());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.id, y.id);
        assert_eq!(x.arm, y.arm);
        assert_eq!(x.reason, y.reason);
        assert!((x.entry - y.entry).abs() < 1e-9);
        assert!((x.time - y.time).abs() < 1e-9);
    }
}

#[test]
fn bounds_overlay_has_three_curve_ids() {
    let s = replicate_snapshot(&SimConfig::delayed_separation(), 1, 0).unwrap();
    let b = betensky_bounds(&s.outcome_sample(Some("control")).unwrap(), ONE_DAY).unwrap();
    let mut buf = Vec::new();
    emit_plotdata(
        &[
            NamedCurve::new("observed", &b.observed),
            NamedCurve::new("lower", &b.lower),
            NamedCurve::new("upper", &b.upper),
        ],
        &mut buf,
    )
    .unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut ids: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    ids.dedup();
    assert_eq!(ids, ["observed", "lower", "upper"]);
}

#[test]
fn report_outputs_are_byte_identical() {
    let s = replicate_snapshot(&SimConfig::delayed_separation(), 9, 1).unwrap();
    let run = || analyze(&s, &AnalysisOptions::default()).unwrap().bundle;
    assert_eq!(render_json(&run()).unwrap(), render_json(&run()).unwrap());
    assert_eq!(render_markdown(&run()), render_markdown(&run()));

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let fa = emit_report(&run(), ReportFormat::CsvDir, &a).unwrap();
    let fb = emit_report(&run(), ReportFormat::CsvDir, &b).unwrap();
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn unwritable_target_is_an_io_error() {
    let s = replicate_snapshot(&SimConfig::delayed_separation(), 9, 1).unwrap();
    let bundle = analyze(&s, &AnalysisOptions::default()).unwrap().bundle;
    let err = emit_report(
        &bundle,
        ReportFormat::Json,
        std::path::Path::new("/nonexistent-dir/report.json"),
    )
    .unwrap_err();
    assert!(matches!(err, followup::Error::Io(_)));
}
