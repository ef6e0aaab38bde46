//! `followup`: command-line front end for the follow-up toolkit.
//!
//! Exit codes: 0 success, 2 input error, 3 computation signal, 4 I/O error.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use followup::analysis::{analyze, AnalysisOptions};
use followup::compare::{
    censoring_comparison, LogrankWeights, PhTimeTransform, TauPolicy, TwoArmSample,
};
use followup::followup::{
    derive_quantifier, ltfu_reassign, summarize_all, QuantifierId, Snapshot, POOLED,
};
use followup::io::{
    emit_plotdata, emit_report, ingest_path, quantifier_table, render_json, render_markdown,
    render_svg, tick_grid, write_snapshot_csv, Cell, IngestOptions, NamedCurve, ReportBundle,
    ReportFormat, ReportValue, Section, Table, TimeUnit,
};
use followup::sim::{power_study, replicate_snapshot, PowerTest, SimConfig};
use followup::stability::{betensky_bounds, cross_arm_extreme_rmst, stability_index_from_bounds};
use followup::survival::{km_fit, km_quantile, StepCurve, DAYS_PER_MONTH};
use followup::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_SIGNAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "followup",
    version,
    about = "Follow-up quantification for time-to-event trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full battery: KM per arm, milestones, HR, logrank, PH test, RMST,
    /// stability, censoring, accrual and information fraction.
    Analyze(AnalyzeArgs),
    /// Follow-up quantifiers Q1–Q7 for the pooled population and each arm.
    Quantify(QuantifyArgs),
    /// Worst/best-case stability bounds and index of the KM estimates.
    Stability(StabilityArgs),
    /// Reverse-KM censoring distributions compared between arms.
    Censoring(CensoringArgs),
    /// Kaplan-Meier curves per arm with plot data and optional SVG.
    Km(KmArgs),
    /// Simulate one trial and write it as an input CSV.
    Simulate(SimulateArgs),
    /// Monte Carlo rejection rates of two-arm tests.
    Power(PowerArgs),
    /// Quantifier medians across snapshots with Δ and Δ% columns.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Input CSV (patient_id, arm, entry_time | entry_date, time, status).
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    ccod: CcodArgs,
}

#[derive(Args, Clone)]
struct CcodArgs {
    /// CCOD in months from study start; defaults to the latest entry + time.
    #[arg(long)]
    ccod: Option<f64>,
    /// CCOD as an ISO-8601 date (required with an entry_date column).
    #[arg(long)]
    ccod_date: Option<NaiveDate>,
    /// Unit of the time column.
    #[arg(long, value_enum, default_value_t = Unit::Months)]
    unit: Unit,
    /// Snapshot label used in report headers.
    #[arg(long)]
    label: Option<String>,
    /// Reject the file when any row is invalid instead of dropping the row.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file (directory for csv-dir); standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write step-coordinate CSV of every curve referenced by the report.
    #[arg(long)]
    plotdata: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Months,
    Days,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
    CsvDir,
}

#[derive(Clone, Copy, ValueEnum)]
enum TauPolicyArg {
    MinOfMax,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhTransformArg {
    Identity,
    Km,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Milestone times in months.
    #[arg(long, value_delimiter = ',', default_values_t = [36.0, 60.0])]
    milestones: Vec<f64>,
    /// RMST restriction time in months; implies --tau-policy fixed.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    tau_policy: Option<TauPolicyArg>,
    /// Events at this analysis (defaults to the observed count).
    #[arg(long)]
    d_int: Option<usize>,
    /// Events planned at the final analysis.
    #[arg(long)]
    d_fin: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    control: Option<String>,
    #[arg(long)]
    treatment: Option<String>,
    /// Worst-case offset of the stability bounds, in days.
    #[arg(long, default_value_t = 1.0)]
    delta_days: f64,
    /// Risk-set size below which KM estimates are flagged as unreliable.
    #[arg(long, default_value_t = 10)]
    min_at_risk: usize,
    #[arg(long, value_enum, default_value_t = PhTransformArg::Identity)]
    ph_transform: PhTransformArg,
    /// Extra Fleming-Harrington weights as rho:gamma, e.g. 0:1.
    #[arg(long = "fh", value_parser = parse_fh)]
    fh: Vec<LogrankWeights>,
}

#[derive(Args)]
struct QuantifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// `all` or one of q1..q7.
    #[arg(long, default_value = "all")]
    quantifier: String,
    /// Relabel this fraction of administratively censored patients as lost
    /// to follow-up before quantifying.
    #[arg(long)]
    ltfu_fraction: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Bounds per arm instead of for the pooled population.
    #[arg(long)]
    per_arm: bool,
    /// Worst-case event offset after each censoring, in days.
    #[arg(long, default_value_t = 1.0)]
    delta_days: f64,
}

#[derive(Args)]
struct CensoringArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

#[derive(Args)]
struct KmArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Minimal SVG rendering of the curves with an at-risk row.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON SimConfig; the built-in delayed-separation design when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replicate index within the seeded study.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// logrank, fh:RHO:GAMMA, rmst, rmst:TAU, cox, ph.
    #[arg(long, value_delimiter = ',', default_values = ["logrank", "rmst"], value_parser = parse_test)]
    tests: Vec<PowerTest>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Snapshot CSVs in chronological order (repeat the flag).
    #[arg(long, short, required = true)]
    input: Vec<PathBuf>,
    /// CCOD per input, in months; give none or one per input.
    #[arg(long)]
    ccod: Vec<f64>,
    /// Label per input; give none or one per input.
    #[arg(long)]
    label: Vec<String>,
    #[arg(long, value_enum, default_value_t = Unit::Months)]
    unit: Unit,
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_fh(s: &str) -> Result<LogrankWeights, String> {
    let (rho, gamma) = s.split_once(':').ok_or("expected rho:gamma")?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    LogrankWeights::new(num(rho)?, num(gamma)?).map_err(|e| e.to_string())
}

fn parse_test(s: &str) -> Result<PowerTest, String> {
    let (head, rest) = s.split_once(':').map_or((s, None), |(h, r)| (h, Some(r)));
    match (head.trim().to_ascii_lowercase().as_str(), rest) {
        ("logrank", None) => Ok(PowerTest::Logrank(LogrankWeights::UNWEIGHTED)),
        ("fh", Some(w)) => parse_fh(w).map(PowerTest::Logrank),
        ("rmst", None) => Ok(PowerTest::RmstDiff {
            policy: TauPolicy::MinOfMaxObserved,
        }),
        ("rmst", Some(t)) => t
            .trim()
            .parse::<f64>()
            .map(|tau| PowerTest::RmstDiff {
                policy: TauPolicy::FixedTau(tau),
            })
            .map_err(|e| format!("`{t}`: {e}")),
        ("cox", None) => Ok(PowerTest::CoxWald),
        ("ph", None) => Ok(PowerTest::SchoenfeldPh),
        _ => Err(format!("unknown test `{s}`")),
    }
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => EXIT_IO,
            e if e.is_input_error() => EXIT_INPUT,
            _ => EXIT_SIGNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<Vec<String>, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Quantify(a) => run_quantify(a),
        Command::Stability(a) => run_stability(a),
        Command::Censoring(a) => run_censoring(a),
        Command::Km(a) => run_km(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Power(a) => run_power(a),
        Command::Report(a) => run_report(a),
    };
    match result {
        Ok(signals) if signals.is_empty() => ExitCode::SUCCESS,
        Ok(signals) => {
            for s in signals {
                eprintln!("signal: {s}");
            }
            ExitCode::from(EXIT_SIGNAL)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn ingest_options(c: &CcodArgs) -> IngestOptions {
    IngestOptions {
        ccod: c.ccod,
        ccod_date: c.ccod_date,
        origin_date: None,
        time_unit: time_unit(c.unit),
        label: c.label.clone(),
        strict: c.strict,
    }
}

fn time_unit(u: Unit) -> TimeUnit {
    match u {
        Unit::Months => TimeUnit::Months,
        Unit::Days => TimeUnit::Days,
    }
}

/// Reads a snapshot, reporting dropped rows and notes on standard error.
fn load(path: &Path, options: &IngestOptions) -> Result<Snapshot, Failure> {
    let ingested = ingest_path(path, options)?;
    for d in &ingested.diagnostics {
        eprintln!("warning: {}: dropped {d}", path.display());
    }
    for n in &ingested.notes {
        eprintln!("note: {}: {n}", path.display());
    }
    Ok(ingested.snapshot)
}

fn write_target(target: Option<&Path>, text: &str) -> Result<(), Failure> {
    match target {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn write_bundle(bundle: &ReportBundle, output: &OutputArgs) -> Result<(), Failure> {
    match (output.format, &output.out) {
        (Format::CsvDir, None) => Err(input_failure("--format csv-dir requires --out DIR")),
        (Format::CsvDir, Some(dir)) => {
            emit_report(bundle, ReportFormat::CsvDir, dir)?;
            Ok(())
        }
        (Format::Json, out) => write_target(out.as_deref(), &render_json(bundle)?),
        (Format::Markdown, out) => write_target(out.as_deref(), &render_markdown(bundle)),
    }
}

fn write_plotdata(path: &Path, curves: &[(String, StepCurve)]) -> Result<(), Failure> {
    let named: Vec<NamedCurve<'_>> = curves
        .iter()
        .map(|(id, c)| NamedCurve::new(id, c))
        .collect();
    let file = std::fs::File::create(path).map_err(|e| io_failure(path, e))?;
    emit_plotdata(&named, std::io::BufWriter::new(file))?;
    Ok(())
}

fn finish(
    bundle: &ReportBundle,
    curves: &[(String, StepCurve)],
    output: &OutputArgs,
) -> Result<(), Failure> {
    write_bundle(bundle, output)?;
    if let Some(p) = &output.plotdata {
        if curves.is_empty() {
            return Err(input_failure(
                "this command produces no curves for --plotdata",
            ));
        }
        write_plotdata(p, curves)?;
    }
    Ok(())
}

fn base_metadata(snapshot: &Snapshot) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("snapshot".into(), snapshot.label.clone());
    meta.insert("ccod_months".into(), snapshot.ccod.to_string());
    meta.insert("patients".into(), snapshot.patients().len().to_string());
    meta.insert("arms".into(), snapshot.arms().join(", "));
    meta.insert(
        "generator".into(),
        format!("followup {}", env!("CARGO_PKG_VERSION")),
    );
    meta
}

fn days_to_months(days: f64) -> Result<f64, Failure> {
    if days.is_finite() && days >= 0.0 {
        Ok(days / DAYS_PER_MONTH)
    } else {
        Err(input_failure(format!(
            "--delta-days {days} must be finite and >= 0"
        )))
    }
}

fn run_analyze(a: AnalyzeArgs) -> Outcome {
    let snapshot = load(&a.input.input, &ingest_options(&a.input.ccod))?;
    let tau_policy = match (a.tau_policy, a.tau) {
        (Some(TauPolicyArg::Fixed), None) => {
            return Err(input_failure("--tau-policy fixed requires --tau"))
        }
        (Some(TauPolicyArg::MinOfMax), Some(_)) => {
            return Err(input_failure(
                "--tau conflicts with --tau-policy min-of-max",
            ))
        }
        (_, Some(t)) => TauPolicy::FixedTau(t),
        _ => TauPolicy::MinOfMaxObserved,
    };
    let options = AnalysisOptions {
        level: a.level,
        milestones: a.milestones,
        tau_policy,
        control: a.control,
        treatment: a.treatment,
        delta: days_to_months(a.delta_days)?,
        min_at_risk: a.min_at_risk,
        d_int: a.d_int,
        d_fin: a.d_fin,
        ph_transform: match a.ph_transform {
            PhTransformArg::Identity => PhTimeTransform::Identity,
            PhTransformArg::Km => PhTimeTransform::Km,
        },
        extra_weights: a.fh,
    };
    let analysis = analyze(&snapshot, &options)?;
    finish(&analysis.bundle, &analysis.curves, &a.output)?;
    Ok(analysis.signals)
}

fn run_quantify(a: QuantifyArgs) -> Outcome {
    let mut snapshot = load(&a.input.input, &ingest_options(&a.input.ccod))?;
    let selected: Vec<QuantifierId> = if a.quantifier.eq_ignore_ascii_case("all") {
        QuantifierId::ALL.to_vec()
    } else {
        vec![QuantifierId::parse(&a.quantifier)
            .ok_or_else(|| input_failure(format!("unknown quantifier `{}`", a.quantifier)))?]
    };
    let mut meta = base_metadata(&snapshot);
    let mut section = Section::new("followup", "Follow-up quantifiers (months)");
    if let Some(f) = a.ltfu_fraction {
        let r = ltfu_reassign(&snapshot, f, a.seed)?;
        meta.insert("ltfu_fraction".into(), f.to_string());
        meta.insert("seed".into(), a.seed.to_string());
        section.notes.push(format!(
            "{} administratively censored patient(s) relabeled as lost to follow-up",
            r.relabeled.len()
        ));
        section.notes.extend(r.warning);
        snapshot = r.snapshot;
    }
    let mut curves = Vec::new();
    let groups: Vec<String> = std::iter::once(POOLED.to_string())
        .chain(snapshot.arms())
        .collect();
    let columns = [
        "quantifier",
        "estimation",
        "n",
        "median",
        "lower quartile",
        "upper quartile",
        "min",
        "max",
    ];
    for g in &groups {
        let arm = (g != POOLED).then_some(g.as_str());
        let mut rows = Vec::new();
        for &id in &selected {
            let label = Cell::text(format!("{}. {}", id.number(), id.title()));
            match derive_quantifier(&snapshot, id, arm) {
                Ok(q) => {
                    let s = q.summary;
                    rows.push(vec![
                        label,
                        Cell::text(
                            serde_json::to_value(q.estimation)
                                .ok()
                                .and_then(|v| v.as_str().map(String::from))
                                .unwrap_or_default(),
                        ),
                        Cell::Count(s.n as u64),
                        Cell::time(s.median),
                        Cell::time(s.lower_quartile),
                        Cell::time(s.upper_quartile),
                        Cell::number(s.min),
                        Cell::number(s.max),
                    ]);
                    if let Some(c) = q.curve {
                        let cid = format!("{}_{g}", id.to_string().to_ascii_lowercase());
                        section.curves.push(cid.clone());
                        curves.push((cid, c));
                    }
                }
                Err(e) if !e.is_input_error() || matches!(e, Error::EmptySample(_)) => {
                    section.notes.push(format!("{id} [{g}] not computed: {e}"));
                    let mut row = vec![label, Cell::NotComputed, Cell::NotComputed];
                    row.extend(std::iter::repeat_n(Cell::NotComputed, 5));
                    rows.push(row);
                }
                Err(e) => return Err(e.into()),
            }
        }
        section.tables.push(Table {
            id: format!("quantifiers_{g}"),
            title: format!("Follow-up quantifiers ({g}), months"),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
    }
    let mut bundle = ReportBundle::new(meta);
    bundle.sections.push(section);
    finish(&bundle, &curves, &a.output)?;
    Ok(Vec::new())
}

fn run_stability(a: StabilityArgs) -> Outcome {
    let snapshot = load(&a.input.input, &ingest_options(&a.input.ccod))?;
    let delta = days_to_months(a.delta_days)?;
    let groups: Vec<Option<String>> = if a.per_arm {
        snapshot.arms().into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    let mut meta = base_metadata(&snapshot);
    meta.insert("delta_days".into(), a.delta_days.to_string());
    let mut section = Section::new("stability", "Stability of the KM estimates");
    let method = format!(
        "worst case: event at censoring + {} day(s), capped at the next event",
        a.delta_days
    );
    let mut curves = Vec::new();
    for g in &groups {
        let name = g.as_deref().unwrap_or(POOLED);
        let sample = snapshot.outcome_sample(g.as_deref())?;
        let b = betensky_bounds(&sample, delta)?;
        let idx = stability_index_from_bounds(&b);
        section.values.push(ReportValue::scalar(
            format!("stability index [{name}]"),
            Cell::number(idx.value),
            method.clone(),
        ));
        section.values.push(ReportValue::scalar(
            format!("window [{name}]"),
            Cell::number(idx.window),
            "months",
        ));
        if b.without_events {
            section.notes.push(format!(
                "[{name}] no events: bounds describe censoring only"
            ));
        }
        let rows = tick_grid(idx.window, 7)
            .into_iter()
            .map(|t| {
                vec![
                    Cell::number(t),
                    Cell::number(b.lower.value_at(t)),
                    Cell::number(b.observed.value_at(t)),
                    Cell::number(b.upper.value_at(t)),
                ]
            })
            .collect();
        section.tables.push(Table {
            id: format!("bounds_{name}"),
            title: format!("Stability bounds ({name})"),
            columns: ["t", "lower", "observed", "upper"]
                .map(String::from)
                .to_vec(),
            rows,
        });
        for (kind, c) in [
            ("observed", b.observed),
            ("lower", b.lower),
            ("upper", b.upper),
        ] {
            let id = format!("stability_{name}_{kind}");
            section.curves.push(id.clone());
            curves.push((id, c));
        }
    }
    let arms = snapshot.arms();
    if a.per_arm && arms.len() == 2 {
        let pair = TwoArmSample::from_snapshot(&snapshot, &arms[0], &arms[1])?;
        match cross_arm_extreme_rmst(&pair, delta) {
            Ok(x) => {
                section.values.push(ReportValue::scalar(
                    format!("extreme RMST difference [{} − {}]", arms[1], arms[0]),
                    Cell::number(x.value),
                    format!("upper bound minus lower bound over [0, {:.4}]", x.horizon),
                ));
                section.values.push(ReportValue::scalar(
                    "observed RMST difference",
                    Cell::number(x.observed_difference),
                    "same window",
                ));
            }
            Err(e) => section
                .notes
                .push(format!("extreme RMST difference not computed: {e}")),
        }
    }
    let mut bundle = ReportBundle::new(meta);
    bundle.sections.push(section);
    finish(&bundle, &curves, &a.output)?;
    Ok(Vec::new())
}

fn run_censoring(a: CensoringArgs) -> Outcome {
    let snapshot = load(&a.input.input, &ingest_options(&a.input.ccod))?;
    let cens = censoring_comparison(&snapshot)?;
    let mut section = Section::new("censoring", "Censoring pattern");
    let mut curves = Vec::new();
    let method = format!("reverse KM, Brookmeyer-Crowley {}%", 100.0 * a.level);
    for arm in &cens.arms {
        let q = km_quantile(&arm.overall, 0.5, a.level);
        section.values.push(ReportValue {
            name: format!("median time to censoring [{}]", arm.arm),
            estimate: Cell::time(q.point),
            lower: Cell::time(q.lower),
            upper: Cell::time(q.upper),
            p: Cell::NotComputed,
            method: method.clone(),
        });
        for (kind, c) in [
            ("overall", &arm.overall),
            ("admin", &arm.admin),
            ("ltfu", &arm.ltfu),
        ] {
            let id = format!("censoring_{}_{kind}", arm.arm);
            section.curves.push(id.clone());
            curves.push((id, c.clone()));
        }
    }
    match &cens.logrank {
        Some(lr) => section.values.push(
            ReportValue::scalar(
                "censoring logrank z",
                Cell::number(lr.z),
                "logrank on reversed indicators",
            )
            .with_p(lr.p),
        ),
        None => section.values.push(ReportValue::not_computed(
            "censoring logrank z",
            "logrank on reversed indicators",
        )),
    }
    section.notes.extend(cens.warning);
    let mut bundle = ReportBundle::new(base_metadata(&snapshot));
    bundle.sections.push(section);
    finish(&bundle, &curves, &a.output)?;
    Ok(Vec::new())
}

fn run_km(a: KmArgs) -> Outcome {
    let snapshot = load(&a.input.input, &ingest_options(&a.input.ccod))?;
    let mut section = Section::new("km", "Kaplan-Meier estimates");
    let mut curves = Vec::new();
    let method = format!("KM, Brookmeyer-Crowley log-log {}%", 100.0 * a.level);
    for arm in snapshot.arms() {
        let sample = snapshot.outcome_sample(Some(&arm))?;
        let curve = km_fit(&sample)?;
        let q = km_quantile(&curve, 0.5, a.level);
        section.values.push(ReportValue::scalar(
            format!("patients [{arm}]"),
            Cell::Count(sample.len() as u64),
            "count",
        ));
        section.values.push(ReportValue::scalar(
            format!("events [{arm}]"),
            Cell::Count(sample.n_events() as u64),
            "count",
        ));
        section.values.push(ReportValue {
            name: format!("median [{arm}]"),
            estimate: Cell::time(q.point),
            lower: Cell::time(q.lower),
            upper: Cell::time(q.upper),
            p: Cell::NotComputed,
            method: method.clone(),
        });
        let id = format!("km_{arm}");
        section.curves.push(id.clone());
        curves.push((id, curve));
    }
    let mut bundle = ReportBundle::new(base_metadata(&snapshot));
    bundle.sections.push(section);
    finish(&bundle, &curves, &a.output)?;
    if let Some(p) = &a.svg {
        let named: Vec<NamedCurve<'_>> = curves
            .iter()
            .map(|(id, c)| NamedCurve::new(id, c))
            .collect();
        write_target(Some(p), &render_svg(&named)?)?;
    }
    Ok(Vec::new())
}

fn load_config(path: Option<&Path>) -> Result<SimConfig, Failure> {
    match path {
        None => Ok(SimConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            Ok(SimConfig::from_json(&text)?)
        }
    }
}

fn run_simulate(a: SimulateArgs) -> Outcome {
    let config = load_config(a.config.as_deref())?;
    let snapshot = replicate_snapshot(&config, a.seed, a.replicate)?;
    let mut buf = Vec::new();
    write_snapshot_csv(&snapshot, &mut buf)?;
    write_target(a.out.as_deref(), &String::from_utf8_lossy(&buf))?;
    eprintln!("note: CCOD {} months", snapshot.ccod);
    Ok(Vec::new())
}

fn run_power(a: PowerArgs) -> Outcome {
    let config = load_config(a.config.as_deref())?;
    let report = power_study(&config, a.reps, &a.tests, a.alpha, a.seed)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n",
        Format::Markdown => {
            let mut s = format!(
                "# Power study\n\nreps {} · alpha {} · seed {} · simulation failures {}\n\n| test | rejections | failures | rate | MC SE |\n|---|---|---|---|---|\n",
                report.reps, report.alpha, report.master_seed, report.simulation_failures
            );
            for r in &report.results {
                s.push_str(&format!(
                    "| {} | {} | {} | {:.4} | {:.4} |\n",
                    r.name, r.rejections, r.failures, r.rate, r.mc_se
                ));
            }
            s
        }
        Format::CsvDir => return Err(input_failure("power supports json and markdown output")),
    };
    write_target(a.out.as_deref(), &text)?;
    Ok(Vec::new())
}

fn per_input<T: Clone>(values: &[T], n: usize, flag: &str) -> Result<Vec<Option<T>>, Failure> {
    match values.len() {
        0 => Ok(vec![None; n]),
        k if k == n => Ok(values.iter().cloned().map(Some).collect()),
        k => Err(input_failure(format!(
            "{k} {flag} value(s) for {n} input(s)"
        ))),
    }
}

fn run_report(a: ReportArgs) -> Outcome {
    let n = a.input.len();
    let ccods = per_input(&a.ccod, n, "--ccod")?;
    let labels = per_input(&a.label, n, "--label")?;
    let mut summaries = Vec::with_capacity(n);
    let mut arms: Vec<String> = Vec::new();
    for ((path, ccod), label) in a.input.iter().zip(ccods).zip(labels) {
        let options = IngestOptions {
            ccod,
            label,
            time_unit: time_unit(a.unit),
            strict: a.strict,
            ..IngestOptions::default()
        };
        let snapshot = load(path, &options)?;
        for arm in snapshot.arms() {
            if !arms.contains(&arm) {
                arms.push(arm);
            }
        }
        summaries.push(summarize_all(&snapshot)?);
    }
    let mut meta = BTreeMap::new();
    meta.insert(
        "snapshots".into(),
        summaries
            .iter()
            .map(|s| s.label.clone())
            .collect::<Vec<_>>()
            .join(", "),
    );
    meta.insert(
        "generator".into(),
        format!("followup {}", env!("CARGO_PKG_VERSION")),
    );
    let mut section = Section::new("followup", "Follow-up quantifier medians across snapshots");
    for g in std::iter::once(POOLED.to_string()).chain(arms) {
        if summaries.iter().all(|s| s.group(&g).is_some()) {
            section.tables.push(quantifier_table(&summaries, &g)?);
        } else {
            section
                .notes
                .push(format!("arm `{g}` is missing from some snapshots; skipped"));
        }
    }
    if n >= 2 {
        section
            .notes
            .push("Δ and Δ% compare the last snapshot with the first".into());
    }
    let mut bundle = ReportBundle::new(meta);
    bundle.sections.push(section);
    finish(&bundle, &[], &a.output)?;
    Ok(Vec::new())
}
