//! The full question battery for one snapshot, assembled into a
//! [`ReportBundle`] with one section per question (Q1–Q9) plus follow-up
//! quantifiers and accrual.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::compare::{
    censoring_comparison, cox_two_group, information_fraction, logrank, milestone_difference,
    rmst_difference, schoenfeld_ph_test, LogrankWeights, PhTimeTransform, TauPolicy, TwoArmSample,
};
use crate::error::{Error, Result};
use crate::followup::{clark_c, summarize_all, CensorReason, Snapshot, POOLED};
use crate::io::{quantifier_table, tick_grid, Cell, ReportBundle, ReportValue, Section, Table};
use crate::stability::{betensky_bounds, cross_arm_extreme_rmst, stability_index_from_bounds};
use crate::survival::{
    at_risk_table, ecdf, km_fit, km_quantile, milestone_estimate, StepCurve, TimeValue,
    DAYS_PER_MONTH,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub level: f64,
    /// Milestone times in months.
    pub milestones: Vec<f64>,
    pub tau_policy: TauPolicy,
    /// Arm labels; default to `control`/`treatment` when present, else the
    /// first two arms in sorted order.
    pub control: Option<String>,
    pub treatment: Option<String>,
    /// Offset in months for the worst-case stability bound.
    pub delta: f64,
    /// Risk-set size below which a KM estimate is deemed unreliable.
    pub min_at_risk: usize,
    /// Events at this analysis; defaults to the observed count.
    pub d_int: Option<usize>,
    /// Events planned for the final analysis.
    pub d_fin: Option<usize>,
    pub ph_transform: PhTimeTransform,
    /// Additional Fleming-Harrington weights reported next to the logrank.
    pub extra_weights: Vec<LogrankWeights>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            level: 0.95,
            milestones: vec![36.0, 60.0],
            tau_policy: TauPolicy::MinOfMaxObserved,
            control: None,
            treatment: None,
            delta: 1.0 / DAYS_PER_MONTH,
            min_at_risk: 10,
            d_int: None,
            d_fin: None,
            ph_transform: PhTimeTransform::Identity,
            extra_weights: Vec::new(),
        }
    }
}

/// Report plus the curves it references and any computation signals
/// (non-convergence, monotone likelihood, ...) raised along the way.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub bundle: ReportBundle,
    pub curves: Vec<(String, StepCurve)>,
    pub signals: Vec<String>,
}

fn fmt_time(t: TimeValue) -> Cell {
    Cell::time(t)
}

fn resolve_arms(
    snapshot: &Snapshot,
    options: &AnalysisOptions,
) -> Result<Option<(String, String)>> {
    let arms = snapshot.arms();
    let has = |a: &str| arms.iter().any(|x| x == a);
    for a in options.control.iter().chain(&options.treatment) {
        if !has(a) {
            return Err(Error::InvalidInput(format!(
                "arm `{a}` not present in snapshot"
            )));
        }
    }
    let pick = match (&options.control, &options.treatment) {
        (Some(c), Some(t)) => Some((c.clone(), t.clone())),
        _ if has("control") && has("treatment") => Some(("control".into(), "treatment".into())),
        _ if arms.len() >= 2 => Some((arms[0].clone(), arms[1].clone())),
        _ => None,
    };
    match pick {
        Some((c, t)) if c == t => Err(Error::InvalidInput(
            "control and treatment must differ".into(),
        )),
        other => Ok(other),
    }
}

fn level_pct(level: f64) -> String {
    format!("{}%", 100.0 * level)
}

/// Runs every question of the battery that the snapshot supports.
pub fn analyze(snapshot: &Snapshot, options: &AnalysisOptions) -> Result<Analysis> {
    if !(options.level > 0.0 && options.level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "level {} must lie in (0, 1)",
            options.level
        )));
    }
    let pair = resolve_arms(snapshot, options)?;
    let arms = snapshot.arms();
    let ci = level_pct(options.level);
    let mut curves: Vec<(String, StepCurve)> = Vec::new();
    let mut signals = Vec::new();

    let mut meta = BTreeMap::new();
    meta.insert("snapshot".into(), snapshot.label.clone());
    meta.insert("ccod_months".into(), snapshot.ccod.to_string());
    meta.insert("patients".into(), snapshot.patients().len().to_string());
    meta.insert("arms".into(), arms.join(", "));
    meta.insert("level".into(), options.level.to_string());
    meta.insert(
        "tau_policy".into(),
        serde_json::to_string(&options.tau_policy)?,
    );
    meta.insert(
        "milestones_months".into(),
        options
            .milestones
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(", "),
    );
    meta.insert("stability_delta_months".into(), options.delta.to_string());
    if let Some((c, t)) = &pair {
        meta.insert("control".into(), c.clone());
        meta.insert("treatment".into(), t.clone());
    }
    meta.insert(
        "generator".into(),
        format!("followup {}", env!("CARGO_PKG_VERSION")),
    );
    let mut bundle = ReportBundle::new(meta);

    // Follow-up quantifiers.
    let summary = summarize_all(snapshot)?;
    let mut fu = Section::new("followup", "Follow-up quantifiers (medians, months)");
    for g in std::iter::once(POOLED.to_string()).chain(arms.iter().cloned()) {
        fu.tables
            .push(quantifier_table(std::slice::from_ref(&summary), &g)?);
        let arm = (g != POOLED).then_some(g.as_str());
        fu.values.push(match clark_c(snapshot, arm) {
            Ok(c) => ReportValue::scalar(
                format!("Clark's C [{g}]"),
                Cell::number(c),
                "median Q1 / median Q7",
            ),
            Err(e) => {
                fu.notes.push(format!("Clark's C [{g}] not computed: {e}"));
                ReportValue::not_computed(format!("Clark's C [{g}]"), "median Q1 / median Q7")
            }
        });
    }
    for g in &summary.groups {
        for row in &g.rows {
            if let Some(note) = &row.note {
                fu.notes.push(format!("{} [{}]: {note}", row.id, g.group));
            }
        }
    }
    bundle.sections.push(fu);

    // Per-arm KM fits.
    let mut fits = Vec::with_capacity(arms.len());
    for arm in &arms {
        let sample = snapshot.outcome_sample(Some(arm))?;
        let curve = km_fit(&sample)?;
        curves.push((format!("km_{arm}"), curve.clone()));
        fits.push((arm.clone(), sample, curve));
    }

    // Q1 precision of each KM estimate.
    let km_method = format!("KM, Greenwood, log-log {ci}");
    let mut q1 = Section::new("Q1", "Precision of the KM estimates");
    let mut milestone_rows = Vec::new();
    for (arm, _, curve) in &fits {
        let q = km_quantile(curve, 0.5, options.level);
        q1.values.push(ReportValue {
            name: format!("median [{arm}]"),
            estimate: fmt_time(q.point),
            lower: fmt_time(q.lower),
            upper: fmt_time(q.upper),
            p: Cell::NotComputed,
            method: format!("KM, Brookmeyer-Crowley, log-log {ci}"),
        });
        for &m in &options.milestones {
            let est = milestone_estimate(curve, m, options.level)?;
            let mut row = vec![
                Cell::number(m),
                Cell::text(arm.clone()),
                Cell::number(est.estimate.point),
                Cell::number(est.estimate.lower),
                Cell::number(est.estimate.upper),
                est.n_risk
                    .map_or(Cell::NotComputed, |n| Cell::Count(n as u64)),
            ];
            if !est.estimate.flags.is_empty() {
                let flags: Vec<String> = est
                    .estimate
                    .flags
                    .iter()
                    .map(|f| serde_json::to_string(f).map(|s| s.trim_matches('"').to_string()))
                    .collect::<std::result::Result<_, _>>()?;
                row.push(Cell::text(flags.join(", ")));
            } else {
                row.push(Cell::text(""));
            }
            milestone_rows.push(row);
        }
        q1.curves.push(format!("km_{arm}"));
    }
    if !milestone_rows.is_empty() {
        q1.tables.push(Table {
            id: "milestones".into(),
            title: format!("Milestone event-free probabilities ({km_method})"),
            columns: [
                "month", "arm", "estimate", "lower", "upper", "at risk", "flags",
            ]
            .map(String::from)
            .to_vec(),
            rows: milestone_rows,
        });
    }
    bundle.sections.push(q1);

    // Q2 reliability: risk sets over time.
    let x_end = fits.iter().map(|f| f.2.support_end).fold(0.0, f64::max);
    let grid = tick_grid(x_end, 8);
    let mut q2 = Section::new("Q2", "Reliability: patients at risk");
    let mut columns = vec!["arm".to_string()];
    columns.extend(grid.iter().map(|t| format!("{t}")));
    let rows = fits
        .iter()
        .map(|(arm, sample, _)| {
            let mut row = vec![Cell::text(arm.clone())];
            row.extend(
                at_risk_table(sample, &grid)
                    .into_iter()
                    .map(|n| Cell::Count(n as u64)),
            );
            row
        })
        .collect();
    q2.tables.push(Table {
        id: "at_risk".into(),
        title: "Number at risk by month".into(),
        columns,
        rows,
    });
    for (arm, sample, _) in &fits {
        let mut times: Vec<f64> = sample.times().collect();
        times.sort_by(|a, b| b.total_cmp(a));
        let m = options.min_at_risk;
        let cell = if m == 0 || times.len() < m {
            Cell::NotComputed
        } else {
            // With times sorted descending, the m-th largest time is the last
            // at which at least m subjects remain at risk.
            Cell::number(times[m - 1])
        };
        q2.values.push(ReportValue::scalar(
            format!("last month with >= {m} at risk [{arm}]"),
            cell,
            "risk set n(t) = #{time >= t}",
        ));
    }
    bundle.sections.push(q2);

    // Q3 stability of each KM estimate.
    let mut q3 = Section::new("Q3", "Stability of the KM estimates");
    let stab_method = format!(
        "Betensky bounds, worst case event at censoring + {:.4} months",
        options.delta
    );
    for (arm, sample, _) in &fits {
        let b = betensky_bounds(sample, options.delta)?;
        let idx = stability_index_from_bounds(&b);
        q3.values.push(ReportValue::scalar(
            format!("stability index [{arm}]"),
            Cell::number(idx.value),
            stab_method.clone(),
        ));
        for (kind, c) in [("lower", b.lower), ("upper", b.upper)] {
            let id = format!("stability_{arm}_{kind}");
            q3.curves.push(id.clone());
            curves.push((id, c));
        }
    }
    bundle.sections.push(q3);

    // Q4 information in one sample.
    let mut q4 = Section::new("Q4", "Information (one sample)");
    for (arm, sample, _) in &fits {
        q4.values.push(ReportValue::scalar(
            format!("events [{arm}]"),
            Cell::Count(sample.n_events() as u64),
            "count",
        ));
        q4.values.push(ReportValue::scalar(
            format!("patients [{arm}]"),
            Cell::Count(sample.len() as u64),
            "count",
        ));
    }
    q4.notes
        .push("power for a milestone or median test depends on more than the event count".into());
    bundle.sections.push(q4);

    let mut q5 = Section::new("Q5", "Precision of the treatment effect");
    let mut q6 = Section::new("Q6", "Stability of the treatment effect");
    let mut q7 = Section::new("Q7", "Information (two samples)");
    let mut q8 = Section::new("Q8", "Reliability: proportional hazards");
    let two = match &pair {
        Some((c, t)) => Some(TwoArmSample::from_snapshot(snapshot, c, t)?),
        None => {
            for s in [&mut q5, &mut q6, &mut q7, &mut q8] {
                s.notes.push("single-arm snapshot: not computed".into());
            }
            None
        }
    };
    if let Some(sample) = &two {
        let (c, t) = &sample.labels;
        let cox_method = format!("Cox, Efron ties, Wald {ci}, {t} vs {c}");
        let fit = match cox_two_group(sample) {
            Ok(fit) if fit.converged => Some(fit),
            Ok(fit) => {
                signals.push(format!(
                    "Cox fit did not converge after {} iterations",
                    fit.iterations
                ));
                None
            }
            Err(e) => {
                signals.push(format!("Cox fit: {e}"));
                None
            }
        };
        match &fit {
            Some(f) => {
                q5.values.push(
                    ReportValue::interval("hazard ratio", &f.hr_ci, cox_method.clone())
                        .with_p(f.wald_p),
                );
                q5.values.push(ReportValue::scalar(
                    "log hazard ratio",
                    Cell::number(f.log_hr),
                    cox_method.clone(),
                ));
                q5.values.push(ReportValue::scalar(
                    "se(log hazard ratio)",
                    Cell::number(f.se),
                    cox_method.clone(),
                ));
            }
            None => {
                q5.values.push(ReportValue::not_computed(
                    "hazard ratio",
                    cox_method.clone(),
                ));
                q5.notes.extend(signals.iter().cloned());
            }
        }
        let lr_method = format!("logrank, {t} vs {c}, O-E for {t}");
        match logrank(sample, LogrankWeights::UNWEIGHTED) {
            Ok(lr) => {
                q5.values.push(
                    ReportValue::scalar("logrank z", Cell::number(lr.z), lr_method.clone())
                        .with_p(lr.p),
                );
            }
            Err(e) => {
                q5.values
                    .push(ReportValue::not_computed("logrank z", lr_method.clone()));
                q5.notes.push(format!("logrank not computed: {e}"));
            }
        }
        let mut md_rows = Vec::new();
        for &m in &options.milestones {
            let d = milestone_difference(sample, m, options.level)?;
            md_rows.push(vec![
                Cell::number(m),
                Cell::number(d.control.estimate.point),
                Cell::number(d.treatment.estimate.point),
                Cell::number(d.estimate.point),
                Cell::number(d.estimate.lower),
                Cell::number(d.estimate.upper),
                Cell::text(d.method.clone()),
            ]);
        }
        if !md_rows.is_empty() {
            q5.tables.push(Table {
                id: "milestone_differences".into(),
                title: format!("Milestone differences ({t} minus {c}), {ci} CI"),
                columns: [
                    "month",
                    c.as_str(),
                    t.as_str(),
                    "difference",
                    "lower",
                    "upper",
                    "method",
                ]
                .map(String::from)
                .to_vec(),
                rows: md_rows,
            });
        }
        let tau_desc = serde_json::to_string(&options.tau_policy)?;
        match rmst_difference(sample, options.tau_policy, options.level) {
            Ok(r) => {
                let method = format!("RMST difference, tau = {} ({tau_desc}), {ci}", r.tau_used);
                q5.values.push(
                    ReportValue::interval("RMST difference", &r.estimate, method.clone())
                        .with_p(r.p),
                );
                q5.values.push(ReportValue::interval(
                    format!("RMST [{c}]"),
                    &r.control,
                    method.clone(),
                ));
                q5.values.push(ReportValue::interval(
                    format!("RMST [{t}]"),
                    &r.treatment,
                    method.clone(),
                ));
                q7.values.push(ReportValue::scalar(
                    "RMST-difference information",
                    Cell::opt(r.information),
                    format!("1 / var(RMST difference), tau = {}", r.tau_used),
                ));
            }
            Err(e) => {
                q5.values.push(ReportValue::not_computed(
                    "RMST difference",
                    format!("RMST ({tau_desc})"),
                ));
                q5.notes.push(format!("RMST difference not computed: {e}"));
            }
        }

        match cross_arm_extreme_rmst(sample, options.delta) {
            Ok(x) => {
                let method = format!("{stab_method}, RMST up to {:.4}", x.horizon);
                q6.values.push(ReportValue::scalar(
                    "extreme RMST range",
                    Cell::number(x.value),
                    method.clone(),
                ));
                q6.values.push(ReportValue::scalar(
                    "observed RMST difference",
                    Cell::number(x.observed_difference),
                    method,
                ));
            }
            Err(e) => {
                q6.values.push(ReportValue::not_computed(
                    "extreme RMST range",
                    stab_method.clone(),
                ));
                q6.notes.push(format!("not computed: {e}"));
            }
        }
        q6.notes
            .push("under PH the HR estimate mainly gains precision over time".into());

        let observed = sample.n_events();
        match options.d_fin {
            Some(d_fin) => {
                let d_int = options.d_int.unwrap_or(observed);
                let f = information_fraction(d_int, d_fin)?;
                q7.values.push(ReportValue::scalar(
                    "information fraction",
                    Cell::number(f.fraction),
                    format!("d_int / d_fin = {d_int} / {d_fin}"),
                ));
            }
            None => q7.values.push(ReportValue::not_computed(
                "information fraction",
                "d_int / d_fin (no planned event count given)",
            )),
        }
        q7.values.push(ReportValue::scalar(
            "events",
            Cell::Count(observed as u64),
            "count",
        ));

        match &fit {
            Some(f) => match schoenfeld_ph_test(sample, f, options.ph_transform) {
                Ok(ph) => q8.values.push(
                    ReportValue::scalar(
                        "PH test chi-square",
                        Cell::number(ph.chi2),
                        format!(
                            "Grambsch-Therneau, {} time",
                            serde_json::to_string(&ph.transform)?.trim_matches('"')
                        ),
                    )
                    .with_p(ph.p),
                ),
                Err(e) => {
                    q8.values.push(ReportValue::not_computed(
                        "PH test chi-square",
                        "Grambsch-Therneau",
                    ));
                    q8.notes.push(format!("not computed: {e}"));
                }
            },
            None => q8.values.push(ReportValue::not_computed(
                "PH test chi-square",
                "Grambsch-Therneau (needs a Cox fit)",
            )),
        }
        for w in &options.extra_weights {
            let name = format!("FH({}, {}) logrank z", w.rho, w.gamma);
            match logrank(sample, *w) {
                Ok(lr) => q8.values.push(
                    ReportValue::scalar(name, Cell::number(lr.z), lr_method.clone()).with_p(lr.p),
                ),
                Err(e) => {
                    q8.values
                        .push(ReportValue::not_computed(name, lr_method.clone()));
                    q8.notes.push(format!("weighted logrank not computed: {e}"));
                }
            }
        }
    }
    bundle.sections.extend([q5, q6, q7, q8]);

    // Q9 censoring pattern.
    let mut q9 = Section::new("Q9", "Censoring pattern");
    let cens = censoring_comparison(snapshot)?;
    for a in &cens.arms {
        let q = km_quantile(&a.overall, 0.5, options.level);
        q9.values.push(ReportValue {
            name: format!("median time to censoring [{}]", a.arm),
            estimate: fmt_time(q.point),
            lower: fmt_time(q.lower),
            upper: fmt_time(q.upper),
            p: Cell::NotComputed,
            method: format!("reverse KM, Brookmeyer-Crowley {ci}"),
        });
        for (kind, c) in [
            ("overall", &a.overall),
            ("admin", &a.admin),
            ("ltfu", &a.ltfu),
        ] {
            let id = format!("censoring_{}_{kind}", a.arm);
            q9.curves.push(id.clone());
            curves.push((id, c.clone()));
        }
    }
    match &cens.logrank {
        Some(lr) => q9.values.push(
            ReportValue::scalar(
                "censoring logrank z",
                Cell::number(lr.z),
                "logrank on reversed indicators",
            )
            .with_p(lr.p),
        ),
        None => q9.values.push(ReportValue::not_computed(
            "censoring logrank z",
            "logrank on reversed indicators",
        )),
    }
    q9.notes.extend(cens.warning.clone());
    let reasons = [
        CensorReason::Event,
        CensorReason::AdminCensored,
        CensorReason::LostToFollowUp,
    ];
    let mut columns = vec!["arm".to_string()];
    columns.extend(reasons.iter().map(|r| r.token().to_string()));
    let rows = arms
        .iter()
        .map(|arm| {
            let ps = snapshot.select(Some(arm));
            let mut row = vec![Cell::text(arm.clone())];
            row.extend(
                reasons
                    .iter()
                    .map(|r| Cell::Count(ps.iter().filter(|p| p.reason == *r).count() as u64)),
            );
            row
        })
        .collect();
    q9.tables.push(Table {
        id: "reasons".into(),
        title: "Status at CCOD by arm".into(),
        columns,
        rows,
    });
    bundle.sections.push(q9);

    // Accrual.
    let mut acc = Section::new("accrual", "Accrual");
    let entries = snapshot.entries();
    let curve = ecdf(&entries)?;
    let mut sorted = entries.clone();
    sorted.sort_by(f64::total_cmp);
    acc.values.push(ReportValue::scalar(
        "median entry month",
        Cell::opt(crate::stats::median(&sorted)),
        "empirical, type 7",
    ));
    acc.values.push(ReportValue::scalar(
        "last entry month",
        Cell::number(*sorted.last().unwrap_or(&f64::NAN)),
        "maximum",
    ));
    acc.curves.push("accrual_ecdf".into());
    curves.push(("accrual_ecdf".into(), curve));
    bundle.sections.push(acc);

    Ok(Analysis {
        bundle,
        curves,
        signals,
    })
}
