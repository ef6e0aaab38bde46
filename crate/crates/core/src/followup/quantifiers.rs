use serde::{Deserialize, Serialize};

use super::{korn_followup, CensorReason, PatientRecord, QuantifierId, Snapshot, POOLED};
use crate::error::{Error, Result};
use crate::stats::quantile_sorted;
use crate::survival::{km_fit, km_quantile, Observation, ObservedSample, StepCurve, TimeValue};

/// How the distribution of a derived sample is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimation {
    PlainEmpirical,
    ReverseKm,
    KornProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantifierSummary {
    pub n: usize,
    pub median: TimeValue,
    pub lower_quartile: TimeValue,
    pub upper_quartile: TimeValue,
    pub min: f64,
    pub max: f64,
    /// The median sits at a jump whose left limit equals exactly one half.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub median_at_left_limit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantifierResult {
    pub id: QuantifierId,
    /// Recoded per-patient times and statuses.
    pub derived: ObservedSample,
    pub estimation: Estimation,
    pub summary: QuantifierSummary,
    pub curve: Option<StepCurve>,
}

fn obs(time: f64, event: bool) -> Observation {
    Observation { time, event }
}

/// Applies the recoding rule of one quantifier to the selected patients.
fn recode(id: QuantifierId, patients: &[&PatientRecord], ccod: f64) -> Vec<Observation> {
    use CensorReason::*;
    match id {
        QuantifierId::Q1 => patients.iter().map(|p| obs(p.time, true)).collect(),
        QuantifierId::Q2 => patients
            .iter()
            .filter(|p| p.reason.is_censored())
            .map(|p| obs(p.time, true))
            .collect(),
        QuantifierId::Q3 => patients
            .iter()
            .map(|p| obs(p.time, p.reason.is_censored()))
            .collect(),
        QuantifierId::Q4 => patients
            .iter()
            .map(|p| obs(p.potential(ccod), true))
            .collect(),
        QuantifierId::Q5 => patients
            .iter()
            .map(|p| match p.reason {
                Event => obs(p.potential(ccod), true),
                AdminCensored | LostToFollowUp => obs(p.time, true),
            })
            .collect(),
        // LTFU is the event of the Korn loss-to-follow-up factor.
        QuantifierId::Q6 => patients
            .iter()
            .map(|p| obs(p.time, p.reason == LostToFollowUp))
            .collect(),
        QuantifierId::Q7 => patients
            .iter()
            .map(|p| match p.reason {
                Event => obs(p.time, true),
                AdminCensored | LostToFollowUp => obs(p.potential(ccod), true),
            })
            .collect(),
    }
}

fn empirical_summary(sample: &ObservedSample) -> QuantifierSummary {
    let mut sorted: Vec<f64> = sample.times().collect();
    sorted.sort_by(f64::total_cmp);
    QuantifierSummary {
        n: sorted.len(),
        median: TimeValue::Reached(quantile_sorted(&sorted, 0.5)),
        lower_quartile: TimeValue::Reached(quantile_sorted(&sorted, 0.25)),
        upper_quartile: TimeValue::Reached(quantile_sorted(&sorted, 0.75)),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        median_at_left_limit: false,
    }
}

fn min_max(sample: &ObservedSample) -> (f64, f64) {
    sample
        .times()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            (lo.min(t), hi.max(t))
        })
}

/// Derives one follow-up quantifier for an arm (or pooled when `arm` is `None`).
pub fn derive_quantifier(
    snapshot: &Snapshot,
    id: QuantifierId,
    arm: Option<&str>,
) -> Result<QuantifierResult> {
    let patients = snapshot.select(arm);
    if patients.is_empty() {
        return Err(Error::EmptySample(format!(
            "no patients in arm `{}`",
            arm.unwrap_or(POOLED)
        )));
    }
    let derived = ObservedSample::new(recode(id, &patients, snapshot.ccod))?;

    match id {
        QuantifierId::Q2 if derived.is_empty() => Err(Error::EmptySample(
            "observation time for those censored needs at least one censored patient".into(),
        )),
        QuantifierId::Q3 => {
            let curve = km_fit(&derived)?;
            let (min, max) = min_max(&derived);
            let summary = QuantifierSummary {
                n: derived.len(),
                median: km_quantile(&curve, 0.5, 0.95).point,
                lower_quartile: km_quantile(&curve, 0.25, 0.95).point,
                upper_quartile: km_quantile(&curve, 0.75, 0.95).point,
                min,
                max,
                median_at_left_limit: false,
            };
            Ok(QuantifierResult {
                id,
                derived,
                estimation: Estimation::ReverseKm,
                summary,
                curve: Some(curve),
            })
        }
        QuantifierId::Q6 => {
            let korn = korn_followup(snapshot, arm)?;
            let potentials: Vec<f64> = patients
                .iter()
                .map(|p| p.potential(snapshot.ccod))
                .collect();
            let summary = QuantifierSummary {
                n: derived.len(),
                median: korn.median,
                lower_quartile: korn.lower_quartile,
                upper_quartile: korn.upper_quartile,
                min: potentials.iter().copied().fold(f64::INFINITY, f64::min),
                max: potentials.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                median_at_left_limit: korn.median_at_left_limit,
            };
            Ok(QuantifierResult {
                id,
                derived,
                estimation: Estimation::KornProduct,
                summary,
                curve: Some(korn.curve),
            })
        }
        _ => Ok(QuantifierResult {
            id,
            summary: empirical_summary(&derived),
            derived,
            estimation: Estimation::PlainEmpirical,
            curve: None,
        }),
    }
}

/// Clark's completeness index: median of Q1 over median of Q7.
pub fn clark_c(snapshot: &Snapshot, arm: Option<&str>) -> Result<f64> {
    let num = derive_quantifier(snapshot, QuantifierId::Q1, arm)?;
    let den = derive_quantifier(snapshot, QuantifierId::Q7, arm)?;
    let (Some(num), Some(den)) = (num.summary.median.value(), den.summary.median.value()) else {
        return Err(Error::UndefinedRatio("a median was not reached".into()));
    };
    if den <= 0.0 {
        return Err(Error::UndefinedRatio(
            "median potential follow-up considering events is zero".into(),
        ));
    }
    Ok(num / den)
}
