use serde::{Deserialize, Serialize};

use super::{CensorReason, Snapshot, POOLED};
use crate::error::{Error, Result};
use crate::survival::{ecdf, km_fit, Observation, ObservedSample, StepCurve, TimeValue, PROB_EPS};

/// Korn's probability of being under follow-up, `π(t) = G_pot(t) · S_L(t)`.
///
/// `G_pot(t)` is the fraction of patients whose potential follow-up
/// (CCOD minus entry) exceeds `t`; `S_L` is the KM curve with loss to
/// follow-up as the event and every other status censored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KornFollowup {
    pub curve: StepCurve,
    pub median: TimeValue,
    pub lower_quartile: TimeValue,
    pub upper_quartile: TimeValue,
    /// `π` equals exactly one half just before the reported median.
    pub median_at_left_limit: bool,
}

/// `inf{t : π(t) < level}` and whether the left limit there equals `level`.
fn crossing(curve: &StepCurve, level: f64) -> (TimeValue, bool) {
    match curve.values.iter().position(|&v| v < level - PROB_EPS) {
        Some(i) => {
            let before = if i == 0 {
                curve.value_before_first_knot
            } else {
                curve.values[i - 1]
            };
            (
                TimeValue::Reached(curve.knots[i]),
                (before - level).abs() <= PROB_EPS,
            )
        }
        None => (TimeValue::NotReached, false),
    }
}

pub fn korn_followup(snapshot: &Snapshot, arm: Option<&str>) -> Result<KornFollowup> {
    let patients = snapshot.select(arm);
    if patients.is_empty() {
        return Err(Error::EmptySample(format!(
            "no patients in arm `{}`",
            arm.unwrap_or(POOLED)
        )));
    }
    let potentials: Vec<f64> = patients
        .iter()
        .map(|p| p.potential(snapshot.ccod))
        .collect();
    let pot_cdf = ecdf(&potentials)?;
    let g_pot = StepCurve::from_steps(
        pot_cdf.knots.clone(),
        pot_cdf.values.iter().map(|f| 1.0 - f).collect(),
        1.0,
        pot_cdf.support_end,
    );

    let ltfu = ObservedSample::new(
        patients
            .iter()
            .map(|p| Observation {
                time: p.time,
                event: p.reason == CensorReason::LostToFollowUp,
            })
            .collect(),
    )?;
    let s_l = km_fit(&ltfu)?;

    let mut curve = g_pot.product(&s_l);
    curve.support_end = g_pot.support_end;
    let (median, median_at_left_limit) = crossing(&curve, 0.5);
    Ok(KornFollowup {
        median,
        lower_quartile: crossing(&curve, 0.75).0,
        upper_quartile: crossing(&curve, 0.25).0,
        median_at_left_limit,
        curve,
    })
}
