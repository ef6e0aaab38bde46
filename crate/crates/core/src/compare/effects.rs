use serde::{Deserialize, Serialize};

use super::{logrank, LogrankResult, LogrankWeights, TwoArmSample};
use crate::error::{Error, Result};
use crate::followup::{CensorReason, Snapshot};
use crate::stats::two_sided_p;
use crate::survival::{
    km_fit, milestone_estimate, reverse_km, rmst, EstimateFlag, IntervalEstimate, Milestone,
    Observation, ObservedSample, StepCurve,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilestoneDifference {
    pub time: f64,
    /// Treatment minus control.
    pub estimate: IntervalEstimate,
    pub treatment: Milestone,
    pub control: Milestone,
    /// Interval construction for the difference.
    pub method: String,
}

/// Difference of KM event-free probabilities at `t` with an untransformed
/// normal interval, clipped to `[-1, 1]`.
pub fn milestone_difference(
    sample: &TwoArmSample,
    t: f64,
    level: f64,
) -> Result<MilestoneDifference> {
    let trt = milestone_estimate(&km_fit(&sample.treatment)?, t, level)?;
    let ctl = milestone_estimate(&km_fit(&sample.control)?, t, level)?;
    let se_t = trt.estimate.se.unwrap_or(0.0);
    let se_c = ctl.estimate.se.unwrap_or(0.0);
    let point = trt.estimate.point - ctl.estimate.point;
    let se = (se_t * se_t + se_c * se_c).sqrt();

    let mut estimate = if se == 0.0 {
        IntervalEstimate::degenerate(point, level)
    } else {
        IntervalEstimate::normal(point, se, level)
    };
    if estimate.lower < -1.0 || estimate.upper > 1.0 {
        estimate.lower = estimate.lower.max(-1.0);
        estimate.upper = estimate.upper.min(1.0);
        estimate.flag(EstimateFlag::Clipped);
    }
    if trt.estimate.has_flag(EstimateFlag::Extrapolated)
        || ctl.estimate.has_flag(EstimateFlag::Extrapolated)
    {
        estimate.flag(EstimateFlag::Extrapolated);
    }
    Ok(MilestoneDifference {
        time: t,
        estimate,
        treatment: trt,
        control: ctl,
        method: "normal approximation on the difference, Greenwood variances".into(),
    })
}

/// Rule for choosing the RMST restriction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "tau", rename_all = "snake_case")]
pub enum TauPolicy {
    FixedTau(f64),
    /// Smaller of the two arms' largest observed times (events or censored).
    MinOfMaxObserved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmstDifference {
    /// Treatment minus control.
    pub estimate: IntervalEstimate,
    pub p: f64,
    pub tau_used: f64,
    pub policy: TauPolicy,
    pub treatment: IntervalEstimate,
    pub control: IntervalEstimate,
    /// Inverse variance of the difference, a generic information measure.
    pub information: Option<f64>,
}

pub fn rmst_difference(
    sample: &TwoArmSample,
    policy: TauPolicy,
    level: f64,
) -> Result<RmstDifference> {
    let trt_curve = km_fit(&sample.treatment)?;
    let ctl_curve = km_fit(&sample.control)?;
    let admissible = trt_curve.support_end.min(ctl_curve.support_end);
    let tau = match policy {
        TauPolicy::FixedTau(tau) if tau > admissible => {
            return Err(Error::TauOutOfRange {
                tau,
                max: admissible,
            })
        }
        TauPolicy::FixedTau(tau) => tau,
        TauPolicy::MinOfMaxObserved => admissible,
    };
    let trt = rmst(&trt_curve, tau, level)?;
    let ctl = rmst(&ctl_curve, tau, level)?;
    let point = trt.point - ctl.point;
    let var = trt.se.unwrap_or(0.0).powi(2) + ctl.se.unwrap_or(0.0).powi(2);
    let se = var.sqrt();
    let (estimate, p) = if se == 0.0 {
        (
            IntervalEstimate::degenerate(point, level),
            if point == 0.0 { 1.0 } else { 0.0 },
        )
    } else {
        (
            IntervalEstimate::normal(point, se, level),
            two_sided_p(point / se),
        )
    };
    Ok(RmstDifference {
        estimate,
        p,
        tau_used: tau,
        policy,
        treatment: trt,
        control: ctl,
        information: (var > 0.0).then(|| 1.0 / var),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationFraction {
    pub d_int: usize,
    pub d_fin: usize,
    pub fraction: f64,
}

pub fn information_fraction(d_int: usize, d_fin: usize) -> Result<InformationFraction> {
    if d_fin == 0 {
        return Err(Error::InvalidInput(
            "planned final event count must be positive".into(),
        ));
    }
    Ok(InformationFraction {
        d_int,
        d_fin,
        fraction: d_int as f64 / d_fin as f64,
    })
}

/// Censoring-distribution estimates for one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmCensoring {
    pub arm: String,
    /// Reverse KM: any censoring as the event.
    pub overall: StepCurve,
    /// Administrative censoring as the event, everything else censored.
    pub admin: StepCurve,
    /// Loss to follow-up as the event, everything else censored.
    pub ltfu: StepCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoringComparison {
    pub arms: Vec<ArmCensoring>,
    /// Logrank comparison of the censoring distributions of the first two arms.
    pub logrank: Option<LogrankResult>,
    pub warning: Option<String>,
}

fn reason_curve(snapshot: &Snapshot, arm: &str, reason: CensorReason) -> Result<StepCurve> {
    let sample = ObservedSample::new(
        snapshot
            .select(Some(arm))
            .iter()
            .map(|p| Observation {
                time: p.time,
                event: p.reason == reason,
            })
            .collect(),
    )?;
    km_fit(&sample)
}

/// Reverse-KM censoring curves per arm, also split by censoring reason.
pub fn censoring_comparison(snapshot: &Snapshot) -> Result<CensoringComparison> {
    let arm_names = snapshot.arms();
    let mut arms = Vec::with_capacity(arm_names.len());
    for arm in &arm_names {
        arms.push(ArmCensoring {
            arm: arm.clone(),
            overall: reverse_km(&snapshot.outcome_sample(Some(arm))?)?,
            admin: reason_curve(snapshot, arm, CensorReason::AdminCensored)?,
            ltfu: reason_curve(snapshot, arm, CensorReason::LostToFollowUp)?,
        });
    }
    let (logrank, warning) = if arm_names.len() < 2 {
        (
            None,
            Some("single-arm snapshot: no between-arm comparison".to_string()),
        )
    } else {
        let flipped = TwoArmSample::with_labels(
            snapshot.outcome_sample(Some(&arm_names[0]))?.flipped(),
            snapshot.outcome_sample(Some(&arm_names[1]))?.flipped(),
            (arm_names[0].clone(), arm_names[1].clone()),
        )?;
        match logrank(&flipped, LogrankWeights::UNWEIGHTED) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(format!("censoring logrank not computed: {e}"))),
        }
    };
    Ok(CensoringComparison {
        arms,
        logrank,
        warning,
    })
}
