//! Extreme-scenario stability bounds for a Kaplan-Meier curve.
//!
//! Observed events stay events in any later snapshot; only currently
//! censored subjects can change. The best case keeps every censored subject
//! event-free up to the last observed event time, the worst case gives every
//! censored subject an event one day after its censoring time (or at the next
//! observed event, if that comes sooner).

use serde::{Deserialize, Serialize};

use crate::compare::TwoArmSample;
use crate::error::{Error, Result};
use crate::survival::{km_fit, Observation, ObservedSample, StepCurve, DAYS_PER_MONTH};

/// One day, in months.
pub const ONE_DAY: f64 = 1.0 / DAYS_PER_MONTH;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityBounds {
    pub observed: StepCurve,
    /// Worst case.
    pub lower: StepCurve,
    /// Best case.
    pub upper: StepCurve,
    /// Integration horizon: the largest worst-case time.
    pub horizon: f64,
    pub delta: f64,
    /// No event observed; the best case is flat at one.
    pub without_events: bool,
}

pub fn betensky_bounds(sample: &ObservedSample, delta: f64) -> Result<StabilityBounds> {
    sample.require_non_empty("stability bounds need at least one observation")?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "delta {delta} must be finite and >= 0"
        )));
    }
    let last_event = sample.max_event_time();
    let mut event_times: Vec<f64> = sample
        .items()
        .iter()
        .filter(|o| o.event)
        .map(|o| o.time)
        .collect();
    event_times.sort_by(f64::total_cmp);
    // The worst case is an event right after censoring: `delta` later, but
    // never past the next observed event, so the bound stays below the KM.
    let worst_time = |c: f64| {
        let next = event_times
            .get(event_times.partition_point(|&e| e <= c))
            .copied();
        next.map_or(c + delta, |e| e.min(c + delta))
    };

    let best = ObservedSample::new(
        sample
            .items()
            .iter()
            .map(|o| match (o.event, last_event) {
                (false, Some(t)) => Observation {
                    time: t,
                    event: false,
                },
                _ => *o,
            })
            .collect(),
    )?;
    let worst = ObservedSample::new(
        sample
            .items()
            .iter()
            .map(|o| Observation {
                time: if o.event { o.time } else { worst_time(o.time) },
                event: true,
            })
            .collect(),
    )?;
    let horizon = worst.max_time().unwrap_or(0.0);
    Ok(StabilityBounds {
        observed: km_fit(sample)?,
        lower: km_fit(&worst)?,
        upper: km_fit(&best)?,
        horizon,
        delta,
        without_events: last_event.is_none(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityIndex {
    /// Area between the bounds over `[0, window]`, divided by the window.
    pub value: f64,
    /// Integration window: the bounds' horizon plus one offset `delta`.
    pub window: f64,
}

/// Normalized area between the bounds.
///
/// The window extends one offset past the last worst-case event so that the
/// terminal gap `upper(H) - lower(H)` counts: without it, censoring that only
/// occurs at the largest observed time would leave the index at zero.
pub fn stability_index_from_bounds(bounds: &StabilityBounds) -> StabilityIndex {
    let h = bounds.horizon + bounds.delta;
    let value = if h > 0.0 {
        (bounds.upper.integrate(0.0, h) - bounds.lower.integrate(0.0, h)) / h
    } else {
        0.0
    };
    StabilityIndex {
        value: value.clamp(0.0, 1.0),
        window: h,
    }
}

pub fn stability_index(sample: &ObservedSample, delta: f64) -> Result<StabilityIndex> {
    Ok(stability_index_from_bounds(&betensky_bounds(
        sample, delta,
    )?))
}

/// Most extreme RMST difference still possible: best case of the treatment
/// arm minus worst case of the control arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossArmExtreme {
    pub value: f64,
    pub horizon: f64,
    /// Observed treatment-minus-control area over the same horizon.
    pub observed_difference: f64,
}

pub fn cross_arm_extreme_rmst(sample: &TwoArmSample, delta: f64) -> Result<CrossArmExtreme> {
    if sample.treatment.n_events() == 0 || sample.control.n_events() == 0 {
        return Err(Error::NoEvents("the cross-arm extreme RMST".into()));
    }
    let trt = betensky_bounds(&sample.treatment, delta)?;
    let ctl = betensky_bounds(&sample.control, delta)?;
    let h = trt.horizon.min(ctl.horizon);
    Ok(CrossArmExtreme {
        value: trt.upper.integrate(0.0, h) - ctl.lower.integrate(0.0, h),
        horizon: h,
        observed_difference: trt.observed.integrate(0.0, h) - ctl.observed.integrate(0.0, h),
    })
}
