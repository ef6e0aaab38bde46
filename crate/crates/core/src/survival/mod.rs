//! Nonparametric estimation primitives for right-censored data.
//!
//! All times are in months. Survival curves are right-continuous step
//! functions carried by [`StepCurve`]; Kaplan-Meier fits additionally carry
//! Greenwood variance terms and the risk-set bookkeeping needed for
//! milestone tables and at-risk rows.

mod curve;
mod estimates;
mod km;
mod sample;

pub use curve::StepCurve;
pub use estimates::{
    at_risk_table, ecdf, km_ci, km_quantile, loglog_interval, milestone_estimate, rmst, Milestone,
    QuantileEstimate,
};
pub use km::{greenwood_se, km_fit, reverse_km, GreenwoodSe};
pub use sample::{Observation, ObservedSample};

use serde::{Deserialize, Serialize};

/// Days per month used when converting calendar input.
pub const DAYS_PER_MONTH: f64 = 30.4375;

/// Tolerance used when comparing survival values against probability targets.
pub(crate) const PROB_EPS: f64 = 1e-12;

/// A time that may not have been reached by the estimate (e.g. a median of a
/// curve that never drops to one half).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TimeValue {
    Reached(f64),
    NotReached,
}

impl TimeValue {
    pub fn value(self) -> Option<f64> {
        match self {
            TimeValue::Reached(v) => Some(v),
            TimeValue::NotReached => None,
        }
    }

    pub fn is_reached(self) -> bool {
        matches!(self, TimeValue::Reached(_))
    }
}

impl std::fmt::Display for TimeValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeValue::Reached(v) => write!(f, "{v}"),
            TimeValue::NotReached => f.write_str("not reached"),
        }
    }
}

/// Qualifiers attached to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateFlag {
    /// Point estimate at 0 or 1; interval collapsed onto it.
    Degenerate,
    /// Greenwood term undefined because the risk set was exhausted.
    Saturated,
    /// Requested time lies beyond the observed data.
    Extrapolated,
    /// Interval bounds were clipped to the parameter range.
    Clipped,
}

/// Point estimate with a confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub se: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<EstimateFlag>,
}

impl IntervalEstimate {
    pub fn degenerate(point: f64, level: f64) -> Self {
        IntervalEstimate {
            point,
            lower: point,
            upper: point,
            level,
            se: Some(0.0),
            flags: vec![EstimateFlag::Degenerate],
        }
    }

    /// Symmetric normal interval `point ± z·se`.
    pub fn normal(point: f64, se: f64, level: f64) -> Self {
        let z = crate::stats::z_for_level(level);
        IntervalEstimate {
            point,
            lower: point - z * se,
            upper: point + z * se,
            level,
            se: Some(se),
            flags: Vec::new(),
        }
    }

    pub fn has_flag(&self, flag: EstimateFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub(crate) fn flag(&mut self, flag: EstimateFlag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }
}
