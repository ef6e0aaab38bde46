//! Two-arm comparisons: weighted logrank, two-group Cox model, PH
//! diagnostics, milestone and RMST differences, information fraction and
//! censoring-distribution comparison.

mod cox;
mod effects;
mod logrank;
mod schoenfeld;

pub use cox::{cox_two_group, CoxResult};
pub use effects::{
    censoring_comparison, information_fraction, milestone_difference, rmst_difference,
    ArmCensoring, CensoringComparison, InformationFraction, MilestoneDifference, RmstDifference,
    TauPolicy,
};
pub use logrank::{logrank, LogrankResult, LogrankWeights};
pub use schoenfeld::{schoenfeld_ph_test, PhTest, PhTimeTransform};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::followup::Snapshot;
use crate::survival::ObservedSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoArmSample {
    pub control: ObservedSample,
    pub treatment: ObservedSample,
    /// `(control, treatment)` arm names.
    pub labels: (String, String),
}

impl TwoArmSample {
    pub fn new(control: ObservedSample, treatment: ObservedSample) -> Result<Self> {
        Self::with_labels(control, treatment, ("control".into(), "treatment".into()))
    }

    pub fn with_labels(
        control: ObservedSample,
        treatment: ObservedSample,
        labels: (String, String),
    ) -> Result<Self> {
        if control.is_empty() || treatment.is_empty() {
            return Err(Error::EmptySample(
                "both arms need at least one subject".into(),
            ));
        }
        Ok(TwoArmSample {
            control,
            treatment,
            labels,
        })
    }

    /// Splits a snapshot's primary-endpoint data into two arms.
    pub fn from_snapshot(snapshot: &Snapshot, control: &str, treatment: &str) -> Result<Self> {
        Self::with_labels(
            snapshot.outcome_sample(Some(control))?,
            snapshot.outcome_sample(Some(treatment))?,
            (control.to_string(), treatment.to_string()),
        )
    }

    /// Same data with the arm roles exchanged.
    pub fn swapped(&self) -> TwoArmSample {
        TwoArmSample {
            control: self.treatment.clone(),
            treatment: self.control.clone(),
            labels: (self.labels.1.clone(), self.labels.0.clone()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<TwoArmSample> {
        Ok(TwoArmSample {
            control: self.control.scaled(factor)?,
            treatment: self.treatment.scaled(factor)?,
            labels: self.labels.clone(),
        })
    }

    pub fn n_events(&self) -> usize {
        self.control.n_events() + self.treatment.n_events()
    }
}

/// Risk-set counts at one distinct event time; arm 1 is treatment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RiskRow {
    pub time: f64,
    pub n0: f64,
    pub n1: f64,
    pub d0: f64,
    pub d1: f64,
}

impl RiskRow {
    pub fn n(&self) -> f64 {
        self.n0 + self.n1
    }

    pub fn d(&self) -> f64 {
        self.d0 + self.d1
    }
}

/// Pooled risk table over the distinct event times of both arms.
pub(crate) fn risk_table(sample: &TwoArmSample) -> Vec<RiskRow> {
    let mut all: Vec<(f64, bool, bool)> = sample
        .control
        .items()
        .iter()
        .map(|o| (o.time, o.event, false))
        .chain(
            sample
                .treatment
                .items()
                .iter()
                .map(|o| (o.time, o.event, true)),
        )
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut n0 = sample.control.len() as f64;
    let mut n1 = sample.treatment.len() as f64;
    let mut rows = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let t = all[i].0;
        let (mut d0, mut d1, mut c0, mut c1) = (0.0, 0.0, 0.0, 0.0);
        while i < all.len() && all[i].0 == t {
            match (all[i].1, all[i].2) {
                (true, false) => d0 += 1.0,
                (true, true) => d1 += 1.0,
                (false, false) => c0 += 1.0,
                (false, true) => c1 += 1.0,
            }
            i += 1;
        }
        if d0 + d1 > 0.0 {
            rows.push(RiskRow {
                time: t,
                n0,
                n1,
                d0,
                d1,
            });
        }
        n0 -= d0 + c0;
        n1 -= d1 + c1;
    }
    rows
}
