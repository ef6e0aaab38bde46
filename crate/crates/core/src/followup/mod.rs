//! Follow-up quantifiers for a trial snapshot.
//!
//! A [`Snapshot`] holds every randomized patient known at a clinical cut-off
//! date (CCOD). Each of the seven [`QuantifierId`]s recodes the patient
//! records into a derived sample whose distribution is then summarized,
//! mostly through its median.

mod korn;
mod ltfu;
mod quantifiers;
mod summary;

pub use korn::{korn_followup, KornFollowup};
pub use ltfu::{ltfu_reassign, LtfuReassignment};
pub use quantifiers::{
    clark_c, derive_quantifier, Estimation, QuantifierResult, QuantifierSummary,
};
pub use summary::{
    summarize_all, summary_deltas, FollowupSummary, GroupSummary, QuantifierDelta, QuantifierRow,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::{Observation, ObservedSample};

/// Group label used for summaries over all arms.
pub const POOLED: &str = "pooled";

/// Terminal status of a patient at the CCOD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensorReason {
    Event,
    AdminCensored,
    LostToFollowUp,
}

impl CensorReason {
    pub fn is_censored(self) -> bool {
        !matches!(self, CensorReason::Event)
    }

    /// Token used in CSV input and output.
    pub fn token(self) -> &'static str {
        match self {
            CensorReason::Event => "event",
            CensorReason::AdminCensored => "admin",
            CensorReason::LostToFollowUp => "ltfu",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token.trim().to_ascii_lowercase().as_str() {
            "event" => Some(CensorReason::Event),
            "admin" => Some(CensorReason::AdminCensored),
            "ltfu" => Some(CensorReason::LostToFollowUp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: String,
    pub arm: String,
    /// Calendar months from study start to randomization.
    pub entry: f64,
    /// Months from entry to the terminal status.
    pub time: f64,
    pub reason: CensorReason,
}

impl PatientRecord {
    /// Months from entry to the CCOD.
    pub fn potential(&self, ccod: f64) -> f64 {
        (ccod - self.entry).max(0.0)
    }
}

/// All patient records consistent with one clinical cut-off date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub ccod: f64,
    pub label: String,
    patients: Vec<PatientRecord>,
}

/// Slack allowed when checking `entry + time <= ccod`.
pub(crate) fn ccod_tolerance(ccod: f64) -> f64 {
    1e-9 * ccod.abs().max(1.0)
}

impl Snapshot {
    pub fn new(ccod: f64, patients: Vec<PatientRecord>, label: impl Into<String>) -> Result<Self> {
        if !ccod.is_finite() {
            return Err(Error::InvalidInput(format!("CCOD {ccod} is not finite")));
        }
        if patients.is_empty() {
            return Err(Error::EmptySample("snapshot has no patients".into()));
        }
        let tol = ccod_tolerance(ccod);
        for p in &patients {
            if !(p.entry.is_finite() && p.entry >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "patient {}: entry {} must be finite and >= 0",
                    p.id, p.entry
                )));
            }
            if !(p.time.is_finite() && p.time >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "patient {}: time {} must be finite and >= 0",
                    p.id, p.time
                )));
            }
            if p.entry + p.time > ccod + tol {
                return Err(Error::InvalidInput(format!(
                    "patient {}: entry + time = {} exceeds CCOD {}",
                    p.id,
                    p.entry + p.time,
                    ccod
                )));
            }
            if p.arm.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "patient {}: empty arm label",
                    p.id
                )));
            }
        }
        Ok(Snapshot {
            ccod,
            label: label.into(),
            patients,
        })
    }

    pub fn patients(&self) -> &[PatientRecord] {
        &self.patients
    }

    /// Distinct arm labels in sorted order.
    pub fn arms(&self) -> Vec<String> {
        let mut arms: Vec<String> = self.patients.iter().map(|p| p.arm.clone()).collect();
        arms.sort();
        arms.dedup();
        arms
    }

    /// Patients of one arm, or all patients when `arm` is `None`.
    pub fn select(&self, arm: Option<&str>) -> Vec<&PatientRecord> {
        self.patients
            .iter()
            .filter(|p| arm.is_none_or(|a| p.arm == a))
            .collect()
    }

    /// Primary-endpoint sample: events observed, every other status censored.
    pub fn outcome_sample(&self, arm: Option<&str>) -> Result<ObservedSample> {
        let selected = self.select(arm);
        if selected.is_empty() {
            return Err(Error::EmptySample(format!(
                "no patients in arm `{}`",
                arm.unwrap_or(POOLED)
            )));
        }
        ObservedSample::new(
            selected
                .iter()
                .map(|p| Observation {
                    time: p.time,
                    event: p.reason == CensorReason::Event,
                })
                .collect(),
        )
    }

    pub fn count(&self, reason: CensorReason) -> usize {
        self.patients.iter().filter(|p| p.reason == reason).count()
    }

    pub fn entries(&self) -> Vec<f64> {
        self.patients.iter().map(|p| p.entry).collect()
    }

    pub(crate) fn with_patients(&self, patients: Vec<PatientRecord>) -> Snapshot {
        Snapshot {
            ccod: self.ccod,
            label: self.label.clone(),
            patients,
        }
    }
}

/// The seven follow-up quantities, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuantifierId {
    /// Observation time regardless of censoring.
    Q1,
    /// Observation time for those censored.
    Q2,
    /// Time to censoring (reverse KM).
    Q3,
    /// Time to CCOD.
    Q4,
    /// Known function time.
    Q5,
    /// Korn's potential follow-up.
    Q6,
    /// Potential follow-up considering events.
    Q7,
}

impl QuantifierId {
    pub const ALL: [QuantifierId; 7] = [
        QuantifierId::Q1,
        QuantifierId::Q2,
        QuantifierId::Q3,
        QuantifierId::Q4,
        QuantifierId::Q5,
        QuantifierId::Q6,
        QuantifierId::Q7,
    ];

    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn title(self) -> &'static str {
        match self {
            QuantifierId::Q1 => "Observation time regardless of censoring",
            QuantifierId::Q2 => "Observation time for those censored",
            QuantifierId::Q3 => "Time to censoring",
            QuantifierId::Q4 => "Time to CCOD",
            QuantifierId::Q5 => "Known function time",
            QuantifierId::Q6 => "Korn potential follow-up",
            QuantifierId::Q7 => "Potential follow-up considering events",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        let n: usize = s.strip_prefix('q').unwrap_or(&s).parse().ok()?;
        Self::ALL.get(n.checked_sub(1)?).copied()
    }
}

impl std::fmt::Display for QuantifierId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Q{}", self.number())
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_rejects_inconsistent_records() {
        let p = PatientRecord {
            id: "x".into(),
            arm: "A".into(),
            entry: 5.0,
            time: 6.0,
            reason: CensorReason::Event,
        };
        assert!(Snapshot::new(10.0, vec![p], "bad").is_err());
        assert!(Snapshot::new(10.0, vec![], "empty").is_err());
    }

    #[test]
    fn quantifier_ids_round_trip() {
        for id in QuantifierId::ALL {
            assert_eq!(QuantifierId::parse(&id.to_string()), Some(id));
        }
        assert_eq!(QuantifierId::parse("q8"), None);
        assert_eq!(QuantifierId::parse("0"), None);
    }

    #[test]
    fn status_tokens() {
        assert_eq!(
            CensorReason::from_token("LTFU"),
            Some(CensorReason::LostToFollowUp)
        );
        assert_eq!(CensorReason::from_token("lost"), None);
    }
}
