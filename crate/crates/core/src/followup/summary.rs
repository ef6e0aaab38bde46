use serde::{Deserialize, Serialize};

use super::{derive_quantifier, QuantifierId, QuantifierSummary, Snapshot, POOLED};
use crate::error::Result;

/// One quantifier's summary for one group, or the reason it was not computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantifierRow {
    pub id: QuantifierId,
    pub summary: Option<QuantifierSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub rows: Vec<QuantifierRow>,
}

impl GroupSummary {
    pub fn row(&self, id: QuantifierId) -> &QuantifierRow {
        &self.rows[id as usize]
    }

    pub fn median(&self, id: QuantifierId) -> Option<f64> {
        self.row(id).summary.and_then(|s| s.median.value())
    }
}

/// All seven quantifiers for the pooled population and for every arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowupSummary {
    pub label: String,
    pub ccod: f64,
    pub groups: Vec<GroupSummary>,
}

impl FollowupSummary {
    pub fn group(&self, name: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.group == name)
    }

    pub fn pooled(&self) -> &GroupSummary {
        &self.groups[0]
    }
}

pub fn summarize_all(snapshot: &Snapshot) -> Result<FollowupSummary> {
    let arms = snapshot.arms();
    let mut groups = Vec::with_capacity(arms.len() + 1);
    let targets = std::iter::once(None).chain(arms.iter().map(|a| Some(a.as_str())));
    for arm in targets {
        let rows = QuantifierId::ALL
            .iter()
            .map(|&id| match derive_quantifier(snapshot, id, arm) {
                Ok(r) => QuantifierRow {
                    id,
                    summary: Some(r.summary),
                    note: None,
                },
                Err(e) => QuantifierRow {
                    id,
                    summary: None,
                    note: Some(e.to_string()),
                },
            })
            .collect();
        groups.push(GroupSummary {
            group: arm.unwrap_or(POOLED).to_string(),
            rows,
        });
    }
    Ok(FollowupSummary {
        label: snapshot.label.clone(),
        ccod: snapshot.ccod,
        groups,
    })
}

/// Change in a quantifier median between two snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantifierDelta {
    pub id: QuantifierId,
    pub before: Option<f64>,
    pub after: Option<f64>,
    pub delta: Option<f64>,
    /// Relative change in percent of `before`.
    pub delta_pct: Option<f64>,
}

pub fn summary_deltas(before: &GroupSummary, after: &GroupSummary) -> Vec<QuantifierDelta> {
    QuantifierId::ALL
        .iter()
        .map(|&id| {
            let (b, a) = (before.median(id), after.median(id));
            let delta = a.zip(b).map(|(a, b)| a - b);
            let delta_pct = delta
                .zip(b)
                .and_then(|(d, b)| (b != 0.0).then(|| 100.0 * d / b));
            QuantifierDelta {
                id,
                before: b,
                after: a,
                delta,
                delta_pct,
            }
        })
        .collect()
}
