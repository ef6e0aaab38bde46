use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CensorReason, Snapshot};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LtfuReassignment {
    pub snapshot: Snapshot,
    /// Ids of the patients relabeled as lost to follow-up.
    pub relabeled: Vec<String>,
    pub warning: Option<String>,
}

/// Relabels `round(fraction · #admin-censored)` administratively censored
/// patients, drawn uniformly without replacement, as lost to follow-up.
/// Times are left untouched. Deterministic for a given seed.
pub fn ltfu_reassign(snapshot: &Snapshot, fraction: f64, seed: u64) -> Result<LtfuReassignment> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidInput(format!(
            "LTFU fraction {fraction} must lie in [0, 1]"
        )));
    }
    let admin: Vec<usize> = snapshot
        .patients()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.reason == CensorReason::AdminCensored)
        .map(|(i, _)| i)
        .collect();
    if admin.is_empty() {
        return Ok(LtfuReassignment {
            snapshot: snapshot.clone(),
            relabeled: Vec::new(),
            warning: Some("no administratively censored patients; nothing reassigned".into()),
        });
    }
    let count = (fraction * admin.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = sample(&mut rng, admin.len(), count)
        .into_iter()
        .map(|k| admin[k])
        .collect();
    chosen.sort_unstable();

    let mut patients = snapshot.patients().to_vec();
    let mut relabeled = Vec::with_capacity(count);
    for i in chosen {
        patients[i].reason = CensorReason::LostToFollowUp;
        relabeled.push(patients[i].id.clone());
    }
    Ok(LtfuReassignment {
        snapshot: snapshot.with_patients(patients),
        relabeled,
        warning: None,
    })
}
