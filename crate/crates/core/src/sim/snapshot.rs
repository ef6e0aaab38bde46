use super::{Cutoff, LatentTrial};
use crate::error::{Error, Result};
use crate::followup::{CensorReason, PatientRecord, Snapshot};

/// Snapshot at the calendar time of the `d`-th observed event.
pub fn snapshot_at_events(latent: &LatentTrial, d: usize) -> Result<Snapshot> {
    if d == 0 {
        return Err(Error::InvalidInput("event cut-off must be >= 1".into()));
    }
    let mut event_times: Vec<f64> = latent
        .patients
        .iter()
        .filter_map(|p| match p.resolution() {
            (t, true) => Some(t),
            _ => None,
        })
        .collect();
    if event_times.len() < d {
        return Err(Error::InsufficientEvents {
            requested: d,
            available: event_times.len(),
        });
    }
    let (_, ccod, _) = event_times.select_nth_unstable_by(d - 1, f64::total_cmp);
    let ccod = *ccod;
    let mut snapshot = snapshot_at_time(latent, ccod)?;
    snapshot.label = format!("{d} events");
    Ok(snapshot)
}

/// Snapshot at a fixed calendar CCOD; patients entering later are excluded.
pub fn snapshot_at_time(latent: &LatentTrial, ccod: f64) -> Result<Snapshot> {
    let patients: Vec<PatientRecord> = latent
        .patients
        .iter()
        .enumerate()
        .filter(|(_, p)| p.entry <= ccod)
        .map(|(i, p)| {
            let (calendar, is_event) = p.resolution();
            let (time, reason) = if calendar <= ccod {
                if is_event {
                    (p.event, CensorReason::Event)
                } else {
                    (p.ltfu, CensorReason::LostToFollowUp)
                }
            } else {
                (ccod - p.entry, CensorReason::AdminCensored)
            };
            PatientRecord {
                id: format!("S{:05}", i + 1),
                arm: p.arm.label().to_string(),
                entry: p.entry,
                time,
                reason,
            }
        })
        .collect();
    if patients.is_empty() {
        return Err(Error::EmptySample(format!(
            "no patient entered before CCOD {ccod}"
        )));
    }
    Snapshot::new(ccod, patients, format!("month {ccod}"))
}

pub fn snapshot_at_cutoff(latent: &LatentTrial, cutoff: Cutoff) -> Result<Snapshot> {
    match cutoff {
        Cutoff::Events(d) => snapshot_at_events(latent, d),
        Cutoff::Calendar(t) => snapshot_at_time(latent, t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_trial, SimConfig};
    use std::collections::HashSet;

    fn trial() -> LatentTrial {
        simulate_trial(&SimConfig::delayed_separation(), 2024).unwrap()
    }

    #[test]
    fn first_event_cutoff() {
        let latent = trial();
        let s = snapshot_at_events(&latent, 1).unwrap();
        assert_eq!(s.count(CensorReason::Event), 1);
        let earliest = latent
            .patients
            .iter()
            .filter_map(|p| match p.resolution() {
                (t, true) => Some(t),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(s.ccod, earliest);
    }

    #[test]
    fn design_cutoff_has_exact_event_count() {
        let s = snapshot_at_events(&trial(), 389).unwrap();
        assert_eq!(s.count(CensorReason::Event), 389);
        assert_eq!(s.patients().len(), 1000);
        let tol = 1e-9 * s.ccod;
        assert!(s
            .patients()
            .iter()
            .all(|p| p.entry + p.time <= s.ccod + tol));
    }

    #[test]
    fn insufficient_events_reports_maximum() {
        let latent = trial();
        let total = latent.patients.iter().filter(|p| p.resolution().1).count();
        match snapshot_at_events(&latent, total + 1) {
            Err(Error::InsufficientEvents { available, .. }) => assert_eq!(available, total),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn late_ccod_has_no_admin_censoring() {
        let s = snapshot_at_time(&trial(), 1e7).unwrap();
        assert_eq!(s.count(CensorReason::AdminCensored), 0);
    }

    #[test]
    fn event_sets_grow_with_ccod() {
        let latent = trial();
        let events = |c: f64| -> HashSet<String> {
            snapshot_at_time(&latent, c)
                .unwrap()
                .patients()
                .iter()
                .filter(|p| p.reason == CensorReason::Event)
                .map(|p| p.id.clone())
                .collect()
        };
        assert!(events(30.0).is_subset(&events(45.0)));
    }

    #[test]
    fn partial_enrolment() {
        let latent = trial();
        let ccod = 0.5 * (latent.patients[9].entry + latent.patients[10].entry);
        let s = snapshot_at_time(&latent, ccod).unwrap();
        assert_eq!(s.patients().len(), 10);
        assert!(snapshot_at_time(&latent, -1.0).is_err());
    }
}
