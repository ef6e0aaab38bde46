use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One right-censored observation: `time = min(event, censoring)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    /// `true` when the terminal event was observed, `false` when censored.
    pub event: bool,
}

/// A validated collection of right-censored observations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservedSample {
    items: Vec<Observation>,
}

impl ObservedSample {
    pub fn new(items: Vec<Observation>) -> Result<Self> {
        if let Some((i, o)) = items
            .iter()
            .enumerate()
            .find(|(_, o)| !o.time.is_finite() || o.time < 0.0)
        {
            return Err(Error::InvalidInput(format!(
                "observation {i} has time {} (must be finite and >= 0)",
                o.time
            )));
        }
        Ok(ObservedSample { items })
    }

    /// Builds a sample from `(time, event)` pairs.
    pub fn from_pairs(pairs: &[(f64, bool)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(time, event)| Observation { time, event })
                .collect(),
        )
    }

    /// Builds a sample in which every time is an event.
    pub fn all_events(times: &[f64]) -> Result<Self> {
        Self::new(
            times
                .iter()
                .map(|&time| Observation { time, event: true })
                .collect(),
        )
    }

    pub fn items(&self) -> &[Observation] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|o| o.time)
    }

    pub fn n_events(&self) -> usize {
        self.items.iter().filter(|o| o.event).count()
    }

    pub fn n_censored(&self) -> usize {
        self.len() - self.n_events()
    }

    pub fn max_time(&self) -> Option<f64> {
        self.times().max_by(f64::total_cmp)
    }

    pub fn max_event_time(&self) -> Option<f64> {
        self.items
            .iter()
            .filter(|o| o.event)
            .map(|o| o.time)
            .max_by(f64::total_cmp)
    }

    /// Swaps event and censoring indicators.
    pub fn flipped(&self) -> ObservedSample {
        ObservedSample {
            items: self
                .items
                .iter()
                .map(|o| Observation {
                    time: o.time,
                    event: !o.event,
                })
                .collect(),
        }
    }

    /// Multiplies every time by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<ObservedSample> {
        Self::new(
            self.items
                .iter()
                .map(|o| Observation {
                    time: o.time * factor,
                    event: o.event,
                })
                .collect(),
        )
    }

    pub(crate) fn require_non_empty(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptySample(what.to_string()))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_nan() {
        assert!(ObservedSample::from_pairs(&[(-1.0, true)]).is_err());
        assert!(ObservedSample::from_pairs(&[(f64::NAN, false)]).is_err());
        assert!(ObservedSample::from_pairs(&[(f64::INFINITY, false)]).is_err());
    }

    #[test]
    fn flip_is_involution() {
        let s = ObservedSample::from_pairs(&[(1.0, true), (2.0, false)]).unwrap();
        assert_eq!(s.flipped().flipped(), s);
        assert_eq!(s.flipped().n_events(), 1);
    }
}
