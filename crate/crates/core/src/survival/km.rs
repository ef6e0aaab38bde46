use super::{ObservedSample, StepCurve};
use crate::error::Result;

/// Kaplan-Meier product-limit estimate with Greenwood standard errors.
///
/// Knots sit at distinct event times. Subjects censored at an event time are
/// still counted in that event's risk set.
pub fn km_fit(sample: &ObservedSample) -> Result<StepCurve> {
    sample.require_non_empty("Kaplan-Meier fit needs at least one observation")?;

    let mut obs: Vec<(f64, bool)> = sample.items().iter().map(|o| (o.time, o.event)).collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut knots = Vec::new();
    let mut values = Vec::new();
    let mut se = Vec::new();
    let mut n_risk = Vec::new();
    let mut n_event = Vec::new();
    let mut greenwood = Vec::new();
    let mut censor_times = Vec::new();

    let mut at_risk = obs.len();
    let mut surv = 1.0_f64;
    let mut gw = 0.0_f64;
    let mut last_se = 0.0_f64;

    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let mut d = 0usize;
        let mut c = 0usize;
        while i < obs.len() && obs[i].0 == t {
            if obs[i].1 {
                d += 1;
            } else {
                c += 1;
                censor_times.push(t);
            }
            i += 1;
        }
        if d > 0 {
            surv *= 1.0 - d as f64 / at_risk as f64;
            if d < at_risk {
                gw += d as f64 / (at_risk as f64 * (at_risk - d) as f64);
                last_se = surv * gw.sqrt();
            } else {
                gw = f64::INFINITY;
            }
            knots.push(t);
            values.push(surv);
            se.push(last_se);
            n_risk.push(at_risk);
            n_event.push(d);
            greenwood.push(gw);
        }
        at_risk -= d + c;
    }

    Ok(StepCurve {
        knots,
        values,
        value_before_first_knot: 1.0,
        se: Some(se),
        n_risk,
        n_event,
        support_end: obs.last().map_or(0.0, |o| o.0),
        censor_times,
        greenwood,
        exit_times: obs.iter().map(|o| o.0).collect(),
    })
}

/// Kaplan-Meier estimate of the censoring distribution: the product-limit
/// fit of the sample with event and censoring indicators swapped.
pub fn reverse_km(sample: &ObservedSample) -> Result<StepCurve> {
    km_fit(&sample.flipped())
}

/// Greenwood standard error of a KM curve at a time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenwoodSe {
    pub se: f64,
    /// The risk set was exhausted at or before `t`; `se` is the value at the
    /// last knot where the variance was computable.
    pub saturated: bool,
}

pub fn greenwood_se(curve: &StepCurve, t: f64) -> GreenwoodSe {
    match curve.index_at(t) {
        None => GreenwoodSe {
            se: 0.0,
            saturated: false,
        },
        Some(i) => GreenwoodSe {
            se: curve.se.as_ref().map_or(f64::NAN, |se| se[i]),
            saturated: curve.greenwood.get(i).is_some_and(|g| g.is_infinite()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(pairs: &[(f64, bool)]) -> ObservedSample {
        ObservedSample::from_pairs(pairs).unwrap()
    }

    #[test]
    fn uncensored_is_empirical() {
        let c = km_fit(&sample(&[(1.0, true), (2.0, true), (3.0, true)])).unwrap();
        assert!((c.value_at(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.value_at(2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.value_at(3.0), 0.0);
    }

    #[test]
    fn censoring_between_events() {
        let c = km_fit(&sample(&[(1.0, true), (2.0, false), (3.0, true)])).unwrap();
        assert_eq!(c.knots, vec![1.0, 3.0]);
        assert!((c.value_at(2.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.value_at(3.0), 0.0);
    }

    #[test]
    fn leading_censoring() {
        let c = km_fit(&sample(&[(1.0, false), (2.0, true)])).unwrap();
        assert_eq!(c.value_at(1.5), 1.0);
        assert_eq!(c.value_at(2.0), 0.0);
    }

    #[test]
    fn ties_process_events_first() {
        // The censored subject at 2 stays in the risk set of the event at 2.
        let c = km_fit(&sample(&[(2.0, true), (2.0, false), (3.0, true)])).unwrap();
        assert_eq!(c.n_risk[0], 3);
        assert!((c.value_at(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn greenwood_hand_value() {
        let c = km_fit(&sample(&[(1.0, false), (2.0, true), (3.0, true)])).unwrap();
        let g = greenwood_se(&c, 2.0);
        assert!((c.value_at(2.0) - 0.5).abs() < 1e-15);
        assert!((g.se - 0.5 * (0.5_f64).sqrt()).abs() < 1e-12);
        assert!((g.se - 0.353_553_390_593_273_7).abs() < 1e-12);
        assert!(!g.saturated);
        assert_eq!(greenwood_se(&c, 0.0).se, 0.0);
        assert!(greenwood_se(&c, 3.0).saturated);
        assert!((greenwood_se(&c, 3.0).se - g.se).abs() < 1e-15);
    }

    #[test]
    fn single_event_saturates() {
        let c = km_fit(&sample(&[(1.0, true)])).unwrap();
        let g = greenwood_se(&c, 1.0);
        assert_eq!(c.value_at(1.0), 0.0);
        assert!(g.saturated);
        assert_eq!(g.se, 0.0);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(km_fit(&ObservedSample::default()).is_err());
    }

    #[test]
    fn reverse_hand_values() {
        let s = sample(&[(4.0, true), (8.0, false), (3.0, false), (4.0, false)]);
        let g = reverse_km(&s).unwrap();
        assert!((g.value_at(3.0) - 0.75).abs() < 1e-15);
        assert!((g.value_at(4.0) - 0.5).abs() < 1e-15);
        assert_eq!(g.value_at(8.0), 0.0);
    }

    #[test]
    fn reverse_without_censoring_is_flat() {
        let g = reverse_km(&sample(&[(1.0, true), (2.0, true)])).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.value_at(10.0), 1.0);
    }
}
