use serde::{Deserialize, Serialize};

use super::{EstimateFlag, IntervalEstimate, ObservedSample, StepCurve, TimeValue, PROB_EPS};
use crate::error::{Error, Result};
use crate::stats::z_for_level;

/// Complementary log-log interval for a survival probability `s` with
/// standard error `se`. Bounds always stay inside `[0, 1]`.
pub fn loglog_interval(s: f64, se: f64, level: f64) -> IntervalEstimate {
    if s <= 0.0 || s >= 1.0 {
        return IntervalEstimate::degenerate(s, level);
    }
    let log_s = s.ln();
    let se_theta = se / (s * log_s.abs());
    let z = z_for_level(level);
    IntervalEstimate {
        point: s,
        lower: s.powf((z * se_theta).exp()),
        upper: s.powf((-z * se_theta).exp()),
        level,
        se: Some(se),
        flags: Vec::new(),
    }
}

/// Pointwise log-log confidence interval of a KM curve at `t`.
pub fn km_ci(curve: &StepCurve, t: f64, level: f64) -> IntervalEstimate {
    let s = curve.value_at(t);
    let se = curve.se_at(t).unwrap_or(0.0);
    let mut ci = loglog_interval(s, se, level);
    if curve
        .index_at(t)
        .and_then(|i| curve.greenwood.get(i))
        .is_some_and(|g| g.is_infinite())
    {
        ci.flag(EstimateFlag::Saturated);
    }
    ci
}

/// Survival-time quantile with a Brookmeyer-Crowley interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub p: f64,
    pub point: TimeValue,
    pub lower: TimeValue,
    pub upper: TimeValue,
    pub level: f64,
}

/// `p`-quantile `inf{t : S(t) <= 1 - p}` of a KM curve.
///
/// The interval collects every time whose pointwise log-log interval
/// contains `1 - p`.
pub fn km_quantile(curve: &StepCurve, p: f64, level: f64) -> QuantileEstimate {
    let target = 1.0 - p + PROB_EPS;
    let se = curve.se.as_deref();
    let first = |pred: &dyn Fn(usize) -> bool| {
        (0..curve.len())
            .find(|&i| pred(i))
            .map_or(TimeValue::NotReached, |i| {
                TimeValue::Reached(curve.knots[i])
            })
    };
    let band = |i: usize| {
        let s = curve.values[i];
        loglog_interval(s, se.map_or(0.0, |se| se[i]), level)
    };
    QuantileEstimate {
        p,
        point: first(&|i| curve.values[i] <= target),
        lower: first(&|i| band(i).lower <= target),
        upper: first(&|i| band(i).upper <= target),
        level,
    }
}

/// Event-free probability at a milestone time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Milestone {
    pub time: f64,
    pub estimate: IntervalEstimate,
    pub n_risk: Option<usize>,
}

pub fn milestone_estimate(curve: &StepCurve, t: f64, level: f64) -> Result<Milestone> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "milestone time {t} must be >= 0"
        )));
    }
    let mut estimate = km_ci(curve, t, level);
    if t > curve.support_end {
        estimate.flag(EstimateFlag::Extrapolated);
    }
    Ok(Milestone {
        time: t,
        estimate,
        n_risk: curve.n_risk_at(t),
    })
}

/// Restricted mean survival time `∫_0^tau S(u) du` with the product-limit
/// variance `Σ_{t_i <= tau} A_i² d_i / (n_i (n_i - d_i))`, where `A_i` is the
/// area under the curve from `t_i` to `tau`.
pub fn rmst(curve: &StepCurve, tau: f64, level: f64) -> Result<IntervalEstimate> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "restriction time {tau} must be >= 0"
        )));
    }
    if tau > curve.support_end {
        return Err(Error::TauOutOfRange {
            tau,
            max: curve.support_end,
        });
    }
    let area = curve.integrate(0.0, tau);
    let in_window = curve.knots.partition_point(|&k| k <= tau);

    let se = if curve.n_risk.is_empty() {
        None
    } else {
        // Tail areas from each knot to tau, accumulated right to left.
        let mut var = 0.0;
        let mut tail = 0.0;
        let mut right = tau;
        for i in (0..in_window).rev() {
            tail += curve.values[i] * (right - curve.knots[i]);
            right = curve.knots[i];
            let n = curve.n_risk[i] as f64;
            let d = curve.n_event[i] as f64;
            if tail > 0.0 && n > d {
                var += tail * tail * d / (n * (n - d));
            }
        }
        Some(var.sqrt())
    };

    let mut est = match se {
        Some(se) => IntervalEstimate::normal(area, se, level),
        None => IntervalEstimate {
            point: area,
            lower: f64::NAN,
            upper: f64::NAN,
            level,
            se: None,
            flags: Vec::new(),
        },
    };
    if se == Some(0.0) {
        est.flag(EstimateFlag::Degenerate);
    }
    Ok(est)
}

/// Number of subjects with observed time `>= t` for each grid time.
pub fn at_risk_table(sample: &ObservedSample, grid: &[f64]) -> Vec<usize> {
    let mut times: Vec<f64> = sample.times().collect();
    times.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&t| times.len() - times.partition_point(|&x| x < t))
        .collect()
}

/// Right-continuous empirical distribution function.
pub fn ecdf(values: &[f64]) -> Result<StepCurve> {
    if values.is_empty() {
        return Err(Error::EmptySample("ecdf needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("ecdf values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut knots = Vec::new();
    let mut probs = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        if i + 1 == sorted.len() || sorted[i + 1] != v {
            knots.push(v);
            probs.push((i + 1) as f64 / n);
        }
    }
    let end = *sorted.last().unwrap();
    let mut curve = StepCurve::from_steps(knots, probs, 0.0, end);
    curve.exit_times = sorted;
    Ok(curve)
}
