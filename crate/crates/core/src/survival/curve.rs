use serde::{Deserialize, Serialize};

/// Right-continuous step function.
///
/// On `[knots[i], knots[i+1])` the curve equals `values[i]`; before the first
/// knot it equals `value_before_first_knot`. Kaplan-Meier fits also fill the
/// per-knot standard errors, risk-set and event counts, and keep the sorted
/// exit times of the fitted sample so risk sets can be queried at any time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    pub value_before_first_knot: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_risk: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_event: Vec<usize>,
    /// Largest time at which the curve is informed by data.
    pub support_end: f64,
    /// Times of censored observations (for tick marks).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub censor_times: Vec<f64>,
    /// Cumulative Greenwood sums `Σ d/(n(n-d))`; `+inf` once saturated.
    #[serde(skip)]
    pub(crate) greenwood: Vec<f64>,
    /// Sorted observed times of the fitted sample.
    #[serde(skip)]
    pub(crate) exit_times: Vec<f64>,
}

impl StepCurve {
    /// A plain step function without variance or risk-set information.
    pub fn from_steps(
        knots: Vec<f64>,
        values: Vec<f64>,
        value_before_first_knot: f64,
        support_end: f64,
    ) -> Self {
        debug_assert_eq!(knots.len(), values.len());
        debug_assert!(knots.windows(2).all(|w| w[0] < w[1]));
        StepCurve {
            knots,
            values,
            value_before_first_knot,
            se: None,
            n_risk: Vec::new(),
            n_event: Vec::new(),
            support_end,
            censor_times: Vec::new(),
            greenwood: Vec::new(),
            exit_times: Vec::new(),
        }
    }

    /// Index of the last knot `<= t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let n = self.knots.partition_point(|&k| k <= t);
        n.checked_sub(1)
    }

    /// Curve value at `t` (right-continuous).
    pub fn value_at(&self, t: f64) -> f64 {
        match self.index_at(t) {
            Some(i) => self.values[i],
            None => self.value_before_first_knot,
        }
    }

    /// Left limit `lim_{s↑t} f(s)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let n = self.knots.partition_point(|&k| k < t);
        match n.checked_sub(1) {
            Some(i) => self.values[i],
            None => self.value_before_first_knot,
        }
    }

    pub fn se_at(&self, t: f64) -> Option<f64> {
        let se = self.se.as_ref()?;
        Some(self.index_at(t).map_or(0.0, |i| se[i]))
    }

    /// Number of fitted subjects with observed time `>= t`, when the curve
    /// was produced from a sample.
    pub fn n_risk_at(&self, t: f64) -> Option<usize> {
        if self.exit_times.is_empty() {
            return None;
        }
        Some(self.exit_times.len() - self.exit_times.partition_point(|&x| x < t))
    }

    /// Exact integral of the curve over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut left = a;
        let mut value = self.value_at(a);
        let start = self.knots.partition_point(|&k| k <= a);
        for (k, v) in self.knots[start..].iter().zip(&self.values[start..]) {
            if *k >= b {
                break;
            }
            total += value * (k - left);
            left = *k;
            value = *v;
        }
        total + value * (b - left)
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Pointwise product of two curves on the union of their knots.
    pub fn product(&self, other: &StepCurve) -> StepCurve {
        let mut knots: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let values = knots
            .iter()
            .map(|&t| self.value_at(t) * other.value_at(t))
            .collect();
        StepCurve::from_steps(
            knots,
            values,
            self.value_before_first_knot * other.value_before_first_knot,
            self.support_end.min(other.support_end),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> StepCurve {
        StepCurve::from_steps(vec![1.0, 3.0], vec![0.5, 0.25], 1.0, 4.0)
    }

    #[test]
    fn right_continuous_lookup() {
        let c = curve();
        assert_eq!(c.value_at(0.999), 1.0);
        assert_eq!(c.value_at(1.0), 0.5);
        assert_eq!(c.value_at(2.9), 0.5);
        assert_eq!(c.value_at(3.0), 0.25);
        assert_eq!(c.left_limit(3.0), 0.5);
        assert_eq!(c.left_limit(1.0), 1.0);
    }

    #[test]
    fn integral_is_rectangle_sum() {
        let c = curve();
        assert!((c.integrate(0.0, 4.0) - (1.0 + 1.0 + 0.25)).abs() < 1e-15);
        assert!((c.integrate(2.0, 3.5) - (0.5 + 0.125)).abs() < 1e-15);
        assert_eq!(c.integrate(2.0, 2.0), 0.0);
    }
}
