use serde::{Deserialize, Serialize};

use super::{risk_table, CoxResult, TwoArmSample};
use crate::error::{Error, Result};
use crate::stats::chi2_1df_sf;

/// Time scale against which scaled Schoenfeld residuals are correlated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhTimeTransform {
    #[default]
    Identity,
    /// `1 - Ŝ(t-)` of the pooled KM curve.
    Km,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhTest {
    pub chi2: f64,
    pub p: f64,
    pub transform: PhTimeTransform,
}

/// Grambsch-Therneau test of proportional hazards: a 1-df score test for a
/// linear trend of the scaled Schoenfeld residuals in transformed time.
pub fn schoenfeld_ph_test(
    sample: &TwoArmSample,
    fit: &CoxResult,
    transform: PhTimeTransform,
) -> Result<PhTest> {
    if !fit.converged {
        return Err(Error::NotConverged {
            iterations: fit.iterations,
            score: fit.score,
        });
    }
    let rows = risk_table(sample);
    let n_events: f64 = rows.iter().map(|r| r.d()).sum();
    if n_events < 2.0 {
        return Err(Error::NoEvents(
            "the PH test (needs at least two events)".into(),
        ));
    }

    let e = fit.log_hr.exp();
    let mut info = 0.0;
    // (g, residual, multiplicity) per distinct (time, arm) group of events.
    let mut points: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * rows.len());
    let mut s_minus = 1.0;
    for r in &rows {
        let d = r.d();
        let mut mean = 0.0;
        for j in 0..d as usize {
            let f = j as f64 / d;
            let s1 = (r.n1 - f * r.d1) * e;
            let ratio = s1 / (s1 + r.n0 - f * r.d0);
            mean += ratio / d;
            info += ratio * (1.0 - ratio);
        }
        let g = match transform {
            PhTimeTransform::Identity => r.time,
            PhTimeTransform::Km => 1.0 - s_minus,
        };
        if r.d1 > 0.0 {
            points.push((g, 1.0 - mean, r.d1));
        }
        if r.d0 > 0.0 {
            points.push((g, -mean, r.d0));
        }
        s_minus *= 1.0 - d / r.n();
    }

    let g_bar = points.iter().map(|(g, _, m)| g * m).sum::<f64>() / n_events;
    let num: f64 = points.iter().map(|(g, r, m)| (g - g_bar) * r * m).sum();
    let ss: f64 = points.iter().map(|(g, _, m)| (g - g_bar).powi(2) * m).sum();
    if ss <= 0.0 || info <= 0.0 {
        return Err(Error::InvalidInput(
            "PH test undefined: all events share one transformed time".into(),
        ));
    }
    let chi2 = num * num / (info / n_events * ss);
    Ok(PhTest {
        chi2,
        p: chi2_1df_sf(chi2),
        transform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::cox_two_group;
    use crate::survival::ObservedSample;

    fn arms(ctl: &[(f64, bool)], trt: &[(f64, bool)]) -> TwoArmSample {
        TwoArmSample::new(
            ObservedSample::from_pairs(ctl).unwrap(),
            ObservedSample::from_pairs(trt).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_statistic() {
        // Treatment {1e, 3e}, control {2e, 4e}. Residuals at the fitted β
        // sum to zero; the statistic is recomputed here from first principles.
        let s = arms(&[(2.0, true), (4.0, true)], &[(1.0, true), (3.0, true)]);
        let fit = cox_two_group(&s).unwrap();
        let t = fit.log_hr.exp();
        // Risk sets (n1, n0): t=1 (2,2), t=2 (1,2), t=3 (1,1), t=4 (0,1).
        let p = [2.0 * t / (2.0 * t + 2.0), t / (t + 2.0), t / (t + 1.0), 0.0];
        let x = [1.0, 0.0, 1.0, 0.0];
        let g = [1.0, 2.0, 3.0, 4.0];
        let r: Vec<f64> = (0..4).map(|k| x[k] - p[k]).collect();
        assert!(r.iter().sum::<f64>().abs() < 1e-8);
        let info: f64 = p.iter().map(|p| p * (1.0 - p)).sum();
        let num: f64 = (0..4).map(|k| (g[k] - 2.5) * r[k]).sum();
        let ss: f64 = g.iter().map(|g| (g - 2.5) * (g - 2.5)).sum();
        let expected = num * num / (info / 4.0 * ss);
        let test = schoenfeld_ph_test(&s, &fit, PhTimeTransform::Identity).unwrap();
        assert!((test.chi2 - expected).abs() < 1e-10);
        assert!(test.p > 0.0 && test.p <= 1.0);
    }

    #[test]
    fn too_few_events() {
        let s = arms(&[(2.0, true), (3.0, false)], &[(1.0, false), (4.0, false)]);
        let fit = CoxResult {
            log_hr: 0.0,
            se: 1.0,
            hr_ci: crate::survival::IntervalEstimate::degenerate(1.0, 0.95),
            wald_p: 1.0,
            score: 0.0,
            iterations: 0,
            converged: true,
        };
        assert!(schoenfeld_ph_test(&s, &fit, PhTimeTransform::Identity).is_err());
    }

    #[test]
    fn non_converged_fit_rejected() {
        let s = arms(&[(2.0, true), (4.0, true)], &[(1.0, true), (3.0, true)]);
        let mut fit = cox_two_group(&s).unwrap();
        fit.converged = false;
        assert!(matches!(
            schoenfeld_ph_test(&s, &fit, PhTimeTransform::Identity),
            Err(Error::NotConverged { .. })
        ));
    }
}
