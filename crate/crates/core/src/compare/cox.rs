use serde::{Deserialize, Serialize};

use super::{risk_table, RiskRow, TwoArmSample};
use crate::error::{Divergence, Error, Result};
use crate::stats::{two_sided_p, z_for_level};
use crate::survival::IntervalEstimate;

const SCORE_TOL: f64 = 1e-8;
const MAX_ITER: usize = 50;
const MAX_STEP: f64 = 5.0;

/// Two-group Cox fit: treatment versus control, Efron ties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxResult {
    pub log_hr: f64,
    pub se: f64,
    pub hr_ci: IntervalEstimate,
    pub wald_p: f64,
    pub score: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct Eval {
    score: f64,
    info: f64,
}

/// Efron score and observed information at `beta`.
fn evaluate(rows: &[RiskRow], beta: f64) -> Eval {
    let e = beta.exp();
    let mut score = 0.0;
    let mut info = 0.0;
    for r in rows {
        let d = r.d();
        let ties = d as usize;
        score += r.d1;
        for j in 0..ties {
            let f = j as f64 / d;
            let s1 = (r.n1 - f * r.d1) * e;
            let s0 = s1 + r.n0 - f * r.d0;
            let ratio = s1 / s0;
            score -= ratio;
            info += ratio * (1.0 - ratio);
        }
    }
    Eval { score, info }
}

/// Score limits as `beta -> +inf` and `beta -> -inf`.
fn limiting_scores(rows: &[RiskRow]) -> (f64, f64) {
    let mut plus = 0.0;
    let mut minus = 0.0;
    for r in rows {
        let d = r.d();
        plus += r.d1;
        minus += r.d1;
        for j in 0..d as usize {
            let f = j as f64 / d;
            if r.n1 - f * r.d1 > 0.0 {
                plus -= 1.0;
            }
            if r.n0 - f * r.d0 <= 0.0 {
                minus -= 1.0;
            }
        }
    }
    (plus, minus)
}

/// Efron partial log-likelihood, exposed for verification.
#[cfg(test)]
pub(crate) fn log_partial_likelihood(sample: &TwoArmSample, beta: f64) -> f64 {
    let e = beta.exp();
    let mut ll = 0.0;
    for r in risk_table(sample) {
        let d = r.d();
        ll += r.d1 * beta;
        for j in 0..d as usize {
            let f = j as f64 / d;
            ll -= ((r.n1 - f * r.d1) * e + r.n0 - f * r.d0).ln();
        }
    }
    ll
}

/// Maximizes the two-group partial likelihood by safeguarded Newton steps
/// on the (monotone decreasing) score.
pub fn cox_two_group(sample: &TwoArmSample) -> Result<CoxResult> {
    let rows = risk_table(sample);
    if rows.is_empty() {
        return Err(Error::NoEvents("the Cox model".into()));
    }
    let (plus, minus) = limiting_scores(&rows);
    if plus >= -1e-12 {
        return Err(Error::MonotoneLikelihood {
            direction: Divergence::PositiveInfinity,
        });
    }
    if minus <= 1e-12 {
        return Err(Error::MonotoneLikelihood {
            direction: Divergence::NegativeInfinity,
        });
    }

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut beta = 0.0;
    let mut eval = evaluate(&rows, beta);
    let mut iterations = 0;
    while eval.score.abs() >= SCORE_TOL && iterations < MAX_ITER {
        if eval.score > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        let newton = beta + (eval.score / eval.info).clamp(-MAX_STEP, MAX_STEP);
        beta = if newton > lo && newton < hi && eval.info > 0.0 {
            newton
        } else if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo + MAX_STEP
        } else {
            hi - MAX_STEP
        };
        eval = evaluate(&rows, beta);
        iterations += 1;
    }
    let converged = eval.score.abs() < SCORE_TOL;
    let se = 1.0 / eval.info.sqrt();
    let z = z_for_level(0.95);
    let hr_ci = IntervalEstimate {
        point: beta.exp(),
        lower: (beta - z * se).exp(),
        upper: (beta + z * se).exp(),
        level: 0.95,
        se: Some(se),
        flags: Vec::new(),
    };
    Ok(CoxResult {
        log_hr: beta,
        se,
        hr_ci,
        wald_p: two_sided_p(beta / se),
        score: eval.score,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::ObservedSample;

    fn arms(ctl: &[(f64, bool)], trt: &[(f64, bool)]) -> TwoArmSample {
        TwoArmSample::new(
            ObservedSample::from_pairs(ctl).unwrap(),
            ObservedSample::from_pairs(trt).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_data_gives_zero() {
        let s = arms(
            &[(1.0, true), (2.0, false), (3.0, true)],
            &[(1.0, true), (2.0, false), (3.0, true)],
        );
        let fit = cox_two_group(&s).unwrap();
        assert!(fit.converged);
        assert!(fit.log_hr.abs() < 1e-10);
        assert!((fit.hr_ci.point - 1.0).abs() < 1e-10);
    }

    #[test]
    fn divergent_fit_is_signalled() {
        let s = arms(&[(2.0, false)], &[(1.0, true)]);
        assert!(matches!(
            cox_two_group(&s),
            Err(Error::MonotoneLikelihood {
                direction: Divergence::PositiveInfinity
            })
        ));
        assert!(matches!(
            cox_two_group(&s.swapped()),
            Err(Error::MonotoneLikelihood {
                direction: Divergence::NegativeInfinity
            })
        ));
    }

    #[test]
    fn matches_grid_search_of_closed_form_likelihood() {
        // Treatment {1e, 3e}, control {2e, 4e}; with θ = exp(β) the partial
        // likelihood is θ/(2θ+2) · 1/(θ+2) · θ/(θ+1).
        let s = arms(&[(2.0, true), (4.0, true)], &[(1.0, true), (3.0, true)]);
        let fit = cox_two_group(&s).unwrap();
        assert!(fit.converged && fit.score.abs() < 1e-8);

        let lik = |b: f64| {
            let t = b.exp();
            t / (2.0 * t + 2.0) * 1.0 / (t + 2.0) * t / (t + 1.0)
        };
        let (mut best, mut best_b) = (f64::NEG_INFINITY, 0.0);
        let mut b = -5.0;
        while b <= 5.0 {
            let l = lik(b);
            if l > best {
                best = l;
                best_b = b;
            }
            b += 1e-5;
        }
        assert!(
            (fit.log_hr - best_b).abs() < 2e-5,
            "{} vs {}",
            fit.log_hr,
            best_b
        );
        assert!((log_partial_likelihood(&s, fit.log_hr) - lik(fit.log_hr).ln()).abs() < 1e-12);
    }

    #[test]
    fn efron_ties_match_closed_form() {
        // Two tied events at t=1 (one per arm), n0 = n1 = 2.
        // Efron: θ·1 / [(2θ+2)(2θ+2 - (θ+1)/2)] then control event at 2: 1/(θ+1).
        let s = arms(&[(1.0, true), (2.0, true)], &[(1.0, true), (3.0, false)]);
        let lik = |b: f64| {
            let t: f64 = b.exp();
            (t / ((2.0 * t + 2.0) * (2.0 * t + 2.0 - (t + 1.0) / 2.0)) / (t + 1.0)).ln()
        };
        for b in [-1.0, 0.0, 0.7] {
            assert!((log_partial_likelihood(&s, b) - lik(b)).abs() < 1e-12);
        }
    }

    #[test]
    fn swapping_arms_negates() {
        let s = arms(
            &[(2.0, true), (4.0, true), (5.0, false), (7.0, true)],
            &[(1.0, true), (3.0, true), (6.0, false), (8.0, true)],
        );
        let a = cox_two_group(&s).unwrap();
        let b = cox_two_group(&s.swapped()).unwrap();
        assert!((a.log_hr + b.log_hr).abs() < 1e-10);
        assert!((a.wald_p - b.wald_p).abs() < 1e-12);
    }
}
