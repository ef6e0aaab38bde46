use serde::{Deserialize, Serialize};

use super::{risk_table, TwoArmSample};
use crate::error::{Error, Result};
use crate::stats::two_sided_p;

/// Fleming-Harrington G(ρ, γ) weights `Ŝ(t-)^ρ (1 - Ŝ(t-))^γ`, with `Ŝ` the
/// pooled KM curve. `(0, 0)` is the ordinary logrank test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogrankWeights {
    pub rho: f64,
    pub gamma: f64,
}

impl LogrankWeights {
    pub const UNWEIGHTED: LogrankWeights = LogrankWeights {
        rho: 0.0,
        gamma: 0.0,
    };

    pub fn new(rho: f64, gamma: f64) -> Result<Self> {
        if !(rho >= 0.0 && gamma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "Fleming-Harrington weights need rho, gamma >= 0 (got {rho}, {gamma})"
            )));
        }
        Ok(LogrankWeights { rho, gamma })
    }

    fn weight(&self, s_minus: f64) -> f64 {
        let a = if self.rho == 0.0 {
            1.0
        } else {
            s_minus.powf(self.rho)
        };
        let b = if self.gamma == 0.0 {
            1.0
        } else {
            (1.0 - s_minus).powf(self.gamma)
        };
        a * b
    }
}

impl Default for LogrankWeights {
    fn default() -> Self {
        Self::UNWEIGHTED
    }
}

/// Weighted logrank statistic. `o_minus_e` refers to the treatment arm, so a
/// negative `z` indicates fewer treatment events than expected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogrankResult {
    pub z: f64,
    pub chi2: f64,
    pub p: f64,
    pub o_minus_e: f64,
    pub variance: f64,
    pub weights: LogrankWeights,
}

pub fn logrank(sample: &TwoArmSample, weights: LogrankWeights) -> Result<LogrankResult> {
    let rows = risk_table(sample);
    if rows.is_empty() {
        return Err(Error::NoEvents("the logrank test".into()));
    }
    let mut s_minus = 1.0;
    let mut u = 0.0;
    let mut v = 0.0;
    for r in &rows {
        let (n, d) = (r.n(), r.d());
        let w = weights.weight(s_minus);
        u += w * (r.d1 - d * r.n1 / n);
        if n > 1.0 {
            v += w * w * r.n0 * r.n1 * d * (n - d) / (n * n * (n - 1.0));
        }
        s_minus *= 1.0 - d / n;
    }
    if v <= 0.0 {
        return Err(Error::NoEvents(
            "the logrank test (no event time has both arms at risk)".into(),
        ));
    }
    let z = u / v.sqrt();
    Ok(LogrankResult {
        z,
        chi2: z * z,
        p: two_sided_p(z),
        o_minus_e: u,
        variance: v,
        weights,
    })
}
