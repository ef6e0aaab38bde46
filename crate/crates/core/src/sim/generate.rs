use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::error::Result;

/// Inverse-CDF draw from a piecewise-exponential distribution: the smallest
/// `t` whose cumulative hazard reaches `-ln(u)`. `rates` holds
/// `(interval start, hazard)` pairs beginning at 0. Returns `+inf` when the
/// hazard never accumulates enough mass.
pub fn piecewise_exp_sample(rates: &[(f64, f64)], u: f64) -> f64 {
    let mut target = -u.ln();
    if target <= 0.0 {
        return 0.0;
    }
    for (i, &(start, rate)) in rates.iter().enumerate() {
        let end = rates.get(i + 1).map_or(f64::INFINITY, |next| next.0);
        if rate <= 0.0 {
            continue;
        }
        let mass = rate * (end - start);
        if mass >= target {
            return start + target / rate;
        }
        target -= mass;
    }
    f64::INFINITY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Control,
    Treatment,
}

impl Arm {
    pub fn label(self) -> &'static str {
        match self {
            Arm::Control => "control",
            Arm::Treatment => "treatment",
        }
    }
}

/// Complete-data view of one patient before any cut-off is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentPatient {
    /// Calendar month of randomization.
    pub entry: f64,
    /// Months from entry to the primary event.
    pub event: f64,
    /// Months from entry to loss of follow-up (`+inf` when never lost).
    pub ltfu: f64,
    pub arm: Arm,
}

impl LatentPatient {
    /// Calendar month of the first terminal status, and whether it is an event.
    pub fn resolution(&self) -> (f64, bool) {
        if self.event < self.ltfu {
            (self.entry + self.event, true)
        } else {
            (self.entry + self.ltfu, false)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentTrial {
    /// Patients in order of entry.
    pub patients: Vec<LatentPatient>,
}

/// Generator for replicate `replicate` of a study seeded with `master_seed`.
pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

pub fn simulate_trial(config: &SimConfig, seed: u64) -> Result<LatentTrial> {
    simulate_trial_with_rng(config, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Draws entries month by month (uniform within each month, counts from the
/// accrual intensity), assigns arms by an exact-ratio permutation, then draws
/// event and LTFU times per patient.
pub fn simulate_trial_with_rng<R: Rng>(config: &SimConfig, rng: &mut R) -> Result<LatentTrial> {
    config.validate()?;
    let accrual = &config.accrual;
    let cap = accrual.cap;

    let mut entries = Vec::with_capacity(cap);
    let mut month = 0u32;
    while entries.len() < cap {
        let due = (accrual.cumulative(f64::from(month + 1)) + 1e-9).floor() as usize;
        let new = due.min(cap).saturating_sub(entries.len());
        let start = entries.len();
        for _ in 0..new {
            entries.push(f64::from(month) + rng.random::<f64>());
        }
        entries[start..].sort_by(f64::total_cmp);
        month += 1;
    }

    let n = entries.len();
    let (wc, wt) = (
        f64::from(config.allocation.control),
        f64::from(config.allocation.treatment),
    );
    let n_treatment = (n as f64 * wt / (wc + wt)).round() as usize;
    let mut arms: Vec<Arm> = (0..n)
        .map(|i| {
            if i < n_treatment {
                Arm::Treatment
            } else {
                Arm::Control
            }
        })
        .collect();
    arms.shuffle(rng);

    let control = config.control_rates();
    let treatment = config.treatment_rates();
    let ltfu_rate = config.ltfu.rate();
    let patients = entries
        .into_iter()
        .zip(arms)
        .map(|(entry, arm)| {
            let rates = match arm {
                Arm::Control => &control,
                Arm::Treatment => &treatment,
            };
            let event = piecewise_exp_sample(rates, open01(rng));
            let u: f64 = open01(rng);
            let ltfu = if ltfu_rate > 0.0 {
                -u.ln() / ltfu_rate
            } else {
                f64::INFINITY
            };
            LatentPatient {
                entry,
                event,
                ltfu,
                arm,
            }
        })
        .collect();
    Ok(LatentTrial { patients })
}

/// Uniform draw on the open interval (0, 1).
fn open01<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{LtfuSpec, SimConfig};

    #[test]
    fn inverse_cdf_closed_forms() {
        let t = piecewise_exp_sample(&[(0.0, 0.012)], 0.5);
        assert!((t - 57.762_265_046_662_1).abs() < 1e-9);
        let t = piecewise_exp_sample(&[(0.0, 0.0), (12.0, 0.012)], 0.5);
        assert!((t - 69.762_265_046_662_1).abs() < 1e-9);
        assert!(piecewise_exp_sample(&[(0.0, 0.012)], 1.0 - 1e-15) < 1e-10);
        assert_eq!(piecewise_exp_sample(&[(0.0, 0.0)], 0.5), f64::INFINITY);
    }

    #[test]
    fn second_interval_continues_hazard() {
        // Rate 0.1 on [0, 5) accrues 0.5; target -ln(0.25) = 1.386 needs
        // (1.386 - 0.5) / 0.2 more months at rate 0.2.
        let t = piecewise_exp_sample(&[(0.0, 0.1), (5.0, 0.2)], 0.25);
        assert!((t - (5.0 + (-(0.25_f64).ln() - 0.5) / 0.2)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_balanced() {
        let c = SimConfig::delayed_separation();
        let a = simulate_trial(&c, 11).unwrap();
        let b = simulate_trial(&c, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.patients.len(), 1000);
        let trt = a
            .patients
            .iter()
            .filter(|p| p.arm == Arm::Treatment)
            .count();
        assert_eq!(trt, 500);
        assert!(a.patients.windows(2).all(|w| w[0].entry <= w[1].entry));
        assert!(a.patients.iter().all(|p| p.event > 0.0 && p.ltfu > 0.0));
        // 126 entries during the six ramp months.
        assert_eq!(a.patients.iter().filter(|p| p.entry < 6.0).count(), 126);
        assert_ne!(a, simulate_trial(&c, 12).unwrap());
    }

    #[test]
    fn no_ltfu_when_probability_zero() {
        let c = SimConfig {
            ltfu: LtfuSpec {
                probability: 0.0,
                at_month: 12.0,
            },
            ..SimConfig::delayed_separation()
        };
        let t = simulate_trial(&c, 5).unwrap();
        assert!(t.patients.iter().all(|p| p.ltfu.is_infinite()));
    }

    #[test]
    fn replicate_streams_differ() {
        let mut a = replicate_rng(1, 0);
        let mut b = replicate_rng(1, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }
}
