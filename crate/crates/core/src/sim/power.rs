use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replicate_rng, simulate_trial_with_rng, snapshot_at_cutoff, SimConfig};
use crate::compare::{
    cox_two_group, logrank, rmst_difference, schoenfeld_ph_test, LogrankWeights, PhTimeTransform,
    TauPolicy, TwoArmSample,
};
use crate::error::{Error, Result};
use crate::followup::Snapshot;

/// A two-sided test evaluated on each simulated snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum PowerTest {
    Logrank(LogrankWeights),
    RmstDiff { policy: TauPolicy },
    CoxWald,
    SchoenfeldPh,
}

impl PowerTest {
    pub fn name(&self) -> String {
        match self {
            PowerTest::Logrank(w) if w.rho == 0.0 && w.gamma == 0.0 => "logrank".into(),
            PowerTest::Logrank(w) => format!("logrank_fh({},{})", w.rho, w.gamma),
            PowerTest::RmstDiff {
                policy: TauPolicy::MinOfMaxObserved,
            } => "rmst_diff(min_of_max_observed)".into(),
            PowerTest::RmstDiff {
                policy: TauPolicy::FixedTau(t),
            } => format!("rmst_diff(tau={t})"),
            PowerTest::CoxWald => "cox_wald".into(),
            PowerTest::SchoenfeldPh => "schoenfeld_ph".into(),
        }
    }

    /// Two-sided p-value of the test on one snapshot.
    pub fn p_value(&self, sample: &TwoArmSample) -> Result<f64> {
        match self {
            PowerTest::Logrank(w) => Ok(logrank(sample, *w)?.p),
            PowerTest::RmstDiff { policy } => Ok(rmst_difference(sample, *policy, 0.95)?.p),
            PowerTest::CoxWald => {
                let fit = cox_two_group(sample)?;
                if !fit.converged {
                    return Err(Error::NotConverged {
                        iterations: fit.iterations,
                        score: fit.score,
                    });
                }
                Ok(fit.wald_p)
            }
            PowerTest::SchoenfeldPh => {
                let fit = cox_two_group(sample)?;
                Ok(schoenfeld_ph_test(sample, &fit, PhTimeTransform::Identity)?.p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPower {
    pub test: PowerTest,
    pub name: String,
    pub rejections: usize,
    /// Replicates in which the test could not be computed.
    pub failures: usize,
    /// Rejections over successfully evaluated replicates.
    pub rate: f64,
    /// Monte Carlo standard error `sqrt(rate (1 - rate) / evaluated)`.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub reps: usize,
    pub alpha: f64,
    pub master_seed: u64,
    /// Replicates whose trial or snapshot could not be generated.
    pub simulation_failures: usize,
    pub results: Vec<TestPower>,
}

/// Simulates replicate `replicate` and snapshots it at the configured cut-off.
pub fn replicate_snapshot(
    config: &SimConfig,
    master_seed: u64,
    replicate: u64,
) -> Result<Snapshot> {
    let mut rng = replicate_rng(master_seed, replicate);
    let latent = simulate_trial_with_rng(config, &mut rng)?;
    snapshot_at_cutoff(&latent, config.cutoff)
}

/// Runs every test on one replicate; `None` marks a test failure.
pub fn run_replicate(
    config: &SimConfig,
    tests: &[PowerTest],
    alpha: f64,
    master_seed: u64,
    replicate: u64,
) -> Result<Vec<Option<bool>>> {
    let snapshot = replicate_snapshot(config, master_seed, replicate)?;
    let sample = TwoArmSample::from_snapshot(&snapshot, "control", "treatment")?;
    Ok(tests
        .iter()
        .map(|t| t.p_value(&sample).ok().map(|p| p < alpha))
        .collect())
}

#[derive(Clone)]
struct Tally {
    rejections: Vec<usize>,
    failures: Vec<usize>,
    sim_failures: usize,
}

impl Tally {
    fn zero(k: usize) -> Self {
        Tally {
            rejections: vec![0; k],
            failures: vec![0; k],
            sim_failures: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.rejections.iter_mut().zip(other.rejections) {
            *a += b;
        }
        for (a, b) in self.failures.iter_mut().zip(other.failures) {
            *a += b;
        }
        self.sim_failures += other.sim_failures;
        self
    }
}

/// Monte Carlo rejection rates over `reps` independently seeded replicates.
pub fn power_study(
    config: &SimConfig,
    reps: usize,
    tests: &[PowerTest],
    alpha: f64,
    master_seed: u64,
) -> Result<PowerReport> {
    if reps == 0 {
        return Err(Error::InvalidInput(
            "power study needs at least one replicate".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha {alpha} must lie in (0, 1)"
        )));
    }
    config.validate()?;
    let k = tests.len();
    let tally = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut t = Tally::zero(k);
            match run_replicate(config, tests, alpha, master_seed, r) {
                Ok(outcomes) => {
                    for (i, o) in outcomes.into_iter().enumerate() {
                        match o {
                            Some(true) => t.rejections[i] += 1,
                            Some(false) => {}
                            None => t.failures[i] += 1,
                        }
                    }
                }
                Err(_) => t.sim_failures += 1,
            }
            t
        })
        .reduce(|| Tally::zero(k), Tally::merge);

    let results = tests
        .iter()
        .enumerate()
        .map(|(i, test)| {
            let evaluated = reps - tally.sim_failures - tally.failures[i];
            let rate = if evaluated > 0 {
                tally.rejections[i] as f64 / evaluated as f64
            } else {
                f64::NAN
            };
            TestPower {
                test: *test,
                name: test.name(),
                rejections: tally.rejections[i],
                failures: tally.failures[i],
                rate,
                mc_se: (rate * (1.0 - rate) / evaluated as f64).sqrt(),
            }
        })
        .collect();
    Ok(PowerReport {
        reps,
        alpha,
        master_seed,
        simulation_failures: tally.sim_failures,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_order_independent() {
        let c = SimConfig::delayed_separation();
        let tests = [
            PowerTest::Logrank(LogrankWeights::UNWEIGHTED),
            PowerTest::CoxWald,
        ];
        let a = power_study(&c, 40, &tests, 0.05, 7).unwrap();
        let b = power_study(&c, 40, &tests, 0.05, 7).unwrap();
        assert_eq!(a, b);
        // Sequential evaluation gives the same tallies as the parallel run.
        let seq: usize = (0..40)
            .map(|r| run_replicate(&c, &tests, 0.05, 7, r).unwrap()[0] == Some(true))
            .filter(|&x| x)
            .count();
        assert_eq!(seq, a.results[0].rejections);
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = SimConfig::delayed_separation();
        assert!(power_study(&c, 0, &[PowerTest::CoxWald], 0.05, 1).is_err());
        assert!(power_study(&c, 1, &[PowerTest::CoxWald], 1.5, 1).is_err());
    }
}
