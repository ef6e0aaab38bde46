//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use followup::compare::TwoArmSample;
use followup::survival::ObservedSample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Kaplan-Meier via Efron's redistribute-to-the-right construction: each
/// censored subject passes its mass equally to every subject with a strictly
/// larger time; `S(t)` is one minus the event mass at or before `t`.
pub fn redistribute_to_the_right(pairs: &[(f64, bool)], t: f64) -> f64 {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    // Events precede censorings at tied times.
    order.sort_by(|&a, &b| {
        pairs[a]
            .0
            .total_cmp(&pairs[b].0)
            .then(pairs[b].1.cmp(&pairs[a].1))
    });
    let mut mass = vec![1.0 / pairs.len() as f64; pairs.len()];
    for &i in &order {
        let (ti, event) = pairs[i];
        if event {
            continue;
        }
        let later: Vec<usize> = (0..pairs.len()).filter(|&j| pairs[j].0 > ti).collect();
        if later.is_empty() {
            continue;
        }
        let share = mass[i] / later.len() as f64;
        mass[i] = 0.0;
        for j in later {
            mass[j] += share;
        }
    }
    1.0 - (0..pairs.len())
        .filter(|&i| pairs[i].1 && pairs[i].0 <= t)
        .map(|i| mass[i])
        .sum::<f64>()
}

fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Unweighted logrank z (treatment O - E) from explicit hypergeometric
/// moments at every event time; `None` when the variance vanishes.
pub fn hypergeometric_logrank(control: &[(f64, bool)], treatment: &[(f64, bool)]) -> Option<f64> {
    let mut times: Vec<f64> = control
        .iter()
        .chain(treatment)
        .filter(|p| p.1)
        .map(|p| p.0)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let (mut u, mut v) = (0.0, 0.0);
    for t in times {
        let at_risk = |arm: &[(f64, bool)]| arm.iter().filter(|p| p.0 >= t).count();
        let deaths = |arm: &[(f64, bool)]| arm.iter().filter(|p| p.1 && p.0 == t).count();
        let (n1, n0) = (at_risk(treatment), at_risk(control));
        let n = n0 + n1;
        let d = deaths(treatment) + deaths(control);
        let total = choose(n, d);
        let pmf: Vec<f64> = (0..=d)
            .map(|k| choose(n1, k) * choose(n0, d - k) / total)
            .collect();
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let var: f64 = pmf
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum();
        u += deaths(treatment) as f64 - mean;
        v += var;
    }
    (v > 1e-14).then(|| u / v.sqrt())
}

/// Small sample with integer times in `1..=max_time` and random statuses.
pub fn small_sample(rng: &mut ChaCha8Rng, n: usize, max_time: u32) -> Vec<(f64, bool)> {
    (0..n)
        .map(|_| {
            (
                f64::from(rng.random_range(1..=max_time)),
                rng.random_bool(0.6),
            )
        })
        .collect()
}

/// Continuous-time sample with exponential events and uniform censoring.
pub fn continuous_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, bool)> {
    (0..n)
        .map(|_| {
            let x = -(1.0 - rng.random::<f64>()).ln() * 10.0;
            let c = rng.random::<f64>() * 25.0;
            (x.min(c).max(1e-6), x <= c)
        })
        .collect()
}

pub fn observed(pairs: &[(f64, bool)]) -> ObservedSample {
    ObservedSample::from_pairs(pairs).unwrap()
}

pub fn two_arm(control: &[(f64, bool)], treatment: &[(f64, bool)]) -> TwoArmSample {
    TwoArmSample::new(observed(control), observed(treatment)).unwrap()
}

/// Every sample of size `n` with times in {1, 2, 3} and any status pattern.
pub fn exhaustive_samples(n: usize) -> impl Iterator<Item = Vec<(f64, bool)>> {
    let combos = 6usize.pow(n as u32);
    (0..combos).map(move |mut code| {
        (0..n)
            .map(|_| {
                let c = code % 6;
                code /= 6;
                ((c / 2 + 1) as f64, c % 2 == 0)
            })
            .collect()
    })
}

pub const ORACLE_GRID: [f64; 8] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5];
