//! Trial simulator: staged accrual, piecewise-exponential event times,
//! exponential loss to follow-up and event-driven cut-off, plus a seeded
//! Monte Carlo power harness.
//!
//! Replicate `r` of a study with master seed `s` draws from a ChaCha8
//! generator keyed by `s` on stream `r`, so results do not depend on how
//! replicates are scheduled across threads.

mod config;
mod generate;
mod power;
mod snapshot;

pub use config::{AccrualSpec, Allocation, Cutoff, HrSegment, LtfuSpec, SimConfig};
pub use generate::{
    piecewise_exp_sample, replicate_rng, simulate_trial, simulate_trial_with_rng, Arm,
    LatentPatient, LatentTrial,
};
pub use power::{
    power_study, replicate_snapshot, run_replicate, PowerReport, PowerTest, TestPower,
};
pub use snapshot::{snapshot_at_cutoff, snapshot_at_events, snapshot_at_time};
