use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hazard ratio applying from `start` (months) until the next segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrSegment {
    pub start: f64,
    pub hr: f64,
}

/// Loss to follow-up calibrated by its cumulative probability at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtfuSpec {
    pub probability: f64,
    pub at_month: f64,
}

impl LtfuSpec {
    /// Exponential rate `-ln(1 - p) / t`.
    pub fn rate(&self) -> f64 {
        -(1.0 - self.probability).ln() / self.at_month
    }
}

/// Piecewise-constant accrual: `ramp_rate` patients/month before
/// `ramp_months`, `steady_rate` afterwards, stopping at `cap` patients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccrualSpec {
    pub ramp_months: f64,
    pub ramp_rate: f64,
    pub steady_rate: f64,
    pub cap: usize,
}

impl AccrualSpec {
    /// Expected number of entries by calendar time `t`.
    pub fn cumulative(&self, t: f64) -> f64 {
        let ramp = t.min(self.ramp_months).max(0.0);
        ramp * self.ramp_rate + (t - self.ramp_months).max(0.0) * self.steady_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// CCOD at the calendar time of the given event count.
    Events(usize),
    /// CCOD at a fixed calendar month.
    Calendar(f64),
}

/// Randomization ratio control : treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub control: u32,
    pub treatment: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Control-arm hazard, events per month.
    pub base_rate: f64,
    /// Treatment-versus-control hazard ratios; must start at month 0.
    pub hr_schedule: Vec<HrSegment>,
    pub ltfu: LtfuSpec,
    pub accrual: AccrualSpec,
    pub cutoff: Cutoff,
    pub allocation: Allocation,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::delayed_separation()
    }
}

impl SimConfig {
    /// Delayed separation: no effect for 12 months, HR 0.65 afterwards;
    /// cut-off at 389 events among at most 1000 patients.
    pub fn delayed_separation() -> Self {
        SimConfig {
            base_rate: 0.012,
            hr_schedule: vec![
                HrSegment {
                    start: 0.0,
                    hr: 1.0,
                },
                HrSegment {
                    start: 12.0,
                    hr: 0.65,
                },
            ],
            ltfu: LtfuSpec {
                probability: 0.025,
                at_month: 12.0,
            },
            accrual: AccrualSpec {
                ramp_months: 6.0,
                ramp_rate: 21.0,
                steady_rate: 42.0,
                cap: 1000,
            },
            cutoff: Cutoff::Events(389),
            allocation: Allocation {
                control: 1,
                treatment: 1,
            },
        }
    }

    /// Same design with a constant hazard ratio.
    pub fn proportional(hr: f64) -> Self {
        SimConfig {
            hr_schedule: vec![HrSegment { start: 0.0, hr }],
            ..Self::delayed_separation()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: SimConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.base_rate >= 0.0 && self.base_rate.is_finite()) {
            return bad(format!(
                "base_rate {} must be finite and >= 0",
                self.base_rate
            ));
        }
        match self.hr_schedule.first() {
            Some(first) if first.start == 0.0 => {}
            _ => return bad("hr_schedule must start at month 0".into()),
        }
        if self
            .hr_schedule
            .windows(2)
            .any(|w| w[1].start <= w[0].start)
        {
            return bad("hr_schedule starts must be strictly increasing".into());
        }
        if self
            .hr_schedule
            .iter()
            .any(|s| !(s.hr >= 0.0 && s.hr.is_finite()))
        {
            return bad("hazard ratios must be finite and >= 0".into());
        }
        if !(0.0..1.0).contains(&self.ltfu.probability) || !(self.ltfu.at_month > 0.0) {
            return bad("ltfu probability must lie in [0, 1) at a positive month".into());
        }
        let a = &self.accrual;
        if a.cap == 0 {
            return bad("accrual cap must be >= 1".into());
        }
        if !(a.ramp_months >= 0.0 && a.ramp_rate >= 0.0 && a.steady_rate > 0.0) {
            return bad("accrual needs ramp_months, ramp_rate >= 0 and steady_rate > 0".into());
        }
        if self.allocation.control == 0 || self.allocation.treatment == 0 {
            return bad("allocation weights must be positive".into());
        }
        match self.cutoff {
            Cutoff::Events(0) => bad("event cut-off must be >= 1".into()),
            Cutoff::Calendar(t) if !(t >= 0.0 && t.is_finite()) => {
                bad("calendar cut-off must be finite and >= 0".into())
            }
            _ => Ok(()),
        }
    }

    /// Piecewise hazard `(start, rate)` of the control arm.
    pub fn control_rates(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.base_rate)]
    }

    /// Piecewise hazard `(start, rate)` of the treatment arm.
    pub fn treatment_rates(&self) -> Vec<(f64, f64)> {
        self.hr_schedule
            .iter()
            .map(|s| (s.start, self.base_rate * s.hr))
            .collect()
    }
}
