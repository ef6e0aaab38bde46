//! Follow-up quantification and effect estimation for time-to-event trials.
//!
//! - [`survival`]: Kaplan-Meier, reverse KM, Greenwood intervals, quantiles,
//!   milestones, RMST, at-risk tables, ECDFs.
//! - [`followup`]: the seven follow-up quantifiers, Korn's potential
//!   follow-up curve, Clark's C and LTFU reassignment.
//! - [`compare`]: weighted logrank, two-group Cox, Schoenfeld PH test,
//!   milestone and RMST differences, information fraction, censoring
//!   comparison.
//! - [`stability`]: extreme-scenario bounds for KM curves.
//! - [`sim`]: delayed-separation trial simulator and power harness.
//! - [`io`]: CSV ingestion, reports and plot data.
//! - [`analysis`]: the complete question battery for one snapshot.

pub mod analysis;
pub mod compare;
pub mod error;
pub mod followup;
pub mod io;
pub mod sim;
pub mod stability;
pub mod stats;
pub mod survival;

pub use error::{Error, Result};
