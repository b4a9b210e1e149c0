//! Goodness-of-fit tests for the baseline of a Cox model, based on the
//! Grenander-type estimator of a monotone baseline hazard.
//!
//! The pipeline: [`cox::fit`] estimates the regression coefficients,
//! [`nonparam::breslow`] the cumulative baseline hazard, and
//! [`nonparam::grenander`] the nonincreasing baseline hazard on a window.
//! [`gof`] compares it with a Weibull fit ([`weibull::fit_weibull`]) and
//! [`bootstrap`] calibrates the statistics. [`scenario`] and [`study`]
//! simulate levels and powers; [`limits`] estimates the constants of the
//! limit law of the `L_p` error.

pub mod bootstrap;
pub mod cox;
pub mod data;
pub mod error;
pub mod gof;
pub mod hazard;
pub mod limits;
pub mod nonparam;
pub mod par;
pub mod quadrature;
pub mod scenario;
pub mod study;
pub mod weibull;

pub use bootstrap::{bootstrap_test, TestReport};
pub use cox::{fit as fit_cox, CoxFit};
pub use data::{Dataset, Observation};
pub use error::{Error, Result};
pub use gof::{Stat, TestConfig};
pub use nonparam::{breslow, grenander, MonotoneHazard, StepCumHazard, Window};
pub use par::Exec;
pub use scenario::{Baseline, Scenario};
pub use weibull::{fit_weibull, WeibullTheta};
