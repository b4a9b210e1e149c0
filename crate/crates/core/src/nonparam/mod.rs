//! Nonparametric estimators around the Cox model: the at-risk function
//! `Φ_n`, the Breslow cumulative hazard, the Grenander-type monotone hazard
//! and its inverse process, and Kaplan–Meier curves.

mod breslow;
mod grenander;
mod kaplan_meier;

pub use breslow::{breslow, StepCumHazard};
pub use grenander::{grenander, inverse_process, least_concave_majorant, MonotoneHazard};
pub use kaplan_meier::{breslow_cdf, kaplan_meier, CurveRole, SurvivalCurve};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Estimation interval `[eps, m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub eps: f64,
    pub m: f64,
}

impl Window {
    pub fn new(eps: f64, m: f64) -> Result<Self> {
        let w = Self { eps, m };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_finite() && self.m.is_finite() && self.eps >= 0.0 && self.eps < self.m {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "window requires 0 <= eps < M, got [{}, {}]",
                self.eps, self.m
            )))
        }
    }

    pub fn len(&self) -> f64 {
        self.m - self.eps
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.eps && t <= self.m
    }
}

/// `Φ_n(x; β) = n⁻¹ Σ 1{T_i >= x} exp(β'Z_i)`.
pub fn phi_n(data: &Dataset, beta: &[f64], x: f64) -> f64 {
    let sum: f64 = data
        .observations()
        .iter()
        .filter(|o| o.time >= x)
        .map(|o| o.linear_predictor(beta).exp())
        .sum();
    sum / data.len() as f64
}

/// `Φ_n(·; β)` tabulated once for repeated evaluation (`O(log n)` per call).
#[derive(Debug, Clone)]
pub struct RiskFunction {
    times: Vec<f64>,
    /// `tail[k] = n⁻¹ Σ_{j >= k} exp(β'Z_(j))` over the time-sorted sample.
    tail: Vec<f64>,
}

impl RiskFunction {
    pub fn new(data: &Dataset, beta: &[f64]) -> Self {
        let n = data.len() as f64;
        let times: Vec<f64> = data.sorted().map(|o| o.time).collect();
        let mut tail = vec![0.0; times.len() + 1];
        for (k, o) in data.sorted().enumerate().rev() {
            tail[k] = tail[k + 1] + o.linear_predictor(beta).exp() / n;
        }
        Self { times, tail }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.tail[self.times.partition_point(|&t| t < x)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observation;

    #[test]
    fn phi_n_counts_risk_set() {
        let d = Dataset::new((1..=3).map(|t| Observation::new(t as f64, true, vec![0.0])).collect()).unwrap();
        assert!((phi_n(&d, &[0.0], 2.5) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(phi_n(&d, &[0.0], 0.5), 1.0);
        assert_eq!(phi_n(&d, &[0.0], 3.5), 0.0);
        let rf = RiskFunction::new(&d, &[0.0]);
        for x in [0.5, 1.0, 2.0, 2.5, 3.0, 3.5] {
            assert!((rf.eval(x) - phi_n(&d, &[0.0], x)).abs() < 1e-15);
        }
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(0.5, 2.5).is_ok());
        assert!(Window::new(0.0, 1.0).is_ok());
        assert!(Window::new(2.0, 1.0).is_err());
        assert!(Window::new(-1.0, 1.0).is_err());
    }
}
