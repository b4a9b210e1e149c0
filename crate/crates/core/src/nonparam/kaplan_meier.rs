use serde::{Deserialize, Serialize};

use super::StepCumHazard;
use crate::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveRole {
    /// Survivor function of the censoring time, `1 - Ĝ_n`.
    Censoring,
    /// Survivor function of the event time.
    Event,
}

/// Right-continuous nonincreasing survivor curve starting at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    jump_times: Vec<f64>,
    surv: Vec<f64>,
    role: CurveRole,
}

impl SurvivalCurve {
    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn surv_values(&self) -> &[f64] {
        &self.surv
    }

    pub fn role(&self) -> CurveRole {
        self.role
    }

    pub fn surv(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&x| x <= t) {
            0 => 1.0,
            k => self.surv[k - 1],
        }
    }

    pub fn surv_left(&self, t: f64) -> f64 {
        match self.jump_times.partition_point(|&x| x < t) {
            0 => 1.0,
            k => self.surv[k - 1],
        }
    }

    /// Distribution function `1 - surv(t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.surv(t)
    }

    /// Generalised inverse of the distribution function: the smallest jump
    /// time `t` with `cdf(t) >= u`, or `+∞` when the curve never reaches `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        // surv is nonincreasing, so cdf(t_k) >= u is a suffix of the jumps.
        let k = self.surv.partition_point(|&s| 1.0 - s < u);
        self.jump_times.get(k).copied().unwrap_or(f64::INFINITY)
    }
}

/// Product-limit estimator. For [`CurveRole::Censoring`] the censorings
/// (`Δ = 0`) are the events of interest, giving `1 - Ĝ_n`.
pub fn kaplan_meier(data: &Dataset, role: CurveRole) -> SurvivalCurve {
    let sorted: Vec<_> = data.sorted().collect();
    let n = sorted.len();
    let mut jump_times = Vec::new();
    let mut surv = Vec::new();
    let mut s = 1.0;
    let mut lo = 0;
    while lo < n {
        let t = sorted[lo].time;
        let mut hi = lo;
        let mut d = 0usize;
        while hi < n && sorted[hi].time == t {
            let counts = match role {
                CurveRole::Event => sorted[hi].status,
                CurveRole::Censoring => !sorted[hi].status,
            };
            d += counts as usize;
            hi += 1;
        }
        if d > 0 {
            let at_risk = (n - lo) as f64;
            s *= 1.0 - d as f64 / at_risk;
            jump_times.push(t);
            surv.push(s);
        }
        lo = hi;
    }
    SurvivalCurve { jump_times, surv, role }
}

/// `F_n(t) = 1 - exp(-Λ_n(t))`, returned through its survivor `exp(-Λ_n)`.
pub fn breslow_cdf(lam: &StepCumHazard) -> SurvivalCurve {
    SurvivalCurve {
        jump_times: lam.jump_times().to_vec(),
        surv: lam.values().iter().map(|v| (-v).exp()).collect(),
        role: CurveRole::Event,
    }
}
