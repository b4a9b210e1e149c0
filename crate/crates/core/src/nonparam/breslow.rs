use std::io::Write;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Right-continuous nondecreasing step function, zero before the first jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCumHazard {
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepCumHazard {
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if jump_times.len() != values.len() {
            return Err(Error::invalid("jump_times and values differ in length"));
        }
        if jump_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("jump times must be strictly ascending"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("values must be finite, nonnegative and nondecreasing"));
        }
        Ok(Self { jump_times, values })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.jump_times.partition_point(|&t| t <= x) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    /// Left limit `Λ(x-)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        match self.jump_times.partition_point(|&t| t < x) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "value"])?;
        for (t, v) in self.jump_times.iter().zip(&self.values) {
            w.write_record([format!("{t:?}"), format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Breslow estimator `Λ_n(x) = Σ_{Δ_i=1, T_i<=x} 1 / (n Φ_n(T_i; β))`,
/// with one jump per distinct event time.
pub fn breslow(data: &Dataset, beta: &[f64]) -> Result<StepCumHazard> {
    if data.events() == 0 {
        return Err(Error::invalid("the Breslow estimator needs at least one event"));
    }
    let obs = data.observations();
    let order = data.sorted_index();
    let lp: Vec<f64> = obs.iter().map(|o| o.linear_predictor(beta)).collect();
    let offset = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Reverse sweep: risk-set sum over all T_j >= t, tied blocks added together.
    let mut rev_times = Vec::new();
    let mut rev_jumps = Vec::new();
    let mut s0 = 0.0;
    let mut hi = order.len();
    while hi > 0 {
        let t = obs[order[hi - 1]].time;
        let mut lo = hi - 1;
        while lo > 0 && obs[order[lo - 1]].time == t {
            lo -= 1;
        }
        let mut events = 0usize;
        for &i in &order[lo..hi] {
            s0 += (lp[i] - offset).exp();
            events += obs[i].status as usize;
        }
        if events > 0 {
            rev_times.push(t);
            rev_jumps.push(events as f64 / s0 * (-offset).exp());
        }
        hi = lo;
    }
    let jump_times: Vec<f64> = rev_times.into_iter().rev().collect();
    let mut acc = 0.0;
    let values = rev_jumps
        .into_iter()
        .rev()
        .map(|j| {
            acc += j;
            acc
        })
        .collect();
    Ok(StepCumHazard { jump_times, values })
}
