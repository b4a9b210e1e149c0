//! Parametric–semiparametric bootstrap for the goodness-of-fit statistics.
//!
//! Bootstrap samples keep the observed covariates, draw event times from the
//! fitted Weibull model `F_θ̂(· | Z_i)` and censoring times from the
//! Kaplan–Meier estimate `Ĝ_n` independently of `Z_i`. Each replicate reruns
//! the whole pipeline, including the sample split when one is configured.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::gof::{Fitted, Stat, TestConfig};
use crate::nonparam::{kaplan_meier, CurveRole, SurvivalCurve};
use crate::par::{self, Exec};
use crate::weibull::WeibullTheta;

/// Replicates may fail to fit up to this fraction before the test aborts.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

pub const MIN_REPLICATES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub stat: Stat,
    pub statistic: f64,
    pub boot_values: Vec<f64>,
    pub critical_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub seed: u64,
    /// Replicates that failed to fit (excluded from `boot_values`).
    pub failed_seeds: Vec<u64>,
    pub warnings: Vec<String>,
}

impl TestReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_boot_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replicate", "value"])?;
        for (j, v) in self.boot_values.iter().enumerate() {
            w.write_record([j.to_string(), format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rank (1-based) of the order statistic used as critical value.
pub fn critical_rank(b: usize, alpha: f64, lower: bool) -> usize {
    let q = if lower { alpha } else { 1.0 - alpha };
    // guard against 0.95 * 20 = 19.000000000000004
    ((q * b as f64 - 1e-9).ceil() as usize).clamp(1, b)
}

/// `⌈(1-α)B⌉`-th smallest value, or the `⌈αB⌉`-th when `lower`.
pub fn critical_value(values: &[f64], alpha: f64, lower: bool) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[critical_rank(sorted.len(), alpha, lower) - 1]
}

pub fn decide(stat: Stat, statistic: f64, critical: f64) -> bool {
    if stat.rejects_low() {
        statistic < critical
    } else {
        statistic > critical
    }
}

/// One bootstrap sample. `seed` drives a single stream consumed observation
/// by observation: one uniform for `X*`, one for `C*`.
pub fn resample(data: &Dataset, theta: &WeibullTheta, censoring: &SurvivalCurve, seed: u64) -> Result<Dataset> {
    let mut rng = par::stream(seed, 0);
    let observations = data
        .observations()
        .iter()
        .map(|o| {
            let e = -(-rng.random::<f64>()).ln_1p();
            let scaled = e * (-o.linear_predictor(&theta.beta)).exp();
            let x = scaled.powf(1.0 / theta.nu) / theta.mu;
            // u in (0, 1]; mass beyond the last censoring goes to +∞
            let c = censoring.quantile(1.0 - rng.random::<f64>());
            Observation::new(x.min(c), x <= c, o.covariates.clone())
        })
        .collect();
    Dataset::new(observations)
}

/// Replicate `j` of a test seeded with `seed`.
pub fn replicate_seed(seed: u64, j: usize) -> u64 {
    par::derive_seed(seed, j as u64)
}

/// Runs the bootstrap once and reports every requested statistic on the same
/// bootstrap samples.
pub fn bootstrap_test(data: &Dataset, cfg: &TestConfig, stats: &[Stat], seed: u64, exec: Exec) -> Result<Vec<TestReport>> {
    cfg.validate()?;
    if cfg.b < MIN_REPLICATES {
        return Err(Error::invalid(format!("B must be at least {MIN_REPLICATES}, got {}", cfg.b)));
    }
    if stats.is_empty() {
        return Err(Error::invalid("no statistic requested"));
    }
    let fitted = Fitted::new(data, cfg, seed)?;
    let mut observed = Vec::with_capacity(stats.len());
    let mut warnings: Vec<Vec<String>> = vec![Vec::new(); stats.len()];
    for (k, &stat) in stats.iter().enumerate() {
        let value = match stat {
            Stat::LR => {
                let (v, floored) = fitted.log_lr_detailed(cfg)?;
                if floored > 0 {
                    warnings[k].push(format!("{floored} Grenander hazard value(s) floored inside log"));
                }
                v
            }
            _ => fitted.statistic(stat, cfg)?,
        };
        observed.push(value);
    }
    let censoring = kaplan_meier(data, CurveRole::Censoring);

    let replicates: Vec<Result<Vec<f64>>> = exec.map(cfg.b, |j| {
        let rs = replicate_seed(seed, j);
        let boot = resample(data, &fitted.theta, &censoring, rs)?;
        let f = Fitted::new(&boot, cfg, par::derive_seed(rs, 1))?;
        stats.iter().map(|&s| f.statistic(s, cfg)).collect()
    });

    let failed_seeds: Vec<u64> = replicates
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_err())
        .map(|(j, _)| replicate_seed(seed, j))
        .collect();
    if failed_seeds.len() as f64 > MAX_FAILURE_FRACTION * cfg.b as f64 {
        return Err(Error::TooManyFailures {
            failed: failed_seeds.len(),
            total: cfg.b,
            seeds: failed_seeds,
        });
    }
    let ok: Vec<&Vec<f64>> = replicates.iter().filter_map(|r| r.as_ref().ok()).collect();

    Ok(stats
        .iter()
        .enumerate()
        .map(|(k, &stat)| {
            let boot_values: Vec<f64> = ok.iter().map(|v| v[k]).collect();
            let critical = critical_value(&boot_values, cfg.alpha, stat.rejects_low());
            let mut w = warnings[k].clone();
            if !failed_seeds.is_empty() {
                w.push(format!("{} of {} replicates failed and were dropped", failed_seeds.len(), cfg.b));
            }
            TestReport {
                stat,
                statistic: observed[k],
                boot_values,
                critical_value: critical,
                reject: decide(stat, observed[k], critical),
                alpha: cfg.alpha,
                seed,
                failed_seeds: failed_seeds.clone(),
                warnings: w,
            }
        })
        .collect())
}

pub fn bootstrap_critical_value(data: &Dataset, cfg: &TestConfig, stat: Stat, seed: u64) -> Result<TestReport> {
    Ok(bootstrap_test(data, cfg, &[stat], seed, Exec::default())?.remove(0))
}
