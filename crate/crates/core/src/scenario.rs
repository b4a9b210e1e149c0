//! Synthetic Cox-model data: Weibull nulls and two non-Weibull decreasing
//! hazards, uniform covariates on `[0,1]^d` and uniform censoring on `[0, τ]`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::nonparam::Window;
use crate::par::{self, Exec};

/// Baseline hazard family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Baseline {
    /// `λ(t) = ν μ^ν t^(ν-1)`, `Λ(t) = (μt)^ν`.
    Weibull { mu: f64, nu: f64 },
    /// `λ(t) = 1/(t+c)`, `Λ(t) = log((t+c)/c)`.
    AltA { c: f64 },
    /// `λ(t) = c + 1/(2√t)`, `Λ(t) = ct + √t`.
    AltB { c: f64 },
}

impl Baseline {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Baseline::Weibull { mu, nu } => mu > 0.0 && nu > 0.0 && mu.is_finite() && nu.is_finite(),
            Baseline::AltA { c } | Baseline::AltB { c } => c > 0.0 && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid baseline parameters: {self}")))
        }
    }

    pub fn cum_hazard(&self, t: f64) -> f64 {
        match *self {
            Baseline::Weibull { mu, nu } => (mu * t).powf(nu),
            Baseline::AltA { c } => (t / c).ln_1p(),
            Baseline::AltB { c } => c * t + t.sqrt(),
        }
    }

    pub fn hazard(&self, t: f64) -> f64 {
        match *self {
            Baseline::Weibull { mu, nu } => nu * mu.powf(nu) * t.powf(nu - 1.0),
            Baseline::AltA { c } => 1.0 / (t + c),
            Baseline::AltB { c } => c + 0.5 / t.sqrt(),
        }
    }

    pub fn hazard_derivative(&self, t: f64) -> f64 {
        match *self {
            Baseline::Weibull { mu, nu } => nu * (nu - 1.0) * mu.powf(nu) * t.powf(nu - 2.0),
            Baseline::AltA { c } => -1.0 / ((t + c) * (t + c)),
            Baseline::AltB { .. } => -0.25 * t.powf(-1.5),
        }
    }

    /// Solves `Λ(x) = e` for `x`.
    pub fn inverse_cum_hazard(&self, e: f64) -> f64 {
        match *self {
            Baseline::Weibull { mu, nu } => e.powf(1.0 / nu) / mu,
            Baseline::AltA { c } => c * e.exp_m1(),
            Baseline::AltB { c } => {
                // s = (-1 + sqrt(1 + 4ce)) / (2c), rationalised to avoid cancellation.
                let s = 2.0 * e / (1.0 + (1.0 + 4.0 * c * e).sqrt());
                s * s
            }
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Baseline::Weibull { mu, nu } => write!(f, "weibull:{mu},{nu}"),
            Baseline::AltA { c } => write!(f, "alt_a:{c}"),
            Baseline::AltB { c } => write!(f, "alt_b:{c}"),
        }
    }
}

/// Parses `weibull:MU,NU`, `alt_a:C` or `alt_b:C`.
impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("baseline `{s}`: expected KIND:PARAMS")))?;
        let nums = args
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::invalid(format!("baseline `{s}`: {e}")))?;
        let b = match (kind.trim().to_ascii_lowercase().as_str(), nums.as_slice()) {
            ("weibull", &[mu, nu]) => Baseline::Weibull { mu, nu },
            ("alt_a" | "a", &[c]) => Baseline::AltA { c },
            ("alt_b" | "b", &[c]) => Baseline::AltB { c },
            _ => return Err(Error::invalid(format!("unrecognised baseline `{s}`"))),
        };
        b.validate()?;
        Ok(b)
    }
}

/// An uncensored draw: event time, censoring time and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentDraw {
    pub event: f64,
    pub censor: f64,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub baseline: Baseline,
    pub beta: Vec<f64>,
    pub censor_tau: f64,
    pub window: Window,
    pub n: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.baseline.validate()?;
        self.window.validate()?;
        if self.beta.is_empty() || self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("beta must be a non-empty finite vector"));
        }
        if !(self.censor_tau > 0.0) {
            return Err(Error::invalid("censor_tau must be positive"));
        }
        if self.n < 2 {
            return Err(Error::invalid("n must be at least 2"));
        }
        Ok(())
    }

    /// Soft configuration problems that do not prevent sampling.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.window.m >= self.censor_tau {
            w.push(format!(
                "window end M={} is not below the censoring bound tau={}",
                self.window.m, self.censor_tau
            ));
        }
        if let Baseline::Weibull { nu, .. } = self.baseline {
            if nu >= 1.0 {
                w.push(format!("Weibull shape nu={nu} does not give a decreasing hazard"));
            }
        }
        w
    }

    pub fn cum_hazard_true(&self, t: f64) -> f64 {
        self.baseline.cum_hazard(t)
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    /// The draws behind [`Scenario::sample_with`], before censoring.
    pub fn latent(&self, seed: u64, exec: Exec) -> Result<Vec<LatentDraw>> {
        self.validate()?;
        let d = self.beta.len();
        Ok(exec.map(self.n, |i| {
            let mut rng = par::stream(seed, i as u64);
            let covariates: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let e = -(-rng.random::<f64>()).ln_1p();
            let censor = rng.random::<f64>() * self.censor_tau;
            let lp: f64 = covariates.iter().zip(&self.beta).map(|(z, b)| z * b).sum();
            let event = self.baseline.inverse_cum_hazard(e * (-lp).exp());
            LatentDraw { event, censor, covariates }
        }))
    }

    pub fn sample(&self, seed: u64) -> Result<Dataset> {
        self.sample_with(seed, Exec::default())
    }

    /// Observation `i` is drawn from its own substream `par::stream(seed, i)`:
    /// `d` covariate uniforms, one uniform for `E ~ Exp(1)`, one for `C ~ U[0,τ]`.
    pub fn sample_with(&self, seed: u64, exec: Exec) -> Result<Dataset> {
        let observations = self
            .latent(seed, exec)?
            .into_iter()
            .map(|d| Observation::new(d.event.min(d.censor), d.event <= d.censor, d.covariates))
            .collect();
        Dataset::new(observations)
    }
}
