//! Goodness-of-fit statistics for a Weibull baseline: the `L_p` distance
//! `T_n` between the Grenander-type and parametric hazards, a likelihood
//! ratio `LR_n` and a Kolmogorov–Smirnov distance `S_n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cox;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::hazard::HazardModel;
use crate::nonparam::{breslow, breslow_cdf, grenander, MonotoneHazard, StepCumHazard, Window};
use crate::quadrature::gauss_legendre16;
use crate::weibull::{fit_weibull_from, WeibullOptions, WeibullTheta};

/// Floor applied to `λ̂_n` inside logarithms.
pub const HAZARD_FLOOR: f64 = 1e-12;

/// Points of the uniform grid added to the jump points when computing `S_n`.
pub const KS_GRID: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stat {
    T,
    LR,
    S,
}

impl Stat {
    pub const ALL: [Stat; 3] = [Stat::T, Stat::LR, Stat::S];

    /// `LR_n` rejects for small values; the others for large values.
    pub fn rejects_low(self) -> bool {
        matches!(self, Stat::LR)
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stat::T => "T",
            Stat::LR => "LR",
            Stat::S => "S",
        })
    }
}

impl FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T" => Ok(Stat::T),
            "LR" => Ok(Stat::LR),
            "S" => Ok(Stat::S),
            _ => Err(Error::invalid(format!("unknown statistic `{s}` (expected T, LR or S)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Order of the `L_p` distance.
    pub p: f64,
    pub window: Window,
    /// Fraction of the sample used for the parametric fit; `1` uses the full
    /// sample for both estimators.
    pub split_ratio: f64,
    pub alpha: f64,
    /// Bootstrap replications.
    pub b: usize,
    /// Build the `LR_n` Grenander estimator on `[0, max T]` (default) rather
    /// than on `window`.
    #[serde(default = "default_true")]
    pub lr_full_range: bool,
}

fn default_true() -> bool {
    true
}

impl TestConfig {
    pub fn new(window: Window) -> Self {
        Self {
            p: 1.0,
            window,
            split_ratio: 1.0,
            alpha: 0.05,
            b: 199,
            lr_full_range: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if !(self.window.eps > 0.0) {
            return Err(Error::invalid("the test window needs eps > 0"));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::invalid(format!("p must be >= 1, got {}", self.p)));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio <= 1.0) {
            return Err(Error::invalid(format!("split_ratio must lie in (0,1], got {}", self.split_ratio)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn is_split(&self) -> bool {
        self.split_ratio < 1.0
    }
}

/// `∫_window |λ̂(t) - λ_θ(t)|^p dt`.
///
/// Each constant piece of `λ̂` is cut at its crossing with the monotone
/// `λ_θ`; `p = 1` then integrates exactly through `Λ_θ`, other orders use
/// 16-point Gauss–Legendre on each sign-constant part.
pub fn lp_distance<H: HazardModel + ?Sized>(est: &MonotoneHazard, theta: &H, p: f64) -> f64 {
    lp_distance_over(est, theta, p, est.window())
}

/// [`lp_distance`] restricted to `range ⊂ est.window()`.
pub fn lp_distance_over<H: HazardModel + ?Sized>(est: &MonotoneHazard, theta: &H, p: f64, range: Window) -> f64 {
    let mut total = 0.0;
    for (a, b, s) in est.pieces() {
        let (a, b) = (a.max(range.eps), b.min(range.m));
        if a >= b {
            continue;
        }
        let mut cuts = vec![a];
        if let Some(t) = theta.level_crossing(s) {
            if t > a && t < b {
                cuts.push(t);
            }
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if p == 1.0 {
                total += (s * (hi - lo) - (theta.cum_hazard(hi) - theta.cum_hazard(lo))).abs();
            } else {
                total += gauss_legendre16(|t| (s - theta.hazard(t)).abs().powf(p), lo, hi);
            }
        }
    }
    total
}

/// Estimators shared by the statistics: the parametric fit on one part of
/// the sample and the Breslow estimator on the other.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub theta: WeibullTheta,
    /// Partial-likelihood `β̂` on the nonparametric part.
    pub beta_hat: Vec<f64>,
    pub breslow: StepCumHazard,
    /// Sample used by the nonparametric side (the second part when split).
    pub np_data: Dataset,
}

impl Fitted {
    pub fn new(data: &Dataset, cfg: &TestConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let (param, np) = if cfg.is_split() {
            data.split(cfg.split_ratio, seed)?
        } else {
            (data.clone(), data.clone())
        };
        let np_fit = cox::fit_default(&np)?;
        let param_beta0 = if cfg.is_split() {
            cox::fit_default(&param).map(|f| f.beta_hat).unwrap_or_else(|_| vec![0.0; data.dim()])
        } else {
            np_fit.beta_hat.clone()
        };
        let theta = fit_weibull_from(&param, &param_beta0, WeibullOptions::default())?;
        let lam = breslow(&np, &np_fit.beta_hat)?;
        Ok(Self {
            theta,
            beta_hat: np_fit.beta_hat,
            breslow: lam,
            np_data: np,
        })
    }

    pub fn n2(&self) -> usize {
        self.np_data.len()
    }

    pub fn grenander(&self, window: Window) -> Result<MonotoneHazard> {
        grenander(&self.breslow, window)
    }

    pub fn statistic(&self, stat: Stat, cfg: &TestConfig) -> Result<f64> {
        match stat {
            Stat::T => Ok(self.t_statistic(cfg)?.0),
            Stat::LR => self.log_lr(cfg),
            Stat::S => Ok(self.ks_distance()),
        }
    }

    pub fn t_statistic(&self, cfg: &TestConfig) -> Result<(f64, MonotoneHazard)> {
        let est = self.grenander(cfg.window)?;
        let dist = lp_distance(&est, &self.theta, cfg.p);
        Ok(((self.n2() as f64).powf(cfg.p / 3.0) * dist, est))
    }

    /// Grenander estimator used by `LR_n`.
    pub fn lr_estimator(&self, cfg: &TestConfig) -> Result<MonotoneHazard> {
        if cfg.lr_full_range {
            self.grenander(Window::new(0.0, self.np_data.max_time())?)
        } else {
            self.grenander(cfg.window)
        }
    }

    /// `log LR_n` over the nonparametric sample.
    pub fn log_lr(&self, cfg: &TestConfig) -> Result<f64> {
        Ok(self.log_lr_detailed(cfg)?.0)
    }

    /// `log LR_n` and the number of events where `λ̂_n` had to be floored.
    pub fn log_lr_detailed(&self, cfg: &TestConfig) -> Result<(f64, usize)> {
        let est = self.lr_estimator(cfg)?;
        let w = est.window();
        let cum_np = |t: f64| {
            if w.contains(t) {
                self.breslow.eval(w.eps) + est.integral(w.eps, t)
            } else {
                self.breslow.eval(t)
            }
        };
        Ok(log_lr_terms(&self.np_data, &self.theta, &self.beta_hat, |t| est.eval(t), cum_np))
    }

    /// `sup_t |F_θ̂(t) - F_n(t)|` over `[0, max T]`, baseline curves (`z = 0`).
    pub fn ks_distance(&self) -> f64 {
        let fn_curve = breslow_cdf(&self.breslow);
        let tmax = self.np_data.max_time();
        let mut sup: f64 = 0.0;
        for &t in fn_curve.jump_times().iter().filter(|&&t| t <= tmax) {
            let f = self.theta.baseline_cdf(t);
            sup = sup.max((f - fn_curve.cdf(t)).abs());
            sup = sup.max((f - (1.0 - fn_curve.surv_left(t))).abs());
        }
        for k in 0..KS_GRID {
            let t = tmax * k as f64 / (KS_GRID - 1) as f64;
            sup = sup.max((self.theta.baseline_cdf(t) - fn_curve.cdf(t)).abs());
        }
        sup
    }
}

/// Log of the likelihood ratio, parametric over nonparametric, as a plain
/// sum, with the count of floored hazard values.
pub(crate) fn log_lr_terms(
    data: &Dataset,
    theta: &WeibullTheta,
    beta_hat: &[f64],
    np_hazard: impl Fn(f64) -> f64,
    np_cum_hazard: impl Fn(f64) -> f64,
) -> (f64, usize) {
    let mut total = 0.0;
    let mut floored = 0;
    for o in data.observations() {
        let lp_param = o.linear_predictor(&theta.beta);
        let lp_np = o.linear_predictor(beta_hat);
        if o.status {
            total += theta.hazard(o.time).ln() + lp_param;
            let h = np_hazard(o.time);
            if h < HAZARD_FLOOR {
                floored += 1;
            }
            total -= h.max(HAZARD_FLOOR).ln() + lp_np;
        }
        total -= theta.cum_hazard(o.time) * lp_param.exp();
        total += np_cum_hazard(o.time) * lp_np.exp();
    }
    (total, floored)
}

/// `T_n = n₂^{p/3} ∫_ε^M |λ̂_n - λ_θ̂|^p`, with the fitted parametric model
/// and the Grenander estimator it compared.
pub fn statistic_t(data: &Dataset, cfg: &TestConfig, seed: u64) -> Result<(f64, WeibullTheta, MonotoneHazard)> {
    let fitted = Fitted::new(data, cfg, seed)?;
    let (value, est) = fitted.t_statistic(cfg)?;
    Ok((value, fitted.theta, est))
}

/// `log LR_n`; small values are evidence against the Weibull model.
pub fn statistic_lr(data: &Dataset, cfg: &TestConfig, seed: u64) -> Result<f64> {
    Fitted::new(data, cfg, seed)?.log_lr(cfg)
}

pub fn statistic_s(data: &Dataset, cfg: &TestConfig, seed: u64) -> Result<f64> {
    Ok(Fitted::new(data, cfg, seed)?.ks_distance())
}
