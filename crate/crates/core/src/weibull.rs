//! Full maximum likelihood for the Cox model with a Weibull baseline
//! `λ(t) = ν μ^ν t^(ν-1)`.
//!
//! The optimiser works on `(log μ, log ν, β)` so positivity never needs to
//! be enforced by the line search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cox::{self, newton_direction};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeibullTheta {
    pub mu: f64,
    pub nu: f64,
    pub beta: Vec<f64>,
}

impl WeibullTheta {
    pub fn new(mu: f64, nu: f64, beta: Vec<f64>) -> Result<Self> {
        if !(mu > 0.0 && nu > 0.0 && mu.is_finite() && nu.is_finite()) {
            return Err(Error::invalid(format!("Weibull parameters must be positive, got mu={mu}, nu={nu}")));
        }
        Ok(Self { mu, nu, beta })
    }

    /// `ν μ^ν t^(ν-1)`; infinite at `t = 0` when `ν < 1`.
    #[inline]
    pub fn hazard(&self, t: f64) -> f64 {
        self.nu * self.mu.powf(self.nu) * t.powf(self.nu - 1.0)
    }

    #[inline]
    pub fn cum_hazard(&self, t: f64) -> f64 {
        (self.mu * t).powf(self.nu)
    }

    /// `F_θ(x | z) = 1 - exp(-(μx)^ν e^{β'z})`.
    pub fn conditional_cdf(&self, x: f64, z: &[f64]) -> f64 {
        let lp: f64 = z.iter().zip(&self.beta).map(|(z, b)| z * b).sum();
        -(-self.cum_hazard(x) * lp.exp()).exp_m1()
    }

    /// Baseline distribution function (`z = 0`).
    pub fn baseline_cdf(&self, x: f64) -> f64 {
        -(-self.cum_hazard(x)).exp_m1()
    }

    /// Solves `λ(t) = s` for `t`; `None` when `ν = 1` (constant hazard).
    pub fn hazard_inverse(&self, s: f64) -> Option<f64> {
        if self.nu == 1.0 {
            return None;
        }
        Some((s / (self.nu * self.mu.powf(self.nu))).powf(1.0 / (self.nu - 1.0)))
    }
}

/// Checked version of [`WeibullTheta::hazard`].
pub fn param_hazard(theta: &WeibullTheta, t: f64) -> Result<f64> {
    if !(t >= 0.0) || (t == 0.0 && theta.nu < 1.0) {
        return Err(Error::invalid(format!("Weibull hazard undefined at t={t} with nu={}", theta.nu)));
    }
    Ok(theta.hazard(t))
}

/// `Σ_i Δ_i [log ν + ν log μ + (ν-1) log T_i + β'Z_i] - (μT_i)^ν e^{β'Z_i}`.
pub fn weibull_loglik(data: &Dataset, theta: &WeibullTheta) -> Result<f64> {
    check_events(data)?;
    Ok(derivatives(data, theta.mu.ln(), theta.nu.ln(), &theta.beta, false).value)
}

fn check_events(data: &Dataset) -> Result<()> {
    if data.observations().iter().any(|o| o.status && o.time == 0.0) {
        return Err(Error::invalid("event at time 0 has zero Weibull density (log 0)"));
    }
    Ok(())
}

/// Log-likelihood with gradient and Hessian in `(log μ, log ν, β)`.
#[derive(Debug, Clone)]
pub struct WeibullLikelihood {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

pub fn weibull_derivatives(data: &Dataset, theta: &WeibullTheta) -> Result<WeibullLikelihood> {
    check_events(data)?;
    Ok(derivatives(data, theta.mu.ln(), theta.nu.ln(), &theta.beta, true))
}

fn derivatives(data: &Dataset, log_mu: f64, log_nu: f64, beta: &[f64], with_hessian: bool) -> WeibullLikelihood {
    let d = beta.len();
    let p = d + 2;
    let nu = log_nu.exp();
    let mut value = 0.0;
    let mut g = DVector::zeros(p);
    let mut h = DMatrix::zeros(p, p);
    for o in data.observations() {
        if o.time == 0.0 {
            // censored at 0: contributes nothing
            continue;
        }
        let z = &o.covariates;
        let lp = o.linear_predictor(beta);
        let l = log_mu + o.time.ln(); // log(μT)
        let w = (nu * l + lp).exp(); // (μT)^ν e^{β'Z}
        let delta = o.status as u8 as f64;
        value += delta * (log_nu + nu * l - o.time.ln() + lp) - w;
        g[0] += nu * (delta - w);
        g[1] += delta * (1.0 + nu * l) - w * nu * l;
        for a in 0..d {
            g[2 + a] += (delta - w) * z[a];
        }
        if with_hessian {
            h[(0, 0)] -= w * nu * nu;
            h[(0, 1)] += nu * (delta - w) - w * nu * nu * l;
            h[(1, 1)] += delta * nu * l - w * nu * l * (1.0 + nu * l);
            for a in 0..d {
                h[(0, 2 + a)] -= w * nu * z[a];
                h[(1, 2 + a)] -= w * nu * l * z[a];
                for b in a..d {
                    h[(2 + a, 2 + b)] -= w * z[a] * z[b];
                }
            }
        }
    }
    if with_hessian {
        for r in 0..p {
            for c in 0..r {
                h[(r, c)] = h[(c, r)];
            }
        }
    }
    WeibullLikelihood { value, gradient: g, hessian: h }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullOptions {
    /// Tolerance on the max-norm of the gradient in `(log μ, log ν, β)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WeibullOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200 }
    }
}

/// Joint MLE of `(μ, ν, β)`, initialised at `ν = 1`, `β` from the partial
/// likelihood and the exponential closed form for `μ`.
pub fn fit_weibull(data: &Dataset, opts: WeibullOptions) -> Result<WeibullTheta> {
    let beta0 = match cox::fit_default(data) {
        Ok(f) if f.beta_hat.iter().all(|b| b.is_finite()) => f.beta_hat,
        _ => vec![0.0; data.dim()],
    };
    fit_weibull_from(data, &beta0, opts)
}

pub fn fit_weibull_from(data: &Dataset, beta0: &[f64], opts: WeibullOptions) -> Result<WeibullTheta> {
    check_events(data)?;
    let events = data.events();
    if events == 0 {
        return Err(Error::invalid("Weibull likelihood needs at least one event"));
    }
    if beta0.len() != data.dim() {
        return Err(Error::invalid("initial beta has the wrong dimension"));
    }
    let exposure: f64 = data
        .observations()
        .iter()
        .map(|o| o.time * o.linear_predictor(beta0).exp())
        .sum();
    let mu0 = events as f64 / exposure;
    let mut x = DVector::zeros(data.dim() + 2);
    x[0] = mu0.ln();
    x[1] = 0.0;
    x.rows_mut(2, data.dim()).copy_from_slice(beta0);

    let eval = |x: &DVector<f64>| derivatives(data, x[0], x[1], &x.as_slice()[2..], true);
    let mut cur = eval(&x);
    let theta_of = |x: &DVector<f64>| WeibullTheta {
        mu: x[0].exp(),
        nu: x[1].exp(),
        beta: x.as_slice()[2..].to_vec(),
    };
    for iter in 0..=opts.max_iter {
        let gnorm = cur.gradient.amax();
        if gnorm <= opts.tol {
            return Ok(theta_of(&x));
        }
        if iter == opts.max_iter {
            break;
        }
        let step = newton_direction(&cur.hessian, &cur.gradient);
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..50 {
            let cand = &x + &step * scale;
            let next = eval(&cand);
            if next.value.is_finite() && next.value >= cur.value - 1e-13 * cur.value.abs().max(1.0) {
                x = cand;
                cur = next;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        gradient_norm: cur.gradient.amax(),
        last: x.as_slice().to_vec(),
    })
}
