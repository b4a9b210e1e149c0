//! Maximum partial-likelihood estimation of the Cox regression coefficients.
//!
//! Ties follow the Breslow convention: every event at time `t` is scored
//! against the full risk set `{j : T_j >= t}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Largest coefficient norm accepted before the fit is declared divergent.
pub const SEPARATION_BOUND: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub beta_hat: Vec<f64>,
    pub loglik: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxOptions {
    /// Tolerance on the max-norm of the score.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CoxOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100 }
    }
}

/// Log partial likelihood with its gradient and Hessian.
#[derive(Debug, Clone)]
pub struct PartialLikelihood {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

pub fn log_partial_likelihood(data: &Dataset, beta: &[f64]) -> f64 {
    sweep(data, beta, false).value
}

pub fn partial_likelihood_derivatives(data: &Dataset, beta: &[f64]) -> PartialLikelihood {
    sweep(data, beta, true)
}

/// Single reverse pass over the sorted times, accumulating the risk-set sums
/// `S0 = Σ w_j`, `S1 = Σ w_j Z_j`, `S2 = Σ w_j Z_j Z_j'` block by block.
fn sweep(data: &Dataset, beta: &[f64], with_derivatives: bool) -> PartialLikelihood {
    let d = data.dim();
    assert_eq!(beta.len(), d, "beta has dimension {}, data has {d}", beta.len());
    let obs = data.observations();
    let order = data.sorted_index();
    let lp: Vec<f64> = obs.iter().map(|o| o.linear_predictor(beta)).collect();
    let offset = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut value = 0.0;
    let mut grad = DVector::zeros(d);
    let mut hess = DMatrix::zeros(d, d);
    let mut s0 = 0.0;
    let mut s1 = vec![0.0; d];
    let mut s2 = vec![0.0; d * d];

    let mut hi = order.len();
    while hi > 0 {
        let t = obs[order[hi - 1]].time;
        let mut lo = hi - 1;
        while lo > 0 && obs[order[lo - 1]].time == t {
            lo -= 1;
        }
        let block = &order[lo..hi];
        for &i in block {
            let w = (lp[i] - offset).exp();
            s0 += w;
            if with_derivatives {
                let z = &obs[i].covariates;
                for a in 0..d {
                    s1[a] += w * z[a];
                    for b in 0..d {
                        s2[a * d + b] += w * z[a] * z[b];
                    }
                }
            }
        }
        let log_s0 = s0.ln() + offset;
        for &i in block.iter().filter(|&&i| obs[i].status) {
            value += lp[i] - log_s0;
            if with_derivatives {
                let z = &obs[i].covariates;
                for a in 0..d {
                    let ma = s1[a] / s0;
                    grad[a] += z[a] - ma;
                    for b in 0..d {
                        hess[(a, b)] -= s2[a * d + b] / s0 - ma * (s1[b] / s0);
                    }
                }
            }
        }
        hi = lo;
    }
    PartialLikelihood { value, gradient: grad, hessian: hess }
}

/// Newton–Raphson with step halving, started from `init`.
pub fn fit(data: &Dataset, init: &[f64], opts: CoxOptions) -> Result<CoxFit> {
    if data.events() == 0 {
        return Err(Error::invalid("partial likelihood needs at least one event"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if init.len() != data.dim() {
        return Err(Error::invalid(format!(
            "initial beta has dimension {}, data has {}",
            init.len(),
            data.dim()
        )));
    }
    let mut beta = DVector::from_column_slice(init);
    let mut cur = partial_likelihood_derivatives(data, beta.as_slice());
    let mut iterations = 0;
    loop {
        let gnorm = cur.gradient.amax();
        if gnorm <= opts.tol {
            return Ok(CoxFit {
                beta_hat: beta.as_slice().to_vec(),
                loglik: cur.value,
                gradient_norm: gnorm,
                iterations,
                converged: true,
            });
        }
        if iterations >= opts.max_iter {
            return Ok(CoxFit {
                beta_hat: beta.as_slice().to_vec(),
                loglik: cur.value,
                gradient_norm: gnorm,
                iterations,
                converged: false,
            });
        }
        iterations += 1;
        let step = newton_direction(&cur.hessian, &cur.gradient);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = &beta + &step * scale;
            let next = partial_likelihood_derivatives(data, candidate.as_slice());
            if next.value.is_finite() && next.value >= cur.value - 1e-12 * cur.value.abs().max(1.0) {
                accepted = Some((candidate, next));
                break;
            }
            scale *= 0.5;
        }
        let Some((candidate, next)) = accepted else {
            // No ascent along the Newton direction: we are at numerical precision.
            return Ok(CoxFit {
                beta_hat: beta.as_slice().to_vec(),
                loglik: cur.value,
                gradient_norm: gnorm,
                iterations,
                converged: false,
            });
        };
        if candidate.norm() > SEPARATION_BOUND {
            return Err(Error::Separation { bound: SEPARATION_BOUND });
        }
        beta = candidate;
        cur = next;
    }
}

pub fn fit_default(data: &Dataset) -> Result<CoxFit> {
    fit(data, &vec![0.0; data.dim()], CoxOptions::default())
}

/// Solves `(-H + δI) step = g`, raising `δ` until the system is positive definite.
pub(crate) fn newton_direction(hessian: &DMatrix<f64>, gradient: &DVector<f64>) -> DVector<f64> {
    let neg = -hessian;
    let scale = neg.diagonal().amax().max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..60 {
        let mut m = neg.clone();
        for k in 0..m.nrows() {
            m[(k, k)] += ridge;
        }
        if let Some(chol) = m.cholesky() {
            let step = chol.solve(gradient);
            if step.iter().all(|x| x.is_finite()) {
                return step;
            }
        }
        ridge = if ridge == 0.0 { 1e-10 * scale } else { ridge * 10.0 };
    }
    gradient / scale
}
