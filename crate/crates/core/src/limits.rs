//! Monte Carlo for the limit law of the `L_p` error of the Grenander-type
//! estimator.
//!
//! `X(a) = argmax_u { -(u-a)² + W(u) }` for a standard two-sided Brownian
//! motion `W`. The constants `E|X(0)|^p` and
//! `k_p = ∫_0^∞ cov(|X(0)|^p, |X(a)-a|^p) da` enter the asymptotic mean
//! `m_p` and variance `σ_p²` of `n^{p/3} ∫ |λ̂_n - λ_0|^p`.
//!
//! Since `-(u-a)² + W(u) = (W(u) - u²) + 2au - a²`, the argmax for every `a`
//! is a vertex of the upper concave hull of `u ↦ W(u) - u²`. One hull per
//! simulated path serves all `a` values.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cox;
use crate::error::{Error, Result};
use crate::gof::lp_distance_over;
use crate::nonparam::{breslow, grenander, RiskFunction, Window};
use crate::par::{self, Exec};
use crate::quadrature::{gauss_legendre16, integrate};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxMcConfig {
    /// Grid covers `u ∈ [-half_width, half_width]`.
    pub half_width: f64,
    pub step: f64,
    pub reps: usize,
    /// Truncation point of the `k_p` integral.
    pub a_max: f64,
    pub a_step: f64,
    /// Replace `W` by zero (debugging: `X(a)` is then the grid point nearest `a`).
    #[serde(default)]
    pub zero_noise: bool,
}

impl Default for ArgmaxMcConfig {
    fn default() -> Self {
        Self {
            half_width: 6.0,
            step: 0.005,
            reps: 200_000,
            a_max: 4.0,
            a_step: 0.1,
            zero_noise: false,
        }
    }
}

impl ArgmaxMcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.half_width > 0.0 && self.step < self.half_width) {
            return Err(Error::invalid("argmax grid needs 0 < step < half_width"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if !(self.a_step > 0.0 && self.a_max >= 0.0) {
            return Err(Error::invalid("a_step must be positive and a_max nonnegative"));
        }
        Ok(())
    }

    /// Grid points on each side of the origin.
    fn half_points(&self) -> usize {
        (self.half_width / self.step).round() as usize
    }

    pub fn a_grid(&self) -> Vec<f64> {
        let k = (self.a_max / self.a_step).round() as usize;
        (0..=k).map(|i| i as f64 * self.a_step).collect()
    }
}

/// Argmax locations on one simulated path.
struct ArgmaxPath {
    u: Vec<f64>,
    f: Vec<f64>,
    hull: Vec<usize>,
}

impl ArgmaxPath {
    fn simulate<R: Rng>(cfg: &ArgmaxMcConfig, rng: &mut R) -> Self {
        let m = cfg.half_points();
        let k = 2 * m + 1;
        let sd = cfg.step.sqrt();
        let mut w = vec![0.0; k];
        if !cfg.zero_noise {
            for i in m + 1..k {
                w[i] = w[i - 1] + sd * rng.sample::<f64, _>(StandardNormal);
            }
            for i in (0..m).rev() {
                w[i] = w[i + 1] + sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let u: Vec<f64> = (0..k).map(|i| (i as f64 - m as f64) * cfg.step).collect();
        let f: Vec<f64> = u.iter().zip(&w).map(|(u, w)| w - u * u).collect();
        // Upper hull keeping collinear points so ties resolve to the smallest u.
        let mut hull: Vec<usize> = Vec::with_capacity(256);
        for j in 0..k {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (u[b] - u[a]) * (f[j] - f[a]) - (f[b] - f[a]) * (u[j] - u[a]);
                if cross > 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(j);
        }
        Self { u, f, hull }
    }

    /// Grid index of the smallest maximiser of `f(u) + 2au`.
    fn argmax_index(&self, a: f64) -> usize {
        let g = |j: usize| self.f[self.hull[j]] + 2.0 * a * self.u[self.hull[j]];
        // g is unimodal along the hull: find the first j with g(j+1) <= g(j)
        let (mut lo, mut hi) = (0, self.hull.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if g(mid + 1) > g(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.hull[lo]
    }
}

/// `reps × |a_values|` draws of `X(a)` sharing one path per row.
#[derive(Debug, Clone)]
pub struct ArgmaxSamples {
    pub a_values: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    /// Fraction of rows with some argmax on the grid boundary.
    pub boundary_fraction: f64,
    pub warnings: Vec<String>,
}

pub fn simulate_x(a_values: &[f64], cfg: &ArgmaxMcConfig, seed: u64, exec: Exec) -> Result<ArgmaxSamples> {
    cfg.validate()?;
    let last = 2 * cfg.half_points();
    let out = exec.map(cfg.reps, |r| {
        let path = ArgmaxPath::simulate(cfg, &mut par::stream(seed, r as u64));
        let mut hit = false;
        let row = a_values
            .iter()
            .map(|&a| {
                let i = path.argmax_index(a);
                hit |= i == 0 || i == last;
                path.u[i]
            })
            .collect::<Vec<_>>();
        (row, hit)
    });
    let hits = out.iter().filter(|(_, h)| *h).count();
    let boundary_fraction = hits as f64 / cfg.reps as f64;
    let mut warnings = Vec::new();
    if boundary_fraction > 0.01 {
        warnings.push(format!(
            "argmax on the grid boundary in {:.2}% of replicates: increase half_width",
            100.0 * boundary_fraction
        ));
    }
    Ok(ArgmaxSamples {
        a_values: a_values.to_vec(),
        rows: out.into_iter().map(|(r, _)| r).collect(),
        boundary_fraction,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub p: f64,
    pub e_abs_x0_p: f64,
    pub k_p: f64,
    pub e_stderr: f64,
    pub k_stderr: f64,
    /// `(a, cov(|X(0)|^p, |X(a)-a|^p))` on the integration grid.
    pub cov_curve: Vec<(f64, f64)>,
    pub boundary_fraction: f64,
    pub warnings: Vec<String>,
}

impl LimitConstants {
    pub fn write_csv<W: Write>(rows: &[LimitConstants], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["p", "e_abs_x0_p", "k_p", "e_stderr", "k_stderr"])?;
        for c in rows {
            w.write_record([
                format!("{:?}", c.p),
                format!("{:?}", c.e_abs_x0_p),
                format!("{:?}", c.k_p),
                format!("{:?}", c.e_stderr),
                format!("{:?}", c.k_stderr),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

const MC_BATCH: usize = 500;

/// Per-batch moment sums for the covariance estimates.
#[derive(Debug, Clone, Default)]
struct Moments {
    count: f64,
    x: f64,
    xx: f64,
    y: Vec<f64>,
    xy: Vec<f64>,
    hits: usize,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self { y: vec![0.0; k], xy: vec![0.0; k], ..Default::default() }
    }

    fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.x += o.x;
        self.xx += o.xx;
        self.hits += o.hits;
        for k in 0..self.y.len() {
            self.y[k] += o.y[k];
            self.xy[k] += o.xy[k];
        }
    }

    fn covariances(&self) -> Vec<f64> {
        let mx = self.x / self.count;
        self.y
            .iter()
            .zip(&self.xy)
            .map(|(y, xy)| xy / self.count - mx * y / self.count)
            .collect()
    }
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// `E|X(0)|^p` and `k_p` by Monte Carlo. Replicates are grouped in fixed
/// batches whose sums are merged in batch order, so the result does not
/// depend on the thread count.
pub fn estimate_constants(p: f64, cfg: &ArgmaxMcConfig, seed: u64, exec: Exec) -> Result<LimitConstants> {
    cfg.validate()?;
    if !(p >= 1.0 && p < 2.5) {
        return Err(Error::invalid(format!("p must lie in [1, 2.5), got {p}")));
    }
    let a_grid = cfg.a_grid();
    let last = 2 * cfg.half_points();
    let batches = cfg.reps.div_ceil(MC_BATCH);
    let sums: Vec<Moments> = exec.map(batches, |b| {
        let mut m = Moments::new(a_grid.len());
        for r in b * MC_BATCH..((b + 1) * MC_BATCH).min(cfg.reps) {
            let path = ArgmaxPath::simulate(cfg, &mut par::stream(seed, r as u64));
            let i0 = path.argmax_index(0.0);
            let x = path.u[i0].abs().powf(p);
            let mut hit = i0 == 0 || i0 == last;
            m.count += 1.0;
            m.x += x;
            m.xx += x * x;
            for (k, &a) in a_grid.iter().enumerate() {
                let i = path.argmax_index(a);
                hit |= i == 0 || i == last;
                let y = (path.u[i] - a).abs().powf(p);
                m.y[k] += y;
                m.xy[k] += x * y;
            }
            m.hits += hit as usize;
        }
        m
    });
    let mut total = Moments::new(a_grid.len());
    for s in &sums {
        total.merge(s);
    }
    let n = total.count;
    let e = total.x / n;
    let var = (total.xx / n - e * e).max(0.0) * n / (n - 1.0).max(1.0);
    let cov = total.covariances();
    let k_p = trapezoid(&a_grid, &cov);

    // Batch-to-batch spread of k_p (all but a possibly short final batch).
    let full: Vec<f64> = sums
        .iter()
        .filter(|m| m.count as usize == MC_BATCH)
        .map(|m| trapezoid(&a_grid, &m.covariances()))
        .collect();
    let k_stderr = if full.len() >= 2 {
        let mean = full.iter().sum::<f64>() / full.len() as f64;
        let v = full.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (full.len() - 1) as f64;
        (v / full.len() as f64).sqrt()
    } else {
        f64::NAN
    };

    let boundary_fraction = total.hits as f64 / n;
    let mut warnings = Vec::new();
    if boundary_fraction > 0.01 {
        warnings.push(format!(
            "argmax on the grid boundary in {:.2}% of replicates: increase half_width",
            100.0 * boundary_fraction
        ));
    }
    if let (Some(first), Some(last)) = (cov.first(), cov.last()) {
        if last.abs() > 0.05 * first.abs() {
            warnings.push(format!("covariance at a_max is {:.3} of its value at 0: increase a_max", last / first));
        }
    }
    Ok(LimitConstants {
        p,
        e_abs_x0_p: e,
        k_p,
        e_stderr: (var / n).sqrt(),
        k_stderr,
        cov_curve: a_grid.into_iter().zip(cov).collect(),
        boundary_fraction,
        warnings,
    })
}

/// Points used to check the sign of `λ_0'` before integrating.
const SIGN_PROBES: usize = 257;

/// Asymptotic mean and variance
/// `m_p = E|X(0)|^p ∫ |4λ₀λ₀'/Φ|^{p/3}` and
/// `σ_p² = 8 k_p ∫ |4λ₀λ₀'/Φ|^{2(p-1)/3} λ₀/Φ` over `window`.
pub fn asymptotic_moments(
    p: f64,
    consts: &LimitConstants,
    lambda0: impl Fn(f64) -> f64,
    dlambda0: impl Fn(f64) -> f64,
    phi: impl Fn(f64) -> f64,
    window: Window,
) -> Result<(f64, f64)> {
    window.validate()?;
    for k in 0..SIGN_PROBES {
        let t = window.eps + window.len() * k as f64 / (SIGN_PROBES - 1) as f64;
        if !(dlambda0(t) < 0.0) {
            return Err(Error::invalid(format!("hazard derivative is not negative at t={t}")));
        }
        if !(phi(t) > 0.0) {
            return Err(Error::invalid(format!("risk function is not positive at t={t}")));
        }
    }
    let core = |t: f64| (4.0 * lambda0(t) * dlambda0(t) / phi(t)).abs();
    let mean_integral = integrate(|t| core(t).powf(p / 3.0), window.eps, window.m, 1e-8);
    let var_integral = integrate(
        |t| core(t).powf(2.0 * (p - 1.0) / 3.0) * lambda0(t) / phi(t),
        window.eps,
        window.m,
        1e-8,
    );
    Ok((consts.e_abs_x0_p * mean_integral, 8.0 * consts.k_p * var_integral))
}

/// Population `Φ(t; β) = E[1{T >= t} e^{β'Z}]` for a scenario with one
/// uniform covariate: `∫_0^1 e^{βz} exp(-Λ₀(t) e^{βz}) (1 - t/τ)₊ dz`.
pub fn exact_phi(scenario: &Scenario, t: f64) -> Result<f64> {
    if scenario.beta.len() != 1 {
        return Err(Error::invalid("exact Φ is available for one covariate only"));
    }
    let beta = scenario.beta[0];
    let cens = (1.0 - t / scenario.censor_tau).max(0.0);
    let lam = scenario.baseline.cum_hazard(t);
    Ok(cens * gauss_legendre16(|z| (beta * z).exp() * (-lam * (beta * z).exp()).exp(), 0.0, 1.0))
}

/// How the population `Φ` is obtained for standardising the `L_p` error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSource {
    /// One-dimensional integral over the uniform covariate.
    Exact,
    /// `Φ_n(·; β₀)` from a single large sample of the given size.
    Empirical { n: usize },
}

/// Setup of an `L_p` error experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpErrorConfig {
    pub p: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Interval on which the estimator is built; `None` uses the scenario
    /// window itself. The error is always integrated over the scenario window.
    pub domain: Option<Window>,
}

impl LpErrorConfig {
    pub fn new(p: f64, n: usize, reps: usize, seed: u64) -> Self {
        Self { p, n, reps, seed, domain: None }
    }

    /// Estimation domain `[0, (M + τ)/2]`, which keeps the window away from
    /// the boundary of the estimator.
    pub fn interior(mut self, scenario: &Scenario) -> Self {
        self.domain = Some(Window { eps: 0.0, m: 0.5 * (scenario.window.m + scenario.censor_tau) });
        self
    }
}

/// `n^{p/3} ∫_window |λ̂_n - λ₀|^p` for `reps` datasets from `scenario`.
pub fn scaled_lp_errors(scenario: &Scenario, lc: &LpErrorConfig, exec: Exec) -> Result<Vec<f64>> {
    let sc = scenario.with_n(lc.n);
    sc.validate()?;
    let domain = lc.domain.unwrap_or(sc.window);
    if domain.eps > sc.window.eps || domain.m < sc.window.m {
        return Err(Error::invalid("estimation domain must contain the scenario window"));
    }
    let res: Vec<Result<f64>> = exec.map(lc.reps, |r| {
        let data = sc.sample_with(par::derive_seed(lc.seed, r as u64), Exec::Sequential)?;
        let fit = cox::fit_default(&data)?;
        let lam = breslow(&data, &fit.beta_hat)?;
        let est = grenander(&lam, domain)?;
        Ok((lc.n as f64).powf(lc.p / 3.0) * lp_distance_over(&est, &sc.baseline, lc.p, sc.window))
    });
    res.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub config: LpErrorConfig,
    pub m_p: f64,
    pub sigma_p2: f64,
    /// Sample mean of `n^{p/3} J_n`.
    pub mean_scaled_error: f64,
    /// Mean and variance of `n^{1/6} (n^{p/3} J_n - m_p) / σ_p`.
    pub standardized_mean: f64,
    pub standardized_variance: f64,
    /// Jarque–Bera p-value of the standardized values.
    pub normality_p_value: f64,
    pub standardized: Vec<f64>,
}

/// Compares the simulated `L_p` error with its Gaussian limit.
pub fn clt_check(
    scenario: &Scenario,
    lc: &LpErrorConfig,
    consts: &LimitConstants,
    phi_source: PhiSource,
    exec: Exec,
) -> Result<CltReport> {
    if lc.reps < 2 {
        return Err(Error::invalid("clt_check needs at least 2 replications"));
    }
    if consts.p != lc.p {
        return Err(Error::invalid(format!("constants are for p={}, not p={}", consts.p, lc.p)));
    }
    let b = scenario.baseline;
    let p = lc.p;
    let (m_p, sigma_p2) = match phi_source {
        PhiSource::Exact => asymptotic_moments(
            p,
            consts,
            |t| b.hazard(t),
            |t| b.hazard_derivative(t),
            |t| exact_phi(scenario, t).unwrap_or(f64::NAN),
            scenario.window,
        )?,
        PhiSource::Empirical { n: big } => {
            let big_sample = scenario.with_n(big).sample_with(par::derive_seed(lc.seed, u64::MAX), exec)?;
            let rf = RiskFunction::new(&big_sample, &scenario.beta);
            asymptotic_moments(p, consts, |t| b.hazard(t), |t| b.hazard_derivative(t), |t| rf.eval(t), scenario.window)?
        }
    };
    let scaled = scaled_lp_errors(scenario, lc, exec)?;
    let sigma = sigma_p2.sqrt();
    let root6 = (lc.n as f64).powf(1.0 / 6.0);
    let standardized: Vec<f64> = scaled.iter().map(|j| root6 * (j - m_p) / sigma).collect();
    let (mean, var) = mean_var(&standardized);
    Ok(CltReport {
        config: lc.clone(),
        m_p,
        sigma_p2,
        mean_scaled_error: mean_var(&scaled).0,
        standardized_mean: mean,
        standardized_variance: var,
        normality_p_value: jarque_bera_p(&standardized),
        standardized,
    })
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Jarque–Bera test; the statistic is asymptotically χ²₂, whose survival
/// function is `exp(-x/2)`.
pub fn jarque_bera_p(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0).powi(2));
    (-0.5 * jb).exp()
}
