#![allow(dead_code)]

use cox_grenander::par::stream;
use cox_grenander::{Dataset, Observation};
use rand::Rng;

/// Random dataset with ties in time and `d` covariates.
pub fn random_dataset(seed: u64, n: usize, d: usize, ties: bool) -> Dataset {
    let mut rng = stream(seed, 0);
    let obs = (0..n)
        .map(|_| {
            let t: f64 = if ties {
                f64::from(rng.random_range(1..=n as u32 / 2 + 1)) / 4.0
            } else {
                rng.random::<f64>() * 5.0 + 1e-3
            };
            let z = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            Observation::new(t, rng.random::<f64>() < 0.7, z)
        })
        .collect();
    Dataset::new(obs).unwrap()
}

/// Breslow by the defining sum: jump `d_t / Σ_{T_j ≥ t} exp(β'Z_j)`.
pub fn breslow_oracle(data: &Dataset, beta: &[f64]) -> Vec<(f64, f64)> {
    let mut times: Vec<f64> = data.observations().iter().filter(|o| o.status).map(|o| o.time).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut cum = 0.0;
    times
        .into_iter()
        .map(|t| {
            let d = data.observations().iter().filter(|o| o.status && o.time == t).count() as f64;
            let risk: f64 = data
                .observations()
                .iter()
                .filter(|o| o.time >= t)
                .map(|o| o.linear_predictor(beta).exp())
                .sum();
            cum += d / risk;
            (t, cum)
        })
        .collect()
}

/// Breslow-ties log partial likelihood as a product over events.
pub fn partial_loglik_oracle(data: &Dataset, beta: &[f64]) -> f64 {
    let obs = data.observations();
    obs.iter()
        .filter(|o| o.status)
        .map(|o| {
            let risk: f64 = obs.iter().filter(|j| j.time >= o.time).map(|j| j.linear_predictor(beta).exp()).sum();
            o.linear_predictor(beta) - risk.ln()
        })
        .sum()
}

/// Adaptive Simpson on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}
