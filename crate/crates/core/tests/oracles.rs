//! Estimators and statistics against independent brute-force computations.

mod common;

use common::*;
use cox_grenander::cox::{self, log_partial_likelihood, partial_likelihood_derivatives};
use cox_grenander::gof::{lp_distance, Fitted, Stat};
use cox_grenander::hazard::HazardModel;
use cox_grenander::nonparam::{breslow_cdf, kaplan_meier, CurveRole, RiskFunction};
use cox_grenander::weibull::{weibull_derivatives, weibull_loglik};
use cox_grenander::*;

#[test]
fn breslow_matches_direct_sum() {
    for seed in 0..30 {
        let data = random_dataset(seed, 40, 2, seed % 2 == 0);
        let beta = [0.3, -0.8];
        let est = breslow(&data, &beta).unwrap();
        let oracle = breslow_oracle(&data, &beta);
        assert_eq!(est.jump_times().len(), oracle.len());
        for ((t, v), (to, vo)) in est.jump_times().iter().zip(est.values()).zip(&oracle) {
            assert_eq!(t, to);
            assert!((v - vo).abs() <= 1e-12 * vo.max(1.0));
        }
    }
}

#[test]
fn partial_likelihood_matches_product_formula() {
    for seed in 0..20 {
        let data = random_dataset(100 + seed, 35, 2, true);
        let beta = [0.7, -0.2];
        let ours = log_partial_likelihood(&data, &beta);
        let oracle = partial_loglik_oracle(&data, &beta);
        assert!((ours - oracle).abs() < 1e-10 * oracle.abs().max(1.0), "{ours} vs {oracle}");
    }
}

#[test]
fn cox_fit_matches_grid_search() {
    let sc = Scenario {
        baseline: Baseline::Weibull { mu: 1.0, nu: 0.5 },
        beta: vec![0.5],
        censor_tau: 3.5,
        window: Window::new(0.5, 2.5).unwrap(),
        n: 400,
    };
    let data = sc.sample(3).unwrap();
    let fit = cox::fit_default(&data).unwrap();
    // golden-section search on the concave log partial likelihood
    let f = |b: f64| -log_partial_likelihood(&data, &[b]);
    let (mut lo, mut hi) = (-5.0f64, 5.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-9 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    assert!((fit.beta_hat[0] - 0.5 * (lo + hi)).abs() < 1e-6);
    assert!(fit.converged);
}

#[test]
fn hessians_match_finite_differences() {
    let data = random_dataset(7, 60, 2, false);
    let beta = [0.4, -0.3];
    let h = 1e-5;
    let an = partial_likelihood_derivatives(&data, &beta);
    for j in 0..2 {
        let mut up = beta;
        let mut dn = beta;
        up[j] += h;
        dn[j] -= h;
        let gu = partial_likelihood_derivatives(&data, &up).gradient;
        let gd = partial_likelihood_derivatives(&data, &dn).gradient;
        for i in 0..2 {
            let fd = (gu[i] - gd[i]) / (2.0 * h);
            assert!((an.hessian[(i, j)] - fd).abs() < 1e-5 * fd.abs().max(1.0));
        }
    }

    let theta = WeibullTheta::new(0.8, 0.7, vec![0.2, 0.1]).unwrap();
    let an = weibull_derivatives(&data, &theta).unwrap();
    let at = |x: [f64; 4]| WeibullTheta::new(x[0].exp(), x[1].exp(), vec![x[2], x[3]]).unwrap();
    let x0 = [0.8f64.ln(), 0.7f64.ln(), 0.2, 0.1];
    for j in 0..4 {
        let mut up = x0;
        let mut dn = x0;
        up[j] += h;
        dn[j] -= h;
        let gu = weibull_derivatives(&data, &at(up)).unwrap().gradient;
        let gd = weibull_derivatives(&data, &at(dn)).unwrap().gradient;
        for i in 0..4 {
            let fd = (gu[i] - gd[i]) / (2.0 * h);
            assert!((an.hessian[(i, j)] - fd).abs() < 1e-5 * fd.abs().max(1.0), "({i},{j})");
        }
    }
}

#[test]
fn weibull_fit_is_a_local_maximum() {
    let sc = Scenario {
        baseline: Baseline::Weibull { mu: 5.0, nu: 0.5 },
        beta: vec![0.5],
        censor_tau: 0.7,
        window: Window::new(0.1, 0.5).unwrap(),
        n: 800,
    };
    let data = sc.sample(9).unwrap();
    let th = fit_weibull(&data, Default::default()).unwrap();
    let best = weibull_loglik(&data, &th).unwrap();
    for (dm, dn, db) in [(1.001, 1.0, 0.0), (0.999, 1.0, 0.0), (1.0, 1.001, 0.0), (1.0, 0.999, 0.0), (1.0, 1.0, 1e-3)] {
        let other = WeibullTheta::new(th.mu * dm, th.nu * dn, vec![th.beta[0] + db]).unwrap();
        assert!(weibull_loglik(&data, &other).unwrap() < best);
    }
    assert!((th.nu - 0.5).abs() < 0.1 && (th.mu - 5.0).abs() < 2.0, "{th:?}");
}

fn km_oracle(data: &Dataset, t: f64, censoring: bool) -> f64 {
    let mut times: Vec<f64> = data.observations().iter().map(|o| o.time).filter(|&s| s <= t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .iter()
        .map(|&s| {
            let at_risk = data.observations().iter().filter(|o| o.time >= s).count() as f64;
            let d = data.observations().iter().filter(|o| o.time == s && o.status != censoring).count() as f64;
            1.0 - d / at_risk
        })
        .product()
}

#[test]
fn kaplan_meier_matches_product_limit() {
    for seed in 0..10 {
        let data = random_dataset(200 + seed, 50, 1, true);
        for (role, cens) in [(CurveRole::Event, false), (CurveRole::Censoring, true)] {
            let km = kaplan_meier(&data, role);
            for k in 0..60 {
                let t = k as f64 * 0.25 + 0.1;
                assert!((km.surv(t) - km_oracle(&data, t, cens)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn censoring_quantile_has_mass_at_infinity() {
    // last observation is an event, so the censoring curve stays above 0
    let data = Dataset::new(vec![
        Observation::new(1.0, false, vec![0.0]),
        Observation::new(2.0, true, vec![0.0]),
        Observation::new(3.0, false, vec![0.0]),
        Observation::new(4.0, true, vec![0.0]),
    ])
    .unwrap();
    let g = kaplan_meier(&data, CurveRole::Censoring);
    assert_eq!(g.quantile(0.2), 1.0);
    assert!((g.cdf(3.0) - (1.0 - 0.75 * 0.5)).abs() < 1e-15);
    assert_eq!(g.quantile(0.9), f64::INFINITY);
}

#[test]
fn ks_distance_matches_dense_grid() {
    let reg = cox_grenander::study::lookup(&Baseline::Weibull { mu: 1.0, nu: 0.5 }).unwrap();
    for seed in 0..5 {
        let data = reg.scenario(300).sample(seed).unwrap();
        let cfg = TestConfig::new(reg.window());
        let f = Fitted::new(&data, &cfg, 0).unwrap();
        let ks = f.statistic(Stat::S, &cfg).unwrap();
        let fn_curve = breslow_cdf(&f.breslow);
        let tmax = data.max_time();
        let mut oracle: f64 = 0.0;
        let m = 200_000;
        for k in 0..=m {
            let t = tmax * k as f64 / m as f64;
            oracle = oracle.max((f.theta.baseline_cdf(t) - fn_curve.cdf(t)).abs());
        }
        assert!(ks >= oracle - 1e-12 && ks - oracle < 1e-3, "{ks} vs {oracle}");
    }
}

#[test]
fn lp_distance_matches_adaptive_simpson() {
    let reg = cox_grenander::study::lookup(&Baseline::AltA { c: 1.0 }).unwrap();
    let data = reg.scenario(500).sample(4).unwrap();
    let beta = cox::fit_default(&data).unwrap().beta_hat;
    let est = grenander(&breslow(&data, &beta).unwrap(), reg.window()).unwrap();
    let theta = WeibullTheta::new(0.7, 0.6, beta).unwrap();
    let models: [&dyn HazardModel; 2] = [&theta, &reg.baseline];
    for model in models {
        for p in [1.0, 1.5, 2.0] {
            let ours = lp_distance(&est, model, p);
            // integrate piece by piece so Simpson never straddles a jump
            let oracle: f64 = est
                .pieces()
                .map(|(a, b, s)| simpson(&|t| (s - model.hazard(t)).abs().powf(p), a, b, 1e-12))
                .sum();
            assert!((ours - oracle).abs() < 1e-7 * oracle.max(1e-3), "p={p}: {ours} vs {oracle}");
        }
    }
}

#[test]
fn risk_function_matches_definition() {
    let data = random_dataset(5, 70, 2, true);
    let beta = [0.5, 0.25];
    let rf = RiskFunction::new(&data, &beta);
    for k in 0..50 {
        let x = k as f64 * 0.2;
        let direct: f64 = data
            .observations()
            .iter()
            .filter(|o| o.time >= x)
            .map(|o| o.linear_predictor(&beta).exp())
            .sum::<f64>()
            / data.len() as f64;
        assert!((rf.eval(x) - direct).abs() < 1e-12);
        assert!((cox_grenander::nonparam::phi_n(&data, &beta, x) - direct).abs() < 1e-12);
    }
}
