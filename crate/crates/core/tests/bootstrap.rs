use cox_grenander::bootstrap::{bootstrap_test, critical_value, resample};
use cox_grenander::nonparam::{kaplan_meier, CurveRole};
use cox_grenander::study::lookup;
use cox_grenander::*;

fn null_data(n: usize, seed: u64) -> (Dataset, TestConfig) {
    let reg = lookup(&Baseline::Weibull { mu: 1.0, nu: 0.5 }).unwrap();
    let mut cfg = TestConfig::new(reg.window());
    cfg.b = 39;
    (reg.scenario(n).sample(seed).unwrap(), cfg)
}

#[test]
fn reports_do_not_depend_on_execution() {
    let (data, mut cfg) = null_data(300, 1);
    for split in [1.0, 0.5] {
        cfg.split_ratio = split;
        let a = bootstrap_test(&data, &cfg, &Stat::ALL, 9, Exec::Sequential).unwrap();
        let b = bootstrap_test(&data, &cfg, &Stat::ALL, 9, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
    }
}

#[test]
fn report_fields_are_consistent() {
    let (data, cfg) = null_data(300, 2);
    let reports = bootstrap_test(&data, &cfg, &[Stat::T, Stat::LR], 4, Exec::default()).unwrap();
    for r in &reports {
        assert_eq!(r.boot_values.len() + r.failed_seeds.len(), cfg.b);
        assert_eq!(r.critical_value, critical_value(&r.boot_values, cfg.alpha, r.stat == Stat::LR));
        assert!(r.boot_values.iter().all(|v| v.is_finite()));
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["stat"], r.stat.to_string());
    }
    assert!(reports[0].statistic > 0.0);
    // the per-stat runs reuse the same bootstrap samples
    let t_only = bootstrap_test(&data, &cfg, &[Stat::T], 4, Exec::default()).unwrap();
    assert_eq!(t_only[0].boot_values, reports[0].boot_values);
}

#[test]
fn too_few_replicates_is_rejected() {
    let (data, mut cfg) = null_data(100, 3);
    cfg.b = 10;
    let err = bootstrap_test(&data, &cfg, &[Stat::T], 1, Exec::default()).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn resampled_event_times_follow_the_fitted_model() {
    // no censoring: every C* is +∞ and the observed times are the X*
    let obs: Vec<Observation> = (0..20_000).map(|i| Observation::new(1.0 + i as f64, true, vec![(i % 7) as f64 / 7.0])).collect();
    let data = Dataset::new(obs).unwrap();
    let theta = WeibullTheta::new(2.0, 0.6, vec![0.8]).unwrap();
    let g = kaplan_meier(&data, CurveRole::Censoring);
    let boot = resample(&data, &theta, &g, 5).unwrap();
    assert_eq!(boot.events(), boot.len());
    // probability integral transform should be uniform
    let mut u: Vec<f64> =
        boot.observations().iter().map(|o| theta.conditional_cdf(o.time, &o.covariates)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let ks = u
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max);
    assert!(ks < 0.015, "KS {ks}");
}

#[test]
fn resampled_censoring_follows_kaplan_meier() {
    let (data, _) = null_data(2000, 8);
    let g = kaplan_meier(&data, CurveRole::Censoring);
    // a huge μ makes X* ≈ 0 impossible to censor; use a tiny one so X* = ∞-ish
    let theta = WeibullTheta::new(1e-9, 1.0, vec![0.0]).unwrap();
    let boot = resample(&data, &theta, &g, 3).unwrap();
    for t in [0.5, 1.0, 2.0, 3.0] {
        let frac = boot.observations().iter().filter(|o| !o.status && o.time <= t).count() as f64 / boot.len() as f64;
        assert!((frac - g.cdf(t)).abs() < 0.04, "t={t}: {frac} vs {}", g.cdf(t));
    }
}
