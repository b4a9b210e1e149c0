use cox_grenander::nonparam::inverse_process;
use cox_grenander::*;
use proptest::prelude::*;

/// Strictly increasing jump times with nonnegative increments.
fn step_function() -> impl Strategy<Value = StepCumHazard> {
    prop::collection::vec((0.01f64..1.0, 0.0f64..2.0), 1..50).prop_map(|incs| {
        let mut t = 0.0;
        let mut v = 0.0;
        let (times, values) = incs
            .into_iter()
            .map(|(dt, dv)| {
                t += dt;
                v += dv;
                (t, v)
            })
            .unzip();
        StepCumHazard::new(times, values).unwrap()
    })
}

fn window_for(lam: &StepCumHazard, lo: f64, hi: f64) -> Window {
    let end = *lam.jump_times().last().unwrap() + 0.5;
    let (a, b) = (lo.min(hi) * end, lo.max(hi) * end);
    Window::new(a, b.max(a + 1e-3)).unwrap()
}

proptest! {
    #[test]
    fn switching_relation(lam in step_function(), lo in 0.0f64..1.0, hi in 0.0f64..1.0, a in 0.0f64..20.0) {
        let w = window_for(&lam, lo, hi);
        let est = grenander(&lam, w).unwrap();
        let u = inverse_process(&lam, a, w);
        for k in 1..=64 {
            let t = w.eps + w.len() * k as f64 / 64.0;
            prop_assert_eq!(est.eval(t) >= a, u >= t, "t={} a={} U={}", t, a, u);
        }
    }

    #[test]
    fn majorant_is_concave_and_dominates(lam in step_function(), lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
        let w = window_for(&lam, lo, hi);
        let est = grenander(&lam, w).unwrap();
        prop_assert!(est.slopes().windows(2).all(|s| s[1] < s[0]));
        prop_assert!(est.majorant(w.eps) >= lam.eval(w.eps) - 1e-12);
        for &t in lam.jump_times().iter().filter(|&&t| w.contains(t)) {
            prop_assert!(est.majorant(t) >= lam.eval(t) - 1e-9);
        }
        // the majorant touches Λ at every knot
        for (&x, &y) in est.knots().iter().zip(est.knot_values()) {
            prop_assert!((lam.eval(x) - y).abs() < 1e-12);
        }
        prop_assert!((est.integral(w.eps, w.m) - (lam.eval(w.m) - lam.eval(w.eps))).abs() < 1e-9);
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec((0.0f64..1e6, any::<bool>(), -1e3f64..1e3, -1.0f64..1.0), 2..40)) {
        let data = Dataset::new(rows.iter().map(|&(t, s, a, b)| Observation::new(t, s, vec![a, b])).collect()).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(&buf[..]).unwrap();
        prop_assert_eq!(back.observations(), data.observations());
    }

    #[test]
    fn split_is_a_partition(n in 4usize..200, ratio in 0.05f64..0.95, seed in any::<u64>()) {
        let data = Dataset::new((0..n).map(|i| Observation::new(i as f64, true, vec![0.0])).collect()).unwrap();
        match data.split(ratio, seed) {
            Ok((a, b)) => {
                prop_assert_eq!(a.len(), (ratio * n as f64 + 1e-9).floor() as usize);
                let mut all: Vec<f64> = a.observations().iter().chain(b.observations()).map(|o| o.time).collect();
                all.sort_by(f64::total_cmp);
                prop_assert_eq!(all, (0..n).map(|i| i as f64).collect::<Vec<_>>());
                prop_assert!(a.observations().windows(2).all(|w| w[0].time < w[1].time));
                let again = data.split(ratio, seed).unwrap();
                prop_assert_eq!(again.0.observations(), a.observations());
            }
            Err(e) => prop_assert!(e.is_validation()),
        }
    }

    #[test]
    fn samples_are_prefix_stable(seed in any::<u64>(), n in 2usize..100) {
        let sc = Scenario {
            baseline: Baseline::AltB { c: 1.0 },
            beta: vec![0.5, -1.0],
            censor_tau: 1.3,
            window: Window::new(0.1, 1.1).unwrap(),
            n: n + 20,
        };
        let long = sc.sample_with(seed, Exec::Sequential).unwrap();
        let short = sc.with_n(n).sample_with(seed, Exec::Parallel).unwrap();
        prop_assert_eq!(short.observations(), &long.observations()[..n]);
    }
}
