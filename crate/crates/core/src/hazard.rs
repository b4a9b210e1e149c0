use crate::scenario::Baseline;
use crate::weibull::WeibullTheta;

/// A smooth monotone hazard with closed-form antiderivative and level sets.
pub trait HazardModel {
    fn hazard(&self, t: f64) -> f64;

    fn cum_hazard(&self, t: f64) -> f64;

    /// Some `t` with `hazard(t) = s`, if the level is attained on `(0, ∞)`
    /// at a unique point.
    fn level_crossing(&self, s: f64) -> Option<f64>;
}

impl HazardModel for WeibullTheta {
    fn hazard(&self, t: f64) -> f64 {
        WeibullTheta::hazard(self, t)
    }

    fn cum_hazard(&self, t: f64) -> f64 {
        WeibullTheta::cum_hazard(self, t)
    }

    fn level_crossing(&self, s: f64) -> Option<f64> {
        self.hazard_inverse(s)
    }
}

impl HazardModel for Baseline {
    fn hazard(&self, t: f64) -> f64 {
        Baseline::hazard(self, t)
    }

    fn cum_hazard(&self, t: f64) -> f64 {
        Baseline::cum_hazard(self, t)
    }

    fn level_crossing(&self, s: f64) -> Option<f64> {
        match *self {
            Baseline::Weibull { mu, nu } => {
                if nu == 1.0 {
                    None
                } else {
                    Some((s / (nu * mu.powf(nu))).powf(1.0 / (nu - 1.0)))
                }
            }
            Baseline::AltA { c } => (s > 0.0).then(|| 1.0 / s - c),
            Baseline::AltB { c } => (s > c).then(|| 0.25 / ((s - c) * (s - c))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossings_hit_the_level() {
        let models = [
            Baseline::Weibull { mu: 1.0, nu: 0.5 },
            Baseline::AltA { c: 1.0 },
            Baseline::AltB { c: 3.0 },
        ];
        for b in models {
            for &t in &[0.2, 1.0, 4.0] {
                let s = b.hazard(t);
                let x = b.level_crossing(s).unwrap();
                assert!((x - t).abs() < 1e-10 * t.max(1.0), "{b}: {x} vs {t}");
            }
        }
        assert_eq!(Baseline::AltB { c: 3.0 }.level_crossing(2.0), None);
    }
}
