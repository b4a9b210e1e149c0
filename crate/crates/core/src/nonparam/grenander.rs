use std::io::Write;

use super::{StepCumHazard, Window};
use crate::error::{Error, Result};

/// Left-continuous nonincreasing step function on `[eps, M]`: the left-hand
/// slope of the least concave majorant of a cumulative hazard.
///
/// `slopes[k]` is the value on `(knots[k], knots[k+1]]`; the first slope is
/// also returned at `eps` itself. `knot_values` holds the majorant at each
/// knot, where it touches the input points.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneHazard {
    knots: Vec<f64>,
    knot_values: Vec<f64>,
    slopes: Vec<f64>,
    window: Window,
}

impl MonotoneHazard {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.knot_values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Piece index holding `t`, with `t` clamped into the window.
    fn piece(&self, t: f64) -> usize {
        let k = self.knots[1..].partition_point(|&x| x < t);
        k.min(self.slopes.len() - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.slopes[self.piece(t)]
    }

    /// The majorant itself, linearly interpolated between knots and
    /// extended with the end slopes outside the window.
    pub fn majorant(&self, t: f64) -> f64 {
        let k = self.piece(t);
        self.knot_values[k] + self.slopes[k] * (t - self.knots[k])
    }

    /// `∫_a^b λ̂(u) du` for `a <= b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.majorant(b) - self.majorant(a)
    }

    /// `(start, end, slope)` for every constant piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.knots.windows(2).zip(&self.slopes).map(|(w, &s)| (w[0], w[1], s))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["start", "end", "slope"])?;
        for (a, b, s) in self.pieces() {
            w.write_record([format!("{a:?}"), format!("{b:?}"), format!("{s:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least concave majorant of points with strictly increasing abscissae.
/// Returns the indices of the hull vertices; collinear points are dropped.
pub fn least_concave_majorant(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // b on or below the chord a -> k
            let cross = (xs[b] - xs[a]) * (ys[k] - ys[a]) - (ys[b] - ys[a]) * (xs[k] - xs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Points `(eps, Λ(eps))`, `(t, Λ(t))` for jumps `t ∈ (eps, M)`, `(M, Λ(M))`.
fn window_points(lam: &StepCumHazard, window: Window) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![window.eps];
    let mut ys = vec![lam.eval(window.eps)];
    for (&t, &v) in lam.jump_times().iter().zip(lam.values()) {
        if t > window.eps && t < window.m {
            xs.push(t);
            ys.push(v);
        }
    }
    xs.push(window.m);
    ys.push(lam.eval(window.m));
    (xs, ys)
}

/// Grenander-type estimator: left-hand slope of the least concave majorant
/// of `lam` restricted to `window`.
pub fn grenander(lam: &StepCumHazard, window: Window) -> Result<MonotoneHazard> {
    window.validate()?;
    let (xs, ys) = window_points(lam, window);
    if xs.len() < 2 || !(xs[xs.len() - 1] > xs[0]) {
        return Err(Error::DegenerateWindow(format!(
            "fewer than 2 distinct points in [{}, {}]",
            window.eps, window.m
        )));
    }
    let hull = least_concave_majorant(&xs, &ys);
    let knots: Vec<f64> = hull.iter().map(|&k| xs[k]).collect();
    let knot_values: Vec<f64> = hull.iter().map(|&k| ys[k]).collect();
    let slopes: Vec<f64> = hull
        .windows(2)
        .map(|w| (ys[w[1]] - ys[w[0]]) / (xs[w[1]] - xs[w[0]]))
        .collect();
    debug_assert!(slopes.windows(2).all(|w| w[1] <= w[0]));
    Ok(MonotoneHazard { knots, knot_values, slopes, window })
}

/// Largest maximiser of `t ↦ Λ(t) - a t` over `window`, searched over the
/// window ends and the jump points inside it.
///
/// Values equal up to rounding count as ties, so at `a` equal to a slope of
/// the Grenander estimator the right end of that piece is returned.
pub fn inverse_process(lam: &StepCumHazard, a: f64, window: Window) -> f64 {
    let (xs, ys) = window_points(lam, window);
    let mut best = f64::NEG_INFINITY;
    let mut arg = window.eps;
    for (&x, &y) in xs.iter().zip(&ys) {
        let v = y - a * x;
        let slack = 8.0 * f64::EPSILON * (y.abs() + (a * x).abs());
        if v >= best - slack {
            best = best.max(v);
            arg = x;
        }
    }
    arg
}
