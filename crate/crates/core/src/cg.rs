//! Polak-Ribiere+ nonlinear conjugate gradient with a strong Wolfe line search.
//!
//! Minimizes; callers maximizing pass the negated objective. The line search
//! follows the bracketing/zoom scheme of Nocedal & Wright (Algorithms 3.5 and
//! 3.6) with safeguarded cubic interpolation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    pub max_iterations: usize,
    /// Stop once `max |g_i|` drops below this.
    pub gradient_tol: f64,
    /// Sufficient decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search_evals: usize,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            gradient_tol: 1e-8,
            c1: 1e-4,
            c2: 0.1,
            max_line_search_evals: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    /// No step along steepest descent satisfies the Wolfe conditions, which in
    /// practice means the gradient is at the rounding floor of the objective.
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Objective after every accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

impl CgOutcome {
    pub fn gradient_norm(&self) -> f64 {
        max_norm(&self.gradient)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

struct Trial {
    alpha: f64,
    value: f64,
    slope: f64,
    gradient: Vec<f64>,
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`, if it lies
/// inside the safeguarded interior of `[a, b]`.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (hi - lo);
    (t.is_finite() && t > lo + margin && t < hi - margin).then_some(t)
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    value0: f64,
    slope0: f64,
    settings: CgSettings,
    evals: usize,
    /// Best point seen that satisfies sufficient decrease.
    fallback: Option<Trial>,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> LineSearch<'_, F> {
    fn eval(&mut self, alpha: f64) -> Trial {
        self.evals += 1;
        let (value, gradient) = (self.f)(&axpy(self.x, alpha, self.d));
        let slope = dot(&gradient, self.d);
        Trial { alpha, value, slope, gradient }
    }

    fn armijo(&self, t: &Trial) -> bool {
        t.value.is_finite() && t.value <= self.value0 + self.settings.c1 * t.alpha * self.slope0
    }

    fn curvature(&self, t: &Trial) -> bool {
        t.slope.abs() <= -self.settings.c2 * self.slope0
    }

    fn remember(&mut self, t: &Trial) {
        if self.armijo(t) && t.value < self.value0 && self.fallback.as_ref().is_none_or(|b| t.value < b.value) {
            self.fallback = Some(Trial {
                alpha: t.alpha,
                value: t.value,
                slope: t.slope,
                gradient: t.gradient.clone(),
            });
        }
    }

    fn run(mut self, alpha_init: f64) -> (Option<Trial>, usize) {
        let mut prev = Trial {
            alpha: 0.0,
            value: self.value0,
            slope: self.slope0,
            gradient: Vec::new(),
        };
        let mut alpha = alpha_init;
        let mut first = true;
        while self.evals < self.settings.max_line_search_evals {
            let t = self.eval(alpha);
            self.remember(&t);
            if !self.armijo(&t) || (!first && t.value >= prev.value) {
                return self.zoom(prev, t);
            }
            if self.curvature(&t) {
                let evals = self.evals;
                return (Some(t), evals);
            }
            if t.slope >= 0.0 {
                return self.zoom(t, prev);
            }
            first = false;
            alpha = 2.0 * t.alpha;
            prev = t;
        }
        let evals = self.evals;
        (self.fallback, evals)
    }

    fn zoom(mut self, mut lo: Trial, mut hi: Trial) -> (Option<Trial>, usize) {
        while self.evals < self.settings.max_line_search_evals {
            if (hi.alpha - lo.alpha).abs() <= 1e-16 * lo.alpha.abs().max(1.0) {
                break;
            }
            let alpha = cubic_min(lo.alpha, lo.value, lo.slope, hi.alpha, hi.value, hi.slope)
                .unwrap_or(0.5 * (lo.alpha + hi.alpha));
            let t = self.eval(alpha);
            self.remember(&t);
            if !self.armijo(&t) || t.value >= lo.value {
                hi = t;
            } else {
                if self.curvature(&t) {
                    let evals = self.evals;
                    return (Some(t), evals);
                }
                if t.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
        }
        let evals = self.evals;
        (self.fallback, evals)
    }
}

/// Minimizes `f`, which returns the value and gradient at a point.
pub fn minimize<F>(mut f: F, x0: &[f64], settings: CgSettings) -> CgOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0.to_vec();
    let (mut value, mut grad) = f(&x);
    let mut evaluations = 1;
    let mut history = vec![value];
    let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut prev_value: Option<f64> = None;
    let mut iterations = 0;

    let termination = loop {
        if max_norm(&grad) < settings.gradient_tol {
            break Termination::GradientTolerance;
        }
        if iterations >= settings.max_iterations {
            break Termination::MaxIterations;
        }
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
        }
        let alpha_init = match prev_value {
            Some(pv) if pv > value => (1.01 * 2.0 * (value - pv) / slope).min(1.0),
            _ => 1.0 / dot(&grad, &grad).sqrt().max(1e-300),
        }
        .max(1e-12);

        let (accepted, evals) = LineSearch {
            f: &mut f,
            x: &x,
            d: &dir,
            value0: value,
            slope0: slope,
            settings,
            evals: 0,
            fallback: None,
        }
        .run(alpha_init);
        evaluations += evals;

        let Some(step) = accepted else {
            let steepest = dir.iter().zip(&grad).all(|(d, g)| *d == -g);
            if steepest {
                break Termination::LineSearchFailed;
            }
            // retry this iteration along steepest descent
            dir = grad.iter().map(|g| -g).collect();
            prev_value = None;
            continue;
        };

        x = axpy(&x, step.alpha, &dir);
        prev_value = Some(value);
        value = step.value;
        history.push(value);
        let new_grad = step.gradient;
        let beta = {
            let denom = dot(&grad, &grad);
            let num: f64 = new_grad.iter().zip(&grad).map(|(gn, go)| gn * (gn - go)).sum();
            (num / denom).max(0.0)
        };
        dir = new_grad.iter().zip(&dir).map(|(g, d)| -g + beta * d).collect();
        grad = new_grad;
        iterations += 1;
    };

    CgOutcome {
        x,
        value,
        gradient: grad,
        iterations,
        evaluations,
        termination,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (v, g)
    }

    #[test]
    fn minimizes_quadratic() {
        let f = |x: &[f64]| {
            let v = 0.5 * (x[0] * x[0] + 10.0 * x[1] * x[1]) - x[0];
            (v, vec![x[0] - 1.0, 10.0 * x[1]])
        };
        let out = minimize(f, &[5.0, -3.0], CgSettings::default());
        assert_eq!(out.termination, Termination::GradientTolerance);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && out.x[1].abs() < 1e-8);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let out = minimize(rosenbrock, &[-1.2, 1.0], CgSettings::default());
        assert!((out.x[0] - 1.0).abs() < 1e-6, "{out:?}");
        assert!((out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn history_never_increases() {
        let out = minimize(rosenbrock, &[-1.2, 1.0], CgSettings::default());
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(out.history.len(), out.iterations + 1);
    }

    #[test]
    fn respects_iteration_cap() {
        let settings = CgSettings { max_iterations: 3, ..CgSettings::default() };
        let out = minimize(rosenbrock, &[-1.2, 1.0], settings);
        assert_eq!(out.termination, Termination::MaxIterations);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let out = minimize(|x: &[f64]| (x[0].cos(), vec![-x[0].sin()]), &[0.0], CgSettings::default());
        assert_eq!(out.iterations, 0);
        assert_eq!(out.termination, Termination::GradientTolerance);
    }

    #[test]
    fn cubic_interpolation_finds_parabola_vertex() {
        // f = (t - 0.3)^2 on [0, 1]
        let t = cubic_min(0.0, 0.09, -0.6, 1.0, 0.49, 1.4).unwrap();
        assert!((t - 0.3).abs() < 1e-12);
    }
}
