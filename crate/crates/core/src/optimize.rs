//! Unconstrained quasi-Newton minimization (BFGS) with a strong-Wolfe line
//! search using safeguarded cubic interpolation.
//!
//! Constraints are handled by the caller through smooth reparameterization.
//! The objective returns `f(x)` and writes `∇f(x)`; a non-finite value marks
//! an infeasible or overflowing trial point and makes the line search back off.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgsConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Largest move of any coordinate in a single line search.
    pub max_step: Option<f64>,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        BfgsConfig { max_iterations: 500, gradient_tolerance: 1e-8, max_step: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
    NonFiniteStart,
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub gradient: Vec<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
}

impl Minimum {
    pub fn converged(&self) -> bool {
        self.termination == Termination::GradientTolerance
    }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

struct Trial {
    alpha: f64,
    f: f64,
    dphi: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    phi0: f64,
    dphi0: f64,
    alpha_max: f64,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> LineSearch<'_, F> {
    fn eval(&mut self, alpha: f64) -> Trial {
        let x: Vec<f64> = self.x.iter().zip(self.d).map(|(xi, di)| xi + alpha * di).collect();
        let mut g = vec![0.0; x.len()];
        let f = (self.f)(&x, &mut g);
        let dphi = dot(&g, self.d);
        Trial { alpha, f, dphi, x, g }
    }

    fn sufficient(&self, t: &Trial) -> bool {
        t.f <= self.phi0 + C1 * t.alpha * self.dphi0
    }

    fn curvature(&self, t: &Trial) -> bool {
        t.dphi.abs() <= -C2 * self.dphi0
    }

    // Hager–Zhang approximate Wolfe test: rescues the final iterations, where
    // function differences drown in rounding but the slope is still reliable.
    fn approx_wolfe(&self, t: &Trial) -> bool {
        t.f <= self.phi0 + 1e-12 * self.phi0.abs()
            && t.dphi >= C2 * self.dphi0
            && t.dphi <= (2.0 * C1 - 1.0) * self.dphi0
    }

    fn acceptable(&self, t: &Trial) -> bool {
        t.f.is_finite() && ((self.sufficient(t) && self.curvature(t)) || self.approx_wolfe(t))
    }

    fn search(&mut self, alpha0: f64) -> Option<Trial> {
        let mut prev = Trial { alpha: 0.0, f: self.phi0, dphi: self.dphi0, x: self.x.to_vec(), g: Vec::new() };
        let mut alpha = alpha0.min(self.alpha_max);
        for i in 0..40 {
            let t = self.eval(alpha);
            if !t.f.is_finite() || !t.dphi.is_finite() {
                alpha = prev.alpha + 0.2 * (alpha - prev.alpha);
                continue;
            }
            if self.acceptable(&t) {
                return Some(t);
            }
            if !self.sufficient(&t) || (i > 0 && t.f >= prev.f) {
                return self.zoom(prev, t);
            }
            if t.dphi >= 0.0 {
                return self.zoom(t, prev);
            }
            if t.alpha >= self.alpha_max {
                // cannot expand further; the trial already decreases f
                return Some(t);
            }
            alpha = (4.0 * t.alpha).min(self.alpha_max);
            prev = t;
        }
        None
    }

    fn zoom(&mut self, mut lo: Trial, mut hi: Trial) -> Option<Trial> {
        let mut best: Option<Trial> = None;
        for _ in 0..50 {
            let (a, b) = (lo.alpha, hi.alpha);
            let width = (b - a).abs();
            if width <= 1e-16 * a.abs().max(b.abs()) {
                break;
            }
            let alpha = if hi.f.is_finite() { cubic_min(&lo, &hi).unwrap_or(0.5 * (a + b)) } else { 0.5 * (a + b) };
            // keep the trial away from both ends of the bracket
            let (left, right) = if a < b { (a, b) } else { (b, a) };
            let alpha = alpha.clamp(left + 0.1 * width, right - 0.1 * width);
            let t = self.eval(alpha);
            if !t.f.is_finite() {
                hi = t;
                continue;
            }
            if self.acceptable(&t) {
                return Some(t);
            }
            if !self.sufficient(&t) || t.f >= lo.f {
                hi = t;
            } else {
                if t.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                if best.as_ref().is_none_or(|b| t.f < b.f) {
                    best = Some(Trial { alpha: t.alpha, f: t.f, dphi: t.dphi, x: t.x.clone(), g: t.g.clone() });
                }
                lo = t;
            }
        }
        // accept any strict decrease if the Wolfe conditions were unreachable
        best.filter(|b| b.f < self.phi0)
    }
}

/// Minimizer of the cubic interpolating two points with values and slopes.
fn cubic_min(p: &Trial, q: &Trial) -> Option<f64> {
    let (a, fa, da) = (p.alpha, p.f, p.dphi);
    let (b, fb, db) = (q.alpha, q.f, q.dphi);
    if !(fb.is_finite() && db.is_finite()) {
        return None;
    }
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b - a).signum() * libm::sqrt(disc);
    let denom = db - da + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b - (b - a) * (db + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

/// Minimizes `f` starting from `x0`.
pub fn minimize<F>(mut f: F, x0: &[f64], cfg: &BfgsConfig) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        let gradient_norm = norm(&g);
        return Minimum {
            x,
            f: fx,
            gradient: g,
            gradient_norm,
            iterations: 0,
            termination: Termination::NonFiniteStart,
        };
    }
    // inverse Hessian approximation, row-major
    let mut h = identity(n);
    let mut fresh = true;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        let gnorm = norm(&g);
        if gnorm < cfg.gradient_tolerance {
            return Minimum {
                x,
                f: fx,
                gradient: g,
                gradient_norm: gnorm,
                iterations,
                termination: Termination::GradientTolerance,
            };
        }
        iterations += 1;
        let mut d: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>()).collect();
        let mut dphi0 = dot(&d, &g);
        if !(dphi0 < 0.0) {
            h = identity(n);
            fresh = true;
            d = g.iter().map(|v| -v).collect();
            dphi0 = -gnorm * gnorm;
        }
        let alpha0 = if fresh { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let alpha_max = cfg.max_step.map_or(f64::INFINITY, |s| s / dmax);
        let trial = LineSearch { f: &mut f, x: &x, d: &d, phi0: fx, dphi0, alpha_max }.search(alpha0);
        let Some(t) = trial else {
            if fresh {
                return Minimum {
                    x,
                    f: fx,
                    gradient: g,
                    gradient_norm: gnorm,
                    iterations,
                    termination: Termination::LineSearchFailed,
                };
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        let s: Vec<f64> = t.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = t.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm(&s) * norm(&y) {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        x = t.x;
        g = t.g;
        fx = t.f;
    }
    let gradient_norm = norm(&g);
    let termination = if gradient_norm < cfg.gradient_tolerance {
        Termination::GradientTolerance
    } else {
        Termination::MaxIterations
    };
    Minimum { x, f: fx, gradient: g, gradient_norm, iterations, termination }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

// H ← (I − ρ s y') H (I − ρ y s') + ρ s s'
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
