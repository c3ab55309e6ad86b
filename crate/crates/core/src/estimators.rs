//! Gaussian QMLE, two-step non-Gaussian QMLE, the oracle estimator with a
//! known η, and the MLE.
//!
//! All of them maximize a mean log-likelihood of the form
//! `(1/T) Σ [−ln(σ v_t) + log f(x_t / (η σ v_t))]` whose gradient in
//! `θ = (σ, γ)` is `−(1/T) Σ k_t (1 + h(z_t))`. The optimizer works on an
//! unconstrained vector `u`: `σ = e^{u₀}`, `a_i = e^{u_i}` and
//! `b = B·softmax(z, 0)` with `B = 1 − 10⁻⁶`, so every iterate is feasible.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::asymptotics::{covariance_blocks, k_stats, CovarianceBlocks};
use crate::error::{Error, Result, Stage};
use crate::eta::{eta_empirical, EtaSolution};
use crate::likelihoods::{moment_functionals_empirical, Density, InnovationDistribution, QuasiLikelihood};
use crate::linalg::Matrix;
use crate::optimize::{minimize, BfgsConfig, Termination};
use crate::volatility::{validate_returns, GarchOrder, GarchParams, Recursion, MAX_B_SUM};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Tolerance on the gradient norm in the unconstrained coordinates.
    pub gradient_tolerance: f64,
    pub initial_params: Option<GarchParams>,
    /// Number of starting points tried before giving up.
    pub multistart: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iterations: 500, gradient_tolerance: 1e-8, initial_params: None, multistart: 3 }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0) || self.multistart == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParams("fit options need positive tolerance, iterations and starts".into()));
        }
        Ok(())
    }

    pub fn warm(&self, params: &GarchParams) -> FitOptions {
        FitOptions { initial_params: Some(params.clone()), ..self.clone() }
    }
}

/// Coefficients below this are reported as sitting on the boundary.
pub const BOUNDARY_THRESHOLD: f64 = 1e-8;

/// An intercept `σ²` below this fraction of `mean(x²)` is a fit on the
/// `σ → 0` ridge, where the objective flattens out and the gradient vanishes
/// without an interior optimum.
pub const INTERCEPT_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub params: GarchParams,
    /// Mean per-observation log-likelihood at `params`.
    pub loglik: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `x_t / (σ̂ v_t(γ̂))`
    #[cfg_attr(feature = "serde", serde(skip))]
    pub residuals: Vec<f64>,
    /// Some `a_i` or `b_j` is numerically zero; interior asymptotics do not apply.
    pub boundary: bool,
}

/// Which log-likelihood is maximized.
#[derive(Clone, Copy, Debug)]
pub enum Criterion<'a> {
    /// Gaussian quasi-likelihood.
    Gaussian,
    /// `log f(x/(η σ v))` with a fixed scale `η`.
    Scaled { f: &'a QuasiLikelihood, eta: f64 },
    /// True innovation density (MLE).
    Exact(&'a Density),
}

impl Criterion<'_> {
    fn parts(&self) -> (Density, f64) {
        match *self {
            Criterion::Gaussian => (*QuasiLikelihood::gaussian().density(), 1.0),
            Criterion::Scaled { f, eta } => (*f.density(), eta),
            Criterion::Exact(d) => (*d, 1.0),
        }
    }
}

struct Objective<'a> {
    returns: &'a [f64],
    rec: Recursion,
    density: Density,
    eta: f64,
    p: usize,
    q: usize,
}

impl<'a> Objective<'a> {
    fn new(returns: &'a [f64], order: GarchOrder, criterion: Criterion<'_>) -> Self {
        let (density, eta) = criterion.parts();
        Objective { returns, rec: Recursion::new(returns), density, eta, p: order.p, q: order.q }
    }

    /// Mean log-likelihood and its θ-gradient.
    fn value_grad(&mut self, sigma: f64, a: &[f64], b: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let want = grad.is_some();
        self.rec.run(a, b, want);
        let d = self.p + self.q;
        let n = self.returns.len();
        let mut ll = 0.0;
        let mut g = vec![0.0; 1 + d];
        let ln_sigma = libm::log(sigma);
        let scale = 1.0 / (self.eta * sigma);
        for t in 0..n {
            let v2 = self.rec.v2[t];
            let z = self.returns[t] * scale / libm::sqrt(v2);
            ll += -ln_sigma - 0.5 * libm::log(v2) + self.density.log_density(z);
            if want {
                let w = 1.0 + self.density.h(z);
                g[0] -= w / sigma;
                let c = w / (2.0 * v2);
                let row = &self.rec.dv2[t * d..(t + 1) * d];
                for k in 0..d {
                    g[1 + k] -= c * row[k];
                }
            }
        }
        let nf = n as f64;
        if let Some(out) = grad {
            for (o, gi) in out.iter_mut().zip(&g) {
                *o = gi / nf;
            }
        }
        ll / nf
    }
}

struct Transform {
    p: usize,
    q: usize,
}

impl Transform {
    fn to_theta(&self, u: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let sigma = libm::exp(u[0]);
        let a: Vec<f64> = u[1..1 + self.p].iter().map(|x| libm::exp(*x)).collect();
        let z = &u[1 + self.p..];
        // softmax with a fixed zero logit, shifted for overflow safety
        let zmax = z.iter().fold(0.0f64, |m, x| m.max(*x));
        let e: Vec<f64> = z.iter().map(|x| libm::exp(x - zmax)).collect();
        let denom = libm::exp(-zmax) + e.iter().sum::<f64>();
        let b = e.iter().map(|x| MAX_B_SUM * x / denom).collect();
        (sigma, a, b)
    }

    fn unconstrained(&self, params: &GarchParams) -> Vec<f64> {
        let mut u = vec![libm::log(params.sigma())];
        u.extend(params.a().iter().map(|a| libm::log(a.max(1e-10))));
        let s: Vec<f64> = params.b().iter().map(|b| (b / MAX_B_SUM).max(1e-10)).collect();
        let rest = (1.0 - s.iter().sum::<f64>()).max(1e-8);
        u.extend(s.iter().map(|x| libm::log(x / rest)));
        u
    }

    /// Maps a θ-gradient to the u-gradient.
    fn chain(&self, sigma: f64, a: &[f64], b: &[f64], g_theta: &[f64], g_u: &mut [f64]) {
        g_u[0] = g_theta[0] * sigma;
        for i in 0..self.p {
            g_u[1 + i] = g_theta[1 + i] * a[i];
        }
        let off = 1 + self.p;
        let gb = &g_theta[off..];
        let dot: f64 = gb.iter().zip(b).map(|(g, bj)| g * bj).sum();
        for k in 0..self.q {
            g_u[off + k] = b[k] * (gb[k] - dot / MAX_B_SUM);
        }
    }
}

/// Mean log-likelihood at `params`.
pub fn loglik(params: &GarchParams, returns: &[f64], criterion: Criterion<'_>) -> Result<f64> {
    validate_returns(returns, params.order())?;
    let mut obj = Objective::new(returns, params.order(), criterion);
    Ok(obj.value_grad(params.sigma(), params.a(), params.b(), None))
}

/// Mean log-likelihood and its analytic gradient in `θ = (σ, a, b)`.
pub fn loglik_gradient(params: &GarchParams, returns: &[f64], criterion: Criterion<'_>) -> Result<(f64, Vec<f64>)> {
    validate_returns(returns, params.order())?;
    let mut obj = Objective::new(returns, params.order(), criterion);
    let mut g = vec![0.0; params.order().dim()];
    let v = obj.value_grad(params.sigma(), params.a(), params.b(), Some(&mut g));
    Ok((v, g))
}

/// Start matching the sample second moment with `ã = 0.05`, `b̃ = 0.8`
/// spread evenly over the lags.
pub fn default_start(returns: &[f64], order: GarchOrder) -> Result<GarchParams> {
    let m2 = returns.iter().map(|x| x * x).sum::<f64>() / returns.len() as f64;
    let a_tot = if order.p > 0 { 0.05 } else { 0.0 };
    let b_tot = if order.q > 0 { 0.8 } else { 0.0 };
    let c = m2 * (1.0 - a_tot - b_tot);
    let a = vec![a_tot / order.p.max(1) as f64 / c; order.p];
    let b = vec![b_tot / order.q.max(1) as f64; order.q];
    GarchParams::new(libm::sqrt(c), a, b)
}

fn check_sample(returns: &[f64], order: GarchOrder) -> Result<()> {
    validate_returns(returns, order)?;
    if returns.len() <= 10 * order.dim() {
        return Err(Error::InvalidInput(format!(
            "need more than {} observations for order ({order}), got {}",
            10 * order.dim(),
            returns.len()
        )));
    }
    let m2 = returns.iter().map(|x| x * x).sum::<f64>();
    if !(m2 > 0.0) {
        return Err(Error::Degenerate("returns are identically zero".into()));
    }
    Ok(())
}

fn residuals(params: &GarchParams, returns: &[f64]) -> Vec<f64> {
    let mut rec = Recursion::new(returns);
    rec.run(params.a(), params.b(), false);
    returns.iter().zip(&rec.v2).map(|(x, v2)| x / (params.sigma() * libm::sqrt(*v2))).collect()
}

fn fit_with(returns: &[f64], order: GarchOrder, criterion: Criterion<'_>, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    check_sample(returns, order)?;
    if let Some(p) = &opts.initial_params {
        if p.order() != order {
            return Err(Error::InvalidParams(format!(
                "initial parameters have order ({}), expected ({order})",
                p.order()
            )));
        }
    }
    let tr = Transform { p: order.p, q: order.q };
    let mut obj = Objective::new(returns, order, criterion);
    let dim = order.dim();

    let base = default_start(returns, order)?;
    let first = opts.initial_params.clone().unwrap_or_else(|| base.clone());
    let mut starts = vec![tr.unconstrained(&first)];
    if opts.initial_params.is_some() {
        starts.push(tr.unconstrained(&base));
    }
    let mut perturbed = tr.unconstrained(&first);
    perturbed[0] += 0.25;
    for x in perturbed[1..1 + order.p].iter_mut() {
        *x -= 0.7;
    }
    for x in perturbed[1 + order.p..].iter_mut() {
        *x -= 0.8;
    }
    starts.push(perturbed);
    starts.truncate(opts.multistart);
    while starts.len() < opts.multistart {
        // further starts: shrink persistence step by step
        let mut u = tr.unconstrained(&base);
        let k = starts.len() as f64;
        for x in u[1 + order.p..].iter_mut() {
            *x -= 0.6 * k;
        }
        starts.push(u);
    }

    // run the optimizer a decade below the requested tolerance, accept if
    // the requested one is met
    let cfg = BfgsConfig {
        max_iterations: opts.max_iterations,
        gradient_tolerance: 0.1 * opts.gradient_tolerance,
        max_step: Some(MAX_STEP),
    };
    let m2 = returns.iter().map(|x| x * x).sum::<f64>() / returns.len() as f64;
    let mut best: Option<(crate::optimize::Minimum, usize)> = None;
    let mut total_iterations = 0;
    let mut g_theta = vec![0.0; dim];
    for u0 in &starts {
        let m = minimize(
            |u, g| {
                let (sigma, a, b) = tr.to_theta(u);
                if !(sigma.is_finite() && sigma > 0.0) || a.iter().any(|x| !x.is_finite()) {
                    g.iter_mut().for_each(|x| *x = f64::NAN);
                    return f64::INFINITY;
                }
                let ll = obj.value_grad(sigma, &a, &b, Some(&mut g_theta));
                tr.chain(sigma, &a, &b, &g_theta, g);
                for x in g.iter_mut() {
                    *x = -*x;
                }
                if ll.is_finite() {
                    -ll
                } else {
                    f64::INFINITY
                }
            },
            u0,
            &cfg,
        );
        total_iterations += m.iterations;
        let on_ridge = {
            let sigma = tr.to_theta(&m.x).0;
            sigma * sigma < INTERCEPT_FLOOR * m2
        };
        let ok = m.gradient_norm < opts.gradient_tolerance
            && m.termination != Termination::NonFiniteStart
            && !on_ridge
            && boundary_kkt(&mut obj, &tr, &m.x, m2);
        let better = best.as_ref().is_none_or(|(b, _)| m.f < b.f);
        if ok {
            best = Some((m, total_iterations));
            break;
        }
        if better && m.f.is_finite() {
            best = Some((m, total_iterations));
        }
    }
    let (m, _) = best.ok_or_else(|| Error::Degenerate("likelihood is not finite at any starting point".into()))?;
    let (sigma, a, b) = tr.to_theta(&m.x);
    let params = GarchParams::new(sigma, a, b)?;
    let boundary = params.a().iter().chain(params.b()).any(|x| *x < BOUNDARY_THRESHOLD)
        || params.sigma() * params.sigma() < INTERCEPT_FLOOR * m2;
    let converged = m.gradient_norm < opts.gradient_tolerance && m.f.is_finite();
    Ok(FitResult {
        residuals: residuals(&params, returns),
        params,
        loglik: -m.f,
        gradient_norm: m.gradient_norm,
        converged,
        iterations: total_iterations,
        boundary,
    })
}

// Largest change of any unconstrained coordinate per line search; e² ≈ 7.4
// as a factor on σ or a_i.
const MAX_STEP: f64 = 2.0;

/// A point where some `a_i` or `b_j` has collapsed towards zero is a
/// stationary point of the exponential reparameterization whatever the
/// likelihood slope there. It only counts as a maximum if the likelihood
/// does not increase into the interior.
fn boundary_kkt(obj: &mut Objective<'_>, tr: &Transform, u: &[f64], m2: f64) -> bool {
    let (sigma, a, b) = tr.to_theta(u);
    let mut g = vec![0.0; 1 + a.len() + b.len()];
    obj.value_grad(sigma, &a, &b, Some(&mut g));
    let a_ok = a.iter().enumerate().all(|(i, ai)| *ai > 1e-6 || g[1 + i] * m2 <= 1e-6);
    let b_ok = b.iter().enumerate().all(|(j, bj)| *bj > 1e-6 || g[1 + a.len() + j] <= 1e-6);
    a_ok && b_ok
}

/// Gaussian QMLE.
pub fn fit_gaussian(returns: &[f64], order: GarchOrder, opts: &FitOptions) -> Result<FitResult> {
    fit_with(returns, order, Criterion::Gaussian, opts)
}

/// Non-Gaussian QMLE with the scale fixed at a known `eta`.
pub fn fit_oracle(
    returns: &[f64],
    order: GarchOrder,
    f: &QuasiLikelihood,
    eta_known: f64,
    opts: &FitOptions,
) -> Result<FitResult> {
    if !(eta_known > 0.0 && eta_known.is_finite()) {
        return Err(Error::InvalidParams(format!("eta must be positive, got {eta_known}")));
    }
    fit_with(returns, order, Criterion::Scaled { f, eta: eta_known }, opts)
}

/// Non-Gaussian QMLE without scale correction (`η = 1`); its `σ̂` absorbs η_f.
pub fn fit_unscaled(returns: &[f64], order: GarchOrder, f: &QuasiLikelihood, opts: &FitOptions) -> Result<FitResult> {
    fit_oracle(returns, order, f, 1.0, opts)
}

/// Maximum likelihood under the true innovation density.
pub fn fit_mle(returns: &[f64], order: GarchOrder, g: &InnovationDistribution, opts: &FitOptions) -> Result<FitResult> {
    let d = g.density().ok_or_else(|| Error::Unsupported(format!("MLE needs a closed-form density; {g} has none")))?;
    fit_with(returns, order, Criterion::Exact(d), opts)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoStepFit {
    pub gaussian: FitResult,
    pub eta_hat: EtaSolution,
    pub non_gaussian: FitResult,
    pub likelihood: QuasiLikelihood,
    /// Plug-in covariance blocks at the second-step estimate; `None` when the
    /// design matrix is singular there (boundary estimates).
    pub covariance: Option<CovarianceBlocks>,
}

/// Two-step non-Gaussian QMLE: Gaussian QMLE, η̂_f from its residuals, then
/// the η̂-scaled non-Gaussian QMLE warm-started at the Gaussian estimate.
pub fn fit_two_step(returns: &[f64], order: GarchOrder, f: &QuasiLikelihood, opts: &FitOptions) -> Result<TwoStepFit> {
    let gaussian = fit_gaussian(returns, order, opts).map_err(|e| e.at(Stage::GaussianFit))?;
    fit_two_step_from_gaussian(returns, gaussian, f, opts)
}

/// Steps two and three on an existing Gaussian fit.
pub fn fit_two_step_from_gaussian(
    returns: &[f64],
    gaussian: FitResult,
    f: &QuasiLikelihood,
    opts: &FitOptions,
) -> Result<TwoStepFit> {
    let order = gaussian.params.order();
    let eta_hat = eta_empirical(f, &gaussian.residuals).map_err(|e| e.at(Stage::EtaEstimation))?;
    let non_gaussian = fit_oracle(returns, order, f, eta_hat.eta, &opts.warm(&gaussian.params))
        .map_err(|e| e.at(Stage::SecondStepFit))?;
    let covariance = plug_in_covariance(returns, &non_gaussian, f, eta_hat.eta).ok();
    Ok(TwoStepFit { gaussian, eta_hat, non_gaussian, likelihood: *f, covariance })
}

/// Covariance blocks with sample moments of the residuals of `fit`.
pub fn plug_in_covariance(returns: &[f64], fit: &FitResult, f: &QuasiLikelihood, eta: f64) -> Result<CovarianceBlocks> {
    let stats = k_stats(&fit.params, returns).map_err(|e| e.at(Stage::Covariance))?;
    let fm = moment_functionals_empirical(f, &fit.residuals, eta).map_err(|e| e.at(Stage::Covariance))?;
    covariance_blocks(&stats, &fm, fit.params.sigma(), eta).map_err(|e| e.at(Stage::Covariance))
}

/// Per-observation estimating-equation terms of the two-step procedure.
#[derive(Clone, Debug, PartialEq)]
pub struct Scores {
    /// Gaussian score at θ̃, `T × (1+p+q)`.
    pub s1: Matrix,
    /// η score at (θ̃, η̂).
    pub s2: Vec<f64>,
    /// Non-Gaussian score at (θ̂, η̂), `T × (1+p+q)`.
    pub s3: Matrix,
}

impl Scores {
    pub fn means(&self) -> (Vec<f64>, f64, Vec<f64>) {
        let col_means = |m: &Matrix| {
            let n = m.rows() as f64;
            (0..m.cols()).map(|j| (0..m.rows()).map(|t| m[(t, j)]).sum::<f64>() / n).collect::<Vec<_>>()
        };
        let s2 = self.s2.iter().sum::<f64>() / self.s2.len() as f64;
        (col_means(&self.s1), s2, col_means(&self.s3))
    }
}

/// `k_t = (1/σ, (1/v_t) ∂v_t/∂γ)` and `z_t = x_t/(σ v_t)` at `params`.
fn k_and_residuals(params: &GarchParams, returns: &[f64]) -> (Matrix, Vec<f64>) {
    let mut rec = Recursion::new(returns);
    rec.run(params.a(), params.b(), true);
    let d = params.order().p + params.order().q;
    let n = returns.len();
    let mut k = Matrix::zeros(n, d + 1);
    let mut z = Vec::with_capacity(n);
    for t in 0..n {
        k[(t, 0)] = 1.0 / params.sigma();
        for j in 0..d {
            k[(t, 1 + j)] = rec.dv2[t * d + j] / (2.0 * rec.v2[t]);
        }
        z.push(returns[t] / (params.sigma() * libm::sqrt(rec.v2[t])));
    }
    (k, z)
}

/// `s₁ = k(−1 + z²)`, `s₂ = −(1/η)(1 + h(z/η))`, `s₃ = −k(1 + h(z/η))`.
pub fn scores(returns: &[f64], fit: &TwoStepFit) -> Result<Scores> {
    validate_returns(returns, fit.gaussian.params.order())?;
    let f = &fit.likelihood;
    let eta = fit.eta_hat.eta;
    let (k1, z1) = k_and_residuals(&fit.gaussian.params, returns);
    let (k3, z3) = k_and_residuals(&fit.non_gaussian.params, returns);
    let n = returns.len();
    let cols = k1.cols();
    let mut s1 = Matrix::zeros(n, cols);
    let mut s3 = Matrix::zeros(n, cols);
    let mut s2 = Vec::with_capacity(n);
    for t in 0..n {
        let w1 = -1.0 + z1[t] * z1[t];
        let w3 = -(1.0 + f.h(z3[t] / eta));
        for j in 0..cols {
            s1[(t, j)] = k1[(t, j)] * w1;
            s3[(t, j)] = k3[(t, j)] * w3;
        }
        s2.push(-(1.0 + f.h(z1[t] / eta)) / eta);
    }
    Ok(Scores { s1, s2, s3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volatility::simulate;

    fn data(g: &str, n: usize, seed: u64) -> (GarchParams, Vec<f64>) {
        let p = GarchParams::new(0.5, vec![0.35], vec![0.3]).unwrap();
        let g: InnovationDistribution = g.parse().unwrap();
        let x = simulate(&p, &g, n, 300, seed).unwrap();
        (p, x)
    }

    fn fd_check(params: &GarchParams, x: &[f64], c: Criterion<'_>) {
        let (_, g) = loglik_gradient(params, x, c).unwrap();
        let theta = params.to_vec();
        for i in 0..theta.len() {
            let h = 1e-6 * theta[i].abs().max(1e-3);
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[i] += h;
            dn[i] -= h;
            let fu = loglik(&GarchParams::from_vec(params.order(), &up).unwrap(), x, c).unwrap();
            let fd = loglik(&GarchParams::from_vec(params.order(), &dn).unwrap(), x, c).unwrap();
            let num = (fu - fd) / (2.0 * h);
            assert!((num - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-4), "coord {i}: {} vs {num}", g[i]);
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let (_, x) = data("t:5", 800, 1);
        let p = GarchParams::new(0.6, vec![0.2, 0.1], vec![0.4]).unwrap();
        let f = QuasiLikelihood::student_t(4.0).unwrap();
        fd_check(&p, &x, Criterion::Gaussian);
        fd_check(&p, &x, Criterion::Scaled { f: &f, eta: 1.1 });
        let g = InnovationDistribution::skewed_t(7.0, 0.5).unwrap();
        fd_check(&p, &x, Criterion::Exact(g.density().unwrap()));
    }

    #[test]
    fn gaussian_fit_converges_and_satisfies_first_order_conditions() {
        let (truth, x) = data("gaussian", 4000, 2);
        let fit = fit_gaussian(&x, truth.order(), &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.loglik >= loglik(&truth, &x, Criterion::Gaussian).unwrap());
        let (_, g) = loglik_gradient(&fit.params, &x, Criterion::Gaussian).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-7), "{g:?}");
    }

    #[test]
    fn gaussian_two_step_reproduces_first_step() {
        let (truth, x) = data("t:7", 3000, 3);
        let f = QuasiLikelihood::gaussian();
        let fit = fit_two_step(&x, truth.order(), &f, &FitOptions::default()).unwrap();
        assert!((fit.eta_hat.eta - 1.0).abs() < 1e-7);
        let d: f64 = fit
            .gaussian
            .params
            .to_vec()
            .iter()
            .zip(fit.non_gaussian.params.to_vec())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn score_means_vanish() {
        let (truth, x) = data("t:5", 3000, 4);
        let f = QuasiLikelihood::student_t(4.0).unwrap();
        let opts = FitOptions::default();
        let fit = fit_two_step(&x, truth.order(), &f, &opts).unwrap();
        let (m1, m2, m3) = scores(&x, &fit).unwrap().means();
        let tol = 10.0 * opts.gradient_tolerance;
        assert!(m1.iter().all(|v| v.abs() < tol), "{m1:?}");
        assert!(m2.abs() < tol);
        assert!(m3.iter().all(|v| v.abs() < tol), "{m3:?}");
    }

    #[test]
    fn data_scaling_equivariance() {
        // persistent, well-identified design; (0.5, 0.35, 0.3) is too close to
        // i.i.d. at this sample size for the optimum to be sharply defined
        let truth = GarchParams::new(0.3, vec![1.1], vec![0.85]).unwrap();
        let g = InnovationDistribution::student_t(7.0).unwrap();
        let x = simulate(&truth, &g, 3000, 300, 5).unwrap();
        let c = 3.0;
        let xs: Vec<f64> = x.iter().map(|v| c * v).collect();
        let a = fit_gaussian(&x, truth.order(), &FitOptions::default()).unwrap();
        let b = fit_gaussian(&xs, truth.order(), &FitOptions::default()).unwrap();
        assert!((b.params.sigma() / a.params.sigma() - c).abs() < 1e-6);
        assert!((b.params.a()[0] * c * c / a.params.a()[0] - 1.0).abs() < 1e-6);
        assert!((b.params.b()[0] - a.params.b()[0]).abs() < 1e-6);
    }

    #[test]
    fn short_or_flat_series_rejected() {
        let order = GarchOrder::new(1, 1).unwrap();
        assert!(fit_gaussian(&[0.1; 20], order, &FitOptions::default()).is_err());
        assert!(matches!(fit_gaussian(&[0.0; 100], order, &FitOptions::default()), Err(Error::Degenerate(_))));
    }
}
