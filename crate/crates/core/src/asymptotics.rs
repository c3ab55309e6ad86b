//! Asymptotic covariances of the Gaussian QMLE, the oracle and two-step
//! non-Gaussian QMLEs, and η̂_f.
//!
//! Everything is driven by the design matrix `M = E k k'` with
//! `k_t = (1/σ, (1/v_t) ∂v_t/∂γ')'` and a handful of scalar moments of the
//! innovations (see [`MomentFunctionals`]).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::eta::eta_population;
use crate::likelihoods::{moment_functionals, InnovationDistribution, QuasiLikelihood};
use crate::linalg::Matrix;
use crate::volatility::{filter, GarchParams};

/// Scalar moments entering every variance formula, with
/// `h₁ = 1 + h(ε/η)` and `h₂ = (ε/η) h'(ε/η)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentFunctionals {
    /// `E h₁²`
    pub e_h1_sq: f64,
    /// `E h₂`
    pub e_h2: f64,
    /// `E(ε² − 1)²`
    pub e_eps4: f64,
    /// `E h₁(ε² − 1)`
    pub e_h1_eps: f64,
    /// `E(ε²−1)²/4 − A`; positive when the non-Gaussian QMLE is more efficient.
    pub mu: f64,
    /// `A = E h₁² / (E h₂)²`
    pub a_value: f64,
    /// `E h_g² − 1` for the true density `g`, when known.
    pub fisher_gap: Option<f64>,
}

impl MomentFunctionals {
    pub fn new(e_h1_sq: f64, e_h2: f64, e_eps4: f64, e_h1_eps: f64, fisher_gap: Option<f64>) -> Self {
        let a_value = e_h1_sq / (e_h2 * e_h2);
        MomentFunctionals { e_h1_sq, e_h2, e_eps4, e_h1_eps, mu: e_eps4 / 4.0 - a_value, a_value, fisher_gap }
    }

    /// `E(ε²−1)²/4 − E h₁(ε²−1)/E h₂ + A`, the η̂ variance over η².
    pub fn eta_coefficient(&self) -> f64 {
        self.e_eps4 / 4.0 - self.e_h1_eps / self.e_h2 + self.a_value
    }

    /// `E h₁(ε²−1)/E h₂ − E(ε²−1)²/2`.
    fn cross(&self) -> f64 {
        self.e_h1_eps / self.e_h2 - self.e_eps4 / 2.0
    }
}

/// Sample moments of `k_t` over a fitted path.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KMatrixStats {
    /// `M = mean k_t k_t'`
    pub m: Matrix,
    /// `mean k_t`
    pub k_bar: Vec<f64>,
    /// Inverse sample covariance of `y_t = (1/v_t) ∂v_t/∂γ`.
    pub v: Matrix,
    /// `mean y_t`
    pub y_bar: Vec<f64>,
    /// `σ` at which `k_t` was evaluated.
    pub sigma: f64,
}

fn singular(names: &[alloc::string::String], idx: usize) -> Error {
    let parameter = names.get(idx).cloned().unwrap_or_else(|| format!("#{idx}"));
    Error::Singular { parameter }
}

/// `M`, `k̄`, `V`, `ȳ` at `params` over `returns`.
pub fn k_stats(params: &GarchParams, returns: &[f64]) -> Result<KMatrixStats> {
    let order = params.order();
    let names = GarchParams::names(order);
    let path = filter(params, returns)?;
    let d = order.p + order.q;
    let n = returns.len();
    let sigma = params.sigma();
    let mut y_bar = vec![0.0; d];
    let mut yy = Matrix::zeros(d, d);
    for t in 0..n {
        let inv_v = 1.0 / path.v[t];
        for i in 0..d {
            let yi = path.grad[(t, i)] * inv_v;
            y_bar[i] += yi;
            for j in 0..=i {
                yy[(i, j)] += yi * path.grad[(t, j)] * inv_v;
            }
        }
    }
    let nf = n as f64;
    y_bar.iter_mut().for_each(|x| *x /= nf);
    for i in 0..d {
        for j in 0..=i {
            yy[(i, j)] /= nf;
            yy[(j, i)] = yy[(i, j)];
        }
    }
    let mut m = Matrix::zeros(d + 1, d + 1);
    m[(0, 0)] = 1.0 / (sigma * sigma);
    for i in 0..d {
        m[(0, i + 1)] = y_bar[i] / sigma;
        m[(i + 1, 0)] = y_bar[i] / sigma;
        for j in 0..d {
            m[(i + 1, j + 1)] = yy[(i, j)];
        }
    }
    let mut k_bar = vec![1.0 / sigma];
    k_bar.extend_from_slice(&y_bar);

    let cov_y = yy.sub(&Matrix::outer(&y_bar, &y_bar));
    let v = cov_y.cholesky().map_err(|j| singular(&names, j + 1))?.inverse();
    m.cholesky().map_err(|j| singular(&names, j))?;
    Ok(KMatrixStats { m, k_bar, v, y_bar, sigma })
}

/// `M⁻¹` assembled from its block form
/// `[[σ²(1 + ȳ'Vȳ), −σȳ'V], [−σVȳ, V]]`.
pub fn block_inverse(stats: &KMatrixStats) -> Matrix {
    let d = stats.y_bar.len();
    let s = stats.sigma;
    let vy = stats.v.mul_vec(&stats.y_bar);
    let yvy: f64 = stats.y_bar.iter().zip(&vy).map(|(a, b)| a * b).sum();
    let mut inv = Matrix::zeros(d + 1, d + 1);
    inv[(0, 0)] = s * s * (1.0 + yvy);
    for i in 0..d {
        inv[(0, i + 1)] = -s * vy[i];
        inv[(i + 1, 0)] = -s * vy[i];
        for j in 0..d {
            inv[(i + 1, j + 1)] = stats.v[(i, j)];
        }
    }
    inv
}

/// `M⁻¹` by Cholesky factorization.
pub fn m_inverse(stats: &KMatrixStats) -> Result<Matrix> {
    let order_names: Vec<alloc::string::String> =
        (0..stats.m.rows()).map(|i| if i == 0 { "sigma".into() } else { format!("gamma{i}") }).collect();
    Ok(stats.m.cholesky().map_err(|j| singular(&order_names, j))?.inverse())
}

/// Joint asymptotic covariance blocks, all per unit of `1/T`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CovarianceBlocks {
    /// Gaussian QMLE.
    pub sigma_g: Matrix,
    /// Non-Gaussian QMLE with η_f known.
    pub sigma_1: Matrix,
    /// Two-step non-Gaussian QMLE.
    pub sigma_2: Matrix,
    /// η̂_f.
    pub sigma_eta: f64,
    /// Covariance of η̂_f with the two-step estimator (row vector).
    pub pi: Vec<f64>,
    /// Covariance of the Gaussian and two-step estimators.
    pub xi: Matrix,
    pub functionals: MomentFunctionals,
    pub sigma0: f64,
    pub eta: f64,
}

impl CovarianceBlocks {
    /// `sqrt(diag(Σ)/T)` for the chosen block.
    pub fn standard_errors(sigma: &Matrix, t_len: usize) -> Vec<f64> {
        sigma.diagonal().iter().map(|v| libm::sqrt(v.max(0.0) / t_len as f64)).collect()
    }

    pub fn eta_standard_error(&self, t_len: usize) -> f64 {
        libm::sqrt(self.sigma_eta.max(0.0) / t_len as f64)
    }
}

pub fn covariance_blocks(
    stats: &KMatrixStats,
    functionals: &MomentFunctionals,
    sigma0: f64,
    eta: f64,
) -> Result<CovarianceBlocks> {
    let fm = functionals;
    if ![fm.e_h1_sq, fm.e_h2, fm.e_eps4, fm.e_h1_eps].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("moment functionals must be finite".into()));
    }
    if fm.e_h2 == 0.0 {
        return Err(Error::Degenerate("E h2 vanishes".into()));
    }
    let minv = m_inverse(stats)?;
    let n = minv.rows();
    let e1 = Matrix::outer(&unit(n), &unit(n));
    let s2 = sigma0 * sigma0;
    let sigma_g = minv.scale(fm.e_eps4 / 4.0);
    let sigma_1 = minv.scale(fm.a_value);
    let sigma_2 = sigma_1.add(&e1.scale(s2 * fm.mu));
    let sigma_eta = eta * eta * fm.eta_coefficient();
    let mut pi = vec![0.0; n];
    pi[0] = 0.5 * eta * sigma0 * fm.cross();
    let xi = minv.scale(fm.e_h1_eps / (2.0 * fm.e_h2)).sub(&e1.scale(0.5 * s2 * fm.cross()));
    Ok(CovarianceBlocks { sigma_g, sigma_1, sigma_2, sigma_eta, pi, xi, functionals: *fm, sigma0, eta })
}

fn unit(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

/// Population `μ(f, g)` with η_f solved for.
pub fn mu(f: &QuasiLikelihood, g: &InnovationDistribution) -> Result<f64> {
    Ok(population_functionals(f, g)?.mu)
}

/// Population `A(f, g)` with η_f solved for.
pub fn a_value(f: &QuasiLikelihood, g: &InnovationDistribution) -> Result<f64> {
    Ok(population_functionals(f, g)?.a_value)
}

pub fn population_functionals(f: &QuasiLikelihood, g: &InnovationDistribution) -> Result<MomentFunctionals> {
    let eta = eta_population(f, g)?.eta;
    moment_functionals(f, g, eta)
}

/// Coefficients describing `Σ₂ − Σ_M`, where `Σ_M = M⁻¹/(E h_g² − 1)` is
/// the MLE covariance: `Σ₂ − Σ_M = gamma_gap·M⁻¹ + mu·σ₀² e₁e₁'`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MleGap {
    pub gamma_gap: f64,
    pub mu: f64,
}

pub fn mle_gap(f: &QuasiLikelihood, g: &InnovationDistribution) -> Result<MleGap> {
    let fm = population_functionals(f, g)?;
    let gap = fm.fisher_gap.ok_or_else(|| Error::Unsupported(format!("Fisher information of {g} is not available")))?;
    Ok(MleGap { gamma_gap: fm.a_value - 1.0 / gap, mu: fm.mu })
}
