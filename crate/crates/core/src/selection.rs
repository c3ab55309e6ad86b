//! Data-driven choice of the quasi-likelihood and aggregation of the
//! two-step estimator with the Gaussian QMLE.
//!
//! The γ-variance of the two-step estimator is `A(f, g)·M⁻¹` with
//! `A = E h₁² / (E h₂)²`, so candidates are ranked by the sample version of
//! `A` computed on the Gaussian QMLE residuals.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::asymptotics::{CovarianceBlocks, MomentFunctionals};
use crate::error::{Error, Result, Stage};
use crate::estimators::{fit_gaussian, fit_two_step_from_gaussian, FitOptions, TwoStepFit};
use crate::eta::eta_empirical;
use crate::likelihoods::{moment_functionals_empirical, QuasiLikelihood};
use crate::volatility::{GarchOrder, GarchParams, MAX_B_SUM};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct CandidateGrid {
    pub t_dofs: Vec<f64>,
    pub gg_shapes: Vec<f64>,
    pub include_gaussian: bool,
    /// Permit generalized Gaussian shapes above 1.
    pub allow_wide_gg: bool,
}

impl Default for CandidateGrid {
    fn default() -> Self {
        CandidateGrid {
            t_dofs: vec![2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 9.0, 11.0, 15.0, 20.0],
            gg_shapes: vec![0.4, 0.6, 0.8, 1.0],
            include_gaussian: true,
            allow_wide_gg: false,
        }
    }
}

impl CandidateGrid {
    /// The candidate likelihoods, Gaussian first, then t and gg in grid order.
    pub fn candidates(&self) -> Result<Vec<QuasiLikelihood>> {
        let mut out = Vec::new();
        if self.include_gaussian {
            out.push(QuasiLikelihood::gaussian());
        }
        for &nu in &self.t_dofs {
            out.push(QuasiLikelihood::student_t(nu)?);
        }
        for &beta in &self.gg_shapes {
            if beta > 1.0 && !self.allow_wide_gg {
                return Err(Error::InvalidParams(format!(
                    "gg shape {beta} exceeds 1; set allow_wide_gg to include it"
                )));
            }
            out.push(QuasiLikelihood::generalized_gaussian(beta)?);
        }
        if out.is_empty() {
            return Err(Error::InvalidParams("candidate grid is empty".into()));
        }
        Ok(out)
    }
}

/// One row of the selection table.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidateScore {
    pub likelihood: QuasiLikelihood,
    pub eta: Option<f64>,
    /// Sample `A(f, ĝ)`.
    pub a_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Selection {
    pub chosen: QuasiLikelihood,
    pub chosen_index: usize,
    pub table: Vec<CandidateScore>,
}

fn score(f: &QuasiLikelihood, residuals: &[f64]) -> Result<(f64, f64)> {
    let eta = eta_empirical(f, residuals)?.eta;
    let fm = moment_functionals_empirical(f, residuals, eta)?;
    if !fm.a_value.is_finite() {
        return Err(Error::Degenerate(format!("A is not finite for {f}")));
    }
    Ok((eta, fm.a_value))
}

/// Picks the candidate with the smallest sample `A`; near-ties
/// (relative difference below 1e-12) go to the lighter-tailed candidate.
///
/// Only the empirical distribution of `residuals` matters: they are sorted
/// before any sums are formed, so the result does not depend on their order.
pub fn choose_likelihood(residuals: &[f64], grid: &CandidateGrid) -> Result<Selection> {
    let candidates = grid.candidates()?;
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let table: Vec<CandidateScore> = candidates
        .into_iter()
        .map(|f| match score(&f, &sorted) {
            Ok((eta, a)) => CandidateScore { likelihood: f, eta: Some(eta), a_value: Some(a), error: None },
            Err(e) => CandidateScore { likelihood: f, eta: None, a_value: None, error: Some(e.to_string()) },
        })
        .collect();
    let mut best: Option<usize> = None;
    for (i, row) in table.iter().enumerate() {
        let Some(a) = row.a_value else { continue };
        best = match best {
            None => Some(i),
            Some(j) => {
                let b = table[j].a_value.unwrap_or(f64::INFINITY);
                let tie = (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
                let better = if tie {
                    row.likelihood.lightness().partial_cmp(&table[j].likelihood.lightness()) == Some(Ordering::Greater)
                } else {
                    a < b
                };
                if better {
                    Some(i)
                } else {
                    Some(j)
                }
            }
        };
    }
    let chosen_index =
        best.ok_or_else(|| Error::Degenerate("η estimation failed for every candidate likelihood".into()))?;
    Ok(Selection { chosen: table[chosen_index].likelihood, chosen_index, table })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FourStepFit {
    pub selection: Selection,
    pub fit: TwoStepFit,
}

/// Gaussian QMLE, likelihood choice on its residuals, η̂ for the chosen
/// likelihood, then the scaled second step.
pub fn four_step_fit(
    returns: &[f64],
    order: GarchOrder,
    grid: &CandidateGrid,
    opts: &FitOptions,
) -> Result<FourStepFit> {
    let gaussian = fit_gaussian(returns, order, opts).map_err(|e| e.at(Stage::GaussianFit))?;
    let selection = choose_likelihood(&gaussian.residuals, grid).map_err(|e| e.at(Stage::LikelihoodChoice))?;
    let fit = fit_two_step_from_gaussian(returns, gaussian, &selection.chosen, opts)?;
    Ok(FourStepFit { selection, fit })
}

/// Aggregation weights outside this range are clamped.
pub const WEIGHT_BOUNDS: (f64, f64) = (-1.0, 2.0);

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AggregationResult {
    /// Common weight on the two-step estimator (after clamping).
    pub w_star: f64,
    /// The weight before clamping.
    pub w_raw: f64,
    pub clamped: bool,
    /// Weights minimizing each coordinate's variance separately.
    pub coordinate_weights: Vec<f64>,
    /// `w*·θ̂ + (1 − w*)·θ̃`, projected onto the parameter space.
    pub params: GarchParams,
    /// Asymptotic variances of the aggregated estimator (per unit of `1/T`).
    pub sigma_star_diag: Vec<f64>,
}

/// Optimal affine combination of the two-step and Gaussian estimators.
///
/// With `κ_G = (1 − ε²)/2` and `κ₂ = h₁/E h₂`, the common weight is
/// `E κ_G(κ_G + κ₂) / E(κ_G + κ₂)²`. When `f` is Gaussian `κ₂ = −κ_G`, the
/// two estimators coincide and there is nothing to aggregate.
pub fn aggregate(fit: &TwoStepFit) -> Result<AggregationResult> {
    let cov = fit.covariance.as_ref().ok_or_else(|| {
        Error::Degenerate("no covariance estimate at the two-step optimum".into()).at(Stage::Aggregation)
    })?;
    let w_raw = common_weight(&cov.functionals).map_err(|e| e.at(Stage::Aggregation))?;
    let w = w_raw.clamp(WEIGHT_BOUNDS.0, WEIGHT_BOUNDS.1);
    let coordinate_weights = coordinate_weights(cov);
    let sigma_star_diag = aggregated_variances(cov, w);

    let hat = fit.non_gaussian.params.to_vec();
    let tilde = fit.gaussian.params.to_vec();
    let mut theta: Vec<f64> = hat.iter().zip(&tilde).map(|(h, t)| w * h + (1.0 - w) * t).collect();
    project(&mut theta, fit.gaussian.params.order());
    let params = GarchParams::from_vec(fit.gaussian.params.order(), &theta).map_err(|e| e.at(Stage::Aggregation))?;
    Ok(AggregationResult { w_star: w, w_raw, clamped: w != w_raw, coordinate_weights, params, sigma_star_diag })
}

/// `E κ_G(κ_G + κ₂) / E(κ_G + κ₂)²` from the moment functionals.
pub fn common_weight(fm: &MomentFunctionals) -> Result<f64> {
    let cross = fm.e_h1_eps / fm.e_h2;
    let num = fm.e_eps4 / 4.0 - cross / 2.0;
    let den = fm.e_eps4 / 4.0 - cross + fm.a_value;
    if !(den.abs() >= 1e-12) {
        return Err(Error::Degenerate(format!(
            "aggregation denominator {den:e} vanishes; the two estimators coincide"
        )));
    }
    Ok(num / den)
}

/// `(Σ_G − Ξ)/(Σ₂ + Σ_G − 2Ξ)` on each diagonal entry.
pub fn coordinate_weights(cov: &CovarianceBlocks) -> Vec<f64> {
    (0..cov.sigma_g.rows())
        .map(|i| {
            let (s2, sg, xi) = (cov.sigma_2[(i, i)], cov.sigma_g[(i, i)], cov.xi[(i, i)]);
            (sg - xi) / (s2 + sg - 2.0 * xi)
        })
        .collect()
}

/// Diagonal of the covariance of `w·θ̂ + (1 − w)·θ̃`.
pub fn aggregated_variances(cov: &CovarianceBlocks, w: f64) -> Vec<f64> {
    (0..cov.sigma_g.rows())
        .map(|i| {
            let (s2, sg, xi) = (cov.sigma_2[(i, i)], cov.sigma_g[(i, i)], cov.xi[(i, i)]);
            w * w * s2 + (1.0 - w) * (1.0 - w) * sg + 2.0 * w * (1.0 - w) * xi
        })
        .collect()
}

/// Clips negative coefficients to zero and shrinks `b` into the stable region.
fn project(theta: &mut [f64], order: GarchOrder) {
    for v in theta[1..].iter_mut() {
        *v = v.max(0.0);
    }
    let b = &mut theta[1 + order.p..];
    let s: f64 = b.iter().sum();
    if s > MAX_B_SUM {
        b.iter_mut().for_each(|v| *v *= MAX_B_SUM / s);
    }
}
