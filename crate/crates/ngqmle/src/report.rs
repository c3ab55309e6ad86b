//! Structured fit reports.

use ngqmle_core::asymptotics::CovarianceBlocks;
use ngqmle_core::error::Stage;
use ngqmle_core::estimators::{
    fit_gaussian, fit_two_step_from_gaussian, fit_unscaled, plug_in_covariance, FitOptions, FitResult, TwoStepFit,
};
use ngqmle_core::eta::EtaSolution;
use ngqmle_core::likelihoods::QuasiLikelihood;
use ngqmle_core::selection::{aggregate, choose_likelihood, AggregationResult, CandidateGrid, Selection};
use ngqmle_core::volatility::{covariance_stationary, to_classic, ClassicGarchParams, GarchOrder, GarchParams};
use ngqmle_core::Error;
use serde::{Deserialize, Serialize};

/// What to fit. Serialized verbatim into the report header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRequest {
    pub order: GarchOrder,
    /// Second-step likelihood; ignored when `select` is set.
    pub likelihood: Option<QuasiLikelihood>,
    pub select: bool,
    pub grid: CandidateGrid,
    pub aggregate: bool,
    /// Also fit the chosen likelihood without scale correction.
    pub unscaled: bool,
    pub options: FitOptions,
}

/// One estimate in both parameterizations.
#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub params: GarchParams,
    pub classic: ClassicGarchParams,
    /// Asymptotic standard errors of `params`.
    pub standard_errors: Option<Vec<f64>>,
    pub loglik: Option<f64>,
    pub converged: bool,
    pub gradient_norm: Option<f64>,
    pub iterations: Option<usize>,
    pub boundary: bool,
}

impl Estimate {
    fn from_fit(fit: &FitResult, se: Option<Vec<f64>>) -> Self {
        Estimate {
            classic: to_classic(&fit.params),
            params: fit.params.clone(),
            standard_errors: se,
            loglik: Some(fit.loglik),
            converged: fit.converged,
            gradient_norm: Some(fit.gradient_norm),
            iterations: Some(fit.iterations),
            boundary: fit.boundary,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoStepReport {
    pub likelihood: QuasiLikelihood,
    pub eta_hat: EtaSolution,
    pub eta_standard_error: Option<f64>,
    /// `η̂ − 1`: how far the unscaled likelihood is from the Gaussian scale.
    pub eta_deviation: f64,
    pub estimate: Estimate,
    /// Fit with `η = 1`; its σ̂ is biased by the factor η̂.
    pub unscaled: Option<Estimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregationReport {
    #[serde(flatten)]
    pub result: AggregationResult,
    pub classic: ClassicGarchParams,
    pub standard_errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub request: FitRequest,
    pub observations: usize,
    pub gaussian: Estimate,
    pub selection: Option<Selection>,
    pub two_step: Option<TwoStepReport>,
    pub aggregation: Option<AggregationReport>,
    pub warnings: Vec<String>,
}

pub fn fit_report(returns: &[f64], req: &FitRequest) -> Result<FitReport, Error> {
    let t = returns.len();
    let opts = &req.options;
    let mut warnings = Vec::new();
    let gaussian = fit_gaussian(returns, req.order, opts).map_err(|e| stage(e, Stage::GaussianFit))?;
    let g_se = plug_in_covariance(returns, &gaussian, &QuasiLikelihood::gaussian(), 1.0)
        .ok()
        .map(|c| CovarianceBlocks::standard_errors(&c.sigma_g, t));
    check(&gaussian, "gaussian", &mut warnings);

    let selection = if req.select {
        Some(choose_likelihood(&gaussian.residuals, &req.grid).map_err(|e| stage(e, Stage::LikelihoodChoice))?)
    } else {
        None
    };
    let likelihood = selection.as_ref().map(|s| s.chosen).or(req.likelihood);

    let mut two_step = None;
    let mut aggregation = None;
    if let Some(f) = likelihood {
        let fit = fit_two_step_from_gaussian(returns, gaussian.clone(), &f, opts)?;
        check(&fit.non_gaussian, "two-step", &mut warnings);
        if req.aggregate {
            if f.is_gaussian() {
                warnings.push("aggregation skipped: the chosen likelihood is Gaussian".into());
            } else {
                let a = aggregate(&fit)?;
                if a.clamped {
                    warnings.push(format!("aggregation weight {} clamped to {}", a.w_raw, a.w_star));
                }
                aggregation = Some(AggregationReport {
                    classic: to_classic(&a.params),
                    standard_errors: a.sigma_star_diag.iter().map(|v| (v.max(0.0) / t as f64).sqrt()).collect(),
                    result: a,
                });
            }
        }
        let unscaled = if req.unscaled {
            let u = fit_unscaled(returns, req.order, &f, &opts.warm(&fit.non_gaussian.params))
                .map_err(|e| stage(e, Stage::SecondStepFit))?;
            Some(Estimate::from_fit(&u, None))
        } else {
            None
        };
        two_step = Some(two_step_report(&fit, t, unscaled));
    } else if req.aggregate {
        warnings.push("aggregation needs a second-step likelihood".into());
    }

    let st = covariance_stationary(&gaussian.params);
    if !st.stationary {
        warnings.push(format!("Gaussian estimate is not covariance stationary (margin {:.4})", st.margin));
    }
    Ok(FitReport {
        request: req.clone(),
        observations: t,
        gaussian: Estimate::from_fit(&gaussian, g_se),
        selection,
        two_step,
        aggregation,
        warnings,
    })
}

fn two_step_report(fit: &TwoStepFit, t: usize, unscaled: Option<Estimate>) -> TwoStepReport {
    let se = fit.covariance.as_ref().map(|c| CovarianceBlocks::standard_errors(&c.sigma_2, t));
    TwoStepReport {
        likelihood: fit.likelihood,
        eta_hat: fit.eta_hat,
        eta_standard_error: fit.covariance.as_ref().map(|c| c.eta_standard_error(t)),
        eta_deviation: fit.eta_hat.eta - 1.0,
        estimate: Estimate::from_fit(&fit.non_gaussian, se),
        unscaled,
    }
}

fn check(fit: &FitResult, name: &str, warnings: &mut Vec<String>) {
    if !fit.converged {
        warnings.push(format!("{name} fit did not converge (gradient norm {:e})", fit.gradient_norm));
    }
    if fit.boundary {
        warnings.push(format!("{name} estimate is on the boundary; standard errors are unreliable"));
    }
}

fn stage(e: Error, s: Stage) -> Error {
    match e {
        Error::Stage { .. } => e,
        other => Error::Stage { stage: s, source: Box::new(other) },
    }
}
