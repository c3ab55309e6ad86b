//! Seeded replication studies comparing the estimators on shared paths.
//!
//! Replication `r` draws its path from a ChaCha8 generator seeded with the
//! master seed and positioned on stream `r`, so any replication can be
//! recomputed on its own and the report does not depend on how replications
//! are scheduled. [`McPlan::replicate`] is the unit of work; the parallel
//! driver lives in the `ngqmle` crate.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{covariance_blocks, k_stats, CovarianceBlocks};
use crate::error::{Error, Result};
use crate::estimators::{
    fit_gaussian, fit_mle, fit_oracle, fit_two_step_from_gaussian, plug_in_covariance, FitOptions, FitResult,
    TwoStepFit,
};
use crate::eta::{eta_empirical, eta_population};
use crate::likelihoods::{moment_functionals, moment_functionals_empirical, InnovationDistribution, QuasiLikelihood};
use crate::selection::{
    aggregate, aggregated_variances, choose_likelihood, common_weight, CandidateGrid, WEIGHT_BOUNDS,
};
use crate::stats;
use crate::volatility::{simulate_path, GarchOrder, GarchParams};

/// An estimator to run on every simulated path.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EstimatorSpec {
    Gaussian,
    TwoStep {
        likelihood: QuasiLikelihood,
    },
    /// Known η; `None` uses the population η_f of the simulated innovations.
    Oracle {
        likelihood: QuasiLikelihood,
        #[cfg_attr(feature = "serde", serde(default))]
        eta: Option<f64>,
    },
    Mle,
    FourStep {
        #[cfg_attr(feature = "serde", serde(default))]
        grid: CandidateGrid,
    },
    /// Aggregation of `TwoStep { likelihood }` with the Gaussian QMLE.
    Aggregate {
        likelihood: QuasiLikelihood,
    },
}

impl EstimatorSpec {
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::Gaussian => "gaussian".into(),
            EstimatorSpec::TwoStep { likelihood } => format!("two_step[{likelihood}]"),
            EstimatorSpec::Oracle { likelihood, .. } => format!("oracle[{likelihood}]"),
            EstimatorSpec::Mle => "mle".into(),
            EstimatorSpec::FourStep { .. } => "four_step".into(),
            EstimatorSpec::Aggregate { likelihood } => format!("aggregate[{likelihood}]"),
        }
    }

    /// Whether the estimate carries η̂ as a trailing coordinate.
    fn has_eta(&self) -> bool {
        matches!(self, EstimatorSpec::TwoStep { .. } | EstimatorSpec::FourStep { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McConfig {
    pub true_params: GarchParams,
    pub innovation: InnovationDistribution,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t_len: usize,
    pub replications: usize,
    pub estimators: Vec<EstimatorSpec>,
    pub master_seed: u64,
    #[cfg_attr(feature = "serde", serde(default = "default_burn_in"))]
    pub burn_in: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub fit: FitOptions,
    #[cfg_attr(feature = "serde", serde(default))]
    pub standardization: Standardization,
}

/// Which standard errors divide `θ̂ − θ₀` in the standardized estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Standardization {
    /// Each replication's own plug-in standard errors.
    #[default]
    PlugIn,
    /// The asymptotic standard deviation at the true parameters: population
    /// moments by quadrature (or from a long innovation sample when there is
    /// no density) and `M` from a long reference path. Estimators and
    /// coordinates without a finite population formula fall back to plug-in
    /// errors.
    Population,
}

/// Length of the reference path used for population standard errors.
pub const REFERENCE_LENGTH: usize = 200_000;

#[cfg(feature = "serde")]
fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

pub const DEFAULT_BURN_IN: usize = 500;

impl McConfig {
    pub fn new(
        true_params: GarchParams,
        innovation: InnovationDistribution,
        t_len: usize,
        replications: usize,
        estimators: Vec<EstimatorSpec>,
        master_seed: u64,
    ) -> Self {
        McConfig {
            true_params,
            innovation,
            t_len,
            replications,
            estimators,
            master_seed,
            burn_in: DEFAULT_BURN_IN,
            fit: FitOptions::default(),
            standardization: Standardization::PlugIn,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::InvalidParams("need at least 2 replications".into()));
        }
        if self.t_len < 100 {
            return Err(Error::InvalidParams(format!("T must be at least 100, got {}", self.t_len)));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidParams("no estimators configured".into()));
        }
        for spec in &self.estimators {
            match spec {
                EstimatorSpec::Mle if self.innovation.density().is_none() => {
                    return Err(Error::Unsupported(format!(
                        "MLE needs a closed-form density; {} has none",
                        self.innovation
                    )));
                }
                EstimatorSpec::FourStep { grid } => {
                    grid.candidates()?;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One estimator's output on one path.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateRecord {
    /// `(σ, a, b)`, followed by η̂ for two-step style estimators.
    pub estimate: Option<Vec<f64>>,
    /// Plug-in asymptotic standard errors matching `estimate`.
    pub standard_errors: Option<Vec<f64>>,
    pub converged: bool,
    pub failure: Option<String>,
    /// Likelihood picked by a four-step fit.
    pub chosen: Option<QuasiLikelihood>,
    /// Aggregation weight.
    pub weight: Option<f64>,
    /// Checksum of the path this estimator was given.
    pub path_checksum: u64,
}

impl EstimateRecord {
    fn failed(reason: String, path_checksum: u64) -> Self {
        EstimateRecord {
            estimate: None,
            standard_errors: None,
            converged: false,
            failure: Some(reason),
            chosen: None,
            weight: None,
            path_checksum,
        }
    }

    fn usable(&self) -> Option<&[f64]> {
        if self.converged {
            self.estimate.as_deref()
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Replication {
    pub index: usize,
    pub path_checksum: u64,
    /// One record per configured estimator, in configuration order.
    pub records: Vec<EstimateRecord>,
}

/// FNV-1a over the bit patterns of `x`.
pub fn checksum(x: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in x {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// The generator for replication `r`.
pub fn replication_rng(master_seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(r as u64);
    rng
}

/// A validated configuration with its population quantities resolved.
#[derive(Clone, Debug)]
pub struct McPlan {
    config: McConfig,
    /// η used by each estimator where one is fixed or known.
    eta_truth: Vec<Option<f64>>,
    /// Population asymptotic standard deviations (not yet divided by √T).
    population_sd: Vec<Option<Vec<f64>>>,
}

impl McPlan {
    pub fn new(config: McConfig) -> Result<Self> {
        config.validate()?;
        let mut eta_truth = Vec::with_capacity(config.estimators.len());
        for spec in &config.estimators {
            let eta = match spec {
                EstimatorSpec::Oracle { eta: Some(e), .. } => Some(*e),
                EstimatorSpec::Oracle { likelihood, eta: None } => {
                    Some(eta_population(likelihood, &config.innovation)?.eta)
                }
                EstimatorSpec::TwoStep { likelihood } if config.innovation.density().is_some() => {
                    Some(eta_population(likelihood, &config.innovation)?.eta)
                }
                _ => None,
            };
            eta_truth.push(eta);
        }
        let population_sd = match config.standardization {
            Standardization::PlugIn => vec![None; config.estimators.len()],
            Standardization::Population => population_sd(&config)?,
        };
        Ok(McPlan { config, eta_truth, population_sd })
    }

    pub fn config(&self) -> &McConfig {
        &self.config
    }

    /// Simulated returns for replication `r`.
    pub fn path(&self, r: usize) -> Result<Vec<f64>> {
        let c = &self.config;
        let mut rng = replication_rng(c.master_seed, r);
        Ok(simulate_path(&c.true_params, &c.innovation, c.t_len, c.burn_in, &mut rng)?.returns)
    }

    /// Runs every estimator on the path of replication `r`. Estimator
    /// failures are recorded, never propagated.
    pub fn replicate(&self, r: usize) -> Replication {
        let x = match self.path(r) {
            Ok(x) => x,
            Err(e) => {
                let records = self.config.estimators.iter().map(|_| EstimateRecord::failed(e.to_string(), 0)).collect();
                return Replication { index: r, path_checksum: 0, records };
            }
        };
        let sum = checksum(&x);
        let mut cache = Cache { order: self.config.true_params.order(), gaussian: None, two_step: Vec::new() };
        let records = self
            .config
            .estimators
            .iter()
            .zip(&self.eta_truth)
            .map(|(spec, eta)| {
                let sum_seen = checksum(&x);
                match self.run_one(spec, *eta, &x, &mut cache) {
                    Ok(mut rec) => {
                        rec.path_checksum = sum_seen;
                        rec
                    }
                    Err(e) => EstimateRecord::failed(e.to_string(), sum_seen),
                }
            })
            .collect();
        Replication { index: r, path_checksum: sum, records }
    }

    fn run_one(&self, spec: &EstimatorSpec, eta: Option<f64>, x: &[f64], cache: &mut Cache) -> Result<EstimateRecord> {
        let opts = &self.config.fit;
        let order = self.config.true_params.order();
        let record = |theta: Vec<f64>, se: Option<Vec<f64>>, converged: bool| EstimateRecord {
            estimate: Some(theta),
            standard_errors: se,
            converged,
            failure: None,
            chosen: None,
            weight: None,
            path_checksum: 0,
        };
        let t = x.len();
        match spec {
            EstimatorSpec::Gaussian => {
                let g = cache.gaussian(x, opts)?;
                let se = plug_in_covariance(x, &g, &QuasiLikelihood::gaussian(), 1.0)
                    .ok()
                    .map(|c| CovarianceBlocks::standard_errors(&c.sigma_g, t));
                Ok(record(g.params.to_vec(), se, g.converged))
            }
            EstimatorSpec::TwoStep { likelihood } => {
                let fit = cache.two_step(x, likelihood, opts)?;
                Ok(record(two_step_vector(&fit), two_step_se(&fit, t), two_step_converged(&fit)))
            }
            EstimatorSpec::Oracle { likelihood, .. } => {
                let eta = eta.ok_or_else(|| Error::Unsupported("oracle η unavailable".into()))?;
                let warm = cache.gaussian(x, opts)?.params;
                let fit = fit_oracle(x, order, likelihood, eta, &opts.warm(&warm))?;
                let se = plug_in_covariance(x, &fit, likelihood, eta)
                    .ok()
                    .map(|c| CovarianceBlocks::standard_errors(&c.sigma_1, t));
                Ok(record(fit.params.to_vec(), se, fit.converged))
            }
            EstimatorSpec::Mle => {
                let warm = cache.gaussian(x, opts)?.params;
                let fit = fit_mle(x, order, &self.config.innovation, &opts.warm(&warm))?;
                Ok(record(fit.params.to_vec(), None, fit.converged))
            }
            EstimatorSpec::FourStep { grid } => {
                let g = cache.gaussian(x, opts)?;
                let sel = choose_likelihood(&g.residuals, grid)?;
                let fit = cache.two_step(x, &sel.chosen, opts)?;
                let mut rec = record(two_step_vector(&fit), two_step_se(&fit, t), two_step_converged(&fit));
                rec.chosen = Some(sel.chosen);
                Ok(rec)
            }
            EstimatorSpec::Aggregate { likelihood } => {
                let fit = cache.two_step(x, likelihood, opts)?;
                let agg = aggregate(&fit)?;
                let se = agg.sigma_star_diag.iter().map(|v| libm::sqrt(v.max(0.0) / t as f64)).collect();
                let mut rec = record(agg.params.to_vec(), Some(se), two_step_converged(&fit));
                rec.weight = Some(agg.w_star);
                Ok(rec)
            }
        }
    }

    /// Reduces replications (in any order) to a report.
    pub fn summarize(&self, mut replications: Vec<Replication>) -> McReport {
        replications.sort_by_key(|r| r.index);
        let c = &self.config;
        let theta0 = c.true_params.to_vec();
        let mut names = GarchParams::names(c.true_params.order());
        let paired = replications.iter().all(|r| r.records.iter().all(|rec| rec.path_checksum == r.path_checksum));
        let estimators = c
            .estimators
            .iter()
            .enumerate()
            .map(|(k, spec)| {
                let mut truth = theta0.clone();
                let mut pnames = names.clone();
                if spec.has_eta() {
                    truth.push(self.eta_truth[k].unwrap_or(f64::NAN));
                    pnames.push("eta".into());
                }
                let records: Vec<&EstimateRecord> = replications.iter().map(|r| &r.records[k]).collect();
                let fixed_se = self.population_sd[k]
                    .as_ref()
                    .map(|sd| sd.iter().map(|v| v / libm::sqrt(c.t_len as f64)).collect::<Vec<_>>());
                EstimatorReport::build(spec, pnames, truth, &records, fixed_se.as_deref())
            })
            .collect();
        names.truncate(theta0.len());
        McReport {
            config: c.clone(),
            parameter_names: names,
            replications: replications.len(),
            paired,
            checksums: replications.iter().map(|r| r.path_checksum).collect(),
            estimators,
        }
    }
}

/// `sqrt(diag Σ)` at the true parameters for every estimator that has a
/// population formula.
fn population_sd(config: &McConfig) -> Result<Vec<Option<Vec<f64>>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(u64::MAX);
    let path = simulate_path(&config.true_params, &config.innovation, REFERENCE_LENGTH, config.burn_in, &mut rng)?;
    let stats = k_stats(&config.true_params, &path.returns)?;
    let sigma0 = config.true_params.sigma();
    let g = &config.innovation;
    // Without a density the moments come from a long innovation sample.
    let draws = match g.density() {
        Some(_) => None,
        None => Some(g.sample_with(&mut rng, REFERENCE_LENGTH)),
    };
    // σ and η have no finite asymptotic variance without a fourth moment.
    let fourth = g.tail_index() > 4.0;
    let blocks = |f: &QuasiLikelihood| -> Option<CovarianceBlocks> {
        let (eta, fm) = match &draws {
            None => {
                let eta = eta_population(f, g).ok()?.eta;
                (eta, moment_functionals(f, g, eta).ok()?)
            }
            Some(e) => {
                let eta = eta_empirical(f, e).ok()?.eta;
                (eta, moment_functionals_empirical(f, e, eta).ok()?)
            }
        };
        covariance_blocks(&stats, &fm, sigma0, eta).ok()
    };
    let sd = |m: &crate::linalg::Matrix, sigma_finite: bool| {
        let mut v: Vec<f64> = m.diagonal().iter().map(|v| libm::sqrt(v.max(0.0))).collect();
        if !(fourth || sigma_finite) {
            v[0] = f64::NAN;
        }
        v
    };
    Ok(config
        .estimators
        .iter()
        .map(|spec| match spec {
            EstimatorSpec::Gaussian if fourth => blocks(&QuasiLikelihood::gaussian()).map(|b| sd(&b.sigma_g, true)),
            EstimatorSpec::TwoStep { likelihood } => blocks(likelihood).map(|b| {
                let mut v = sd(&b.sigma_2, false);
                v.push(if fourth { libm::sqrt(b.sigma_eta.max(0.0)) } else { f64::NAN });
                v
            }),
            EstimatorSpec::Oracle { likelihood, .. } => blocks(likelihood).map(|b| sd(&b.sigma_1, true)),
            EstimatorSpec::Aggregate { likelihood } if fourth => blocks(likelihood).and_then(|b| {
                let w = common_weight(&b.functionals).ok()?.clamp(WEIGHT_BOUNDS.0, WEIGHT_BOUNDS.1);
                Some(aggregated_variances(&b, w).iter().map(|v| libm::sqrt(v.max(0.0))).collect())
            }),
            _ => None,
        })
        .collect())
}

struct Cache {
    order: GarchOrder,
    gaussian: Option<Result<FitResult, String>>,
    two_step: Vec<(QuasiLikelihood, Result<TwoStepFit, String>)>,
}

/// Fits shared between estimators on one path. Errors are kept as strings
/// so that every consumer sees the same failure.
impl Cache {
    fn gaussian(&mut self, x: &[f64], opts: &FitOptions) -> Result<FitResult> {
        let order = self.order;
        self.gaussian
            .get_or_insert_with(|| fit_gaussian(x, order, opts).map_err(|e| e.to_string()))
            .clone()
            .map_err(Error::Degenerate)
    }

    fn two_step(&mut self, x: &[f64], f: &QuasiLikelihood, opts: &FitOptions) -> Result<TwoStepFit> {
        if let Some((_, r)) = self.two_step.iter().find(|(g, _)| g == f) {
            return r.clone().map_err(Error::Degenerate);
        }
        let r =
            self.gaussian(x, opts).and_then(|g| fit_two_step_from_gaussian(x, g, f, opts)).map_err(|e| e.to_string());
        self.two_step.push((*f, r.clone()));
        r.map_err(Error::Degenerate)
    }
}

fn two_step_vector(fit: &TwoStepFit) -> Vec<f64> {
    let mut v = fit.non_gaussian.params.to_vec();
    v.push(fit.eta_hat.eta);
    v
}

fn two_step_se(fit: &TwoStepFit, t: usize) -> Option<Vec<f64>> {
    let c = fit.covariance.as_ref()?;
    let mut se = CovarianceBlocks::standard_errors(&c.sigma_2, t);
    se.push(c.eta_standard_error(t));
    Some(se)
}

fn two_step_converged(fit: &TwoStepFit) -> bool {
    fit.gaussian.converged && fit.non_gaussian.converged
}

/// Summary of one parameter across replications.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub median: f64,
}

/// Descriptive check of a sample against N(0, 1).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalitySummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// One-sample Kolmogorov–Smirnov distance to N(0, 1).
    pub ks: f64,
    /// Fewer than two values or zero spread.
    pub degenerate: bool,
}

pub fn normality_check(x: &[f64]) -> NormalitySummary {
    let n = x.len();
    let (mean, variance, skewness, excess_kurtosis) = stats::moments(x);
    let degenerate = n < 2 || x.iter().all(|v| *v == x[0]) || !(variance > 0.0);
    NormalitySummary {
        n,
        mean,
        variance,
        skewness: if degenerate { f64::NAN } else { skewness },
        excess_kurtosis: if degenerate { f64::NAN } else { excess_kurtosis },
        ks: if n == 0 { f64::NAN } else { stats::ks_statistic_normal(x) },
        degenerate,
    }
}

/// Equal-width histogram counts of `x` over `[lo, hi)`; values outside are
/// dropped.
pub fn histogram(x: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let width = (hi - lo) / bins as f64;
    for v in x {
        if *v >= lo && *v < hi {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    counts
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Failure {
    pub replication: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorReport {
    pub label: String,
    pub spec: EstimatorSpec,
    pub parameter_names: Vec<String>,
    /// Replication-level estimates, `None` where the fit failed or did not converge.
    pub estimates: Vec<Option<Vec<f64>>>,
    /// Over converged replications.
    pub summary: Vec<ParamSummary>,
    /// `(θ̂ − θ₀)/se` per parameter, over converged replications with standard errors.
    pub standardized: Vec<Vec<f64>>,
    pub normality: Vec<NormalitySummary>,
    pub failures: Vec<Failure>,
    /// Replications that returned an estimate without converging.
    pub not_converged: usize,
    /// How often each likelihood was picked (four-step only).
    pub chosen_counts: Vec<(String, usize)>,
    /// Aggregation weights (aggregate only).
    pub weights: Vec<f64>,
}

impl EstimatorReport {
    fn build(
        spec: &EstimatorSpec,
        names: Vec<String>,
        truth: Vec<f64>,
        records: &[&EstimateRecord],
        fixed_se: Option<&[f64]>,
    ) -> Self {
        let d = names.len();
        let estimates: Vec<Option<Vec<f64>>> = records.iter().map(|r| r.usable().map(|e| e.to_vec())).collect();
        let good: Vec<&Vec<f64>> = estimates.iter().flatten().collect();
        let summary = (0..d)
            .map(|i| {
                let col: Vec<f64> = good.iter().map(|e| e[i]).collect();
                summarize_column(&names[i], truth[i], &col)
            })
            .collect();
        let mut standardized = vec![Vec::new(); d];
        for r in records {
            let Some(e) = r.usable() else { continue };
            for i in 0..d {
                // a non-finite fixed error defers to the replication's own
                let fixed = fixed_se.and_then(|s| s.get(i).copied()).filter(|v| v.is_finite());
                let plug_in = r.standard_errors.as_ref().and_then(|s| s.get(i).copied());
                if let Some(se) = fixed.or(plug_in) {
                    if se > 0.0 && truth[i].is_finite() {
                        standardized[i].push((e[i] - truth[i]) / se);
                    }
                }
            }
        }
        let normality = standardized.iter().map(|z| normality_check(z)).collect();
        let failures = records
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.failure.as_ref().map(|reason| Failure { replication: i, reason: reason.clone() }))
            .collect();
        let not_converged = records.iter().filter(|r| r.failure.is_none() && !r.converged).count();
        let mut chosen_counts: Vec<(String, usize)> = Vec::new();
        for r in records {
            if let Some(f) = &r.chosen {
                let key = f.to_string();
                match chosen_counts.iter_mut().find(|(k, _)| *k == key) {
                    Some(entry) => entry.1 += 1,
                    None => chosen_counts.push((key, 1)),
                }
            }
        }
        chosen_counts.sort();
        let weights = records.iter().filter_map(|r| r.weight).collect();
        EstimatorReport {
            label: spec.label(),
            spec: spec.clone(),
            parameter_names: names,
            estimates,
            summary,
            standardized,
            normality,
            failures,
            not_converged,
            chosen_counts,
            weights,
        }
    }

    /// Replications with a usable estimate.
    pub fn usable(&self) -> usize {
        self.estimates.iter().filter(|e| e.is_some()).count()
    }
}

fn summarize_column(name: &str, truth: f64, col: &[f64]) -> ParamSummary {
    let mean = stats::mean(col);
    let variance = stats::variance(col);
    let mse = col.iter().map(|v| (v - truth) * (v - truth)).sum::<f64>() / col.len() as f64;
    ParamSummary { name: name.into(), truth, mean, bias: mean - truth, variance, mse, median: stats::median(col) }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McReport {
    pub config: McConfig,
    /// Names of the GARCH parameters shared by all estimators.
    pub parameter_names: Vec<String>,
    pub replications: usize,
    /// Every estimator saw the path of its replication.
    pub paired: bool,
    pub checksums: Vec<u64>,
    pub estimators: Vec<EstimatorReport>,
}

impl McReport {
    pub fn estimator(&self, label: &str) -> Option<&EstimatorReport> {
        self.estimators.iter().find(|e| e.label == label)
    }
}

/// Variance and MSE ratio of two estimators for one parameter.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioRow {
    pub parameter: String,
    /// `None` when the denominator variance is zero.
    pub variance_ratio: Option<f64>,
    pub mse_ratio: Option<f64>,
    /// Replications where both estimators converged.
    pub n: usize,
}

/// `numerator / denominator` variance and MSE ratios for the GARCH
/// parameters, over replications where both estimators converged.
pub fn ratio_tables(report: &McReport, numerator: &str, denominator: &str) -> Result<Vec<RatioRow>> {
    let find = |l: &str| report.estimator(l).ok_or_else(|| Error::InvalidInput(format!("no estimator labelled {l}")));
    let (a, b) = (find(numerator)?, find(denominator)?);
    let truth = report.config.true_params.to_vec();
    let pairs: Vec<(&Vec<f64>, &Vec<f64>)> =
        a.estimates.iter().zip(&b.estimates).filter_map(|(x, y)| Some((x.as_ref()?, y.as_ref()?))).collect();
    Ok(report
        .parameter_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let xa: Vec<f64> = pairs.iter().map(|p| p.0[i]).collect();
            let xb: Vec<f64> = pairs.iter().map(|p| p.1[i]).collect();
            let sa = summarize_column(name, truth[i], &xa);
            let sb = summarize_column(name, truth[i], &xb);
            let ratio = |u: f64, v: f64| if v > 0.0 && u.is_finite() { Some(u / v) } else { None };
            RatioRow {
                parameter: name.clone(),
                variance_ratio: ratio(sa.variance, sb.variance),
                mse_ratio: ratio(sa.mse, sb.mse),
                n: pairs.len(),
            }
        })
        .collect())
}

/// Serial run of every replication.
pub fn run(config: McConfig) -> Result<McReport> {
    let plan = McPlan::new(config)?;
    let reps = (0..plan.config.replications).map(|r| plan.replicate(r)).collect();
    Ok(plan.summarize(reps))
}
