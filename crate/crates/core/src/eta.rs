//! The scale-correction parameter η_f.
//!
//! η_f maximizes `Q(η) = −ln η + E log f(ε/η)`. Its first-order condition is
//! `H(η) = E[1 + h(ε/η)] = 0`, and `H` is strictly increasing in η, so η_f is
//! found as the unique root of `H` by bracketing and Brent refinement.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::likelihoods::{expectation, InnovationDistribution, QuasiLikelihood};
use crate::root::{brent, RootConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EtaSolution {
    pub eta: f64,
    /// `Q(η)` at the solution.
    pub q_value: f64,
    /// `H(η)` at the solution.
    pub h_mean_residual: f64,
    pub bracket: (f64, f64),
}

const INITIAL_BRACKET: (f64, f64) = (1e-3, 1e3);
const EXPANSIONS: usize = 6;

/// Grows `[lo, hi]` tenfold on the side that lacks a sign change.
fn find_bracket<F: FnMut(f64) -> Result<f64>>(h: &mut F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, mut fhi) = (h(lo)?, h(hi)?);
    for _ in 0..EXPANSIONS {
        if flo <= 0.0 && fhi >= 0.0 {
            return Ok((lo, hi));
        }
        if flo > 0.0 {
            lo /= 10.0;
            flo = h(lo)?;
        }
        if fhi < 0.0 {
            hi *= 10.0;
            fhi = h(hi)?;
        }
    }
    if flo <= 0.0 && fhi >= 0.0 {
        Ok((lo, hi))
    } else {
        Err(Error::NoBracket { lo, hi })
    }
}

/// `H(η) = E_g[1 + h(ε/η)]` by quadrature.
pub fn h_mean_population(f: &QuasiLikelihood, g: &InnovationDistribution, eta: f64) -> Result<f64> {
    let g = density_of(g)?;
    expectation(g, |x| 1.0 + f.h(x / eta))
}

/// `Q(η) = −ln η + E_g log f(ε/η)` by quadrature.
pub fn q_population(f: &QuasiLikelihood, g: &InnovationDistribution, eta: f64) -> Result<f64> {
    let g = density_of(g)?;
    Ok(-libm::log(eta) + expectation(g, |x| f.log_density(x / eta))?)
}

fn density_of(g: &InnovationDistribution) -> Result<&crate::likelihoods::Density> {
    g.density().ok_or_else(|| Error::Unsupported(format!("{g} has no closed-form density; use a residual sample")))
}

/// Population η_f for quasi-likelihood `f` under innovations `g`.
pub fn eta_population(f: &QuasiLikelihood, g: &InnovationDistribution) -> Result<EtaSolution> {
    density_of(g)?;
    let mut h = |eta: f64| h_mean_population(f, g, eta);
    let (lo, hi) = find_bracket(&mut h, INITIAL_BRACKET.0, INITIAL_BRACKET.1)?;
    let cfg = RootConfig { x_rel_tol: 1e-12, f_tol: 1e-12, max_iterations: 200 };
    let root = brent(&mut h, lo, hi, &cfg)?;
    Ok(EtaSolution { eta: root.x, q_value: q_population(f, g, root.x)?, h_mean_residual: root.fx, bracket: (lo, hi) })
}

/// Sample version of `H`.
pub fn h_mean_empirical(f: &QuasiLikelihood, residuals: &[f64], eta: f64) -> f64 {
    let s: f64 = residuals.iter().map(|e| 1.0 + f.h(e / eta)).sum();
    s / residuals.len() as f64
}

/// Sample version of `Q`.
pub fn q_empirical(f: &QuasiLikelihood, residuals: &[f64], eta: f64) -> f64 {
    let s: f64 = residuals.iter().map(|e| f.log_density(e / eta)).sum();
    -libm::log(eta) + s / residuals.len() as f64
}

pub const MIN_RESIDUALS: usize = 30;

/// η̂_f from a residual sample: the root of the sample `H`.
///
/// The bracket is expressed in units of the residuals' root mean square, so
/// scaling every residual by `c` scales η̂ by `c`.
pub fn eta_empirical(f: &QuasiLikelihood, residuals: &[f64]) -> Result<EtaSolution> {
    if residuals.len() < MIN_RESIDUALS {
        return Err(Error::InvalidInput(format!("need at least {MIN_RESIDUALS} residuals, got {}", residuals.len())));
    }
    if let Some(i) = residuals.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite residual at index {i}")));
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::Degenerate("residuals have zero variance".into()));
    }
    let rms = libm::sqrt(residuals.iter().map(|e| e * e).sum::<f64>() / n);
    let mut h = |eta: f64| Ok(h_mean_empirical(f, residuals, eta));
    let (lo, hi) = find_bracket(&mut h, INITIAL_BRACKET.0 * rms, INITIAL_BRACKET.1 * rms)?;
    let cfg = RootConfig { x_rel_tol: 1e-12, f_tol: 1e-10, max_iterations: 200 };
    let root = brent(&mut h, lo, hi, &cfg)?;
    Ok(EtaSolution {
        eta: root.x,
        q_value: q_empirical(f, residuals, root.x),
        h_mean_residual: root.fx,
        bracket: (lo, hi),
    })
}

/// Where expectations in [`q_profile`] come from.
#[derive(Clone, Copy, Debug)]
pub enum EtaSource<'a> {
    Population(&'a InnovationDistribution),
    Sample(&'a [f64]),
}

/// `Q(η)` over a grid of η values.
pub fn q_profile(f: &QuasiLikelihood, source: EtaSource<'_>, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&eta| {
            if !(eta > 0.0) {
                return Err(Error::InvalidInput(format!("grid value {eta} is not positive")));
            }
            match source {
                EtaSource::Population(g) => q_population(f, g, eta),
                EtaSource::Sample(r) => Ok(q_empirical(f, r, eta)),
            }
        })
        .collect()
}

/// Closed form for a generalized Gaussian likelihood:
/// `η_f = (β k_β E|ε|^β)^{1/β}`.
pub fn eta_gg_closed_form(beta: f64, g: &InnovationDistribution) -> Result<f64> {
    let f = QuasiLikelihood::generalized_gaussian(beta)?;
    let g = density_of(g)?;
    // β k_β |x|^β = −h(x)
    let m = expectation(g, |x| -f.h(x))?;
    Ok(libm::pow(m, 1.0 / beta))
}
