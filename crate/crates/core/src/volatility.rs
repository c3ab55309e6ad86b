//! GARCH(p, q) volatility in scale/shape form.
//!
//! Returns follow `x_t = σ v_t ε_t` with
//! `v_t² = 1 + Σ a_i x²_{t−i} + Σ b_j v²_{t−j}`.
//! The intercept is pinned to one and the overall scale lives in `σ`; the
//! classical form `σ_t² = c + Σ ã_i x²_{t−i} + Σ b̃_j σ²_{t−j}` is recovered
//! through `c = σ²`, `ã_i = σ² a_i`, `b̃_j = b_j`.
//!
//! # Presample values
//!
//! Lags before the first observation use the mean square of the data,
//! `m₂ = mean(x²)`, in place of `x²`, and the value `v₀²` that solves the
//! stationary-mean equation with `E x²` replaced by `m₂`:
//! `v₀² = (1 + m₂ Σa) / (1 − Σb)`. This depends on the parameters only
//! through `γ = (a, b)`, never through `σ`, so the filter is exactly
//! equivariant under `x → c·x, a → a/c²` and its gradient (which includes
//! the presample terms) is the exact gradient of what is computed.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::likelihoods::InnovationDistribution;
use crate::linalg::Matrix;

/// Upper bound on `Σ b_j` keeping the recursion contractive.
pub const MAX_B_SUM: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GarchOrder {
    pub p: usize,
    pub q: usize,
}

impl GarchOrder {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::InvalidParams("GARCH order needs p + q >= 1".into()));
        }
        Ok(GarchOrder { p, q })
    }

    /// Number of free parameters, `1 + p + q`.
    pub fn dim(&self) -> usize {
        1 + self.p + self.q
    }
}

impl core::fmt::Display for GarchOrder {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{},{}", self.p, self.q)
    }
}

/// Parses `"p,q"`.
impl core::str::FromStr for GarchOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(alloc::format!("expected an order like `1,1`, got {s:?}"));
        let (p, q) = s.split_once(',').ok_or_else(bad)?;
        GarchOrder::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawParams"))]
pub struct GarchParams {
    sigma: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawParams {
    sigma: f64,
    #[serde(default)]
    a: Vec<f64>,
    #[serde(default)]
    b: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawParams> for GarchParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        GarchParams::new(r.sigma, r.a, r.b)
    }
}

impl GarchParams {
    pub fn new(sigma: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParams(format!("sigma must be positive and finite, got {sigma}")));
        }
        if a.len() + b.len() == 0 {
            return Err(Error::InvalidParams("GARCH order needs p + q >= 1".into()));
        }
        if let Some(x) = a.iter().chain(&b).find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidParams(format!("ARCH/GARCH coefficients must be nonnegative, got {x}")));
        }
        let sb: f64 = b.iter().sum();
        if sb > MAX_B_SUM {
            return Err(Error::InvalidParams(format!("sum of GARCH coefficients {sb} exceeds {MAX_B_SUM}")));
        }
        Ok(GarchParams { sigma, a, b })
    }

    /// Builds from the stacked vector `θ = (σ, a₁..a_p, b₁..b_q)`.
    pub fn from_vec(order: GarchOrder, theta: &[f64]) -> Result<Self> {
        if theta.len() != order.dim() {
            return Err(Error::InvalidParams(format!(
                "expected {} parameters for order ({order}), got {}",
                order.dim(),
                theta.len()
            )));
        }
        let p = order.p;
        GarchParams::new(theta[0], theta[1..1 + p].to_vec(), theta[1 + p..].to_vec())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.order().dim());
        v.push(self.sigma);
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn order(&self) -> GarchOrder {
        GarchOrder { p: self.a.len(), q: self.b.len() }
    }

    /// Same `γ`, different scale.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        GarchParams::new(sigma, self.a.clone(), self.b.clone())
    }

    /// Names in stacked order: `sigma, a1.., b1..`.
    pub fn names(order: GarchOrder) -> Vec<alloc::string::String> {
        let mut n = vec![alloc::string::String::from("sigma")];
        n.extend((1..=order.p).map(|i| format!("a{i}")));
        n.extend((1..=order.q).map(|j| format!("b{j}")));
        n
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassicGarchParams {
    pub c: f64,
    pub a_tilde: Vec<f64>,
    pub b_tilde: Vec<f64>,
}

pub fn to_classic(params: &GarchParams) -> ClassicGarchParams {
    let s2 = params.sigma * params.sigma;
    ClassicGarchParams { c: s2, a_tilde: params.a.iter().map(|a| s2 * a).collect(), b_tilde: params.b.clone() }
}

pub fn from_classic(classic: &ClassicGarchParams) -> Result<GarchParams> {
    if !(classic.c.is_finite() && classic.c > 0.0) {
        return Err(Error::InvalidParams(format!("intercept must be positive, got {}", classic.c)));
    }
    let sigma = libm::sqrt(classic.c);
    GarchParams::new(sigma, classic.a_tilde.iter().map(|a| a / classic.c).collect(), classic.b_tilde.clone())
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stationarity {
    pub stationary: bool,
    /// `1 − σ²Σa − Σb`
    pub margin: f64,
}

/// Covariance stationarity of the unit-variance-innovation process.
pub fn covariance_stationary(params: &GarchParams) -> Stationarity {
    let margin = 1.0 - persistence(params);
    Stationarity { stationary: margin > 0.0, margin }
}

fn persistence(params: &GarchParams) -> f64 {
    params.sigma * params.sigma * params.a.iter().sum::<f64>() + params.b.iter().sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolatilityPath {
    /// `v_t`, all `>= 1`.
    pub v: Vec<f64>,
    /// `∂v_t/∂γ`, one row per observation.
    pub grad: Matrix,
    /// `v₀`, used for every lag before the sample.
    pub presample_value: f64,
}

impl VolatilityPath {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

pub(crate) fn validate_returns(returns: &[f64], order: GarchOrder) -> Result<()> {
    if returns.is_empty() {
        return Err(Error::InvalidInput("empty return series".into()));
    }
    if let Some(i) = returns.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite return at index {i}")));
    }
    if returns.len() < order.p + order.q + 1 {
        return Err(Error::InvalidInput(format!("series of length {} too short for order ({order})", returns.len())));
    }
    Ok(())
}

/// Reusable recursion state: `v_t²` and `∂v_t²/∂γ` for every `t`.
///
/// The estimators evaluate the recursion thousands of times per fit, so the
/// buffers are kept between calls.
#[derive(Clone, Debug, Default)]
pub(crate) struct Recursion {
    pub x2: Vec<f64>,
    pub m2: f64,
    pub v2: Vec<f64>,
    /// `∂v_t²/∂γ`, row-major `T × (p+q)`.
    pub dv2: Vec<f64>,
    pub v0_sq: f64,
}

impl Recursion {
    pub fn new(returns: &[f64]) -> Self {
        let x2: Vec<f64> = returns.iter().map(|x| x * x).collect();
        let m2 = x2.iter().sum::<f64>() / x2.len().max(1) as f64;
        Recursion { x2, m2, ..Default::default() }
    }

    /// Runs the recursion for `γ = (a, b)`; `want_grad` skips the derivative
    /// pass when only values are needed.
    pub fn run(&mut self, a: &[f64], b: &[f64], want_grad: bool) {
        let (p, q) = (a.len(), b.len());
        let d = p + q;
        let n = self.x2.len();
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        let denom = 1.0 - sb;
        let v0_sq = ((1.0 + sa * self.m2) / denom).max(1.0);
        self.v0_sq = v0_sq;
        // presample derivative of v₀² in γ
        let mut d0 = vec![0.0; d];
        for di in d0.iter_mut().take(p) {
            *di = self.m2 / denom;
        }
        for dj in d0.iter_mut().skip(p) {
            *dj = (1.0 + sa * self.m2) / (denom * denom);
        }

        self.v2.clear();
        self.v2.resize(n, 0.0);
        if want_grad {
            self.dv2.clear();
            self.dv2.resize(n * d, 0.0);
        }
        let m2 = self.m2;
        for t in 0..n {
            let mut s = 1.0;
            for (i, ai) in a.iter().enumerate() {
                let lag = t as isize - 1 - i as isize;
                s += ai * if lag >= 0 { self.x2[lag as usize] } else { m2 };
            }
            for (j, bj) in b.iter().enumerate() {
                let lag = t as isize - 1 - j as isize;
                s += bj * if lag >= 0 { self.v2[lag as usize] } else { v0_sq };
            }
            self.v2[t] = s.max(1.0);
            if !want_grad {
                continue;
            }
            let row = t * d;
            for i in 0..p {
                let lag = t as isize - 1 - i as isize;
                self.dv2[row + i] = if lag >= 0 { self.x2[lag as usize] } else { m2 };
            }
            for j in 0..q {
                let lag = t as isize - 1 - j as isize;
                self.dv2[row + p + j] = if lag >= 0 { self.v2[lag as usize] } else { v0_sq };
            }
            for (j, bj) in b.iter().enumerate() {
                let lag = t as isize - 1 - j as isize;
                if lag >= 0 {
                    let src = lag as usize * d;
                    for k in 0..d {
                        self.dv2[row + k] += bj * self.dv2[src + k];
                    }
                } else {
                    for (k, v) in d0.iter().enumerate() {
                        self.dv2[row + k] += bj * v;
                    }
                }
            }
        }
    }
}

/// Runs the volatility recursion over `returns`.
pub fn filter(params: &GarchParams, returns: &[f64]) -> Result<VolatilityPath> {
    let order = params.order();
    validate_returns(returns, order)?;
    let mut rec = Recursion::new(returns);
    rec.run(&params.a, &params.b, true);
    let d = order.p + order.q;
    let n = returns.len();
    let mut grad = Matrix::zeros(n, d);
    let v: Vec<f64> = rec.v2.iter().map(|v2| libm::sqrt(*v2)).collect();
    for t in 0..n {
        for k in 0..d {
            grad[(t, k)] = rec.dv2[t * d + k] / (2.0 * v[t]);
        }
    }
    Ok(VolatilityPath { v, grad, presample_value: libm::sqrt(rec.v0_sq) })
}

/// Simulated returns together with the volatility path that generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedPath {
    pub returns: Vec<f64>,
    pub v: Vec<f64>,
}

/// Simulates `t_len` returns after discarding `burn_in` warm-up draws.
///
/// The recursion starts from the stationary mean of `v²` when the process is
/// covariance stationary and from `v² = 1` otherwise.
pub fn simulate_path<R: RngCore + ?Sized>(
    params: &GarchParams,
    innov: &InnovationDistribution,
    t_len: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<SimulatedPath> {
    if t_len == 0 {
        return Err(Error::InvalidInput("simulation length must be at least 1".into()));
    }
    let n = t_len + burn_in;
    let eps = innov.sample_with(rng, n);
    let (p, q) = (params.a.len(), params.b.len());
    let st = covariance_stationary(params);
    let v0_sq = if st.margin > 1e-6 { 1.0 / st.margin } else { 1.0 };
    let x0_sq = params.sigma * params.sigma * v0_sq;
    let mut x = Vec::with_capacity(n);
    let mut v2: Vec<f64> = Vec::with_capacity(n);
    for t in 0..n {
        let mut s = 1.0;
        for i in 0..p {
            s += params.a[i] * if t > i { x[t - 1 - i] * x[t - 1 - i] } else { x0_sq };
        }
        for j in 0..q {
            s += params.b[j] * if t > j { v2[t - 1 - j] } else { v0_sq };
        }
        v2.push(s);
        x.push(params.sigma * libm::sqrt(s) * eps[t]);
    }
    Ok(SimulatedPath { returns: x.split_off(burn_in), v: v2.split_off(burn_in).into_iter().map(libm::sqrt).collect() })
}

/// Simulated returns, deterministic in `seed`.
pub fn simulate(
    params: &GarchParams,
    innov: &InnovationDistribution,
    t_len: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_path(params, innov, t_len, burn_in, &mut rng).map(|p| p.returns)
}
