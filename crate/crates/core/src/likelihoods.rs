//! Standardized densities (mean 0, variance 1) and their score weights.
//!
//! For a density `f` the score weight is `h(x) = x f'(x)/f(x)`. Everything
//! downstream consumes `h` and `x h'(x)`; the latter is exposed directly
//! because it stays bounded at the origin for generalized Gaussian shapes
//! below one, where `h'` itself does not.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, RngCore};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal, StudentT};

use crate::asymptotics::MomentFunctionals;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_real_line, QuadratureConfig};

/// Density family tag as used in configs and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Gaussian,
    StudentT,
    GeneralizedGaussian,
    SkewedT,
    TransformedStable,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::StudentT => "student_t",
            Family::GeneralizedGaussian => "generalized_gaussian",
            Family::SkewedT => "skewed_t",
            Family::TransformedStable => "transformed_stable",
        }
    }
}

/// Shape of a closed-form standardized density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Gaussian,
    StudentT {
        nu: f64,
    },
    GeneralizedGaussian {
        beta: f64,
    },
    /// Skewed t with tail weight `nu` and skew `lambda`; `lambda > 0` puts
    /// the heavier tail on the left.
    SkewedT {
        nu: f64,
        lambda: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Consts {
    Gaussian,
    StudentT { nu: f64, log_c: f64 },
    Gg { beta: f64, log_norm: f64, k: f64 },
    // Hansen's construction for y = −x
    SkewedT { nu: f64, lambda: f64, log_bc: f64, a: f64, b: f64 },
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// A standardized density with closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Density {
    shape: Shape,
    consts: Consts,
}

impl Density {
    pub fn new(shape: Shape) -> Result<Self> {
        let consts = match shape {
            Shape::Gaussian => Consts::Gaussian,
            Shape::StudentT { nu } => {
                if !(nu > 2.0 && nu.is_finite()) {
                    return Err(Error::InvalidParams(format!("t degrees of freedom must exceed 2, got {nu}")));
                }
                Consts::StudentT { nu, log_c: t_log_c(nu) }
            }
            Shape::GeneralizedGaussian { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidParams(format!("gg shape must be positive, got {beta}")));
                }
                let (lg1, lg3) = (lgamma(1.0 / beta), lgamma(3.0 / beta));
                // scale s with unit variance, then k = s^{-β}
                let log_s = 0.5 * (lg1 - lg3);
                let log_norm = libm::log(beta / 2.0) - log_s - lg1;
                let k = libm::exp(0.5 * beta * (lg3 - lg1));
                Consts::Gg { beta, log_norm, k }
            }
            Shape::SkewedT { nu, lambda } => {
                if !(nu > 2.0 && nu.is_finite()) {
                    return Err(Error::InvalidParams(format!("skewed t degrees of freedom must exceed 2, got {nu}")));
                }
                if !(lambda.abs() < 1.0) {
                    return Err(Error::InvalidParams(format!("skewness must lie in (-1, 1), got {lambda}")));
                }
                let log_c = t_log_c(nu);
                let c = libm::exp(log_c);
                let a = 4.0 * lambda * c * (nu - 2.0) / (nu - 1.0);
                let b = libm::sqrt(1.0 + 3.0 * lambda * lambda - a * a);
                Consts::SkewedT { nu, lambda, log_bc: libm::log(b) + log_c, a, b }
            }
        };
        Ok(Density { shape, consts })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn family(&self) -> Family {
        match self.shape {
            Shape::Gaussian => Family::Gaussian,
            Shape::StudentT { .. } => Family::StudentT,
            Shape::GeneralizedGaussian { .. } => Family::GeneralizedGaussian,
            Shape::SkewedT { .. } => Family::SkewedT,
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match self.consts {
            Consts::Gaussian => -LN_SQRT_2PI - 0.5 * x * x,
            Consts::StudentT { nu, log_c } => log_c - 0.5 * (nu + 1.0) * libm::log1p(x * x / (nu - 2.0)),
            Consts::Gg { beta, log_norm, k } => log_norm - k * libm::pow(x.abs(), beta),
            Consts::SkewedT { nu, lambda, log_bc, a, b } => {
                let (u, _) = skew_u(-x, lambda, a, b);
                log_bc - 0.5 * (nu + 1.0) * libm::log1p(u * u / (nu - 2.0))
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        libm::exp(self.log_density(x))
    }

    /// `h(x) = x f'(x)/f(x)`.
    pub fn h(&self, x: f64) -> f64 {
        match self.consts {
            Consts::Gaussian => -x * x,
            Consts::StudentT { nu, .. } => -(nu + 1.0) * x * x / (nu - 2.0 + x * x),
            Consts::Gg { beta, k, .. } => -beta * k * libm::pow(x.abs(), beta),
            Consts::SkewedT { nu, lambda, a, b, .. } => {
                let y = -x;
                let (u, du) = skew_u(y, lambda, a, b);
                -(nu + 1.0) * y * u * du / (nu - 2.0 + u * u)
            }
        }
    }

    /// `x h'(x)`, continuous everywhere including the origin.
    pub fn x_h_prime(&self, x: f64) -> f64 {
        match self.consts {
            Consts::Gaussian => -2.0 * x * x,
            Consts::StudentT { nu, .. } => {
                let d = nu - 2.0 + x * x;
                -2.0 * (nu + 1.0) * (nu - 2.0) * x * x / (d * d)
            }
            Consts::Gg { beta, k, .. } => -beta * beta * k * libm::pow(x.abs(), beta),
            Consts::SkewedT { nu, lambda, a, b, .. } => {
                let y = -x;
                y * skew_h_prime(y, nu, lambda, a, b)
            }
        }
    }

    /// `h'(x)`; set to 0 at the origin where it is singular (gg with β < 1).
    pub fn h_prime(&self, x: f64) -> f64 {
        match self.consts {
            Consts::Gaussian => -2.0 * x,
            Consts::StudentT { nu, .. } => {
                let d = nu - 2.0 + x * x;
                -2.0 * (nu + 1.0) * (nu - 2.0) * x / (d * d)
            }
            Consts::Gg { beta, k, .. } => {
                if x == 0.0 {
                    0.0
                } else {
                    -beta * beta * k * libm::pow(x.abs(), beta - 1.0) * x.signum()
                }
            }
            Consts::SkewedT { nu, lambda, a, b, .. } => -skew_h_prime(-x, nu, lambda, a, b),
        }
    }

    /// Tail index: absolute moments of order `r` exist iff `r < tail_index`.
    pub fn tail_index(&self) -> f64 {
        match self.shape {
            Shape::StudentT { nu } | Shape::SkewedT { nu, .. } => nu,
            _ => f64::INFINITY,
        }
    }

    /// Growth exponent of `|h(x)|` as `|x| → ∞`.
    pub fn h_growth(&self) -> f64 {
        match self.shape {
            Shape::Gaussian => 2.0,
            Shape::StudentT { .. } | Shape::SkewedT { .. } => 0.0,
            Shape::GeneralizedGaussian { beta } => beta,
        }
    }

    /// Closed-form `E(ε²−1)²` where available (symmetric families).
    pub fn excess_fourth_moment(&self) -> Option<f64> {
        match self.shape {
            Shape::Gaussian => Some(2.0),
            Shape::StudentT { nu } => Some(if nu > 4.0 { 2.0 + 6.0 / (nu - 4.0) } else { f64::INFINITY }),
            Shape::GeneralizedGaussian { beta } => {
                let kurt = libm::exp(lgamma(5.0 / beta) + lgamma(1.0 / beta) - 2.0 * lgamma(3.0 / beta));
                Some(kurt - 1.0)
            }
            Shape::SkewedT { .. } => None,
        }
    }

    /// Kink of a piecewise density, if any.
    fn breakpoint(&self) -> Option<f64> {
        match self.consts {
            Consts::SkewedT { a, b, .. } => Some(a / b),
            _ => None,
        }
    }

    pub fn sample_with<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match self.consts {
            Consts::Gaussian => (0..n).map(|_| StandardNormal.sample(rng)).collect(),
            Consts::StudentT { nu, .. } => {
                let t = StudentT::new(nu).expect("validated degrees of freedom");
                let scale = libm::sqrt((nu - 2.0) / nu);
                (0..n).map(|_| scale * t.sample(rng)).collect()
            }
            Consts::Gg { beta, k, .. } => {
                let gamma = Gamma::new(1.0 / beta, 1.0).expect("validated shape");
                // |x| = (W/k)^{1/β} with W ~ Gamma(1/β)
                (0..n)
                    .map(|_| {
                        let w: f64 = gamma.sample(rng);
                        let m = libm::pow(w / k, 1.0 / beta);
                        if rng.random::<bool>() {
                            m
                        } else {
                            -m
                        }
                    })
                    .collect()
            }
            Consts::SkewedT { nu, lambda, a, b, .. } => {
                let t = StudentT::new(nu).expect("validated degrees of freedom");
                let scale = libm::sqrt((nu - 2.0) / nu);
                (0..n)
                    .map(|_| {
                        let w = (scale * t.sample(rng)).abs();
                        let u: f64 = rng.random();
                        let z = if u < 0.5 * (1.0 - lambda) { -(1.0 - lambda) * w } else { (1.0 + lambda) * w };
                        -(z - a) / b
                    })
                    .collect()
            }
        }
    }
}

fn t_log_c(nu: f64) -> f64 {
    lgamma(0.5 * (nu + 1.0)) - lgamma(0.5 * nu) - 0.5 * libm::log(PI * (nu - 2.0))
}

// Hansen's standardized argument `u = (b y + a)/(1 ∓ λ)` and `du/dy`.
fn skew_u(y: f64, lambda: f64, a: f64, b: f64) -> (f64, f64) {
    let z = b * y + a;
    let s = if z < 0.0 { 1.0 - lambda } else { 1.0 + lambda };
    (z / s, b / s)
}

// Derivative of Hansen's score weight in its own argument y.
fn skew_h_prime(y: f64, nu: f64, lambda: f64, a: f64, b: f64) -> f64 {
    let (u, du) = skew_u(y, lambda, a, b);
    let d = nu - 2.0 + u * u;
    -(nu + 1.0) * du * ((u + y * du) * d - 2.0 * y * u * u * du) / (d * d)
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            Shape::Gaussian => write!(f, "gaussian"),
            Shape::StudentT { nu } => write!(f, "t({nu})"),
            Shape::GeneralizedGaussian { beta } => write!(f, "gg({beta})"),
            Shape::SkewedT { nu, lambda } => write!(f, "skewed_t({nu}, {lambda})"),
        }
    }
}

/// A symmetric quasi-likelihood: Gaussian, standardized t, or generalized
/// Gaussian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiLikelihood(Density);

impl QuasiLikelihood {
    pub fn gaussian() -> Self {
        QuasiLikelihood(Density { shape: Shape::Gaussian, consts: Consts::Gaussian })
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        Density::new(Shape::StudentT { nu }).map(QuasiLikelihood)
    }

    pub fn generalized_gaussian(beta: f64) -> Result<Self> {
        Density::new(Shape::GeneralizedGaussian { beta }).map(QuasiLikelihood)
    }

    pub fn from_density(d: Density) -> Result<Self> {
        match d.shape {
            Shape::SkewedT { .. } => Err(Error::Unsupported("skewed t is not available as a quasi-likelihood".into())),
            _ => Ok(QuasiLikelihood(d)),
        }
    }

    pub fn density(&self) -> &Density {
        &self.0
    }

    pub fn family(&self) -> Family {
        self.0.family()
    }

    /// `ν` for t, `β` for gg, `None` for Gaussian.
    pub fn shape_param(&self) -> Option<f64> {
        match self.0.shape {
            Shape::StudentT { nu } => Some(nu),
            Shape::GeneralizedGaussian { beta } => Some(beta),
            _ => None,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        self.0.shape == Shape::Gaussian
    }

    pub fn log_density(&self, x: f64) -> f64 {
        self.0.log_density(x)
    }

    pub fn h(&self, x: f64) -> f64 {
        self.0.h(x)
    }

    pub fn h_prime(&self, x: f64) -> f64 {
        self.0.h_prime(x)
    }

    pub fn x_h_prime(&self, x: f64) -> f64 {
        self.0.x_h_prime(x)
    }

    /// Tail-weight ordering key: larger means lighter tails.
    pub(crate) fn lightness(&self) -> (u8, f64) {
        match self.0.shape {
            Shape::Gaussian => (3, 0.0),
            Shape::GeneralizedGaussian { beta } => (2, beta),
            Shape::StudentT { nu } => (1, nu),
            Shape::SkewedT { nu, .. } => (0, nu),
        }
    }
}

impl fmt::Display for QuasiLikelihood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Symmetric stable law pushed through `z ↦ sign(z)|z|^{α/3}` and scaled to
/// unit variance. The result has tail index 3: finite variance, infinite
/// fourth moment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformedStable {
    alpha: f64,
    scale: f64,
}

impl TransformedStable {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidParams(format!("stable index must lie in (1, 2), got {alpha}")));
        }
        // E|Z|^p for the standard symmetric stable law, p = 2α/3 < α
        let p = 2.0 * alpha / 3.0;
        let moment = libm::pow(2.0, p) * libm::tgamma(0.5 * (1.0 + p)) * libm::tgamma(1.0 - p / alpha)
            / (libm::tgamma(1.0 - 0.5 * p) * libm::sqrt(PI));
        Ok(TransformedStable { alpha, scale: 1.0 / libm::sqrt(moment) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sample_with<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let alpha = self.alpha;
        let power = alpha / 3.0;
        (0..n)
            .map(|_| {
                // Chambers–Mallows–Stuck, symmetric case
                let v = PI * (rng.random::<f64>() - 0.5);
                let w: f64 = Exp1.sample(rng);
                let z = libm::sin(alpha * v) / libm::pow(libm::cos(v), 1.0 / alpha)
                    * libm::pow(libm::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
                self.scale * libm::pow(z.abs(), power).copysign(z)
            })
            .collect()
    }
}

/// Law of the innovations `ε_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnovationDistribution {
    Density(Density),
    TransformedStable(TransformedStable),
}

impl InnovationDistribution {
    pub fn gaussian() -> Self {
        InnovationDistribution::Density(*QuasiLikelihood::gaussian().density())
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        Density::new(Shape::StudentT { nu }).map(InnovationDistribution::Density)
    }

    pub fn generalized_gaussian(beta: f64) -> Result<Self> {
        Density::new(Shape::GeneralizedGaussian { beta }).map(InnovationDistribution::Density)
    }

    pub fn skewed_t(nu: f64, lambda: f64) -> Result<Self> {
        Density::new(Shape::SkewedT { nu, lambda }).map(InnovationDistribution::Density)
    }

    pub fn transformed_stable(alpha: f64) -> Result<Self> {
        TransformedStable::new(alpha).map(InnovationDistribution::TransformedStable)
    }

    pub fn family(&self) -> Family {
        match self {
            InnovationDistribution::Density(d) => d.family(),
            InnovationDistribution::TransformedStable(_) => Family::TransformedStable,
        }
    }

    /// The closed-form density, if there is one.
    pub fn density(&self) -> Option<&Density> {
        match self {
            InnovationDistribution::Density(d) => Some(d),
            InnovationDistribution::TransformedStable(_) => None,
        }
    }

    /// Absolute moments of order `r` exist iff `r < tail_index`.
    pub fn tail_index(&self) -> f64 {
        match self {
            InnovationDistribution::Density(d) => d.tail_index(),
            InnovationDistribution::TransformedStable(_) => 3.0,
        }
    }

    pub fn sample_with<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match self {
            InnovationDistribution::Density(d) => d.sample_with(rng, n),
            InnovationDistribution::TransformedStable(s) => s.sample_with(rng, n),
        }
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }
}

impl From<QuasiLikelihood> for InnovationDistribution {
    fn from(f: QuasiLikelihood) -> Self {
        InnovationDistribution::Density(f.0)
    }
}

impl fmt::Display for InnovationDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnovationDistribution::Density(d) => d.fmt(f),
            InnovationDistribution::TransformedStable(s) => write!(f, "stable({})", s.alpha),
        }
    }
}

/// Serialized form `{"family": ..., "shape": ..., "skew": ...}`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilySpec {
    pub family: Family,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub shape: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub skew: Option<f64>,
}

fn need(v: Option<f64>, what: &str, family: Family) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParams(format!("{} requires `{what}`", family.as_str())))
}

impl TryFrom<FamilySpec> for InnovationDistribution {
    type Error = Error;
    fn try_from(s: FamilySpec) -> Result<Self> {
        match s.family {
            Family::Gaussian => Ok(InnovationDistribution::gaussian()),
            Family::StudentT => InnovationDistribution::student_t(need(s.shape, "shape", s.family)?),
            Family::GeneralizedGaussian => {
                InnovationDistribution::generalized_gaussian(need(s.shape, "shape", s.family)?)
            }
            Family::SkewedT => {
                InnovationDistribution::skewed_t(need(s.shape, "shape", s.family)?, need(s.skew, "skew", s.family)?)
            }
            Family::TransformedStable => InnovationDistribution::transformed_stable(need(s.shape, "shape", s.family)?),
        }
    }
}

impl TryFrom<FamilySpec> for QuasiLikelihood {
    type Error = Error;
    fn try_from(s: FamilySpec) -> Result<Self> {
        match InnovationDistribution::try_from(s)? {
            InnovationDistribution::Density(d) => QuasiLikelihood::from_density(d),
            InnovationDistribution::TransformedStable(_) => {
                Err(Error::Unsupported("transformed stable is not available as a quasi-likelihood".into()))
            }
        }
    }
}

impl From<&InnovationDistribution> for FamilySpec {
    fn from(g: &InnovationDistribution) -> Self {
        let family = g.family();
        match g {
            InnovationDistribution::TransformedStable(s) => FamilySpec { family, shape: Some(s.alpha), skew: None },
            InnovationDistribution::Density(d) => match d.shape {
                Shape::Gaussian => FamilySpec { family, shape: None, skew: None },
                Shape::StudentT { nu } => FamilySpec { family, shape: Some(nu), skew: None },
                Shape::GeneralizedGaussian { beta } => FamilySpec { family, shape: Some(beta), skew: None },
                Shape::SkewedT { nu, lambda } => FamilySpec { family, shape: Some(nu), skew: Some(lambda) },
            },
        }
    }
}

impl From<&QuasiLikelihood> for FamilySpec {
    fn from(f: &QuasiLikelihood) -> Self {
        FamilySpec::from(&InnovationDistribution::from(*f))
    }
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for InnovationDistribution {
        fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
            FamilySpec::from(self).serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for InnovationDistribution {
        fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
            let spec = FamilySpec::deserialize(d)?;
            InnovationDistribution::try_from(spec).map_err(serde::de::Error::custom)
        }
    }

    impl Serialize for QuasiLikelihood {
        fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
            FamilySpec::from(self).serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for QuasiLikelihood {
        fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
            let spec = FamilySpec::deserialize(d)?;
            QuasiLikelihood::try_from(spec).map_err(serde::de::Error::custom)
        }
    }
}

/// Parses the short forms `gaussian`, `t:5`, `gg:0.6`, `skewed_t:7:0.5` and
/// `stable:1.5`.
impl FromStr for InnovationDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::InvalidInput(format!("missing parameter in `{s}`")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number in `{s}`")))
        };
        let extra = |n: usize| -> Result<()> {
            if parts.len() > n {
                Err(Error::InvalidInput(format!("too many parameters in `{s}`")))
            } else {
                Ok(())
            }
        };
        match parts[0].trim() {
            "gaussian" | "normal" => {
                extra(1)?;
                Ok(InnovationDistribution::gaussian())
            }
            "t" | "student_t" => {
                extra(2)?;
                InnovationDistribution::student_t(num(1)?)
            }
            "gg" | "generalized_gaussian" => {
                extra(2)?;
                InnovationDistribution::generalized_gaussian(num(1)?)
            }
            "skewed_t" | "skt" => {
                extra(3)?;
                InnovationDistribution::skewed_t(num(1)?, num(2)?)
            }
            "stable" | "transformed_stable" => {
                extra(2)?;
                InnovationDistribution::transformed_stable(num(1)?)
            }
            other => Err(Error::InvalidInput(format!("unknown family `{other}`"))),
        }
    }
}

impl FromStr for QuasiLikelihood {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<InnovationDistribution>()? {
            InnovationDistribution::Density(d) => QuasiLikelihood::from_density(d),
            InnovationDistribution::TransformedStable(_) => {
                Err(Error::Unsupported(format!("`{s}` is not available as a quasi-likelihood")))
            }
        }
    }
}

/// Expands `t:3,5,7` style lists into individual specs; a family prefix
/// carries over to following bare numbers.
pub fn parse_family_list(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut current: Option<String> = None;
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if item.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            let fam = item.split(':').next().unwrap_or("").to_string();
            current = Some(fam);
            out.push(item.to_string());
        } else {
            let fam = current
                .as_ref()
                .ok_or_else(|| Error::InvalidInput(format!("number `{item}` without a family prefix")))?;
            out.push(format!("{fam}:{item}"));
        }
    }
    Ok(out)
}

fn expect<F: Fn(f64) -> f64>(g: &Density, phi: F, cfg: &QuadratureConfig) -> Result<f64> {
    let integrand = |x: f64| {
        let w = g.density(x);
        if w == 0.0 {
            0.0
        } else {
            phi(x) * w
        }
    };
    // centre the log-spaced nodes on the kink of a piecewise density
    let c = g.breakpoint().unwrap_or(0.0);
    Ok(integrate_real_line(|u| integrand(c + u), cfg)?.value)
}

/// `E_g φ(ε)` by quadrature.
pub fn expectation<F: Fn(f64) -> f64>(g: &Density, phi: F) -> Result<f64> {
    expect(g, phi, &QuadratureConfig::default())
}

/// Population moment functionals of `f` under innovations `g` at scale `eta`.
///
/// Expectations that diverge (heavy-tailed `g`) are reported as `±∞`.
pub fn moment_functionals(f: &QuasiLikelihood, g: &InnovationDistribution, eta: f64) -> Result<MomentFunctionals> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParams(format!("eta must be positive, got {eta}")));
    }
    let g = g
        .density()
        .ok_or_else(|| Error::Unsupported("moment functionals need an innovation law with a density".into()))?;
    let tail = g.tail_index();
    let grow = f.density().h_growth();
    let h1 = |x: f64| 1.0 + f.h(x / eta);
    let e_h2 = if grow < tail { expectation(g, |x| f.x_h_prime(x / eta))? } else { f64::NEG_INFINITY };
    let e_h1_sq = if 2.0 * grow < tail {
        expectation(g, |x| {
            let v = h1(x);
            v * v
        })?
    } else {
        f64::INFINITY
    };
    let e_eps4 = if 4.0 < tail {
        match g.excess_fourth_moment() {
            Some(v) => v,
            None => expectation(g, |x| {
                let e = x * x - 1.0;
                e * e
            })?,
        }
    } else {
        f64::INFINITY
    };
    let e_h1_eps = if grow + 2.0 < tail { expectation(g, |x| h1(x) * (x * x - 1.0))? } else { f64::NEG_INFINITY };
    let fisher_gap = if 2.0 * g.h_growth() < tail {
        Some(
            expectation(g, |x| {
                let v = g.h(x);
                v * v
            })? - 1.0,
        )
    } else {
        None
    };
    Ok(MomentFunctionals::new(e_h1_sq, e_h2, e_eps4, e_h1_eps, fisher_gap))
}

/// Moment functionals with `E_g` replaced by averages over `residuals`.
pub fn moment_functionals_empirical(f: &QuasiLikelihood, residuals: &[f64], eta: f64) -> Result<MomentFunctionals> {
    if residuals.is_empty() {
        return Err(Error::InvalidInput("empty residual sample".into()));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParams(format!("eta must be positive, got {eta}")));
    }
    let n = residuals.len() as f64;
    let (mut s_h1_sq, mut s_h2, mut s_eps4, mut s_h1_eps) = (0.0, 0.0, 0.0, 0.0);
    for &e in residuals {
        let z = e / eta;
        let h1 = 1.0 + f.h(z);
        let e2 = e * e - 1.0;
        s_h1_sq += h1 * h1;
        s_h2 += f.x_h_prime(z);
        s_eps4 += e2 * e2;
        s_h1_eps += h1 * e2;
    }
    Ok(MomentFunctionals::new(s_h1_sq / n, s_h2 / n, s_eps4 / n, s_h1_eps / n, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_real_line;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn all_densities() -> Vec<Density> {
        let mut v = Vec::new();
        v.push(Density::new(Shape::Gaussian).unwrap());
        for nu in [2.5, 3.0, 5.0, 11.0, 30.0] {
            v.push(Density::new(Shape::StudentT { nu }).unwrap());
        }
        for beta in [0.2, 0.5, 1.0, 1.4, 2.0, 4.0] {
            v.push(Density::new(Shape::GeneralizedGaussian { beta }).unwrap());
        }
        v.push(Density::new(Shape::SkewedT { nu: 7.0, lambda: 0.5 }).unwrap());
        v.push(Density::new(Shape::SkewedT { nu: 4.0, lambda: -0.3 }).unwrap());
        v
    }

    #[test]
    fn standardized_mass_mean_and_variance() {
        for d in all_densities() {
            let mass = expectation(&d, |_| 1.0).unwrap();
            let mean = expectation(&d, |x| x).unwrap();
            let var = expectation(&d, |x| x * x).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "{d}: mass {mass}");
            assert!(mean.abs() < 1e-8, "{d}: mean {mean}");
            assert!((var - 1.0).abs() < 1e-8, "{d}: variance {var}");
        }
    }

    #[test]
    fn gaussian_values() {
        let f = QuasiLikelihood::gaussian();
        assert!((f.log_density(0.0) + 0.5 * libm::log(2.0 * PI)).abs() < 1e-15);
        assert_eq!(f.h(2.0), -4.0);
    }

    #[test]
    fn t3_score_weight() {
        let f = QuasiLikelihood::student_t(3.0).unwrap();
        assert!((f.h(1.0) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn gg_two_is_gaussian() {
        let gg = QuasiLikelihood::generalized_gaussian(2.0).unwrap();
        let n = QuasiLikelihood::gaussian();
        for i in 0..=100 {
            let x = -5.0 + 0.1 * i as f64;
            assert!((gg.log_density(x) - n.log_density(x)).abs() < 1e-12);
            assert!((gg.h(x) - n.h(x)).abs() < 1e-12);
            assert!((gg.h_prime(x) - n.h_prime(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn t_density_integrates_to_one() {
        for nu in [2.5, 3.0, 5.0, 11.0] {
            let f = QuasiLikelihood::student_t(nu).unwrap();
            let r = integrate_real_line(|x| libm::exp(f.log_density(x)), &q()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn score_weight_matches_log_density_derivative() {
        for d in all_densities() {
            for x in [-3.7f64, -1.1, -0.2, 0.35, 0.9, 2.4, 6.0] {
                let step = 1e-6 * (1.0 + x.abs());
                let fd = (d.log_density(x + step) - d.log_density(x - step)) / (2.0 * step);
                let h = d.h(x);
                assert!((h - x * fd).abs() < 1e-6 * (1.0 + h.abs()), "{d} at {x}: {h} vs {}", x * fd);
            }
        }
    }

    #[test]
    fn h_prime_matches_finite_difference() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for d in all_densities() {
            for _ in 0..200 {
                let x = 16.0 * (next() - 0.5);
                if x.abs() < 1e-3 {
                    continue;
                }
                if let Consts::SkewedT { a, b, .. } = d.consts {
                    if (x - a / b).abs() < 1e-3 {
                        continue;
                    }
                }
                let step = 1e-6 * x.abs().max(1e-2);
                let fd = (d.h(x + step) - d.h(x - step)) / (2.0 * step);
                let hp = d.h_prime(x);
                assert!((hp - fd).abs() <= 1e-6 * hp.abs().max(1e-3), "{d} at {x}: {hp} vs {fd}");
                assert!((d.x_h_prime(x) - x * hp).abs() <= 1e-12 * (1.0 + (x * hp).abs()));
            }
        }
    }

    #[test]
    fn tail_sign_conditions() {
        for d in all_densities().into_iter().filter(|d| d.family() != Family::SkewedT) {
            for i in -200..=200 {
                let x = i as f64 * 0.07;
                assert!(d.h(x) <= 0.0);
                let xh = d.x_h_prime(x);
                assert!(xh <= 0.0);
                if x != 0.0 {
                    assert!(xh < 0.0, "{d} at {x}");
                }
            }
            assert!(d.h(1e6) < -1.0, "{d}");
        }
    }

    #[test]
    fn fourth_moment_closed_forms_match_quadrature() {
        for d in all_densities() {
            if let Some(k) = d.excess_fourth_moment() {
                if !k.is_finite() {
                    continue;
                }
                let v = expectation(&d, |x| (x * x - 1.0) * (x * x - 1.0)).unwrap();
                assert!((v / k - 1.0).abs() < 1e-8, "{d}: {v} vs {k}");
            }
        }
        let t7 = Density::new(Shape::StudentT { nu: 7.0 }).unwrap();
        assert!((t7.excess_fourth_moment().unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_functionals() {
        let f = QuasiLikelihood::gaussian();
        let m = moment_functionals(&f, &InnovationDistribution::gaussian(), 1.0).unwrap();
        assert!((m.e_h2 + 2.0).abs() < 1e-10);
        assert!((m.e_h1_sq - 2.0).abs() < 1e-10);
        assert!((m.e_eps4 - 2.0).abs() < 1e-12);
        assert!(m.mu.abs() < 1e-10);
    }

    #[test]
    fn heavy_tails_give_infinite_fourth_moment() {
        let f = QuasiLikelihood::student_t(4.0).unwrap();
        let m = moment_functionals(&f, &InnovationDistribution::student_t(3.0).unwrap(), 1.0).unwrap();
        assert!(m.e_eps4.is_infinite() && m.mu.is_infinite());
        assert!(m.a_value.is_finite());
    }

    #[test]
    fn parse_short_forms() {
        let g: InnovationDistribution = "skewed_t:7:0.5".parse().unwrap();
        assert_eq!(g.family(), Family::SkewedT);
        assert!("stable:1.5".parse::<QuasiLikelihood>().is_err());
        assert!("t:2".parse::<QuasiLikelihood>().is_err());
        assert_eq!(
            parse_family_list("gg:0.2,0.6, t:3,5").unwrap(),
            ["gg:0.2", "gg:0.6", "t:3", "t:5"].map(String::from)
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = InnovationDistribution::transformed_stable(1.5).unwrap();
        assert_eq!(g.sample(100, 7), g.sample(100, 7));
        assert_ne!(g.sample(100, 7), g.sample(100, 8));
    }
}
