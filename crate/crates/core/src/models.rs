//! Model layer: a parametric family of light-tailed Lévy processes closed
//! under exponential change of measure.
//!
//! A process ξ is described by a linear drift, a Brownian coefficient
//! σ > 0 and finitely many compound-Poisson components whose magnitudes are
//! exponential with one-sided sign.  Its cumulant is
//!
//! ```text
//! ψ(s) = drift·s + σ²s²/2 + Σ_j λ_j (β_j / (β_j − sign_j·s) − 1)
//! ```
//!
//! on the domain where every `sign_j·s < β_j`.  The family is closed under
//! the Esscher tilt `dP̃/dP = exp(θ ξ_t)` and under negation, which is what
//! the conditioned samplers lean on: tilting shifts the cumulant argument
//! (ψ̃(s) = ψ(s + θ)) and the negated tilted process (the "dual") satisfies
//! Cramér's condition again with the same root θ.

use rand::Rng;
use rand_distr::{Exp, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for the Cramér root θ.
pub const THETA_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("jump component {index}: rate must be finite and >= 0, beta finite and > 0, sign ±1")]
    BadJump { index: usize },
    #[error("diffusion coefficient must be positive (regularity of 0 requires sigma > 0)")]
    NonPositiveSigma,
    #[error("mean per unit time is {mean}; the process must drift to -infinity")]
    MeanNotNegative { mean: f64 },
    #[error("cumulant has no positive root below its first pole; exponential moments too thin")]
    NoCramerRoot,
    #[error("cumulant evaluated at s = {s}, outside the finite-moment domain")]
    OutsideDomain { s: f64 },
    #[error("operation requires a spectrally negative process (no upward jumps)")]
    NotSpectrallyNegative,
    #[error("dual model reproduced theta = {got}, expected {expected}")]
    DualThetaDrift { got: f64, expected: f64 },
    #[error("root bracketing failed; cumulant values are not finite")]
    RootBracketFailed,
}

/// One compound-Poisson component: events at rate `rate`, magnitudes
/// exponential with parameter `beta`, signed by `sign` (+1 or -1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpSpec {
    pub rate: f64,
    pub beta: f64,
    pub sign: i8,
}

impl JumpSpec {
    fn is_valid(&self) -> bool {
        self.rate.is_finite()
            && self.rate >= 0.0
            && self.beta.is_finite()
            && self.beta > 0.0
            && (self.sign == 1 || self.sign == -1)
    }
}

/// Raw parameters of a member of the family.  No Cramér structure is implied;
/// tilted and negated processes (which drift upward) are carried by this type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    pub drift: f64,
    pub sigma: f64,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
}

impl Dynamics {
    pub fn brownian(drift: f64, sigma: f64) -> Self {
        Dynamics { drift, sigma, jumps: Vec::new() }
    }

    /// Supremum of the s-domain of the cumulant (first pole from positive
    /// jump components), `f64::INFINITY` if there is none.
    pub fn domain_sup(&self) -> f64 {
        self.jumps
            .iter()
            .filter(|j| j.sign == 1 && j.rate > 0.0)
            .map(|j| j.beta)
            .fold(f64::INFINITY, f64::min)
    }

    /// Infimum of the s-domain (pole from negative jump components).
    pub fn domain_inf(&self) -> f64 {
        self.jumps
            .iter()
            .filter(|j| j.sign == -1 && j.rate > 0.0)
            .map(|j| -j.beta)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn psi_unchecked(&self, s: f64) -> f64 {
        let mut v = self.drift * s + 0.5 * self.sigma * self.sigma * s * s;
        for j in &self.jumps {
            v += j.rate * (j.beta / (j.beta - j.sign as f64 * s) - 1.0);
        }
        v
    }

    fn psi_prime_unchecked(&self, s: f64) -> f64 {
        let mut v = self.drift + self.sigma * self.sigma * s;
        for j in &self.jumps {
            let d = j.beta - j.sign as f64 * s;
            v += j.rate * j.sign as f64 * j.beta / (d * d);
        }
        v
    }

    /// Cumulant ψ(s) = log E exp(s ξ₁).
    pub fn cumulant(&self, s: f64) -> Result<f64, ModelError> {
        if s <= self.domain_inf() || s >= self.domain_sup() {
            return Err(ModelError::OutsideDomain { s });
        }
        Ok(self.psi_unchecked(s))
    }

    /// ψ′(s); at s = 0 this is the mean of ξ₁.
    pub fn cumulant_prime(&self, s: f64) -> Result<f64, ModelError> {
        if s <= self.domain_inf() || s >= self.domain_sup() {
            return Err(ModelError::OutsideDomain { s });
        }
        Ok(self.psi_prime_unchecked(s))
    }

    /// Mean of ξ₁.
    pub fn mean(&self) -> f64 {
        self.psi_prime_unchecked(0.0)
    }

    /// Total jump intensity.
    pub fn total_rate(&self) -> f64 {
        self.jumps.iter().map(|j| j.rate).sum()
    }

    /// Law of −ξ.
    pub fn negate(&self) -> Dynamics {
        Dynamics {
            drift: -self.drift,
            sigma: self.sigma,
            jumps: self
                .jumps
                .iter()
                .map(|j| JumpSpec { rate: j.rate, beta: j.beta, sign: -j.sign })
                .collect(),
        }
    }

    /// Dynamics under the Esscher change of measure with parameter `theta`.
    ///
    /// Drift gains σ²θ; a component (λ, β, sign) becomes
    /// (λβ/(β − sign·θ), β − sign·θ, sign).
    pub fn tilt(&self, theta: f64) -> Result<Dynamics, ModelError> {
        if theta <= self.domain_inf() || theta >= self.domain_sup() {
            return Err(ModelError::OutsideDomain { s: theta });
        }
        let jumps = self
            .jumps
            .iter()
            .map(|j| {
                let beta = j.beta - j.sign as f64 * theta;
                JumpSpec { rate: j.rate * j.beta / beta, beta, sign: j.sign }
            })
            .collect();
        Ok(Dynamics {
            drift: self.drift + self.sigma * self.sigma * theta,
            sigma: self.sigma,
            jumps,
        })
    }

    /// Exact draw of ξ_t (Gaussian part plus compound-Poisson sums).
    pub fn sample_increment<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let mut x = self.drift * t + self.sigma * t.sqrt() * z;
        for j in &self.jumps {
            if j.rate > 0.0 {
                let n = rng.sample(Poisson::new(j.rate * t).expect("positive rate"));
                let magnitudes = Exp::new(j.beta).expect("positive beta");
                for _ in 0..n as u64 {
                    x += j.sign as f64 * rng.sample::<f64, _>(magnitudes);
                }
            }
        }
        x
    }

    fn check_params(&self) -> Result<(), ModelError> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(ModelError::NonPositiveSigma);
        }
        if !self.drift.is_finite() {
            return Err(ModelError::RootBracketFailed);
        }
        for (index, j) in self.jumps.iter().enumerate() {
            if !j.is_valid() {
                return Err(ModelError::BadJump { index });
            }
        }
        Ok(())
    }
}

/// Unique positive root of the cumulant, bracketed against the first pole and
/// bisected to `THETA_REL_TOL`, with a Newton polish.
pub fn cramer_exponent(dynamics: &Dynamics) -> Result<f64, ModelError> {
    dynamics.check_params()?;
    let mean = dynamics.mean();
    if !(mean < 0.0) {
        return Err(ModelError::MeanNotNegative { mean });
    }

    let sup = dynamics.domain_sup();
    // Find hi with ψ(hi) > 0.  With a pole the cumulant blows up just below
    // it; without one the σ²s²/2 term dominates eventually.
    let mut hi = f64::NAN;
    if sup.is_finite() {
        let mut gap = sup / 2.0;
        for _ in 0..200 {
            let s = sup - gap;
            if s > 0.0 && dynamics.psi_unchecked(s) > 0.0 {
                hi = s;
                break;
            }
            gap /= 2.0;
        }
    } else {
        let mut s = 1.0;
        for _ in 0..200 {
            if dynamics.psi_unchecked(s) > 0.0 {
                hi = s;
                break;
            }
            s *= 2.0;
        }
    }
    if !hi.is_finite() {
        return Err(ModelError::NoCramerRoot);
    }

    // Find lo in (0, hi) with ψ(lo) < 0; exists because ψ < 0 just above 0.
    let mut lo = f64::NAN;
    let mut s = hi / 2.0;
    for _ in 0..200 {
        if dynamics.psi_unchecked(s) < 0.0 {
            lo = s;
            break;
        }
        s /= 2.0;
    }
    if !lo.is_finite() {
        return Err(ModelError::NoCramerRoot);
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dynamics.psi_unchecked(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..3 {
        let f = dynamics.psi_unchecked(theta);
        let fp = dynamics.psi_prime_unchecked(theta);
        let next = theta - f / fp;
        if next > lo && next < hi {
            theta = next;
        }
    }
    if !theta.is_finite() || theta <= 0.0 {
        return Err(ModelError::RootBracketFailed);
    }
    Ok(theta)
}

/// A validated model satisfying Cramér's condition, with the derived
/// quantities every sampler needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    dynamics: Dynamics,
    theta: f64,
    tilted_mean: f64,
}

impl LevyModel {
    /// Checks parameter sanity, negative mean and existence of θ, and caches
    /// θ and the tilted mean ψ′(θ) (which is positive by convexity).
    pub fn validate(dynamics: Dynamics) -> Result<LevyModel, ModelError> {
        let theta = cramer_exponent(&dynamics)?;
        let tilted_mean = dynamics.psi_prime_unchecked(theta);
        debug_assert!(tilted_mean > 0.0);
        Ok(LevyModel { dynamics, theta, tilted_mean })
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    /// The Cramér exponent θ: the positive root of the cumulant.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// ψ′(θ), the upward drift rate of the tilted process.
    pub fn tilted_mean(&self) -> f64 {
        self.tilted_mean
    }

    /// Dynamics of ξ under the tilted measure P̃ (drifts to +∞).
    pub fn tilted(&self) -> Dynamics {
        self.dynamics.tilt(self.theta).expect("theta is inside the domain")
    }

    /// The dual model: law of −ξ under P̃.  Satisfies Cramér's condition
    /// with the same θ, which is re-derived and checked here.
    pub fn dual(&self) -> Result<LevyModel, ModelError> {
        let dual = LevyModel::validate(self.tilted().negate())?;
        let rel = (dual.theta - self.theta).abs() / self.theta;
        if rel > 1e-9 {
            return Err(ModelError::DualThetaDrift { got: dual.theta, expected: self.theta });
        }
        Ok(dual)
    }
}

/// Largest root of ψ(s) = a for a spectrally negative model (no upward
/// jumps), a ≥ 0.  This is the Laplace exponent of the first-passage clock;
/// at a = 0 it returns θ.
pub fn phi_exponent(model: &LevyModel, a: f64) -> Result<f64, ModelError> {
    let dynamics = model.dynamics();
    if dynamics.jumps.iter().any(|j| j.sign == 1 && j.rate > 0.0) {
        return Err(ModelError::NotSpectrallyNegative);
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(ModelError::OutsideDomain { s: a });
    }
    let theta = model.theta();
    if a == 0.0 {
        return Ok(theta);
    }
    // ψ is increasing on [θ, ∞) with ψ(θ) = 0, so the largest root of
    // ψ = a sits in a doubling bracket above θ.
    let mut lo = theta;
    let mut hi = theta.max(1.0);
    for _ in 0..200 {
        if dynamics.psi_unchecked(hi) > a {
            break;
        }
        hi *= 2.0;
    }
    if !(dynamics.psi_unchecked(hi) > a) {
        return Err(ModelError::RootBracketFailed);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dynamics.psi_unchecked(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Estimated normalization constants of the stationary overshoot law:
/// `c_theta` is the converse-tilt normalizer c(θ) and `c_limit` is the
/// Cramér limit C of e^{−θx}·P_x(sup ξ > 0); the two satisfy c(θ)·C = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CramerConstants {
    pub c_theta: f64,
    pub c_limit: f64,
}
