//! Samplers for the conditioned and limiting path laws: the descent and
//! ascent pieces of the Williams decomposition, stationary crossing pairs,
//! the two-sided limit measures, and conditioned paths from a negative
//! start via importance sampling or exact rejection.
//!
//! Exactness notes.  Interval maxima of simulated paths are exact bridge
//! draws, so every supremum, upward first passage, and stay-below rejection
//! event here is exact in law at any step size; discretization only blurs
//! interior time placement and non-extremal marginals.  Minima are endpoint
//! envelopes except where a construction routes through a negated path.

use crate::functionals::argmax;
use crate::models::{CramerConstants, LevyModel, ModelError};
use crate::path::{
    adaptive_gap, simulate_path, simulate_until_passage, simulate_until_passage_or, SampledPath,
    SimError, StopRule,
};
use crate::stats::bootstrap_se_mean;
use crate::two_sided::{shift_kill, reverse_path, ShiftPoint, TwoSidedPath};
use rand::Rng;
use rand_distr::Exp;
use thiserror::Error;

/// Default cap on rejection attempts.
pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rejection budget of {budget} attempts exhausted")]
    BudgetExhausted { budget: usize },
    #[error("{0}")]
    BadArgument(&'static str),
}

/// Time spans simulated on each side of a two-sided sample's anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizons {
    pub backward: f64,
    pub forward: f64,
}

impl Horizons {
    pub fn new(backward: f64, forward: f64) -> Result<Self, SamplerError> {
        if !(backward > 0.0 && backward.is_finite() && forward > 0.0 && forward.is_finite()) {
            return Err(SamplerError::BadArgument("horizons must be positive and finite"));
        }
        Ok(Horizons { backward, forward })
    }

    /// Twenty mean-crossing times on each side; at that depth the truncated
    /// tails carry e^{-20}-scale mass for every functional used here.
    pub fn default_for(model: &LevyModel) -> Self {
        let h = 20.0 / model.dynamics().mean().abs();
        Horizons { backward: h, forward: h }
    }
}

/// Undershoot/overshoot pair at a level crossing.  `weight` is 1 except for
/// weighted ensembles built by callers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvershootPair {
    pub undershoot: f64,
    pub overshoot: f64,
    pub weight: f64,
}

/// A two-sided path with an importance weight in (0, 1].
#[derive(Debug, Clone)]
pub struct WeightedPath {
    pub path: TwoSidedPath,
    pub weight: f64,
}

/// An accepted rejection sample and the number of attempts it took.
#[derive(Debug, Clone)]
pub struct RejectionDraw {
    pub path: TwoSidedPath,
    pub attempts: usize,
}

/// Samples the post-supremum process η^↓ = (ξ_{σ+t} − sup ξ)_{t≥0}: run
/// the model under the adaptive drawdown stop, split at the supremum,
/// subtract it, truncate to `horizon`.  The result starts at 0 (a supremum
/// attained as a left limit keeps its terminal down-jump) and never rises
/// above 0, with exact interval maxima.
pub fn sample_p_down<R: Rng + ?Sized>(
    model: &LevyModel,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<SampledPath, SamplerError> {
    let gap = adaptive_gap(model.theta());
    let path = simulate_path(
        model.dynamics(),
        0.0,
        step,
        StopRule::Drawdown { gap, settle: horizon },
        rng,
    )?;
    let am = argmax(&path);
    let post = path.split_from(&am.cut()).shifted_by(-am.value);
    Ok(post.truncated(horizon))
}

/// Samples the ascent piece η̃^↑: the tilted model conditioned to stay
/// positive forever, started at its infimum 0.  Realized as the negated
/// post-supremum sample of the dual model; the two constructions have the
/// same law, and negation hands the exact interval extrema to the lower
/// side, where stay-above events live.
pub fn sample_ptilde_up<R: Rng + ?Sized>(
    model: &LevyModel,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<SampledPath, SamplerError> {
    let dual = model.dual()?;
    Ok(sample_p_down(&dual, horizon, step, rng)?.negated())
}

/// Samples the tilted model from `x > 0` conditioned to stay positive for
/// all time, by exact rejection: dual-model paths from −x are accepted when
/// their exact-law supremum stays below 0 up to a depth from which a return
/// has probability below the adaptive policy's 1e−6.
pub fn sample_ptilde_up_from<R: Rng + ?Sized>(
    model: &LevyModel,
    x: f64,
    horizon: f64,
    step: f64,
    budget: usize,
    rng: &mut R,
) -> Result<SampledPath, SamplerError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(SamplerError::BadArgument("start must be positive"));
    }
    let dual = model.dual()?;
    let descent_rate = dual.dynamics().mean().abs();
    let max_time = horizon + 2.0 * adaptive_gap(model.theta()) / descent_rate + 4.0 / descent_rate;
    for _ in 0..budget {
        let (path, crossing) =
            simulate_until_passage_or(dual.dynamics(), -x, 0.0, step, max_time, rng)?;
        if crossing.is_none() {
            return Ok(path.truncated(horizon).negated());
        }
    }
    Err(SamplerError::BudgetExhausted { budget })
}

/// Crossing level at which the tilted passage pair has mixed: the residual
/// dependence on the origin decays like e^{−θ·level} = e^{−10}.
fn stationary_level(model: &LevyModel) -> f64 {
    10.0 / model.theta()
}

/// Samples the stationary (undershoot, overshoot) pair ρ̃ of the tilted
/// model: the crossing data of a first passage over a high level.
pub fn sample_rho_tilde<R: Rng + ?Sized>(
    model: &LevyModel,
    step: f64,
    rng: &mut R,
) -> Result<OvershootPair, SamplerError> {
    sample_rho_tilde_at(model, stationary_level(model), step, rng)
}

/// Same pair sampled at an explicit crossing level (the law is level-free
/// once the level is a few multiples of 1/θ).
pub fn sample_rho_tilde_at<R: Rng + ?Sized>(
    model: &LevyModel,
    level: f64,
    step: f64,
    rng: &mut R,
) -> Result<OvershootPair, SamplerError> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(SamplerError::BadArgument("crossing level must be positive"));
    }
    let tilted = model.tilted();
    let max_time = 50.0 * (level + 1.0) / tilted.mean();
    let (_, crossing) = simulate_until_passage(&tilted, 0.0, level, step, max_time, rng)?;
    Ok(OvershootPair {
        undershoot: crossing.undershoot,
        overshoot: crossing.overshoot,
        weight: 1.0,
    })
}

/// Samples the stationary pair ρ of the unconditioned limit by rejection:
/// a ρ̃ pair is kept with probability e^{−θ·overshoot}.
pub fn sample_rho<R: Rng + ?Sized>(
    model: &LevyModel,
    step: f64,
    budget: usize,
    rng: &mut R,
) -> Result<OvershootPair, SamplerError> {
    for _ in 0..budget {
        let pair = sample_rho_tilde(model, step, rng)?;
        let u: f64 = rng.random();
        if u < (-model.theta() * pair.overshoot).exp() {
            return Ok(pair);
        }
    }
    Err(SamplerError::BudgetExhausted { budget })
}

/// Entrance data of a conditioned path from `x < 0` under importance
/// sampling: undershoot −ξ_{τ−}, overshoot ξ_τ, and the weight e^{−θξ_τ},
/// without materializing the path.
pub fn conditioned_entrance<R: Rng + ?Sized>(
    model: &LevyModel,
    x: f64,
    step: f64,
    rng: &mut R,
) -> Result<OvershootPair, SamplerError> {
    if !(x < 0.0 && x.is_finite()) {
        return Err(SamplerError::BadArgument("start must be negative"));
    }
    let tilted = model.tilted();
    let max_time = 50.0 * (x.abs() + 1.0) / tilted.mean();
    let (_, crossing) = simulate_until_passage(&tilted, x, 0.0, step, max_time, rng)?;
    Ok(OvershootPair {
        undershoot: crossing.undershoot,
        overshoot: crossing.overshoot,
        weight: (-model.theta() * crossing.overshoot).exp(),
    })
}

/// The importance weight e^{−θ·ξ_τ} of a tilted first-entrance path from
/// `x < 0`, without materializing the path.
pub fn conditioned_weight<R: Rng + ?Sized>(
    model: &LevyModel,
    x: f64,
    step: f64,
    rng: &mut R,
) -> Result<f64, SamplerError> {
    Ok(conditioned_entrance(model, x, step, rng)?.weight)
}

/// Cramér constants estimated over two independent routes with bootstrap
/// standard errors: `c_limit` is the mean importance weight from deep `x`
/// (the limit of e^{−θx}·P_x(sup > 0)), and `c_theta` is the reciprocal
/// mean acceptance probability of stationary tilted pairs.  The truth
/// satisfies c(θ)·C = 1.
#[derive(Debug, Clone, Copy)]
pub struct CramerEstimate {
    pub constants: CramerConstants,
    pub c_theta_se: f64,
    pub c_limit_se: f64,
}

impl CramerEstimate {
    /// The product c(θ)·C and its propagated standard error.
    pub fn product(&self) -> (f64, f64) {
        let c = self.constants.c_theta;
        let cl = self.constants.c_limit;
        let se = ((cl * self.c_theta_se).powi(2) + (c * self.c_limit_se).powi(2)).sqrt();
        (c * cl, se)
    }
}

pub fn estimate_cramer_constants<R: Rng + ?Sized>(
    model: &LevyModel,
    x: f64,
    n: usize,
    step: f64,
    rng: &mut R,
) -> Result<CramerEstimate, SamplerError> {
    if n < 2 {
        return Err(SamplerError::BadArgument("need at least two replicates"));
    }
    let theta = model.theta();
    let mut acceptance = Vec::with_capacity(n);
    for _ in 0..n {
        let pair = sample_rho_tilde(model, step, rng)?;
        acceptance.push((-theta * pair.overshoot).exp());
    }
    let mean_acc = acceptance.iter().sum::<f64>() / n as f64;
    let se_acc = bootstrap_se_mean(&acceptance, 200, rng);

    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        weights.push(conditioned_weight(model, x, step, rng)?);
    }
    let c_limit = weights.iter().sum::<f64>() / n as f64;
    let c_limit_se = bootstrap_se_mean(&weights, 200, rng);

    Ok(CramerEstimate {
        constants: CramerConstants { c_theta: 1.0 / mean_acc, c_limit },
        // delta method for the reciprocal
        c_theta_se: se_acc / (mean_acc * mean_acc),
        c_limit_se,
    })
}

/// A draw from the two-sided limit law 𝒫: a stationary pair (x, y) frames
/// the origin, the backward piece descends from −x as a reflected
/// stay-positive path, the forward piece runs the unconditioned model from
/// y.  A backward piece that exhausts its rejection budget is retried with
/// a fresh pair.
pub fn sample_script_p<R: Rng + ?Sized>(
    model: &LevyModel,
    horizons: Horizons,
    step: f64,
    budget: usize,
    rng: &mut R,
) -> Result<TwoSidedPath, SamplerError> {
    for _ in 0..16 {
        let pair = sample_rho(model, step, budget, rng)?;
        let up = if pair.undershoot == 0.0 {
            sample_ptilde_up(model, horizons.backward, step, rng)?
        } else {
            match sample_ptilde_up_from(model, pair.undershoot, horizons.backward, step, budget, rng)
            {
                Ok(p) => p,
                Err(SamplerError::BudgetExhausted { .. }) => continue,
                Err(e) => return Err(e),
            }
        };
        let forward = simulate_path(
            model.dynamics(),
            pair.overshoot,
            step,
            StopRule::Horizon(horizons.forward),
            rng,
        )?;
        return Ok(TwoSidedPath { backward: up.negated(), forward });
    }
    Err(SamplerError::BudgetExhausted { budget })
}

/// The all-time supremum of a 𝒫 draw.  The backward piece is nonpositive,
/// so the supremum is carried entirely by the forward piece and no backward
/// simulation is needed; the forward piece runs under the drawdown stop to
/// pin its all-time supremum exactly.
pub fn sample_script_p_sup<R: Rng + ?Sized>(
    model: &LevyModel,
    step: f64,
    budget: usize,
    rng: &mut R,
) -> Result<f64, SamplerError> {
    let pair = sample_rho(model, step, budget, rng)?;
    let gap = adaptive_gap(model.theta());
    let forward = simulate_path(
        model.dynamics(),
        pair.overshoot,
        step,
        StopRule::Drawdown { gap, settle: 0.0 },
        rng,
    )?;
    Ok(forward.sup())
}

/// A draw from the spine law 𝒬: an independent Exp(θ) level ε, the descent
/// piece forward from ε, the reflected ascent piece backward.  The supremum
/// is ε, attained at time 0 exactly.
pub fn sample_script_q<R: Rng + ?Sized>(
    model: &LevyModel,
    horizons: Horizons,
    step: f64,
    rng: &mut R,
) -> Result<TwoSidedPath, SamplerError> {
    let eps: f64 = rng.sample(Exp::new(model.theta()).expect("theta is positive"));
    let forward = sample_p_down(model, horizons.forward, step, rng)?.shifted_by(eps);
    let backward = sample_ptilde_up(model, horizons.backward, step, rng)?
        .negated()
        .shifted_by(eps);
    Ok(TwoSidedPath { backward, forward })
}

/// Conditioned path from `x < 0` by importance sampling: tilted dynamics up
/// to the first entrance into (0, ∞), weight e^{−θξ_τ} ∈ (0, 1], original
/// dynamics for `horizons.forward` afterwards.  The returned path is
/// anchored at the entrance time; its forward start value is the entrance
/// overshoot.
pub fn sample_conditioned_is<R: Rng + ?Sized>(
    model: &LevyModel,
    x: f64,
    horizons: Horizons,
    step: f64,
    rng: &mut R,
) -> Result<WeightedPath, SamplerError> {
    if !(x < 0.0 && x.is_finite()) {
        return Err(SamplerError::BadArgument("start must be negative"));
    }
    let tilted = model.tilted();
    let max_time = 50.0 * (x.abs() + 1.0) / tilted.mean() + horizons.backward;
    let (pre, crossing) = simulate_until_passage(&tilted, x, 0.0, step, max_time, rng)?;
    let weight = (-model.theta() * crossing.overshoot).exp();
    let forward = simulate_path(
        model.dynamics(),
        crossing.overshoot,
        step,
        StopRule::Horizon(horizons.forward),
        rng,
    )?;
    Ok(WeightedPath { path: TwoSidedPath { backward: reverse_path(&pre), forward }, weight })
}

/// Conditioned path from `x ∈ [−3, 0)` by exact rejection: original-model
/// paths from `x` are kept when their exact-law supremum exceeds 0, then
/// anchored at the requested shift point (first entrance or supremum).
pub fn sample_conditioned_rejection<R: Rng + ?Sized>(
    model: &LevyModel,
    x: f64,
    at: &ShiftPoint,
    horizon: f64,
    step: f64,
    budget: usize,
    rng: &mut R,
) -> Result<RejectionDraw, SamplerError> {
    if !(x < 0.0 && x >= -3.0) {
        return Err(SamplerError::BadArgument("start must lie in [-3, 0)"));
    }
    let gap = adaptive_gap(model.theta());
    for attempts in 1..=budget {
        let path = simulate_path(
            model.dynamics(),
            x,
            step,
            StopRule::Drawdown { gap, settle: horizon },
            rng,
        )?;
        if path.sup() > 0.0 {
            let two = shift_kill(&path, at)
                .expect("a path with positive supremum has both shift points");
            return Ok(RejectionDraw { path: two, attempts });
        }
    }
    Err(SamplerError::BudgetExhausted { budget })
}
