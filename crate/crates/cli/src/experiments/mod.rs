//! The experiment catalog: every entry checks one distributional claim
//! about conditioned or two-sided stationary paths against an analytic law
//! or an independently constructed ensemble, and reports pinned-threshold
//! pass/fail rows.
//!
//! Seed discipline: each ensemble inside an experiment owns a group id, and
//! replicate `r` of group `g` draws from the substream keyed by
//! `(config.seed, g, r)`.  Worker counts can only reschedule replicates,
//! never change their randomness, so output files are byte-stable.

mod conditioned;
mod excursions;
mod limits;
mod reversal;

use levylab_core::run_replicates;
use rand_chacha::ChaCha8Rng;

use crate::config::ValidatedConfig;
use crate::report::ExperimentReport;

pub type ExpResult = anyhow::Result<ExperimentReport>;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    pub run: fn(&ValidatedConfig) -> ExpResult,
}

pub const CATALOG: &[Experiment] = &[
    Experiment {
        name: "sup_exponential",
        description: "All-time supremum of the drifting path: exactly Exp(theta) without jumps, \
                      asymptotically memoryless tail in general.",
        run: limits::sup_exponential,
    },
    Experiment {
        name: "cramer_constancy",
        description: "Mean importance weight of conditioned entrances is constant across \
                      starting depths (the Cramer constant); equal to 1 without jumps.",
        run: conditioned::cramer_constancy,
    },
    Experiment {
        name: "quasi_stationarity",
        description: "Two-sided stationary construction: supremum tail frequencies match \
                      e^{-theta*y} and the law above a level reproduces itself after shifting.",
        run: limits::quasi_stationarity,
    },
    Experiment {
        name: "theorem1_shift_at_entry",
        description: "Paths conditioned to reach 0, shifted at first entrance, approach the \
                      stationary entrance law as the start deepens; importance sampling is \
                      cross-checked against exact rejection at a shallow start.",
        run: conditioned::theorem1_shift_at_entry,
    },
    Experiment {
        name: "theorem2_shift_at_max",
        description: "Conditioned paths shifted at their maximum approach the post-supremum \
                      descent law (Wasserstein trend); the conditioned maximum is \
                      asymptotically Exp(theta).",
        run: conditioned::theorem2_shift_at_max,
    },
    Experiment {
        name: "reversal_at_max",
        description: "Duality at the maximum: the time of the supremum has the law of the \
                      last time the rising conditioned path sits below an independent \
                      Exp(theta) level.",
        run: reversal::reversal_at_max,
    },
    Experiment {
        name: "exp_divisor",
        description: "The all-time supremum plus an independent stationary overshoot is \
                      exactly Exp(theta): a two-factor divisor of the exponential law.",
        run: limits::exp_divisor,
    },
    Experiment {
        name: "reversal_at_last_passage",
        description: "Reversing the two-sided stationary path at its last passage above zero \
                      reproduces the dual model's stationary law.",
        run: limits::reversal_at_last_passage,
    },
    Experiment {
        name: "sparre_andersen",
        description: "Exchange identity: the time at which the maximum is attained has the \
                      same law as the total time spent positive; Laplace transform pinned \
                      at 1 for the unit Brownian case.",
        run: reversal::sparre_andersen,
    },
    Experiment {
        name: "debt_time",
        description: "Total time the deeply conditioned path spends positive, against a \
                      quadrature of the density theta * E(negative part of the tilted \
                      marginal) / t.",
        run: reversal::debt_time,
    },
    Experiment {
        name: "height_tail",
        description: "Heights of exponentiated two-sided paths are Pareto: log-log survival \
                      slope equals -theta.",
        run: excursions::height_tail,
    },
    Experiment {
        name: "williams_decomposition",
        description: "Excursion durations built two ways agree: the time-changed two-sided \
                      path versus ascent and descent pieces glued at an exponential height.",
        run: excursions::williams_decomposition,
    },
    Experiment {
        name: "rho_stationarity",
        description: "Stationary crossing pairs: level invariance, memoryless overshoots, \
                      and the product of the two Cramer normalizers equal to 1.",
        run: excursions::rho_stationarity,
    },
    Experiment {
        name: "lamperti_roundtrip",
        description: "Exponential-clock invariants on simulated paths: inverse round trip, \
                      sign symmetry, first-order grid refinement, glued-excursion \
                      structure checks.",
        run: excursions::lamperti_roundtrip,
    },
    Experiment {
        name: "sampler_oracles",
        description: "Rejection and importance samplers cross-validate: acceptance rates \
                      against weight means, entrance laws against calibrated nulls, exact \
                      sign certificates for the one-sided pieces.",
        run: conditioned::sampler_oracles,
    },
];

pub fn list_experiments() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}

pub fn find_experiment(name: &str) -> Option<&'static Experiment> {
    CATALOG.iter().find(|e| e.name == name)
}

/// Run `n` replicates of a fallible draw in the group's substream family
/// and collect them, failing the experiment on the first sampler error.
pub(crate) fn replicate<T, F>(seed: u64, group: u32, n: usize, f: F) -> anyhow::Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> anyhow::Result<T> + Sync,
{
    run_replicates(seed, group, n, f).into_iter().collect()
}

pub(crate) fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 { xs[n / 2] } else { 0.5 * (xs[n / 2 - 1] + xs[n / 2]) }
}

pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// CDF of Exp(rate) as a closure for one-sample comparisons.
pub(crate) fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |z: f64| if z <= 0.0 { 0.0 } else { 1.0 - (-rate * z).exp() }
}

/// Largest increase between consecutive entries; 0 when non-increasing.
pub(crate) fn max_increase(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_the_required_experiments() {
        let names = list_experiments();
        assert!(names.len() >= 10);
        assert!(names.contains(&"debt_time"));
        assert!(names.contains(&"theorem2_shift_at_max"));
    }

    #[test]
    fn catalog_names_are_unique() {
        let mut names = list_experiments();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), CATALOG.len());
    }

    #[test]
    fn find_is_exact_match_only() {
        assert!(find_experiment("sup_exponential").is_some());
        assert!(find_experiment("sup_exp").is_none());
    }

    #[test]
    fn median_of_even_and_odd_lengths() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn max_increase_detects_violations() {
        assert_eq!(max_increase(&[3.0, 2.0, 1.0]), 0.0);
        assert_eq!(max_increase(&[3.0, 2.0, 2.5]), 0.5);
    }
}
