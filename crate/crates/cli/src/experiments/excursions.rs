//! Excursion-measure experiments: Pareto heights, the two constructions of
//! excursion durations, stationary crossing pairs, and exponential-clock
//! invariants.

use levylab_core::rng::stream_id;
use levylab_core::{
    estimate_cramer_constants, excursion_from_two_sided, excursion_williams, ks2_threshold_99,
    ks_distance, ks_distance_to_cdf, ks_threshold_99, lamperti_clock, sample_rho,
    sample_rho_tilde_at, sample_script_p, sample_script_p_sup, simulate_path, substream,
    tail_exponent_fit, Clock, EmpiricalDistribution, Horizons, StopRule, DEFAULT_BUDGET,
};
use rand::Rng;
use rand_distr::Exp;

use super::{exp_cdf, replicate, ExpResult};
use crate::config::ValidatedConfig;
use crate::report::{ExperimentReport, TestOutcome};

const ENSEMBLE_CAP: usize = 1000;

/// Heights of the exponentiated two-sided path: survival is z^{-theta}, so
/// the log-log tail slope must be -theta.
pub(super) fn height_tail(cfg: &ValidatedConfig) -> ExpResult {
    let model = cfg.model.clone();
    let theta = model.theta();
    let n = cfg.replicates;
    let step = cfg.step;

    let m = model.clone();
    let heights: Vec<f64> = replicate(cfg.seed, 0, n, |_, rng| {
        Ok(sample_script_p_sup(&m, step, DEFAULT_BUDGET, rng)?.exp())
    })?;
    let mut report = ExperimentReport::default();
    report.dump("height", heights.iter().map(|&h| (h, 1.0)), ENSEMBLE_CAP);
    let dist = EmpiricalDistribution::new(heights)?;
    let mut rng = substream(cfg.seed, stream_id(50, 0));
    let fit = tail_exponent_fit(&dist, 1.0, Some(20.0), &mut rng)?;
    report.push(TestOutcome::within(
        "tail_slope",
        (fit.slope + theta).abs(),
        0.05,
        fit.exceedances as f64,
    ));
    Ok(report)
}

/// Excursion durations built two ways: the time-changed two-sided path (its
/// height is Pareto by construction) against ascent/descent pieces glued at
/// an independent exponential log-height.
pub(super) fn williams_decomposition(cfg: &ValidatedConfig) -> ExpResult {
    let model = cfg.model.clone();
    let theta = model.theta();
    let m_abs = model.dynamics().mean().abs();
    let m_tilde = model.tilted_mean();
    let n = cfg.replicates;
    let step = cfg.step;

    // Windows sized so the exponential clock integrand has decayed to
    // e^{-16} at the cut, plus room for the forward climb to the maximum.
    let (h_two, h_glue) = match cfg.horizons {
        Some(h) => {
            let hz = Horizons::new(h.backward, h.forward)?;
            (hz, hz)
        }
        None => (
            Horizons::new(16.0 / m_tilde, 16.0 / m_abs + 12.0 / (theta * m_tilde))?,
            Horizons::new(16.0 / m_tilde, 16.0 / m_abs)?,
        ),
    };

    let m = model.clone();
    let a_draws: Vec<(f64, f64)> = replicate(cfg.seed, 0, n, |_, rng| {
        let two = sample_script_p(&m, h_two, step, DEFAULT_BUDGET, rng)?;
        let exc = excursion_from_two_sided(&two);
        Ok((exc.duration, exc.height))
    })?;
    let m = model.clone();
    let exp_height = Exp::new(theta).expect("theta is positive");
    let b_draws: Vec<(f64, f64)> = replicate(cfg.seed, 1, n, |_, rng| {
        let y = rng.sample(exp_height).exp();
        let exc = excursion_williams(&m, y, h_glue, step, rng)?;
        Ok((exc.duration, (exc.height - y).abs()))
    })?;

    let mut report = ExperimentReport::default();
    report.dump("excursion_duration", a_draws.iter().map(|d| (d.0, 1.0)), ENSEMBLE_CAP);
    let za = EmpiricalDistribution::new(a_draws.iter().map(|d| d.0).collect())?;
    let zb = EmpiricalDistribution::new(b_draws.iter().map(|d| d.0).collect())?;
    let ks = ks_distance(&za, &zb)?;
    report.push(TestOutcome::within("duration_ks", ks.statistic, 0.03, ks.ess));

    let log_heights = EmpiricalDistribution::new(a_draws.iter().map(|d| d.1.ln()).collect())?;
    let ksh = ks_distance_to_cdf(&log_heights, exp_cdf(theta))?;
    report.push(TestOutcome::within("height_law_ks", ksh.statistic, 0.02, ksh.ess));

    let worst = b_draws.iter().map(|d| d.1).fold(0.0, f64::max);
    report.push(TestOutcome::within("height_matches_level", worst, 1e-12, n as f64));
    Ok(report)
}

/// Stationary crossing pairs: the law is level-free, overshoots are
/// memoryless, and the two Cramér normalizers are reciprocal.
pub(super) fn rho_stationarity(cfg: &ValidatedConfig) -> ExpResult {
    let model = cfg.model.clone();
    let theta = model.theta();
    let n = cfg.replicates;
    let step = cfg.step;
    let base_level = 10.0 / theta;
    let mut report = ExperimentReport::default();

    let m = model.clone();
    let at_base: Vec<f64> = replicate(cfg.seed, 0, n, |_, rng| {
        Ok(sample_rho_tilde_at(&m, base_level, step, rng)?.overshoot)
    })?;
    let m = model.clone();
    let at_double: Vec<f64> = replicate(cfg.seed, 1, n, |_, rng| {
        Ok(sample_rho_tilde_at(&m, 2.0 * base_level, step, rng)?.overshoot)
    })?;
    report.dump("tilted_overshoot", at_base.iter().map(|&v| (v, 1.0)), ENSEMBLE_CAP);

    let a = EmpiricalDistribution::new(at_base.clone())?;
    let b = EmpiricalDistribution::new(at_double)?;
    let ks = ks_distance(&a, &b)?;
    report.push(TestOutcome::within(
        "level_invariance",
        ks.statistic,
        1.3 * ks2_threshold_99(n as f64, n as f64),
        ks.ess,
    ));

    // Memoryless overshoots have closed-form rates for a single upward
    // exponential jump component.
    let jumps = &model.dynamics().jumps;
    if jumps.len() == 1 && jumps[0].sign == 1 && jumps[0].beta > theta {
        let beta = jumps[0].beta;
        let positives: Vec<f64> = at_base.iter().copied().filter(|&v| v > 0.0).collect();
        if positives.len() >= 100 {
            let np = positives.len();
            let d = EmpiricalDistribution::new(positives)?;
            let kst = ks_distance_to_cdf(&d, exp_cdf(beta - theta))?;
            report.push(TestOutcome::within(
                "tilted_overshoot_exponential",
                kst.statistic,
                1.3 * ks_threshold_99(np as f64),
                kst.ess,
            ));
        }
        let m = model.clone();
        let rho: Vec<f64> = replicate(cfg.seed, 2, n, |_, rng| {
            Ok(sample_rho(&m, step, DEFAULT_BUDGET, rng)?.overshoot)
        })?;
        let positives: Vec<f64> = rho.into_iter().filter(|&v| v > 0.0).collect();
        if positives.len() >= 100 {
            let np = positives.len();
            let d = EmpiricalDistribution::new(positives)?;
            let ksr = ks_distance_to_cdf(&d, exp_cdf(beta))?;
            report.push(TestOutcome::within(
                "converse_overshoot_exponential",
                ksr.statistic,
                1.3 * ks_threshold_99(np as f64),
                ksr.ess,
            ));
        }
    }

    let mut rng = substream(cfg.seed, stream_id(3, 0));
    let est = estimate_cramer_constants(&model, -12.0 / theta, n, step, &mut rng)?;
    let (product, se) = est.product();
    report.push(TestOutcome::within(
        "cramer_product",
        (product - 1.0).abs(),
        (3.0 * se).max(1e-9),
        n as f64,
    ));
    Ok(report)
}

/// Left-rule approximation of the clock on a coarsened grid, rebuilt from
/// the clock's own increments.
fn coarse_total(clock: &Clock, k: usize) -> f64 {
    let ts = clock.times();
    let cs = clock.values();
    let last = ts.len() - 1;
    let mut total = 0.0;
    let mut i = 0;
    while i < last {
        let j = (i + k).min(last);
        let rate = (cs[i + 1] - cs[i]) / (ts[i + 1] - ts[i]);
        total += (ts[j] - ts[i]) * rate;
        i = j;
    }
    total
}

/// Exponential-clock invariants on simulated paths: exact inverse round
/// trip, bitwise sign symmetry, first-order grid refinement, and structural
/// checks on glued excursions.
pub(super) fn lamperti_roundtrip(cfg: &ValidatedConfig) -> ExpResult {
    let model = cfg.model.clone();
    let theta = model.theta();
    let n = cfg.replicates;
    let step = cfg.step;
    let horizon = 10.0;

    let dynamics = model.dynamics().clone();
    let draws: Vec<(f64, f64, f64, f64, f64)> = replicate(cfg.seed, 0, n, |_, rng| {
        let path = simulate_path(&dynamics, 0.0, step, StopRule::Horizon(horizon), rng)?;
        let clock = lamperti_clock(&path, 1);
        // Round trip probed in clock coordinates, where the composition is
        // well conditioned even across near-flat stretches of the clock.
        let mut roundtrip = 0.0f64;
        for j in 0..16 {
            let s = clock.total() * (j as f64 + 0.5) / 16.0;
            roundtrip = roundtrip.max((clock.at(clock.inverse(s)) - s).abs());
        }
        let mirrored = lamperti_clock(&path.negated(), -1);
        let sym = clock
            .values()
            .iter()
            .zip(mirrored.values())
            .map(|(&u, &v)| (u - v).abs())
            .fold(0.0, f64::max);
        let e2 = (coarse_total(&clock, 2) - clock.total()).abs();
        let e4 = (coarse_total(&clock, 4) - clock.total()).abs();
        Ok((roundtrip, sym, e2, e4, clock.total()))
    })?;

    let mut report = ExperimentReport::default();
    report.dump("clock_total", draws.iter().map(|d| (d.4, 1.0)), ENSEMBLE_CAP);
    let roundtrip = draws.iter().map(|d| d.0).fold(0.0, f64::max);
    report.push(TestOutcome::within("clock_roundtrip", roundtrip, 1e-9, n as f64));
    let sym = draws.iter().map(|d| d.1).fold(0.0, f64::max);
    report.push(TestOutcome::within("clock_sign_symmetry", sym, 0.0, n as f64));
    let e2: f64 = draws.iter().map(|d| d.2).sum::<f64>() / n as f64;
    let e4: f64 = draws.iter().map(|d| d.3).sum::<f64>() / n as f64;
    let ratio = e4 / e2;
    report.push(TestOutcome::within("clock_refinement", (ratio - 3.0).abs(), 1.2, n as f64));

    let n_glue = 50.min(n);
    let m = model.clone();
    let exp_height = Exp::new(theta).expect("theta is positive");
    let h = Horizons::default_for(&model);
    let violations: Vec<f64> = replicate(cfg.seed, 2, n_glue, |_, rng| {
        let y = rng.sample(exp_height).exp();
        let exc = excursion_williams(&m, y, h, step, rng)?;
        let mut bad = 0.0;
        if exc.height != y {
            bad += 1.0;
        }
        // Non-decreasing only: increments underflow where the excursion is
        // within rounding of 0, so exact ties at the ends are expected.
        if exc.times.windows(2).any(|w| w[1] < w[0]) {
            bad += 1.0;
        }
        if exc.values.iter().any(|&v| v <= 0.0) {
            bad += 1.0;
        }
        let ends = exc.values[0].max(*exc.values.last().unwrap());
        if ends > 1e-3 * y {
            bad += 1.0;
        }
        Ok(bad)
    })?;
    report.push(TestOutcome::within(
        "excursion_invariants",
        violations.iter().sum::<f64>(),
        0.0,
        n_glue as f64,
    ));
    Ok(report)
}
