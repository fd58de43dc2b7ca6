//! Weighted empirical distributions and the statistics used to compare
//! sampler output against closed-form laws: Kolmogorov–Smirnov distances
//! (one- and two-sample, weighted), Wasserstein-1, log-log tail-exponent
//! fits with bootstrap errors, and the closed-form/Monte-Carlo evaluators
//! for the debt-time density θ·Ẽ(ξ_t⁻)/t.

use crate::models::LevyModel;
use rand::Rng;
use thiserror::Error;

/// Minimum effective sample size accepted by the comparison statistics.
pub const ESS_MIN: f64 = 100.0;

const TAIL_GRID: usize = 12;
const TAIL_BOOTS: usize = 200;
const TAIL_MIN_EXCEED: usize = 1000;
const DEBT_MC_SAMPLES: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    Empty,
    #[error("sample contains a non-finite value or weight")]
    NonFinite,
    #[error("weights must be positive")]
    BadWeight,
    #[error("effective sample size {ess:.1} below the minimum {}", ESS_MIN)]
    LowEss { ess: f64 },
    #[error("{have} exceedances of the tail threshold, need at least {need}")]
    InsufficientExceedances { have: usize, need: usize },
    #[error("survival is zero inside the fit window; tail grid degenerate")]
    DegenerateGrid,
    #[error("model must have no negative jumps for the debt-time density")]
    SpectralCondition,
}

/// Provenance of an ensemble, carried through to reports.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleMeta {
    pub sampler: String,
    pub model: String,
    pub seed: u64,
}

/// A sorted, weighted empirical distribution with precomputed cumulative
/// weights and effective sample size (Σw)²/Σw².
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    xs: Vec<f64>,
    ws: Vec<f64>,
    cum: Vec<f64>,
    ess: f64,
    pub meta: SampleMeta,
}

impl EmpiricalDistribution {
    pub fn new(values: Vec<f64>) -> Result<Self, StatsError> {
        let n = values.len();
        Self::weighted(values, vec![1.0; n])
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(StatsError::Empty);
        }
        if values.iter().chain(weights.iter()).any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(StatsError::BadWeight);
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(weights).collect();
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let sumsq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
        let ess = total * total / sumsq;
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ws: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
        let mut cum = Vec::with_capacity(ws.len());
        let mut acc = 0.0;
        for &w in &ws {
            acc += w;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(EmpiricalDistribution { xs, ws, cum, ess, meta: SampleMeta::default() })
    }

    pub fn with_meta(mut self, meta: SampleMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn ess(&self) -> f64 {
        self.ess
    }

    pub fn values(&self) -> &[f64] {
        &self.xs
    }

    pub fn weights(&self) -> &[f64] {
        &self.ws
    }

    pub fn mean(&self) -> f64 {
        self.xs.iter().zip(&self.ws).map(|(x, w)| x * w).sum()
    }

    /// Weighted fraction of mass at or below `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0.0,
            k => self.cum[k - 1],
        }
    }

    /// Weighted fraction of mass strictly above `x`.
    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Number of points strictly above `x` (unweighted).
    pub fn count_above(&self, x: f64) -> usize {
        self.xs.len() - self.xs.partition_point(|&v| v <= x)
    }

    /// Draws `n` values from the weighted distribution (with replacement).
    pub fn resample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let i = self.cum.partition_point(|&c| c < u).min(self.xs.len() - 1);
                self.xs[i]
            })
            .collect()
    }

    fn degenerate(&self) -> bool {
        self.xs[0] == self.xs[self.xs.len() - 1]
    }

    fn require_ess(&self) -> Result<(), StatsError> {
        if self.ess < ESS_MIN {
            return Err(StatsError::LowEss { ess: self.ess });
        }
        Ok(())
    }
}

/// A KS distance together with the effective sample size that backs it and
/// a flag for degenerate (all-equal) inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub ess: f64,
    pub degenerate: bool,
}

/// Sup-distance between two weighted ECDFs.
pub fn ks_distance(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
) -> Result<KsResult, StatsError> {
    a.require_ess()?;
    b.require_ess()?;
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ca, mut cb) = (0.0f64, 0.0f64);
    let mut d = 0.0f64;
    while i < a.xs.len() || j < b.xs.len() {
        let v = match (a.xs.get(i), b.xs.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.xs.len() && a.xs[i] == v {
            ca += a.ws[i];
            i += 1;
        }
        while j < b.xs.len() && b.xs[j] == v {
            cb += b.ws[j];
            j += 1;
        }
        d = d.max((ca - cb).abs());
    }
    Ok(KsResult {
        statistic: d,
        ess: a.ess.min(b.ess),
        degenerate: a.degenerate() && b.degenerate(),
    })
}

/// Sup-distance between a weighted ECDF and an analytic CDF.  The CDF is
/// treated as right-continuous; its left limits are probed one ulp below
/// each sample atom, so point masses in `cdf` are handled correctly.
pub fn ks_distance_to_cdf<F: Fn(f64) -> f64>(
    sample: &EmpiricalDistribution,
    cdf: F,
) -> Result<KsResult, StatsError> {
    sample.require_ess()?;
    let n = sample.xs.len();
    let mut d = 0.0f64;
    let mut prev = 0.0;
    let mut i = 0;
    while i < n {
        let x = sample.xs[i];
        let mut j = i;
        while j + 1 < n && sample.xs[j + 1] == x {
            j += 1;
        }
        d = d
            .max((sample.cum[j] - cdf(x)).abs())
            .max((prev - cdf(x.next_down())).abs());
        prev = sample.cum[j];
        i = j + 1;
    }
    Ok(KsResult { statistic: d, ess: sample.ess, degenerate: sample.degenerate() })
}

/// 99th-percentile null threshold for the one-sample KS statistic.
pub fn ks_threshold_99(n: f64) -> f64 {
    1.6276 / n.sqrt()
}

/// 99th-percentile null threshold for the two-sample KS statistic with
/// (effective) sizes n and m.
pub fn ks2_threshold_99(n: f64, m: f64) -> f64 {
    1.6276 * ((n + m) / (n * m)).sqrt()
}

/// Area between two weighted ECDFs.
pub fn wasserstein1(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
) -> Result<f64, StatsError> {
    a.require_ess()?;
    b.require_ess()?;
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ca, mut cb) = (0.0f64, 0.0f64);
    let mut prev: Option<f64> = None;
    let mut area = 0.0;
    while i < a.xs.len() || j < b.xs.len() {
        let v = match (a.xs.get(i), b.xs.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        if let Some(p) = prev {
            area += (ca - cb).abs() * (v - p);
        }
        while i < a.xs.len() && a.xs[i] == v {
            ca += a.ws[i];
            i += 1;
        }
        while j < b.xs.len() && b.xs[j] == v {
            cb += b.ws[j];
            j += 1;
        }
        prev = Some(v);
    }
    Ok(area)
}

/// Least-squares tail-exponent fit on a geometric grid.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub slope: f64,
    pub se: f64,
    pub exceedances: usize,
}

fn log_survival_slope(xs: &[(f64, f64)]) -> f64 {
    // simple least squares on (ln z, ln S)
    let n = xs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in xs {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Fits the exponent of a power-law survival P(X > z) ≈ c·z^slope by least
/// squares of log empirical survival against log z on a geometric grid from
/// `z_min` to `z_max` (by default the 100th-largest observation), with a
/// bootstrap standard error.
pub fn tail_exponent_fit<R: Rng + ?Sized>(
    sample: &EmpiricalDistribution,
    z_min: f64,
    z_max: Option<f64>,
    rng: &mut R,
) -> Result<TailFit, StatsError> {
    sample.require_ess()?;
    let exceedances = sample.count_above(z_min);
    if exceedances < TAIL_MIN_EXCEED {
        return Err(StatsError::InsufficientExceedances { have: exceedances, need: TAIL_MIN_EXCEED });
    }
    let n = sample.len();
    let z_max = z_max.unwrap_or_else(|| sample.values()[n - 100.min(n / 2)]);
    if !(z_max > z_min * (1.0 + 1e-9)) {
        return Err(StatsError::InsufficientExceedances { have: 0, need: TAIL_MIN_EXCEED });
    }
    if sample.count_above(z_max) == 0 {
        return Err(StatsError::InsufficientExceedances { have: 0, need: 1 });
    }
    let ratio = (z_max / z_min).powf(1.0 / (TAIL_GRID - 1) as f64);
    let grid: Vec<f64> = (0..TAIL_GRID).map(|k| z_min * ratio.powi(k as i32)).collect();

    let fit_on = |dist: &EmpiricalDistribution| -> Option<f64> {
        let mut pts = Vec::with_capacity(TAIL_GRID);
        for &z in &grid {
            let s = dist.survival(z);
            if s <= 0.0 {
                return None;
            }
            pts.push((z.ln(), s.ln()));
        }
        Some(log_survival_slope(&pts))
    };
    let slope = fit_on(sample).ok_or(StatsError::DegenerateGrid)?;

    let mut boots = Vec::with_capacity(TAIL_BOOTS);
    for _ in 0..TAIL_BOOTS {
        let values = sample.resample(n, rng);
        if let Ok(d) = EmpiricalDistribution::new(values) {
            if let Some(s) = fit_on(&d) {
                boots.push(s);
            }
        }
    }
    if boots.len() < TAIL_BOOTS / 2 {
        return Err(StatsError::DegenerateGrid);
    }
    let m = boots.iter().sum::<f64>() / boots.len() as f64;
    let var = boots.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (boots.len() - 1) as f64;
    Ok(TailFit { slope, se: var.sqrt(), exceedances })
}

/// Bootstrap standard error of the sample mean.
pub fn bootstrap_se_mean<R: Rng + ?Sized>(values: &[f64], boots: usize, rng: &mut R) -> f64 {
    let n = values.len();
    let mut means = Vec::with_capacity(boots);
    for _ in 0..boots {
        let mut s = 0.0;
        for _ in 0..n {
            s += values[rng.random_range(0..n)];
        }
        means.push(s / n as f64);
    }
    let m = means.iter().sum::<f64>() / boots as f64;
    (means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (boots - 1) as f64).sqrt()
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via the Abramowitz–Stegun rational approximation
/// (absolute error < 7.5e−8).
pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_cdf(-x);
    }
    let k = 1.0 / (1.0 + 0.2316419 * x);
    let poly = k
        * (0.319381530
            + k * (-0.356563782 + k * (1.781477937 + k * (-1.821255978 + k * 1.330274429))));
    1.0 - normal_pdf(x) * poly
}

/// E[max(−Z, 0)] for Z ~ Normal(m, v).
fn normal_negative_part(m: f64, v: f64) -> f64 {
    let s = v.sqrt();
    s * normal_pdf(m / s) - m * normal_cdf(-m / s)
}

fn require_spectrally_positive(model: &LevyModel) -> Result<(), StatsError> {
    if model.dynamics().jumps.iter().any(|j| j.sign == -1 && j.rate > 0.0) {
        return Err(StatsError::SpectralCondition);
    }
    Ok(())
}

/// Monte-Carlo evaluation of the debt-time density θ·Ẽ(ξ_t⁻)/t from exact
/// increments of the tilted model; returns (value, standard error).
pub fn debt_time_density_mc<R: Rng + ?Sized>(
    model: &LevyModel,
    t: f64,
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64), StatsError> {
    require_spectrally_positive(model)?;
    if !(t > 0.0) {
        return Err(StatsError::NonFinite);
    }
    let tilted = model.tilted();
    let (mut sum, mut sumsq) = (0.0, 0.0);
    for _ in 0..n {
        let x = tilted.sample_increment(t, rng);
        let neg = (-x).max(0.0);
        sum += neg;
        sumsq += neg * neg;
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0);
    let scale = model.theta() / t;
    Ok((scale * mean, scale * (var / n as f64).sqrt()))
}

/// Density of the total-time-positive law of the conditioned limit path:
/// θ·Ẽ(ξ_t⁻)/t.  Closed form when the model has no jumps (normal
/// negative-part moment), 1e6-sample Monte Carlo otherwise.  Requires a
/// spectrally positive model.
pub fn debt_time_density<R: Rng + ?Sized>(
    model: &LevyModel,
    t: f64,
    rng: &mut R,
) -> Result<f64, StatsError> {
    require_spectrally_positive(model)?;
    if !(t > 0.0) {
        return Err(StatsError::NonFinite);
    }
    if model.dynamics().jumps.iter().all(|j| j.rate == 0.0) {
        let m = model.tilted_mean() * t;
        let v = model.dynamics().sigma.powi(2) * t;
        Ok(model.theta() * normal_negative_part(m, v) / t)
    } else {
        Ok(debt_time_density_mc(model, t, DEBT_MC_SAMPLES, rng)?.0)
    }
}

/// Cumulative distribution of the debt-time density on a quadrature grid.
#[derive(Debug, Clone)]
pub struct DebtTimeCdf {
    ts: Vec<f64>,
    fs: Vec<f64>,
}

impl DebtTimeCdf {
    /// CDF value by monotone linear interpolation (clamped at the ends).
    pub fn at(&self, t: f64) -> f64 {
        if t <= self.ts[0] {
            return 0.0;
        }
        if t >= *self.ts.last().unwrap() {
            return *self.fs.last().unwrap();
        }
        let i = self.ts.partition_point(|&u| u <= t);
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let (f0, f1) = (self.fs[i - 1], self.fs[i]);
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }

    /// Total mass up to the quadrature horizon.
    pub fn total(&self) -> f64 {
        *self.fs.last().unwrap()
    }
}

/// Integrates the debt-time density over (0, horizon] by composite Simpson
/// quadrature after the substitution t = u², which removes the t^{−1/2}
/// singularity at 0 (the transformed integrand tends to 2θσ·φ(0) there).
/// `panels` Simpson panels are used; for jump models each node is a
/// Monte-Carlo evaluation with `mc_per_node` samples.
pub fn debt_time_cdf<R: Rng + ?Sized>(
    model: &LevyModel,
    horizon: f64,
    panels: usize,
    mc_per_node: usize,
    rng: &mut R,
) -> Result<DebtTimeCdf, StatsError> {
    require_spectrally_positive(model)?;
    let closed_form = model.dynamics().jumps.iter().all(|j| j.rate == 0.0);
    let u_end = horizon.sqrt();
    let h = u_end / (2 * panels) as f64;
    let g = |u: f64, rng: &mut R| -> Result<f64, StatsError> {
        if u == 0.0 {
            return Ok(2.0 * model.theta() * model.dynamics().sigma * normal_pdf(0.0));
        }
        let t = u * u;
        let f = if closed_form {
            debt_time_density(model, t, rng)?
        } else {
            debt_time_density_mc(model, t, mc_per_node, rng)?.0
        };
        Ok(2.0 * u * f)
    };
    let mut ts = Vec::with_capacity(panels + 1);
    let mut fs = Vec::with_capacity(panels + 1);
    ts.push(0.0);
    fs.push(0.0);
    let mut acc = 0.0;
    let mut g0 = g(0.0, rng)?;
    for k in 0..panels {
        let u1 = (2 * k + 1) as f64 * h;
        let u2 = (2 * k + 2) as f64 * h;
        let g1 = g(u1, rng)?;
        let g2 = g(u2, rng)?;
        acc += h / 3.0 * (g0 + 4.0 * g1 + g2);
        ts.push(u2 * u2);
        fs.push(acc);
        g0 = g2;
    }
    Ok(DebtTimeCdf { ts, fs })
}
