//! Hybrid-grid path engine.
//!
//! A path is sampled at regular multiples of `step` and, in addition, at the
//! exact epochs of its compound-Poisson jumps, so every jump time is a grid
//! point and diffusion increments between consecutive sample times are exact
//! Gaussians.  For each inter-sample interval the engine also draws the
//! maximum of the Brownian bridge connecting the endpoints from its exact
//! law, which makes running suprema (and first passages upward) exact in
//! law at any step size.  Interval minima are kept only as endpoint bounds;
//! when a sampler needs exact minima it negates a path whose maxima were
//! drawn exactly.

use crate::models::Dynamics;
use rand::Rng;
use rand_distr::{Exp, Open01, StandardNormal};
use thiserror::Error;

/// Hard cap on samples per path, protecting against runaway stop rules.
const MAX_SAMPLES: usize = 50_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("step must be positive and finite, got {step}")]
    BadStep { step: f64 },
    #[error("horizon must be nonnegative and finite, got {t}")]
    BadHorizon { t: f64 },
    #[error("stopping event did not occur before t = {t}")]
    HorizonExhausted { t: f64 },
    #[error("non-finite path value generated at t = {t}")]
    NonFinite { t: f64 },
}

/// When to stop a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Run to exactly this time; the final sample lands on it.
    Horizon(f64),
    /// Run until the path has fallen `gap` below its running supremum and at
    /// least `settle` time units have passed since the supremum was attained.
    /// For a model with Cramér exponent θ the chance that the supremum moves
    /// after such a stop is at most e^{-θ·gap}.
    Drawdown { gap: f64, settle: f64 },
}

/// Drawdown gap making the missed-supremum probability e^{-θ·gap} = 1e-6.
pub fn adaptive_gap(theta: f64) -> f64 {
    6.0 * std::f64::consts::LN_10 / theta
}

/// How a first passage over a level happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// The diffusion part touched the level inside an interval.
    Continuous,
    /// A jump carried the path over the level.
    Jump,
}

/// Outcome of [`simulate_until_passage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub kind: CrossingKind,
    /// Passage time.  Exact for jump crossings; for continuous crossings it
    /// is placed inside the crossing interval (O(step) placement error, the
    /// crossing value itself is exact).
    pub tau: f64,
    /// level − ξ_{τ−}; zero for continuous crossings.
    pub undershoot: f64,
    /// ξ_τ − level; zero for continuous crossings.
    pub overshoot: f64,
    /// Index of the crossing sample in the returned path.
    pub index: usize,
}

/// A càdlàg path observed on a hybrid grid.
///
/// `values[i]` is the left limit at `times[i]` and `jumps[i]` the jump there
/// (the càdlàg value is their sum).  `bridge_max[i]`/`bridge_min[i]` bound
/// the continuous motion on `(times[i-1], times[i])` including both endpoint
/// values; entry 0 is the degenerate start.  `max_refined`/`min_refined`
/// record whether those bounds were drawn from the exact bridge law or are
/// mere endpoint envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    step: f64,
    times: Vec<f64>,
    values: Vec<f64>,
    jumps: Vec<f64>,
    bridge_max: Vec<f64>,
    bridge_min: Vec<f64>,
    max_refined: bool,
    min_refined: bool,
}

impl SampledPath {
    pub(crate) fn with_capacity(step: f64, start: f64, cap: usize) -> SampledPath {
        let mut p = SampledPath {
            step,
            times: Vec::with_capacity(cap),
            values: Vec::with_capacity(cap),
            jumps: Vec::with_capacity(cap),
            bridge_max: Vec::with_capacity(cap),
            bridge_min: Vec::with_capacity(cap),
            max_refined: true,
            min_refined: false,
        };
        p.push_sample(0.0, start, 0.0, start, start);
        p
    }

    /// Single-point path at time 0.
    pub fn single(step: f64, start: f64) -> SampledPath {
        SampledPath::with_capacity(step, start, 1)
    }

    /// Deterministic piecewise-linear path through `points` (time, value),
    /// for tests and synthetic fixtures.  Segment extrema of a linear piece
    /// are its endpoints, so both extrema sides count as exact.
    pub fn from_linear(step: f64, points: &[(f64, f64)]) -> SampledPath {
        assert!(!points.is_empty() && points[0].0 == 0.0);
        let mut p = SampledPath::with_capacity(step, points[0].1, points.len());
        for w in points.windows(2) {
            let (t, v) = w[1];
            assert!(t > w[0].0);
            p.push_sample(t, v, 0.0, w[0].1.max(v), w[0].1.min(v));
        }
        p.min_refined = true;
        p
    }

    pub(crate) fn set_first_jump(&mut self, j: f64) {
        self.jumps[0] = j;
    }

    pub(crate) fn copy_refinement_flags(&mut self, from: &SampledPath) {
        self.max_refined = from.max_refined;
        self.min_refined = from.min_refined;
    }

    pub(crate) fn push_sample(&mut self, t: f64, left: f64, jump: f64, bmax: f64, bmin: f64) {
        debug_assert!(self.times.last().map_or(true, |&last| t > last) || self.times.is_empty());
        self.times.push(t);
        self.values.push(left);
        self.jumps.push(jump);
        self.bridge_max.push(bmax);
        self.bridge_min.push(bmin);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Left limits at the sample times.
    pub fn left_values(&self) -> &[f64] {
        &self.values
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.jumps
    }

    pub fn bridge_maxima(&self) -> &[f64] {
        &self.bridge_max
    }

    pub fn bridge_minima(&self) -> &[f64] {
        &self.bridge_min
    }

    pub fn max_refined(&self) -> bool {
        self.max_refined
    }

    pub fn min_refined(&self) -> bool {
        self.min_refined
    }

    pub fn left_value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Càdlàg value at sample `i`.
    pub fn right_value(&self, i: usize) -> f64 {
        self.values[i] + self.jumps[i]
    }

    pub fn life_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn start_value(&self) -> f64 {
        self.right_value(0)
    }

    pub fn end_value(&self) -> f64 {
        self.right_value(self.len() - 1)
    }

    /// Pathwise supremum from the stored interval maxima and jump values.
    pub fn sup(&self) -> f64 {
        let mut s = f64::NEG_INFINITY;
        for i in 0..self.len() {
            s = s.max(self.bridge_max[i]).max(self.right_value(i));
        }
        s
    }

    /// Pathwise infimum from the stored interval minima and jump values.
    pub fn inf(&self) -> f64 {
        let mut s = f64::INFINITY;
        for i in 0..self.len() {
            s = s.min(self.bridge_min[i]).min(self.right_value(i));
        }
        s
    }

    /// Value at time `t`, linearly interpolated inside intervals (càdlàg at
    /// sample times).  Times beyond the ends clamp to the end values.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.len();
        if t <= self.times[0] {
            return self.start_value();
        }
        if t >= self.times[n - 1] {
            return self.end_value();
        }
        let i = match self.times.partition_point(|&u| u <= t) {
            0 => 1,
            k => k,
        };
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        if t == t0 {
            return self.right_value(i - 1);
        }
        let a = self.right_value(i - 1);
        let b = self.values[i];
        a + (b - a) * (t - t0) / (t1 - t0)
    }

    /// Law of −ξ: negates values and jumps, swaps the interval extrema and
    /// their exactness flags.
    pub fn negated(&self) -> SampledPath {
        SampledPath {
            step: self.step,
            times: self.times.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            jumps: self.jumps.iter().map(|j| -j).collect(),
            bridge_max: self.bridge_min.iter().map(|v| -v).collect(),
            bridge_min: self.bridge_max.iter().map(|v| -v).collect(),
            max_refined: self.min_refined,
            min_refined: self.max_refined,
        }
    }

    /// The path started `dx` higher.
    pub fn shifted_by(&self, dx: f64) -> SampledPath {
        SampledPath {
            step: self.step,
            times: self.times.clone(),
            values: self.values.iter().map(|v| v + dx).collect(),
            jumps: self.jumps.clone(),
            bridge_max: self.bridge_max.iter().map(|v| v + dx).collect(),
            bridge_min: self.bridge_min.iter().map(|v| v + dx).collect(),
            max_refined: self.max_refined,
            min_refined: self.min_refined,
        }
    }

    /// Drops all samples after `t_max`, keeping the jump at the last
    /// retained sample.
    pub(crate) fn truncated(&self, t_max: f64) -> SampledPath {
        let k = self.times.partition_point(|&t| t <= t_max);
        if k >= self.len() {
            return self.clone();
        }
        let mut out = SampledPath::with_capacity(self.step, self.values[0], k);
        out.jumps[0] = self.jumps[0];
        for i in 1..k {
            out.push_sample(
                self.times[i],
                self.values[i],
                self.jumps[i],
                self.bridge_max[i],
                self.bridge_min[i],
            );
        }
        out.max_refined = self.max_refined;
        out.min_refined = self.min_refined;
        out
    }

    /// Raises the stored maximum of interval `i` to at least `m`.  Used when
    /// a split hands an interior-cut interval's exact maximum to the side
    /// that owns it.
    pub(crate) fn raise_bridge_max(&mut self, i: usize, m: f64) {
        if m > self.bridge_max[i] {
            self.bridge_max[i] = m;
        }
    }

    /// Inserts a conditionally-sampled diffusion midpoint into every
    /// interval.  Values at existing samples are preserved; the new interval
    /// extrema are endpoint envelopes, so the refined path is only meant for
    /// value-based functionals (time-change clocks, marginals).
    pub fn refine_half_step<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> SampledPath {
        let mut out = SampledPath::with_capacity(self.step / 2.0, self.start_value(), 2 * self.len());
        for i in 1..self.len() {
            let (t0, t1) = (self.times[i - 1], self.times[i]);
            let a = self.right_value(i - 1);
            let b = self.values[i];
            let dt = t1 - t0;
            let z: f64 = rng.sample(StandardNormal);
            let mid = 0.5 * (a + b) + sigma * (dt / 4.0).sqrt() * z;
            let tm = 0.5 * (t0 + t1);
            out.push_sample(tm, mid, 0.0, a.max(mid), a.min(mid));
            out.push_sample(t1, b, self.jumps[i], mid.max(b), mid.min(b));
        }
        out.max_refined = false;
        out.min_refined = false;
        out
    }
}

/// Where to cut a path in two.  An interior cut splits the enclosing
/// interval; the split pieces get endpoint-envelope extrema for their halves
/// of that interval, and the caller is expected to restore the exact interval
/// maximum on whichever side provably owns it (see `shift_kill`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum CutPoint {
    /// Cut at sample `index`.  With `fold_jump` the forward piece starts at
    /// the càdlàg (post-jump) value; otherwise it keeps the left limit and
    /// the jump.
    AtSample { index: usize, fold_jump: bool },
    /// Cut strictly inside interval `index` (between `times[index-1]` and
    /// `times[index]`) at the given time and exact value.
    Interior { index: usize, time: f64, value: f64 },
}

impl SampledPath {
    /// Piece from the cut onward, re-anchored to time 0.
    pub(crate) fn split_from(&self, cut: &CutPoint) -> SampledPath {
        let mut out;
        let from_index;
        match *cut {
            CutPoint::AtSample { index, fold_jump } => {
                let start = if fold_jump { self.right_value(index) } else { self.values[index] };
                out = SampledPath::with_capacity(self.step, start, self.len() - index);
                if !fold_jump {
                    out.jumps[0] = self.jumps[index];
                }
                from_index = index + 1;
                let t0 = self.times[index];
                for i in from_index..self.len() {
                    out.push_sample(
                        self.times[i] - t0,
                        self.values[i],
                        self.jumps[i],
                        self.bridge_max[i],
                        self.bridge_min[i],
                    );
                }
            }
            CutPoint::Interior { index, time, value } => {
                debug_assert!(index > 0 && time > self.times[index - 1] && time < self.times[index]);
                out = SampledPath::with_capacity(self.step, value, self.len() - index + 1);
                out.push_sample(
                    self.times[index] - time,
                    self.values[index],
                    self.jumps[index],
                    value.max(self.values[index]),
                    value.min(self.values[index]),
                );
                for i in index + 1..self.len() {
                    out.push_sample(
                        self.times[i] - time,
                        self.values[i],
                        self.jumps[i],
                        self.bridge_max[i],
                        self.bridge_min[i],
                    );
                }
            }
        }
        out.max_refined = self.max_refined;
        out.min_refined = self.min_refined;
        out
    }

    /// Piece up to the cut, ending at the cut value (jumps at the cut sample
    /// are dropped; they belong to the forward piece).
    pub(crate) fn split_up_to(&self, cut: &CutPoint) -> SampledPath {
        let mut out = SampledPath::with_capacity(self.step, self.start_value(), self.len());
        out.values[0] = self.values[0];
        out.jumps[0] = self.jumps[0];
        out.bridge_max[0] = self.bridge_max[0];
        out.bridge_min[0] = self.bridge_min[0];
        match *cut {
            CutPoint::AtSample { index, .. } => {
                for i in 1..=index {
                    let jump = if i == index { 0.0 } else { self.jumps[i] };
                    out.push_sample(
                        self.times[i],
                        self.values[i],
                        jump,
                        self.bridge_max[i],
                        self.bridge_min[i],
                    );
                }
            }
            CutPoint::Interior { index, time, value } => {
                debug_assert!(index > 0 && time > self.times[index - 1] && time < self.times[index]);
                for i in 1..index {
                    out.push_sample(
                        self.times[i],
                        self.values[i],
                        self.jumps[i],
                        self.bridge_max[i],
                        self.bridge_min[i],
                    );
                }
                let prev = self.right_value(index - 1);
                out.push_sample(time, value, 0.0, value, value.min(prev));
            }
        }
        out.max_refined = self.max_refined;
        out.min_refined = self.min_refined;
        out
    }
}

/// Exact draw of the maximum of a Brownian bridge with volatility `sigma`
/// over an interval of length `dt` with endpoint values `a` and `b`.
fn bridge_maximum<R: Rng + ?Sized>(a: f64, b: f64, sigma: f64, dt: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    0.5 * ((a + b) + ((a - b) * (a - b) - 2.0 * sigma * sigma * dt * u.ln()).sqrt())
}

struct JumpDraw {
    component: usize,
    wait: f64,
}

fn next_jump<R: Rng + ?Sized>(dynamics: &Dynamics, total_rate: f64, rng: &mut R) -> Option<JumpDraw> {
    if total_rate <= 0.0 {
        return None;
    }
    let wait = rng.sample(Exp::new(total_rate).expect("positive rate"));
    let mut pick = rng.random::<f64>() * total_rate;
    let mut component = dynamics.jumps.len() - 1;
    for (k, j) in dynamics.jumps.iter().enumerate() {
        if pick < j.rate {
            component = k;
            break;
        }
        pick -= j.rate;
    }
    Some(JumpDraw { component, wait })
}

fn jump_magnitude<R: Rng + ?Sized>(dynamics: &Dynamics, component: usize, rng: &mut R) -> f64 {
    let j = &dynamics.jumps[component];
    j.sign as f64 * rng.sample::<f64, _>(Exp::new(j.beta).expect("positive beta"))
}

/// Tracks the running supremum and the epoch where it was first attained.
struct RunningMax {
    sup: f64,
    at: f64,
}

impl RunningMax {
    fn new(start: f64) -> RunningMax {
        RunningMax { sup: start, at: 0.0 }
    }

    fn observe_interval(&mut self, t0: f64, t1: f64, bmax: f64, right_end: f64) {
        if bmax > self.sup {
            self.sup = bmax;
            // attained at the right endpoint if the maximum equals the left
            // limit there, otherwise somewhere inside; use the midpoint.
            self.at = if bmax == right_end { t1 } else { 0.5 * (t0 + t1) };
        }
    }

    fn observe_jump(&mut self, t: f64, value: f64) {
        if value > self.sup {
            self.sup = value;
            self.at = t;
        }
    }
}

/// Simulates the process started at `start` on the hybrid grid until the
/// stop rule fires.
pub fn simulate_path<R: Rng + ?Sized>(
    dynamics: &Dynamics,
    start: f64,
    step: f64,
    rule: StopRule,
    rng: &mut R,
) -> Result<SampledPath, SimError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SimError::BadStep { step });
    }
    let horizon = match rule {
        StopRule::Horizon(t) => {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(SimError::BadHorizon { t });
            }
            if t == 0.0 {
                return Ok(SampledPath::single(step, start));
            }
            Some(t)
        }
        StopRule::Drawdown { gap, settle } => {
            if !(gap > 0.0 && gap.is_finite() && settle >= 0.0 && settle.is_finite()) {
                return Err(SimError::BadHorizon { t: gap });
            }
            None
        }
    };

    let total_rate = dynamics.total_rate();
    let sigma = dynamics.sigma;
    let cap = horizon.map_or(4096, |t| (t / step).ceil() as usize + 16);
    let mut path = SampledPath::with_capacity(step, start, cap.min(1 << 20));
    let mut running = RunningMax::new(start);

    let mut t = 0.0;
    let mut v = start;
    let mut grid_k: u64 = 1;
    let mut pending_jump = next_jump(dynamics, total_rate, rng).map(|d| (t + d.wait, d.component));

    loop {
        if path.len() >= MAX_SAMPLES {
            return Err(SimError::NonFinite { t });
        }
        let mut t_grid = grid_k as f64 * step;
        if let Some(h) = horizon {
            t_grid = t_grid.min(h);
        }
        let (t_next, jumping) = match pending_jump {
            Some((tj, _)) if tj <= t_grid => (tj, true),
            _ => (t_grid, false),
        };
        if let Some(h) = horizon {
            if t_next > h {
                break;
            }
        }
        let dt = t_next - t;
        if !(dt > 0.0) {
            // A jump landed exactly on a grid point; consume the grid point.
            grid_k += 1;
            continue;
        }
        let z: f64 = rng.sample(StandardNormal);
        let b = v + dynamics.drift * dt + sigma * dt.sqrt() * z;
        if !b.is_finite() {
            return Err(SimError::NonFinite { t: t_next });
        }
        let bmax = bridge_maximum(v, b, sigma, dt, rng);
        let bmin = v.min(b);
        let jump = if jumping {
            let component = pending_jump.unwrap().1;
            pending_jump = next_jump(dynamics, total_rate, rng).map(|d| (t_next + d.wait, d.component));
            jump_magnitude(dynamics, component, rng)
        } else {
            if t_next == t_grid {
                grid_k += 1;
            }
            0.0
        };
        path.push_sample(t_next, b, jump, bmax, bmin);
        running.observe_interval(t, t_next, bmax, b);
        running.observe_jump(t_next, b + jump);
        t = t_next;
        v = b + jump;

        match rule {
            StopRule::Horizon(h) => {
                if t >= h {
                    break;
                }
            }
            StopRule::Drawdown { gap, settle } => {
                if running.sup - v >= gap && t - running.at >= settle {
                    break;
                }
            }
        }
    }
    Ok(path)
}

/// Simulates from `start` until the path first reaches `level` (from below),
/// classifying the crossing.  The returned path ends at the crossing: for a
/// continuous crossing a sample with value exactly `level` is placed inside
/// the crossing interval; for a jump crossing the final sample is the jump
/// epoch.  Fails with `HorizonExhausted` if no crossing happens by
/// `max_time`.
pub fn simulate_until_passage<R: Rng + ?Sized>(
    dynamics: &Dynamics,
    start: f64,
    level: f64,
    step: f64,
    max_time: f64,
    rng: &mut R,
) -> Result<(SampledPath, Crossing), SimError> {
    match simulate_until_passage_or(dynamics, start, level, step, max_time, rng)? {
        (path, Some(crossing)) => Ok((path, crossing)),
        (_, None) => Err(SimError::HorizonExhausted { t: max_time }),
    }
}

/// Like [`simulate_until_passage`], but a path that survives to `max_time`
/// without crossing is returned with `None` instead of an error.  Every
/// interval maximum on the returned path was checked against `level` with
/// an exact bridge draw, so `None` certifies sup < `level` on [0, max_time].
pub(crate) fn simulate_until_passage_or<R: Rng + ?Sized>(
    dynamics: &Dynamics,
    start: f64,
    level: f64,
    step: f64,
    max_time: f64,
    rng: &mut R,
) -> Result<(SampledPath, Option<Crossing>), SimError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SimError::BadStep { step });
    }
    if start >= level {
        let path = SampledPath::single(step, start);
        let crossing = Crossing {
            kind: CrossingKind::Continuous,
            tau: 0.0,
            undershoot: 0.0,
            overshoot: start - level,
            index: 0,
        };
        return Ok((path, Some(crossing)));
    }
    let total_rate = dynamics.total_rate();
    let sigma = dynamics.sigma;
    let mut path = SampledPath::with_capacity(step, start, 1024);
    let mut t = 0.0;
    let mut v = start;
    let mut grid_k: u64 = 1;
    let mut pending_jump = next_jump(dynamics, total_rate, rng).map(|d| (t + d.wait, d.component));

    loop {
        if path.len() >= MAX_SAMPLES {
            return Err(SimError::HorizonExhausted { t });
        }
        let t_grid = grid_k as f64 * step;
        let (t_next, jumping) = match pending_jump {
            Some((tj, _)) if tj <= t_grid => (tj, true),
            _ => (t_grid, false),
        };
        if t_next > max_time {
            return Ok((path, None));
        }
        let dt = t_next - t;
        if !(dt > 0.0) {
            grid_k += 1;
            continue;
        }
        let z: f64 = rng.sample(StandardNormal);
        let b = v + dynamics.drift * dt + sigma * dt.sqrt() * z;
        if !b.is_finite() {
            return Err(SimError::NonFinite { t: t_next });
        }
        let bmax = bridge_maximum(v, b, sigma, dt, rng);
        if bmax >= level {
            // Continuous first passage inside (t, t_next): the value at the
            // crossing is exactly `level`; place the time by interpolation.
            let frac = if b >= level && b > v { ((level - v) / (b - v)).clamp(0.01, 0.99) } else { 0.5 };
            let tau = t + frac * dt;
            path.push_sample(tau, level, 0.0, level, v.min(level));
            let index = path.len() - 1;
            let crossing =
                Crossing { kind: CrossingKind::Continuous, tau, undershoot: 0.0, overshoot: 0.0, index };
            return Ok((path, Some(crossing)));
        }
        let jump = if jumping {
            let component = pending_jump.unwrap().1;
            pending_jump = next_jump(dynamics, total_rate, rng).map(|d| (t_next + d.wait, d.component));
            jump_magnitude(dynamics, component, rng)
        } else {
            if t_next == t_grid {
                grid_k += 1;
            }
            0.0
        };
        path.push_sample(t_next, b, jump, bmax, v.min(b));
        if b + jump >= level {
            let index = path.len() - 1;
            let crossing = Crossing {
                kind: CrossingKind::Jump,
                tau: t_next,
                undershoot: level - b,
                overshoot: b + jump - level,
                index,
            };
            return Ok((path, Some(crossing)));
        }
        t = t_next;
        v = b + jump;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::JumpSpec;
    use crate::rng::substream;
    use approx::assert_abs_diff_eq;

    fn heavy_jump_model() -> Dynamics {
        Dynamics {
            drift: -2.0,
            sigma: 1.0,
            jumps: vec![JumpSpec { rate: 2.0, beta: 3.0, sign: 1 }],
        }
    }

    #[test]
    fn single_interval_supremum_has_reflection_law_moments() {
        // For driftless unit BM on [0,1], sup ~ |N(0,1)|: mean sqrt(2/pi),
        // P(sup <= 1) = 0.6826894921370859.  One step, so the supremum is a
        // single exact bridge-maximum draw.
        let d = Dynamics::brownian(0.0, 1.0);
        let mut rng = substream(0xB41D, 7);
        let n = 40_000;
        let (mut sum, mut sumsq, mut below) = (0.0, 0.0, 0u32);
        for _ in 0..n {
            let p = simulate_path(&d, 0.0, 1.0, StopRule::Horizon(1.0), &mut rng).unwrap();
            assert_eq!(p.len(), 2);
            let s = p.sup();
            assert!(s >= p.start_value().max(p.end_value()));
            sum += s;
            sumsq += s * s;
            if s <= 1.0 {
                below += 1;
            }
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let want = (2.0 / std::f64::consts::PI).sqrt();
        let se = (var / n as f64).sqrt();
        assert!((mean - want).abs() < 4.0 * se, "sup mean {mean} vs {want}");
        let freq = below as f64 / n as f64;
        let p1 = 0.6826894921370859;
        let se_freq = (p1 * (1.0 - p1) / n as f64).sqrt();
        assert!((freq - p1).abs() < 4.0 * se_freq, "P(sup<=1) {freq} vs {p1}");
    }

    #[test]
    fn supremum_law_is_step_invariant_in_moments() {
        // The same reflection-law moments at a fine step: the running max
        // over many exact bridge maxima must reproduce sup ~ |N(0,1)|.
        let d = Dynamics::brownian(0.0, 1.0);
        let mut rng = substream(0xB41E, 1);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let p = simulate_path(&d, 0.0, 0.125, StopRule::Horizon(1.0), &mut rng).unwrap();
            sum += p.sup();
        }
        let mean = sum / n as f64;
        let want = (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean - want).abs() < 4.0 * (0.6 / n as f64).sqrt(), "mean {mean} vs {want}");
    }

    #[test]
    fn hybrid_grid_hits_horizon_and_jump_epochs() {
        let d = heavy_jump_model();
        let mut rng = substream(0xB41F, 3);
        let step = 0.4;
        let p = simulate_path(&d, 0.0, step, StopRule::Horizon(2.5), &mut rng).unwrap();
        assert_eq!(p.life_end(), 2.5);
        for w in p.times().windows(2) {
            assert!(w[1] > w[0]);
        }
        // every grid multiple below the horizon appears exactly
        for k in 1..=6u64 {
            let g = k as f64 * step;
            assert!(p.times().iter().any(|&t| t == g), "missing grid point {g}");
        }
        // jump samples sit off the regular grid and are flagged by size
        for (i, &j) in p.jump_sizes().iter().enumerate() {
            if j != 0.0 {
                let t = p.times()[i];
                assert!(t / step != (t / step).round());
            }
        }
        assert_eq!(p.jump_sizes()[0], 0.0);
    }

    #[test]
    fn negation_swaps_extrema_and_roundtrips() {
        let d = heavy_jump_model();
        let mut rng = substream(0xB420, 9);
        let p = simulate_path(&d, 0.5, 0.2, StopRule::Horizon(3.0), &mut rng).unwrap();
        let n = p.negated();
        assert_eq!(n.negated(), p);
        assert_abs_diff_eq!(n.sup(), -p.inf());
        assert_abs_diff_eq!(n.inf(), -p.sup());
        assert!(n.min_refined() && !n.max_refined());
        assert_abs_diff_eq!(n.value_at(1.3), -p.value_at(1.3));
    }

    #[test]
    fn shift_moves_values_not_jumps() {
        let p = SampledPath::from_linear(1.0, &[(0.0, 0.0), (1.0, 1.0), (2.0, -1.0)]);
        let s = p.shifted_by(2.0);
        assert_eq!(s.value_at(1.0), 3.0);
        assert_eq!(s.sup(), 3.0);
        assert_eq!(s.inf(), 1.0);
        assert_eq!(s.jump_sizes(), p.jump_sizes());
    }

    #[test]
    fn value_at_is_cadlag_and_interpolates() {
        let mut p = SampledPath::with_capacity(1.0, 0.0, 3);
        p.push_sample(1.0, 1.0, -0.5, 1.0, 0.0);
        p.push_sample(2.0, 0.5, 0.0, 0.5, 0.5);
        assert_eq!(p.value_at(0.5), 0.5);
        assert_eq!(p.value_at(1.0), 0.5); // post-jump value
        assert_abs_diff_eq!(p.value_at(0.999), 0.999);
        assert_eq!(p.value_at(1.5), 0.5);
        assert_eq!(p.value_at(5.0), 0.5);
        assert_eq!(p.value_at(-1.0), 0.0);
    }

    #[test]
    fn drawdown_rule_respects_gap_and_settle() {
        let d = Dynamics::brownian(-1.0, 1.0);
        let mut rng = substream(0xB421, 11);
        for rep in 0..20 {
            let p = simulate_path(&d, 0.0, 0.05, StopRule::Drawdown { gap: 3.0, settle: 2.0 }, &mut rng)
                .unwrap_or_else(|e| panic!("rep {rep}: {e}"));
            let sup = p.sup();
            assert!(sup - p.end_value() >= 3.0);
            // recompute the first-attainment epoch like the engine does
            let mut best = (f64::NEG_INFINITY, 0.0);
            for i in 0..p.len() {
                let bm = p.bridge_maxima()[i];
                if bm > best.0 {
                    let at = if i > 0 && bm == p.left_values()[i] {
                        p.times()[i]
                    } else if i > 0 {
                        0.5 * (p.times()[i - 1] + p.times()[i])
                    } else {
                        0.0
                    };
                    best = (bm, at);
                }
                if p.right_value(i) > best.0 {
                    best = (p.right_value(i), p.times()[i]);
                }
            }
            assert!(p.life_end() - best.1 >= 2.0 - 1e-12, "settle window too short");
        }
    }

    #[test]
    fn passage_classification_is_consistent() {
        let d = heavy_jump_model();
        let tilted = d.tilt(2.0).unwrap(); // drifts upward, rate 6 jumps
        let mut rng = substream(0xB422, 2);
        let mut seen = (false, false);
        for _ in 0..200 {
            let (p, c) = simulate_until_passage(&tilted, 0.0, 0.7, 0.1, 1e5, &mut rng).unwrap();
            assert_eq!(c.index, p.len() - 1);
            assert_eq!(c.tau, p.life_end());
            // no interval before the crossing may have reached the level
            for i in 0..p.len() - 1 {
                assert!(p.bridge_maxima()[i] < 0.7);
                assert!(p.right_value(i) < 0.7);
            }
            match c.kind {
                CrossingKind::Continuous => {
                    seen.0 = true;
                    assert_eq!(c.overshoot, 0.0);
                    assert_eq!(c.undershoot, 0.0);
                    assert_eq!(p.end_value(), 0.7);
                    assert_eq!(p.bridge_maxima()[c.index], 0.7);
                }
                CrossingKind::Jump => {
                    seen.1 = true;
                    assert!(c.undershoot > 0.0);
                    assert!(c.overshoot >= 0.0);
                    assert_abs_diff_eq!(p.end_value(), 0.7 + c.overshoot, epsilon = 1e-12);
                    assert_abs_diff_eq!(p.left_value(c.index), 0.7 - c.undershoot, epsilon = 1e-12);
                    assert!(p.jump_sizes()[c.index] != 0.0);
                }
            }
        }
        assert!(seen.0 && seen.1, "both crossing kinds should occur");
    }

    #[test]
    fn passage_from_at_or_above_level_is_immediate() {
        let d = Dynamics::brownian(1.0, 1.0);
        let mut rng = substream(0xB423, 1);
        let (p, c) = simulate_until_passage(&d, 0.0, 0.0, 0.1, 1e3, &mut rng).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(c.tau, 0.0);
        assert_eq!(c.kind, CrossingKind::Continuous);
    }

    #[test]
    fn passage_times_out_when_unreachable() {
        let d = Dynamics::brownian(-2.0, 0.05);
        let mut rng = substream(0xB424, 1);
        let err = simulate_until_passage(&d, -1.0, 50.0, 0.5, 100.0, &mut rng).unwrap_err();
        assert!(matches!(err, SimError::HorizonExhausted { .. }));
    }

    #[test]
    fn split_from_and_up_to_partition_a_path() {
        // tent with a jump: 0 -> 1 (max, left limit), jump -1/2, decay
        let mut p = SampledPath::with_capacity(0.5, 0.0, 4);
        p.push_sample(1.0, 1.0, -0.5, 1.0, 0.0);
        p.push_sample(2.0, 0.2, 0.0, 0.5, 0.2);
        let cut = CutPoint::AtSample { index: 1, fold_jump: false };
        let fwd = p.split_from(&cut);
        assert_eq!(fwd.times(), &[0.0, 1.0]);
        assert_eq!(fwd.left_values(), &[1.0, 0.2]);
        assert_eq!(fwd.jump_sizes(), &[-0.5, 0.0]);
        assert_eq!(fwd.start_value(), 0.5);
        let back = p.split_up_to(&cut);
        assert_eq!(back.times(), &[0.0, 1.0]);
        assert_eq!(back.left_values(), &[0.0, 1.0]);
        assert_eq!(back.jump_sizes(), &[0.0, 0.0]);
        assert_eq!(back.end_value(), 1.0);

        let folded = p.split_from(&CutPoint::AtSample { index: 1, fold_jump: true });
        assert_eq!(folded.start_value(), 0.5);
        assert_eq!(folded.jump_sizes()[0], 0.0);

        // interior cut at the peak of a pure tent
        let tent = SampledPath::from_linear(1.0, &[(0.0, 0.0), (2.0, 2.0), (4.0, 0.0)]);
        let cut = CutPoint::Interior { index: 2, time: 3.0, value: 1.0 };
        let fwd = tent.split_from(&cut);
        assert_eq!(fwd.times(), &[0.0, 1.0]);
        assert_eq!(fwd.start_value(), 1.0);
        assert_eq!(fwd.end_value(), 0.0);
        let back = tent.split_up_to(&cut);
        assert_eq!(back.times(), &[0.0, 2.0, 3.0]);
        assert_eq!(back.end_value(), 1.0);
        assert_eq!(back.bridge_maxima()[2], 1.0);
    }

    #[test]
    fn refine_preserves_sample_values() {
        let d = heavy_jump_model();
        let mut rng = substream(0xB425, 5);
        let p = simulate_path(&d, 0.0, 0.25, StopRule::Horizon(2.0), &mut rng).unwrap();
        let r = p.refine_half_step(d.sigma, &mut rng);
        assert_eq!(r.len(), 2 * p.len() - 1);
        assert_eq!(r.step(), p.step() / 2.0);
        for i in 0..p.len() {
            let t = p.times()[i];
            assert!(r.times().contains(&t));
            assert_abs_diff_eq!(r.value_at(t), p.right_value(i), epsilon = 1e-12);
        }
        assert!(!r.max_refined());
    }
}
