//! Two-sided paths and pathwise surgery: time reversal, and re-anchoring a
//! path at a distinguished epoch (its maximum, a first passage, a last
//! passage) so the law of the surroundings can be compared against the
//! limiting descriptions sampled directly.

use crate::functionals::{argmax, first_passage_above};
use crate::path::{CrossingKind, CutPoint, SampledPath};

/// A path indexed by the whole real line, stored as two one-sided paths.
/// `forward` carries t ≥ 0 with its own clock; `backward` carries t ≤ 0 in
/// reversed clock, so `backward.value_at(u)` is the value at real time −u.
/// Both pieces share the anchor value at 0 (up to the jump-side convention
/// at sample epochs).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedPath {
    pub backward: SampledPath,
    pub forward: SampledPath,
}

impl TwoSidedPath {
    /// Value at real time `t` (negative times read the backward piece).
    pub fn value_at(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.forward.value_at(t)
        } else {
            self.backward.value_at(-t)
        }
    }

    /// Real-time span covered: (−backward length, forward length).
    pub fn time_span(&self) -> (f64, f64) {
        (-self.backward.life_end(), self.forward.life_end())
    }

    pub fn sup(&self) -> f64 {
        self.backward.sup().max(self.forward.sup())
    }

    /// Last real time at or above `level`, if the path ever reaches it.
    pub fn last_above(&self, level: f64) -> Option<f64> {
        if let Some(t) = crate::functionals::last_above(&self.forward, level) {
            return Some(t);
        }
        first_passage_above(&self.backward, level).map(|c| -c.tau)
    }

    /// Occupation time of `(level, ∞)` over the whole span.
    pub fn occupation_above(&self, level: f64) -> f64 {
        crate::functionals::occupation_above(&self.backward, level)
            + crate::functionals::occupation_above(&self.forward, level)
    }
}

/// Runs a path backwards from its endpoint: the result at clock u is the
/// right limit of the original at (end − u), jumps change sign, and interval
/// bridge extrema are inherited exactly (a Brownian bridge is reversible).
pub fn reverse_path(path: &SampledPath) -> SampledPath {
    let n = path.len();
    let end = path.life_end();
    let mut out = SampledPath::with_capacity(path.step(), path.right_value(n - 1), n);
    out.set_first_jump(-path.jump_sizes()[n - 1]);
    for k in 1..n {
        let i = n - 1 - k;
        out.push_sample(
            end - path.times()[i],
            path.right_value(i),
            -path.jump_sizes()[i],
            path.bridge_maxima()[i + 1],
            path.bridge_minima()[i + 1],
        );
    }
    out.copy_refinement_flags(path);
    out
}

/// The pre-maximum piece reflected and reversed: t ↦ sup − ξ_{(σ−t)−},
/// where σ is the first attainment epoch of the supremum.  Under duality
/// this piece has the law of an ascending conditioned path.
pub fn reversed_about_max(path: &SampledPath) -> SampledPath {
    let am = argmax(path);
    let pre = path.split_up_to(&am.cut());
    reverse_path(&pre).negated().shifted_by(am.value)
}

/// A distinguished epoch to re-anchor a path at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftPoint {
    /// First attainment of the supremum.
    Max,
    /// First passage into `[level, ∞)`.
    Entry { level: f64 },
    /// Last time at or above `level`.
    LastAbove { level: f64 },
}

fn entry_cut(path: &SampledPath, level: f64) -> Option<CutPoint> {
    let c = first_passage_above(path, level)?;
    Some(match c.kind {
        CrossingKind::Jump => CutPoint::AtSample { index: c.index, fold_jump: false },
        CrossingKind::Continuous => {
            let times = path.times();
            if c.index == 0 || c.tau <= times[c.index - 1] {
                CutPoint::AtSample { index: c.index.saturating_sub(1), fold_jump: true }
            } else if c.tau >= times[c.index] {
                CutPoint::AtSample { index: c.index, fold_jump: false }
            } else {
                CutPoint::Interior { index: c.index, time: c.tau, value: level }
            }
        }
    })
}

fn last_above_cut(path: &SampledPath, level: f64) -> Option<CutPoint> {
    let times = path.times();
    for i in (0..path.len()).rev() {
        if path.right_value(i) >= level {
            return Some(CutPoint::AtSample { index: i, fold_jump: true });
        }
        if i == 0 {
            break;
        }
        if path.bridge_maxima()[i] >= level {
            let b = path.left_value(i);
            if b >= level {
                return Some(CutPoint::AtSample { index: i, fold_jump: false });
            }
            let a = path.right_value(i - 1);
            let dt = times[i] - times[i - 1];
            let t = if a >= level {
                let frac = ((a - level) / (a - b)).clamp(0.0, 1.0);
                if frac == 0.0 {
                    return Some(CutPoint::AtSample { index: i - 1, fold_jump: true });
                }
                times[i - 1] + dt * frac
            } else {
                times[i - 1] + 0.5 * dt
            };
            if t >= times[i] {
                return Some(CutPoint::AtSample { index: i, fold_jump: false });
            }
            return Some(CutPoint::Interior { index: i, time: t, value: level });
        }
    }
    None
}

/// Splits a path at the shift point into a two-sided path anchored there:
/// the forward piece starts at the shifted epoch, the backward piece is the
/// history run in reverse.  Returns `None` when the epoch does not exist.
pub fn shift_kill(path: &SampledPath, at: &ShiftPoint) -> Option<TwoSidedPath> {
    let cut = match at {
        ShiftPoint::Max => argmax(path).cut(),
        ShiftPoint::Entry { level } => entry_cut(path, *level)?,
        ShiftPoint::LastAbove { level } => last_above_cut(path, *level)?,
    };
    let mut pre = path.split_up_to(&cut);
    let mut fwd = path.split_from(&cut);
    // An interior cut splits an interval whose exact maximum was drawn as a
    // whole.  Any excess over the anchor level lies after a first entrance
    // (the pre-anchor segment stays below the level) and before a last
    // passage, so exactly one side owns it; restore it there so suprema of
    // the pieces stay exact in law.  At a maximum cut both sides already top
    // out at the cut value.
    if let CutPoint::Interior { index, .. } = cut {
        let m = path.bridge_maxima()[index];
        match at {
            ShiftPoint::Entry { .. } => fwd.raise_bridge_max(1, m),
            ShiftPoint::LastAbove { .. } => pre.raise_bridge_max(pre.len() - 1, m),
            ShiftPoint::Max => {}
        }
    }
    Some(TwoSidedPath { backward: reverse_path(&pre), forward: fwd })
}
