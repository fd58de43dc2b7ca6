//! Scalar functionals of sampled paths.
//!
//! Event detection (suprema, upward passages, last passages above a level)
//! uses the stored interval maxima, so on paths whose maxima were drawn
//! exactly those events are exact in law; only their timestamps inside an
//! interval are placed approximately (interpolation or midpoint, an O(step)
//! effect).  Downward events rely on the endpoint envelope and are
//! correspondingly cruder; samplers that need exact minima negate a path
//! with exact maxima instead.

use crate::path::{Crossing, CrossingKind, CutPoint, SampledPath};

/// Where the supremum of a path is first attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArgMaxKind {
    /// At the left limit of a sample (the peak sits just before a jump,
    /// or the sample is continuous).
    AtLeftLimit,
    /// At the post-jump value of a sample.
    AtRightValue,
    /// Strictly inside an interval; the time is the interval midpoint.
    Interior,
}

/// First attainment point of the pathwise supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArgMax {
    pub index: usize,
    pub time: f64,
    pub value: f64,
    pub kind: ArgMaxKind,
}

impl ArgMax {
    pub(crate) fn cut(&self) -> CutPoint {
        match self.kind {
            ArgMaxKind::AtLeftLimit => CutPoint::AtSample { index: self.index, fold_jump: false },
            ArgMaxKind::AtRightValue => CutPoint::AtSample { index: self.index, fold_jump: true },
            ArgMaxKind::Interior => {
                CutPoint::Interior { index: self.index, time: self.time, value: self.value }
            }
        }
    }
}

/// Earliest attainment of the supremum, scanning interval maxima and jump
/// values in time order.
pub fn argmax(path: &SampledPath) -> ArgMax {
    let times = path.times();
    let mut best = ArgMax {
        index: 0,
        time: times[0],
        value: path.left_value(0),
        kind: ArgMaxKind::AtLeftLimit,
    };
    for i in 0..path.len() {
        let bm = path.bridge_maxima()[i];
        if i > 0 && bm > best.value {
            best = if bm == path.left_value(i) {
                ArgMax { index: i, time: times[i], value: bm, kind: ArgMaxKind::AtLeftLimit }
            } else {
                let mid = 0.5 * (times[i - 1] + times[i]);
                ArgMax { index: i, time: mid, value: bm, kind: ArgMaxKind::Interior }
            };
        }
        let rv = path.right_value(i);
        if rv > best.value {
            best = ArgMax { index: i, time: times[i], value: rv, kind: ArgMaxKind::AtRightValue };
        }
    }
    best
}

/// First passage into `[level, ∞)`, detected from the exact interval maxima
/// and jump values.  A path already at or above the level at time 0 counts
/// as an immediate continuous crossing with the excess as overshoot.
pub fn first_passage_above(path: &SampledPath, level: f64) -> Option<Crossing> {
    if path.right_value(0) >= level {
        return Some(Crossing {
            kind: CrossingKind::Continuous,
            tau: path.times()[0],
            undershoot: 0.0,
            overshoot: path.right_value(0) - level,
            index: 0,
        });
    }
    let times = path.times();
    for i in 1..path.len() {
        let a = path.right_value(i - 1);
        let b = path.left_value(i);
        if path.bridge_maxima()[i] >= level {
            let dt = times[i] - times[i - 1];
            let tau = if b >= level && b > a {
                times[i - 1] + dt * ((level - a) / (b - a)).clamp(0.0, 1.0)
            } else {
                times[i - 1] + 0.5 * dt
            };
            return Some(Crossing {
                kind: CrossingKind::Continuous,
                tau,
                undershoot: 0.0,
                overshoot: 0.0,
                index: i,
            });
        }
        if path.right_value(i) >= level {
            return Some(Crossing {
                kind: CrossingKind::Jump,
                tau: times[i],
                undershoot: level - b,
                overshoot: path.right_value(i) - level,
                index: i,
            });
        }
    }
    None
}

/// First entrance into `(−∞, level)`, detected from the endpoint envelope
/// only (interior dips below the level between samples are missed; the
/// error vanishes with the step).
pub fn first_entrance_below(path: &SampledPath, level: f64) -> Option<f64> {
    if path.right_value(0) < level {
        return Some(path.times()[0]);
    }
    let times = path.times();
    for i in 1..path.len() {
        let a = path.right_value(i - 1);
        let b = path.left_value(i);
        if b < level {
            let dt = times[i] - times[i - 1];
            return Some(times[i - 1] + dt * ((a - level) / (a - b)).clamp(0.0, 1.0));
        }
        if path.right_value(i) < level {
            return Some(times[i]);
        }
    }
    None
}

/// Occupation time of `(level, ∞)` with linear interpolation inside
/// intervals.
pub fn occupation_above(path: &SampledPath, level: f64) -> f64 {
    let times = path.times();
    let mut total = 0.0;
    for i in 1..path.len() {
        let a = path.right_value(i - 1) - level;
        let b = path.left_value(i) - level;
        let dt = times[i] - times[i - 1];
        if a > 0.0 && b >= 0.0 {
            total += dt;
        } else if a <= 0.0 && b > 0.0 {
            total += dt * b / (b - a);
        } else if a > 0.0 && b < 0.0 {
            total += dt * a / (a - b);
        }
    }
    total
}

/// Last time the path is at or above `level`, scanning backwards over jump
/// values and interval maxima.
pub fn last_above(path: &SampledPath, level: f64) -> Option<f64> {
    let times = path.times();
    for i in (0..path.len()).rev() {
        if path.right_value(i) >= level {
            return Some(times[i]);
        }
        if i == 0 {
            break;
        }
        let b = path.left_value(i);
        if path.bridge_maxima()[i] >= level {
            if b >= level {
                return Some(times[i]);
            }
            let a = path.right_value(i - 1);
            let dt = times[i] - times[i - 1];
            let t = if a >= level {
                times[i - 1] + dt * ((a - level) / (a - b)).clamp(0.0, 1.0)
            } else {
                times[i - 1] + 0.5 * dt
            };
            return Some(t);
        }
    }
    None
}

/// Last time the path is at or below `level` (endpoint envelope on the
/// downward side unless the path's minima were drawn exactly).
pub fn last_below(path: &SampledPath, level: f64) -> Option<f64> {
    last_above(&path.negated(), -level)
}

/// The standard bundle of path functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStats {
    pub sup: f64,
    pub argmax: ArgMax,
    /// First passage into `(0, ∞)` (immediate if the path starts there).
    pub first_above_zero: Option<Crossing>,
    /// First entrance into `(−∞, 0)`, envelope-based.
    pub first_below_zero: Option<f64>,
    /// Occupation time of `(0, ∞)`.
    pub occupation_pos: f64,
    /// Last time at or above 0.
    pub last_above_zero: Option<f64>,
}

pub fn path_stats(path: &SampledPath) -> PathStats {
    let am = argmax(path);
    PathStats {
        sup: path.sup(),
        argmax: am,
        first_above_zero: first_passage_above(path, 0.0),
        first_below_zero: first_entrance_below(path, 0.0),
        occupation_pos: occupation_above(path, 0.0),
        last_above_zero: last_above(path, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// 0 → 1 over [0,1], 1 → −1 over [1,3], sampled every 0.5.
    fn tent() -> SampledPath {
        SampledPath::from_linear(
            0.5,
            &[
                (0.0, 0.0),
                (0.5, 0.5),
                (1.0, 1.0),
                (1.5, 0.5),
                (2.0, 0.0),
                (2.5, -0.5),
                (3.0, -1.0),
            ],
        )
    }

    #[test]
    fn tent_functionals_are_exact() {
        let p = tent();
        let s = path_stats(&p);
        assert_eq!(s.sup, 1.0);
        assert_eq!(s.argmax.time, 1.0);
        assert_eq!(s.argmax.kind, ArgMaxKind::AtLeftLimit);
        assert_eq!(s.argmax.index, 2);
        let tau = s.first_above_zero.unwrap();
        assert_eq!(tau.tau, 0.0); // starts at 0, immediately at the boundary
        assert_eq!(s.first_below_zero.unwrap(), 2.0);
        assert_eq!(s.occupation_pos, 2.0);
        assert_eq!(s.last_above_zero.unwrap(), 2.0);

        let half = first_passage_above(&p, 0.5).unwrap();
        assert_eq!(half.tau, 0.5);
        assert_eq!(half.kind, CrossingKind::Continuous);
        assert_eq!(last_above(&p, 0.5).unwrap(), 1.5);
        assert_eq!(last_below(&p, 0.5).unwrap(), 3.0);
        assert_eq!(occupation_above(&p, 0.5), 1.0);
    }

    #[test]
    fn strictly_decreasing_path() {
        let p = SampledPath::from_linear(1.0, &[(0.0, 0.0), (1.0, -1.0), (2.0, -2.0)]);
        let s = path_stats(&p);
        assert_eq!(s.sup, 0.0);
        assert_eq!(s.argmax.time, 0.0);
        assert_eq!(s.first_above_zero.unwrap().tau, 0.0);
        assert_eq!(s.first_below_zero.unwrap(), 0.0);
        assert_eq!(s.occupation_pos, 0.0);
        assert_eq!(s.last_above_zero.unwrap(), 0.0);
        assert_eq!(first_passage_above(&p, 0.5), None);
        assert_eq!(last_above(&p, 0.5), None);
    }

    #[test]
    fn jump_passage_is_detected_with_exact_values() {
        let mut p = SampledPath::with_capacity(1.0, 0.0, 3);
        p.push_sample(1.0, 0.2, 1.0, 0.2, 0.0); // jumps 0.2 -> 1.2
        p.push_sample(2.0, 1.5, 0.0, 1.5, 1.2);
        let c = first_passage_above(&p, 1.0).unwrap();
        assert_eq!(c.kind, CrossingKind::Jump);
        assert_eq!(c.tau, 1.0);
        assert_abs_diff_eq!(c.undershoot, 0.8);
        assert_abs_diff_eq!(c.overshoot, 0.2);
        assert_eq!(last_above(&p, 1.0).unwrap(), 2.0);

        let am = argmax(&p);
        assert_eq!(am.kind, ArgMaxKind::AtLeftLimit);
        assert_eq!(am.value, 1.5);
        assert_eq!(am.time, 2.0);
    }

    #[test]
    fn argmax_at_jump_value() {
        let mut p = SampledPath::with_capacity(1.0, 0.0, 3);
        p.push_sample(1.0, 0.5, 2.0, 0.5, 0.0); // jump to 2.5
        p.push_sample(2.0, 1.0, 0.0, 2.5, 1.0);
        let am = argmax(&p);
        assert_eq!(am.kind, ArgMaxKind::AtRightValue);
        assert_eq!(am.time, 1.0);
        assert_eq!(am.value, 2.5);
        assert_eq!(am.index, 1);
    }

    #[test]
    fn argmax_interior_uses_midpoint() {
        let mut p = SampledPath::with_capacity(1.0, 0.0, 2);
        p.push_sample(1.0, 0.1, 0.0, 0.9, 0.0); // interior bump to 0.9
        let am = argmax(&p);
        assert_eq!(am.kind, ArgMaxKind::Interior);
        assert_eq!(am.time, 0.5);
        assert_eq!(am.value, 0.9);
        let c = first_passage_above(&p, 0.8).unwrap();
        assert_eq!(c.kind, CrossingKind::Continuous);
        assert_eq!(c.tau, 0.5);
        assert_eq!(last_above(&p, 0.8).unwrap(), 0.5);
    }

    #[test]
    fn occupation_handles_boundary_segments() {
        let p = tent();
        // shifted down by 1: above 0 only strictly inside (0.5, 1.5) around the peak
        let q = p.shifted_by(-0.5);
        assert_abs_diff_eq!(occupation_above(&q, 0.0), 1.0);
    }

    #[test]
    fn split_at_interior_argmax_keeps_peak_value() {
        let p = SampledPath::from_linear(1.0, &[(0.0, 0.0), (2.0, 2.0), (4.0, 0.0)]);
        let am = argmax(&p);
        // linear tent peaks at a sample: left-limit attainment
        assert_eq!(am.kind, ArgMaxKind::AtLeftLimit);
        let fwd = p.split_from(&am.cut());
        assert_eq!(fwd.start_value(), 2.0);
        assert_eq!(fwd.life_end(), 2.0);
        let back = p.split_up_to(&am.cut());
        assert_eq!(back.end_value(), 2.0);
        assert_eq!(back.life_end(), 2.0);
    }
}
