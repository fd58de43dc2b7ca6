//! Exponential time change: additive clocks ∫ e^{±ξ_s} ds with exact
//! piecewise-linear inverses, and the two excursion constructions built on
//! them: reading a two-sided sample through its clock, and gluing
//! independently drawn descent/ascent pieces at a prescribed height.

use crate::models::LevyModel;
use crate::path::SampledPath;
use crate::samplers::{sample_p_down, sample_ptilde_up, Horizons, SamplerError};
use crate::two_sided::TwoSidedPath;
use rand::Rng;

/// A cumulative clock t ↦ ∫₀^t e^{sign·ξ_s} ds tabulated on the path grid.
/// Between grid points the integrand is held at its left càdlàg value, so
/// the table is piecewise linear, strictly increasing, and inverts exactly.
#[derive(Debug, Clone)]
pub struct Clock {
    times: Vec<f64>,
    cum: Vec<f64>,
}

impl Clock {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.cum
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Clock value at path time `t` (clamped to the tabulated span).
    pub fn at(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return self.cum[0];
        }
        if t >= *self.times.last().unwrap() {
            return self.total();
        }
        let i = self.times.partition_point(|&u| u <= t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (c0, c1) = (self.cum[i - 1], self.cum[i]);
        c0 + (c1 - c0) * (t - t0) / (t1 - t0)
    }

    /// The inverse time change γ(s): the path time at which the clock reads
    /// `s` (clamped to the tabulated span).
    pub fn inverse(&self, s: f64) -> f64 {
        if s <= self.cum[0] {
            return self.times[0];
        }
        if s >= self.total() {
            return *self.times.last().unwrap();
        }
        let i = self.cum.partition_point(|&c| c < s);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (c0, c1) = (self.cum[i - 1], self.cum[i]);
        t0 + (t1 - t0) * (s - c0) / (c1 - c0)
    }
}

/// Left-endpoint Riemann sums of e^{sign·ξ} over the path grid, exact for
/// piecewise-constant paths.  `sign` must be ±1.
pub fn lamperti_clock(path: &SampledPath, sign: i8) -> Clock {
    assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
    let s = sign as f64;
    let n = path.len();
    let times = path.times().to_vec();
    let mut cum = Vec::with_capacity(n);
    let mut acc = 0.0;
    cum.push(0.0);
    for i in 1..n {
        let dt = times[i] - times[i - 1];
        acc += dt * (s * path.right_value(i - 1)).exp();
        cum.push(acc);
    }
    Clock { times, cum }
}

/// A positive excursion on its own clock.
#[derive(Debug, Clone)]
pub struct Excursion {
    /// Excursion-time grid in (0, ζ).
    pub times: Vec<f64>,
    /// Excursion values at those times (positive away from the ends).
    pub values: Vec<f64>,
    /// Supremum H of the excursion.
    pub height: f64,
    /// Lifetime ζ.
    pub duration: f64,
    /// Excursion time at which the height is attained.
    pub argmax: f64,
    /// Unscaled total of the underlying additive clock(s).
    pub clock_total: f64,
}

/// Reads a two-sided sample through its exponential clock: with
/// Ī = ∫_ℝ e^{ξ_s} ds and γ̄ the inverse of the two-sided clock, the
/// excursion is X_t = exp(ξ_{γ̄(t)}) on (0, Ī).  The height e^{sup ξ} uses
/// the exact path supremum; callers studying the excursion measure
/// condition on sup ξ > 0 (height above 1).
pub fn excursion_from_two_sided(two: &TwoSidedPath) -> Excursion {
    let b = &two.backward;
    let f = &two.forward;
    // merged real-time grid: backward piece reversed, then the forward piece
    let mut real_times = Vec::with_capacity(b.len() + f.len());
    let mut vals = Vec::with_capacity(b.len() + f.len());
    for j in (1..b.len()).rev() {
        real_times.push(-b.times()[j]);
        vals.push(b.right_value(j));
    }
    for i in 0..f.len() {
        real_times.push(f.times()[i]);
        vals.push(f.right_value(i));
    }

    let mut times = Vec::with_capacity(vals.len());
    let mut values = Vec::with_capacity(vals.len());
    let mut acc = 0.0;
    for k in 0..vals.len() {
        if k > 0 {
            acc += (real_times[k] - real_times[k - 1]) * vals[k - 1].exp();
        }
        times.push(acc);
        values.push(vals[k].exp());
    }
    let duration = acc;

    let am = crate::functionals::argmax(f);
    let backward_clock: f64 = times[b.len().saturating_sub(1)];
    let argmax = if f.sup() >= b.sup() {
        // clock reading at the forward argmax time
        let mut fwd = 0.0;
        for i in 1..f.len() {
            if f.times()[i] > am.time {
                fwd += (am.time - f.times()[i - 1]).max(0.0) * f.right_value(i - 1).exp();
                break;
            }
            fwd += (f.times()[i] - f.times()[i - 1]) * f.right_value(i - 1).exp();
        }
        backward_clock + fwd
    } else {
        let amb = crate::functionals::argmax(b);
        let mut back = 0.0;
        for j in 1..b.len() {
            if b.times()[j] > amb.time {
                back += (amb.time - b.times()[j - 1]).max(0.0) * b.right_value(j - 1).exp();
                break;
            }
            back += (b.times()[j] - b.times()[j - 1]) * b.right_value(j - 1).exp();
        }
        (backward_clock - back).max(0.0)
    };

    Excursion {
        times,
        values,
        height: two.sup().exp(),
        duration,
        argmax,
        clock_total: duration,
    }
}

/// Glues independently drawn descent and ascent pieces into an excursion of
/// height exactly `y`: with Ĩ^↑ = ∫ e^{−η̃^↑} and I^↓ = ∫ e^{η^↓}, the
/// unscaled shape is Y_t = e^{−η̃^↑(γ̃(−t))} for t < 0 and e^{η^↓(γ(t))}
/// for t ≥ 0, and the excursion is y·Y_{t/y} re-anchored to start at 0, so
/// ζ = y·(Ĩ^↑ + I^↓) and the height sits at excursion time y·Ĩ^↑.
pub fn excursion_williams<R: Rng + ?Sized>(
    model: &LevyModel,
    y: f64,
    horizons: Horizons,
    step: f64,
    rng: &mut R,
) -> Result<Excursion, SamplerError> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(SamplerError::BadArgument("height must be positive"));
    }
    let descent = sample_p_down(model, horizons.forward, step, rng)?;
    let ascent = sample_ptilde_up(model, horizons.backward, step, rng)?;
    Ok(williams_from_pieces(&descent, &ascent, y))
}

pub(crate) fn williams_from_pieces(descent: &SampledPath, ascent: &SampledPath, y: f64) -> Excursion {
    let up = lamperti_clock(ascent, -1);
    let down = lamperti_clock(descent, 1);
    let (i_up, i_down) = (up.total(), down.total());

    let n = ascent.len() + descent.len();
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in (0..ascent.len()).rev() {
        times.push(y * (i_up - up.values()[j]));
        values.push(y * (-ascent.right_value(j)).exp());
    }
    for i in 1..descent.len() {
        times.push(y * (i_up + down.values()[i]));
        values.push(y * descent.right_value(i).exp());
    }

    Excursion {
        times,
        values,
        height: y,
        duration: y * (i_up + i_down),
        argmax: y * i_up,
        clock_total: i_up + i_down,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Dynamics, JumpSpec};
    use crate::path::{simulate_path, StopRule};
    use crate::rng::substream;
    use approx::assert_abs_diff_eq;

    fn linear_path(slope: f64, horizon: f64, h: f64) -> SampledPath {
        let n = (horizon / h).round() as usize;
        let pts: Vec<(f64, f64)> =
            (0..=n).map(|k| (k as f64 * h, slope * k as f64 * h)).collect();
        SampledPath::from_linear(h, &pts)
    }

    #[test]
    fn clock_of_unit_descent_has_total_one() {
        // ξ_t = −t: ∫₀^∞ e^{−t} dt = 1 and γ(s) = −ln(1−s)
        let p = linear_path(-1.0, 30.0, 1e-3);
        let c = lamperti_clock(&p, 1);
        assert_abs_diff_eq!(c.total(), 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(c.inverse(0.5), core::f64::consts::LN_2, epsilon = 2e-3);
        assert_abs_diff_eq!(c.inverse(0.9), -(0.1f64).ln(), epsilon = 2e-2);
        // sign −1 turns the descent into an ascent with a diverging clock
        let c2 = lamperti_clock(&p, -1);
        assert!(c2.total() > 1e10);
    }

    #[test]
    fn clock_of_zero_path_is_the_identity() {
        let p = SampledPath::from_linear(5.0, &[(0.0, 0.0), (5.0, 0.0)]);
        let c = lamperti_clock(&p, 1);
        assert_eq!(c.total(), 5.0);
        assert_abs_diff_eq!(c.at(2.3), 2.3, epsilon = 1e-15);
        assert_abs_diff_eq!(c.inverse(1.7), 1.7, epsilon = 1e-15);
    }

    #[test]
    fn clock_halves_its_error_under_grid_refinement() {
        let d = Dynamics::brownian(-1.0, 1.0);
        let mut rng = substream(0x1A4, 0);
        for _ in 0..5 {
            let p = simulate_path(&d, 0.0, 0.01, StopRule::Horizon(10.0), &mut rng).unwrap();
            let coarse = lamperti_clock(&p, 1).total();
            let fine = lamperti_clock(&p.refine_half_step(1.0, &mut rng), 1).total();
            assert!(
                (coarse - fine).abs() / fine <= 1e-2,
                "coarse {coarse} vs fine {fine}"
            );
        }
    }

    #[test]
    fn clock_roundtrips_exactly_at_and_between_nodes() {
        let d = Dynamics::brownian(-0.5, 1.0);
        let mut rng = substream(0x1A4, 1);
        let p = simulate_path(&d, 0.0, 0.05, StopRule::Horizon(5.0), &mut rng).unwrap();
        let c = lamperti_clock(&p, 1);
        for k in 0..p.len() {
            let t = p.times()[k];
            assert_abs_diff_eq!(c.inverse(c.at(t)), t, epsilon = 1e-9);
        }
        for m in 1..40 {
            let s = c.total() * m as f64 / 40.0;
            assert_abs_diff_eq!(c.at(c.inverse(s)), s, epsilon = 1e-9 * c.total());
        }
    }

    #[test]
    fn tent_two_sided_sample_reads_as_a_unit_height_excursion() {
        // ξ_t = −|t|: both clock halves integrate e^{−u} to 1, the height is
        // e^0 = 1 and the argmax clock reading is the backward total.
        let h = 0.01;
        let two = TwoSidedPath {
            backward: linear_path(-1.0, 18.0, h),
            forward: linear_path(-1.0, 18.0, h),
        };
        let exc = excursion_from_two_sided(&two);
        assert_abs_diff_eq!(exc.duration, 2.0, epsilon = 5e-3);
        assert_abs_diff_eq!(exc.height, 1.0);
        assert_abs_diff_eq!(exc.argmax, 1.0, epsilon = 6e-3);
        assert!(exc.values.iter().all(|&v| v > 0.0));
        assert!(exc.values[0] < 1e-6 && *exc.values.last().unwrap() < 1e-6);
        // times strictly increase and stay inside (0, ζ)
        for w in exc.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(exc.times[0] >= 0.0 && *exc.times.last().unwrap() <= exc.duration + 1e-12);
    }

    fn jd1() -> LevyModel {
        LevyModel::validate(Dynamics {
            drift: -2.0,
            sigma: 1.0,
            jumps: vec![JumpSpec { rate: 1.0, beta: 3.0, sign: 1 }],
        })
        .unwrap()
    }

    #[test]
    fn williams_gluing_attains_the_height_exactly() {
        let m = jd1();
        let mut rng = substream(0x1A4, 2);
        let h = Horizons::new(6.0, 6.0).unwrap();
        for _ in 0..20 {
            let exc = excursion_williams(&m, 3.0, h, 0.05, &mut rng).unwrap();
            assert_eq!(exc.height, 3.0);
            let peak = exc.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(peak, 3.0);
            assert!(exc.argmax > 0.0 && exc.argmax < exc.duration);
            assert_abs_diff_eq!(exc.duration, 3.0 * exc.clock_total, epsilon = 1e-12);
            // ends decay to the boundary at the simulated depth
            assert!(exc.values[0] <= 2.0 * 0.05);
            assert!(*exc.values.last().unwrap() <= 2.0 * 0.05);
        }
    }

    #[test]
    fn williams_excursions_scale_as_c_x_of_t_over_c() {
        let m = jd1();
        let mut rng = substream(0x1A4, 3);
        let h = Horizons::new(5.0, 5.0).unwrap();
        let descent = sample_p_down(&m, h.forward, 0.05, &mut rng).unwrap();
        let ascent = sample_ptilde_up(&m, h.backward, 0.05, &mut rng).unwrap();
        let small = williams_from_pieces(&descent, &ascent, 2.0);
        let big = williams_from_pieces(&descent, &ascent, 6.0);
        assert_eq!(big.duration, 3.0 * small.duration);
        assert_eq!(big.argmax, 3.0 * small.argmax);
        for k in 0..small.values.len() {
            assert_eq!(big.values[k], 3.0 * small.values[k]);
            assert_eq!(big.times[k], 3.0 * small.times[k]);
        }
    }
}
