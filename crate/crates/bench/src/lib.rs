//! Preset models shared by the benchmark targets.

use levylab_core::{Dynamics, JumpSpec, LevyModel};

/// Standard Brownian motion with drift -1.
pub fn brownian_unit() -> LevyModel {
    LevyModel::validate(Dynamics::brownian(-1.0, 1.0)).unwrap()
}

/// Jump diffusion with drift -2, unit volatility and upward
/// exponential(3) jumps at rate 1.
pub fn jump_diffusion() -> LevyModel {
    LevyModel::validate(Dynamics {
        drift: -2.0,
        sigma: 1.0,
        jumps: vec![JumpSpec { rate: 1.0, beta: 3.0, sign: 1 }],
    })
    .unwrap()
}
