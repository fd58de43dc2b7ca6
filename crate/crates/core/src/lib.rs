//! Simulation and statistics for light-tailed Lévy processes conditioned to
//! stay positive or to reach a high level, built around three pieces:
//!
//! * a hybrid-grid path engine that samples the process at regular steps and
//!   at its exact jump epochs, carrying exact Brownian-bridge maxima per
//!   interval so suprema are exact in law at any step size;
//! * samplers for the limiting conditioned and two-sided stationary path
//!   laws that arise from P_x(· | sup ξ > 0) as x → −∞, via Esscher tilting,
//!   duality and exchange of path segments around the supremum;
//! * Lamperti time changes turning those paths into self-similar excursion
//!   shapes, plus weighted empirical statistics (KS, Wasserstein, tail fits)
//!   to compare sampler output against closed-form laws.

pub mod functionals;
pub mod models;
pub mod path;
pub mod lamperti;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod two_sided;

pub use functionals::{
    argmax, first_entrance_below, first_passage_above, last_above, last_below, occupation_above,
    path_stats, ArgMax, ArgMaxKind, PathStats,
};
pub use models::{
    cramer_exponent, phi_exponent, CramerConstants, Dynamics, JumpSpec, LevyModel, ModelError,
};
pub use path::{
    adaptive_gap, simulate_path, simulate_until_passage, Crossing, CrossingKind, SampledPath,
    SimError, StopRule,
};
pub use lamperti::{excursion_from_two_sided, excursion_williams, lamperti_clock, Clock, Excursion};
pub use rng::{run_replicates, substream};
pub use samplers::{
    conditioned_entrance, conditioned_weight, estimate_cramer_constants, sample_conditioned_is,
    sample_conditioned_rejection, sample_p_down, sample_ptilde_up, sample_ptilde_up_from,
    sample_rho, sample_rho_tilde, sample_rho_tilde_at, sample_script_p, sample_script_p_sup,
    sample_script_q, CramerEstimate, Horizons, OvershootPair, RejectionDraw, SamplerError,
    WeightedPath, DEFAULT_BUDGET,
};
pub use stats::{
    bootstrap_se_mean, debt_time_cdf, debt_time_density, debt_time_density_mc, ks2_threshold_99,
    ks_distance, ks_distance_to_cdf, ks_threshold_99, normal_cdf, normal_pdf, tail_exponent_fit,
    wasserstein1, DebtTimeCdf, EmpiricalDistribution, KsResult, SampleMeta, StatsError, TailFit,
};
pub use two_sided::{reverse_path, reversed_about_max, shift_kill, ShiftPoint, TwoSidedPath};
