//! Successive convex approximation over the log-lifted, phase-aligned
//! problem, plus the multi-start pipeline that turns its output into a
//! realized beamformer.

mod lifted;
mod linearize;
mod pipeline;
mod solve;

use serde::{Deserialize, Serialize};

use crate::convex::SolverSettings;

pub use lifted::{evaluate_g_hat, lift_tight, GHat, LiftedVariables, LOG_FLOOR};
pub use linearize::{
    coefficient_scale, evaluate_g_tilde, families, from_vector, linearize, normalized_sensing_threshold, to_vector,
    Families, Layout, SignedExpSum, Subproblem,
};
pub use pipeline::{
    optimize, optimize_with_hints, prepare_start, CandidateSource, OptimizeOutcome, PipelineConfig, StartKind, StartRun,
};
pub use solve::{feasible_init, sca_solve, write_trace_csv, InitOutcome, ScaIterate, ScaOutcome, ScaStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaConfig {
    pub max_outer_iterations: usize,
    /// Relative objective change below which an iteration counts as stalled.
    pub objective_tolerance: f64,
    /// Consecutive stalled iterations before stopping.
    pub stall_iterations: usize,
    /// Per-iteration box on each antenna position, in m.
    pub trust_region: f64,
    /// Sensing requirement is inflated by `1 + constraint_margin`.
    pub constraint_margin: f64,
    /// Half-width of the per-iteration box on log-domain variables.
    pub log_box: f64,
    pub solver: SolverSettings,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            max_outer_iterations: 50,
            objective_tolerance: 1e-5,
            stall_iterations: 2,
            trust_region: 2.0,
            constraint_margin: 1e-3,
            log_box: 30.0,
            solver: SolverSettings::default(),
        }
    }
}
