//! Scenario files, the case studies, Monte-Carlo runs, parameter sweeps
//! and CSV/JSON output.

mod case_study;
mod config;
mod emit;
mod monte_carlo;
mod sweep;
mod trial;

pub use case_study::{case_geometry, case_problem, default_gammas, run_case_study, CaseStudyRow};
pub use config::{dbm_to_watts, watts_to_dbm, Algorithm, Placement, ScenarioConfig, SweepAxis, SweepSpec};
pub use emit::{emit, fmt_f64, fmt_positions, parse_positions, write_csv, write_json, Format, Tabular};
pub use monte_carlo::{
    draw_entities, entities_for_trial, mean_and_std_error, monte_carlo, run_trial, summarize, trial_rng,
    AlgorithmSummary, MonteCarloReport,
};
pub use sweep::{run_sweep, SweepReport, SweepRow, SweepTrial};
pub use trial::{evaluate, Evaluation, TrialResult};
