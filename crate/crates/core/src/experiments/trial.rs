use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{exhaustive_search, fixed_position_beamforming, PlacementPolicy};
use crate::error::{Error, Result};
use crate::geometry::GroundPoint;
use crate::problem::Problem;
use crate::sca::{optimize_with_hints, PipelineConfig};

use super::config::Algorithm;
use super::emit::{fmt_f64, fmt_positions, Tabular};

/// One algorithm on one realization. Infeasible runs carry rate 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub user_x: f64,
    pub user_y: f64,
    pub target_x: f64,
    pub target_y: f64,
    pub rate: f64,
    pub radar_snr: f64,
    pub feasible: bool,
    pub solve_time_s: f64,
    pub sca_iterations: usize,
    pub positions: Vec<f64>,
}

impl Tabular for TrialResult {
    fn header() -> Vec<&'static str> {
        vec![
            "trial",
            "algorithm",
            "user_x",
            "user_y",
            "target_x",
            "target_y",
            "rate",
            "radar_snr",
            "feasible",
            "solve_time_s",
            "sca_iterations",
            "positions",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.algorithm.label().to_string(),
            fmt_f64(self.user_x),
            fmt_f64(self.user_y),
            fmt_f64(self.target_x),
            fmt_f64(self.target_y),
            fmt_f64(self.rate),
            fmt_f64(self.radar_snr),
            self.feasible.to_string(),
            fmt_f64(self.solve_time_s),
            self.sca_iterations.to_string(),
            fmt_positions(&self.positions),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rate: f64,
    pub radar_snr: f64,
    pub feasible: bool,
    pub solve_time_s: f64,
    pub sca_iterations: usize,
    pub positions: Vec<f64>,
}

impl Evaluation {
    pub fn into_result(
        self,
        trial: usize,
        algorithm: Algorithm,
        user: GroundPoint,
        target: GroundPoint,
    ) -> TrialResult {
        TrialResult {
            trial,
            algorithm,
            user_x: user.x,
            user_y: user.y,
            target_x: target.x,
            target_y: target.y,
            rate: self.rate,
            radar_snr: self.radar_snr,
            feasible: self.feasible,
            solve_time_s: self.solve_time_s,
            sca_iterations: self.sca_iterations,
            positions: self.positions,
        }
    }
}

/// Run one algorithm. `hints` are extra candidate placements for the
/// pinching optimizer and are ignored by the others.
pub fn evaluate(
    problem: &Problem,
    algorithm: Algorithm,
    pipeline: &PipelineConfig,
    exhaustive_step: f64,
    hints: &[Vec<f64>],
) -> Result<Evaluation> {
    let start = Instant::now();
    let mut e = match algorithm {
        Algorithm::Pinching => {
            let out = optimize_with_hints(problem, pipeline, hints)?;
            Evaluation {
                rate: out.rate,
                radar_snr: out.radar_snr,
                feasible: out.feasible,
                solve_time_s: 0.0,
                sca_iterations: out.sca_iterations(),
                positions: out.positions,
            }
        }
        Algorithm::Exhaustive => match exhaustive_search(problem, exhaustive_step, false)? {
            Some(r) => Evaluation {
                rate: r.solution.rate,
                radar_snr: problem.radar_snr_from_gain(r.solution.sensing_gain),
                feasible: true,
                solve_time_s: 0.0,
                sca_iterations: 0,
                positions: r.positions,
            },
            None => infeasible(problem.num_tx()),
        },
        bench => {
            let kind = bench.placement().ok_or_else(|| Error::Domain(format!("{} has no placement", bench.label())))?;
            let policy = PlacementPolicy::benchmark(kind, &problem.geometry);
            match fixed_position_beamforming(&policy.positions, problem)? {
                Some(s) => Evaluation {
                    rate: s.rate,
                    radar_snr: problem.radar_snr_from_gain(s.sensing_gain),
                    feasible: true,
                    solve_time_s: 0.0,
                    sca_iterations: 0,
                    positions: policy.positions,
                },
                None => Evaluation { positions: policy.positions, ..infeasible(0) },
            }
        }
    };
    if !e.feasible {
        e.rate = 0.0;
    }
    e.solve_time_s = start.elapsed().as_secs_f64();
    Ok(e)
}

fn infeasible(m: usize) -> Evaluation {
    Evaluation {
        rate: 0.0,
        radar_snr: 0.0,
        feasible: false,
        solve_time_s: 0.0,
        sca_iterations: 0,
        positions: vec![0.0; m],
    }
}
