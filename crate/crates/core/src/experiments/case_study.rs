use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{uniform_layout, GroundPoint, SystemGeometry};
use crate::problem::Problem;
use crate::sca::PipelineConfig;

use super::config::{Algorithm, ScenarioConfig};
use super::emit::{fmt_f64, fmt_positions, Tabular};
use super::trial::evaluate;

/// Two transmit waveguides at W/3 and 2W/3; user at (kL/10, 2W/5) and
/// target at (-kL/10, 3W/5) for case k.
pub fn case_geometry(cfg: &ScenarioConfig, case: u8) -> Result<SystemGeometry> {
    if !(1..=3).contains(&case) {
        return Err(Error::Config(format!("case must be 1, 2 or 3, got {case}")));
    }
    let k = f64::from(case);
    let (l, w) = (cfg.length, cfg.width);
    SystemGeometry::new(
        l,
        w,
        cfg.height,
        vec![w / 3.0, 2.0 * w / 3.0],
        uniform_layout(w, cfg.num_rx),
        GroundPoint::new(k * l / 10.0, 2.0 * w / 5.0),
        GroundPoint::new(-k * l / 10.0, 3.0 * w / 5.0),
    )
}

pub fn case_problem(cfg: &ScenarioConfig, case: u8, gamma: f64) -> Result<Problem> {
    let mut detection = cfg.detection;
    detection.radar_snr_requirement = gamma;
    Problem::new(case_geometry(cfg, case)?, cfg.rf, detection, cfg.p_max, cfg.user_noise)
}

/// Requirement grid 0, 0.5, …, 5.
pub fn default_gammas() -> Vec<f64> {
    (0..=10).map(|k| 0.5 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyRow {
    pub case: u8,
    pub radar_snr_requirement: f64,
    pub algorithm: Algorithm,
    pub rate: f64,
    pub radar_snr: f64,
    pub feasible: bool,
    pub solve_time_s: f64,
    pub sca_iterations: usize,
    pub positions: Vec<f64>,
}

impl Tabular for CaseStudyRow {
    fn header() -> Vec<&'static str> {
        vec![
            "case",
            "radar_snr_requirement",
            "algorithm",
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
            self.case.to_string(),
            fmt_f64(self.radar_snr_requirement),
            self.algorithm.label().to_string(),
            fmt_f64(self.rate),
            fmt_f64(self.radar_snr),
            self.feasible.to_string(),
            fmt_f64(self.solve_time_s),
            self.sca_iterations.to_string(),
            fmt_positions(&self.positions),
        ]
    }
}

/// Pinching optimizer and exhaustive search over `gammas` (ascending).
/// The optimizer walks the requirements from the top down and offers each
/// solution as a candidate for the next, looser requirement.
pub fn run_case_study(
    cfg: &ScenarioConfig,
    pipeline: &PipelineConfig,
    case: u8,
    gammas: &[f64],
) -> Result<Vec<CaseStudyRow>> {
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("requirements must be strictly ascending".into()));
    }
    let mut rows: Vec<Option<[CaseStudyRow; 2]>> = vec![None; gammas.len()];
    let mut hint: Option<Vec<f64>> = None;
    for (i, &gamma) in gammas.iter().enumerate().rev() {
        let problem = case_problem(cfg, case, gamma)?;
        let hints: Vec<Vec<f64>> = hint.iter().cloned().collect();
        let row = |alg: Algorithm| -> Result<CaseStudyRow> {
            let e = evaluate(&problem, alg, pipeline, cfg.exhaustive_step, &hints)?;
            Ok(CaseStudyRow {
                case,
                radar_snr_requirement: gamma,
                algorithm: alg,
                rate: e.rate,
                radar_snr: e.radar_snr,
                feasible: e.feasible,
                solve_time_s: e.solve_time_s,
                sca_iterations: e.sca_iterations,
                positions: e.positions,
            })
        };
        let sca = row(Algorithm::Pinching)?;
        let ex = row(Algorithm::Exhaustive)?;
        if sca.feasible {
            hint = Some(sca.positions.clone());
        }
        rows[i] = Some([sca, ex]);
    }
    Ok(rows.into_iter().flatten().flatten().collect())
}
