use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::GroundPoint;
use crate::sca::PipelineConfig;

use super::config::{Algorithm, Placement, ScenarioConfig};
use super::emit::{fmt_f64, Tabular};
use super::trial::{evaluate, TrialResult};

/// Independent stream for trial `index`; the same for any thread count or
/// evaluation order.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn draw_entities(cfg: &ScenarioConfig, rng: &mut impl Rng) -> (GroundPoint, GroundPoint) {
    match cfg.placement {
        Placement::Fixed { user, target } => (user, target),
        Placement::Uniform { min_separation } => {
            let half = cfg.length / 2.0;
            let mut draw = || GroundPoint::new(rng.random_range(-half..=half), rng.random_range(0.0..=cfg.width));
            loop {
                let (u, t) = (draw(), draw());
                if u.distance(t) >= min_separation {
                    return (u, t);
                }
            }
        }
    }
}

pub fn entities_for_trial(cfg: &ScenarioConfig, index: usize) -> (GroundPoint, GroundPoint) {
    draw_entities(cfg, &mut trial_rng(cfg.seed, index))
}

pub fn run_trial(cfg: &ScenarioConfig, pipeline: &PipelineConfig, index: usize) -> Result<Vec<TrialResult>> {
    let (user, target) = entities_for_trial(cfg, index);
    let problem = cfg.problem(user, target)?;
    cfg.algorithms
        .iter()
        .map(|&alg| {
            Ok(evaluate(&problem, alg, pipeline, cfg.exhaustive_step, &[])?.into_result(index, alg, user, target))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub trials: usize,
    pub mean_rate: f64,
    pub std_error: f64,
    pub feasible_fraction: f64,
    pub mean_solve_time_s: f64,
}

impl Tabular for AlgorithmSummary {
    fn header() -> Vec<&'static str> {
        vec!["algorithm", "trials", "mean_rate", "std_error", "feasible_fraction", "mean_solve_time_s"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.algorithm.label().to_string(),
            self.trials.to_string(),
            fmt_f64(self.mean_rate),
            fmt_f64(self.std_error),
            fmt_f64(self.feasible_fraction),
            fmt_f64(self.mean_solve_time_s),
        ]
    }
}

/// Sample mean and its standard error (sample standard deviation / √n).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-algorithm aggregates in first-appearance order of the algorithms.
pub fn summarize(results: &[TrialResult]) -> Vec<AlgorithmSummary> {
    let mut order: Vec<Algorithm> = Vec::new();
    for r in results {
        if !order.contains(&r.algorithm) {
            order.push(r.algorithm);
        }
    }
    order
        .into_iter()
        .map(|alg| {
            let rs: Vec<&TrialResult> = results.iter().filter(|r| r.algorithm == alg).collect();
            let rates: Vec<f64> = rs.iter().map(|r| r.rate).collect();
            let (mean_rate, std_error) = mean_and_std_error(&rates);
            let n = rs.len() as f64;
            AlgorithmSummary {
                algorithm: alg,
                trials: rs.len(),
                mean_rate,
                std_error,
                feasible_fraction: rs.iter().filter(|r| r.feasible).count() as f64 / n,
                mean_solve_time_s: rs.iter().map(|r| r.solve_time_s).sum::<f64>() / n,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub trials: Vec<TrialResult>,
    pub summary: Vec<AlgorithmSummary>,
}

impl MonteCarloReport {
    pub fn summary_for(&self, alg: Algorithm) -> Option<&AlgorithmSummary> {
        self.summary.iter().find(|s| s.algorithm == alg)
    }

    pub fn all_infeasible(&self) -> bool {
        self.trials.iter().all(|t| !t.feasible)
    }
}

pub fn monte_carlo(cfg: &ScenarioConfig, pipeline: &PipelineConfig, trials: usize) -> Result<MonteCarloReport> {
    let per_trial: Vec<Vec<TrialResult>> =
        (0..trials).into_par_iter().map(|i| run_trial(cfg, pipeline, i)).collect::<Result<_>>()?;
    let trials: Vec<TrialResult> = per_trial.into_iter().flatten().collect();
    let summary = summarize(&trials);
    Ok(MonteCarloReport { trials, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_index_determined() {
        let a: f64 = trial_rng(7, 3).random();
        let b: f64 = trial_rng(7, 3).random();
        let c: f64 = trial_rng(7, 4).random();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(a, c);
    }

    #[test]
    fn draws_respect_area_and_separation() {
        let cfg = ScenarioConfig { placement: Placement::Uniform { min_separation: 5.0 }, ..Default::default() };
        for i in 0..500 {
            let (u, t) = entities_for_trial(&cfg, i);
            assert!(u.distance(t) >= 5.0);
            for p in [u, t] {
                assert!((-20.0..=20.0).contains(&p.x) && (0.0..=20.0).contains(&p.y));
            }
        }
    }

    #[test]
    fn standard_error() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3, n = 4
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std_error(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn benchmark_only_run_is_deterministic() {
        let cfg = ScenarioConfig { algorithms: Algorithm::BENCHMARKS.to_vec(), ..Default::default() };
        let a = monte_carlo(&cfg, &PipelineConfig::default(), 16).unwrap();
        let b = monte_carlo(&cfg, &PipelineConfig::default(), 16).unwrap();
        assert_eq!(a.trials.len(), 64);
        for (x, y) in a.summary.iter().zip(&b.summary) {
            assert_eq!(x.mean_rate.to_bits(), y.mean_rate.to_bits());
            assert_eq!(x.std_error.to_bits(), y.std_error.to_bits());
        }
        assert!(a.trials.iter().all(|t| t.feasible || t.rate == 0.0));
    }
}
