use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::GroundPoint;
use crate::sca::PipelineConfig;

use super::config::{Algorithm, ScenarioConfig, SweepAxis};
use super::emit::{fmt_f64, Tabular};
use super::monte_carlo::{entities_for_trial, mean_and_std_error};
use super::trial::evaluate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub mean_rate: f64,
    pub std_error: f64,
    pub feasible_fraction: f64,
}

impl Tabular for SweepRow {
    fn header() -> Vec<&'static str> {
        vec!["axis", "value", "algorithm", "trials", "mean_rate", "std_error", "feasible_fraction"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.axis.label().to_string(),
            fmt_f64(self.value),
            self.algorithm.label().to_string(),
            self.trials.to_string(),
            fmt_f64(self.mean_rate),
            fmt_f64(self.std_error),
            fmt_f64(self.feasible_fraction),
        ]
    }
}

/// Rates of one realization across the sweep, `rates[value][algorithm]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrial {
    pub trial: usize,
    pub user: GroundPoint,
    pub target: GroundPoint,
    pub rates: Vec<Vec<f64>>,
    pub feasible: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub trials: Vec<SweepTrial>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Mean rate per sweep value for one algorithm.
    pub fn mean_curve(&self, alg: Algorithm) -> Option<Vec<f64>> {
        let a = self.algorithms.iter().position(|&x| x == alg)?;
        Some((0..self.values.len()).map(|v| self.rows[v * self.algorithms.len() + a].mean_rate).collect())
    }
}

/// Order in which a realization walks the sweep values so that each
/// pinching solution is feasible for the next problem in the chain.
fn chain_order(axis: SweepAxis, n: usize) -> Vec<usize> {
    match axis {
        SweepAxis::RadarSnrRequirement => (0..n).rev().collect(),
        SweepAxis::PMax | SweepAxis::NumRx | SweepAxis::NumTx => (0..n).collect(),
    }
}

fn sweep_trial(
    cfg: &ScenarioConfig,
    pipeline: &PipelineConfig,
    axis: SweepAxis,
    values: &[f64],
    index: usize,
) -> Result<SweepTrial> {
    let (user, target) = entities_for_trial(cfg, index);
    let n_alg = cfg.algorithms.len();
    let mut rates = vec![vec![0.0; n_alg]; values.len()];
    let mut feasible = vec![vec![false; n_alg]; values.len()];
    let mut previous: Option<Vec<f64>> = None;
    for v in chain_order(axis, values.len()) {
        let problem = cfg.with_axis(axis, values[v]).problem(user, target)?;
        // antenna count changes the layout, so positions do not carry over
        let hints: Vec<Vec<f64>> = match (&previous, axis) {
            (Some(x), a) if a != SweepAxis::NumTx => vec![x.clone()],
            _ => Vec::new(),
        };
        for (a, &alg) in cfg.algorithms.iter().enumerate() {
            let e = evaluate(&problem, alg, pipeline, cfg.exhaustive_step, &hints)?;
            if alg == Algorithm::Pinching && e.feasible {
                previous = Some(e.positions.clone());
            }
            rates[v][a] = e.rate;
            feasible[v][a] = e.feasible;
        }
    }
    Ok(SweepTrial { trial: index, user, target, rates, feasible })
}

pub fn run_sweep(
    cfg: &ScenarioConfig,
    pipeline: &PipelineConfig,
    axis: SweepAxis,
    values: &[f64],
    trials: usize,
) -> Result<SweepReport> {
    let per_trial: Vec<SweepTrial> =
        (0..trials).into_par_iter().map(|i| sweep_trial(cfg, pipeline, axis, values, i)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(values.len() * cfg.algorithms.len());
    for (v, &value) in values.iter().enumerate() {
        for (a, &algorithm) in cfg.algorithms.iter().enumerate() {
            let rates: Vec<f64> = per_trial.iter().map(|t| t.rates[v][a]).collect();
            let (mean_rate, std_error) = mean_and_std_error(&rates);
            let feasible = per_trial.iter().filter(|t| t.feasible[v][a]).count();
            rows.push(SweepRow {
                axis,
                value,
                algorithm,
                trials,
                mean_rate,
                std_error,
                feasible_fraction: feasible as f64 / trials as f64,
            });
        }
    }
    Ok(SweepReport { axis, values: values.to_vec(), algorithms: cfg.algorithms.clone(), trials: per_trial, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_chain_walks_downwards() {
        assert_eq!(chain_order(SweepAxis::RadarSnrRequirement, 3), vec![2, 1, 0]);
        assert_eq!(chain_order(SweepAxis::PMax, 3), vec![0, 1, 2]);
    }

    #[test]
    fn benchmark_sweep_in_power_is_monotone() {
        let cfg = ScenarioConfig { algorithms: Algorithm::BENCHMARKS.to_vec(), ..Default::default() };
        let values = [1.0, 5.0, 10.0, 20.0];
        let r = run_sweep(&cfg, &PipelineConfig::default(), SweepAxis::PMax, &values, 12).unwrap();
        assert_eq!(r.rows.len(), 16);
        for t in &r.trials {
            for a in 0..4 {
                for w in t.rates.windows(2) {
                    assert!(w[1][a] >= w[0][a]);
                }
            }
        }
        let c = r.mean_curve(Algorithm::TargetOriented).unwrap();
        assert_eq!(c.len(), 4);
    }
}
