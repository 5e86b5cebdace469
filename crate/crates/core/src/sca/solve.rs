use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::beamspan::{AlignedChannelSummary, SpanCoefficients};
use crate::convex::{self, SolveStatus};
use crate::error::{Error, Result};
use crate::problem::Problem;

use super::lifted::{evaluate_g_hat, lift_tight, LiftedVariables};
use super::linearize::linearize;
use super::ScaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaStatus {
    Converged,
    IterationCap,
    SubproblemInfeasible,
    SubproblemFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaIterate {
    pub iteration: usize,
    /// ĝ_u at the iterate.
    pub objective: f64,
    /// `log₂(1 + η² ĝ_u / σ_u²)`
    pub rate: f64,
    pub max_residual: f64,
    pub step_norm: f64,
    pub solver_status: Option<SolveStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaOutcome {
    pub solution: LiftedVariables,
    pub trace: Vec<ScaIterate>,
    pub status: ScaStatus,
}

impl ScaOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |t| t.objective)
    }
}

/// Largest relative violation of the lifted problem's constraints.
pub fn lifted_residual(l: &LiftedVariables, problem: &Problem, margin: f64) -> f64 {
    let g = evaluate_g_hat(l);
    let eta = problem.rf.path_gain;
    let p_lim = problem.p_max / eta;
    let s_lim = problem.sensing_threshold(margin) / (eta * eta);
    let mut worst = l.lifting_residual(&problem.geometry);
    worst = worst.max((g.power - p_lim) / p_lim);
    if s_lim > 0.0 {
        worst = worst.max((s_lim - g.sensing) / s_lim);
    }
    let (lo, hi) = problem.geometry.x_bounds();
    for &x in &l.x {
        worst = worst.max(lo - x).max(x - hi);
    }
    worst.max(0.0)
}

fn rate_of(objective: f64, problem: &Problem) -> f64 {
    let eta = problem.rf.path_gain;
    problem.rate_from_gain((objective * eta * eta).max(0.0))
}

fn step_norm(a: &LiftedVariables, b: &LiftedVariables) -> f64 {
    a.x.iter().zip(&b.x).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Repeatedly linearize at the current iterate and solve the convex
/// subproblem. Each barrier solution is strictly interior, hence strictly
/// feasible for the next subproblem, so the objective never decreases.
pub fn sca_solve(problem: &Problem, init: &LiftedVariables, cfg: &ScaConfig) -> Result<ScaOutcome> {
    let mut base = init.clone();
    let mut prev = evaluate_g_hat(&base).user;
    let mut trace = vec![ScaIterate {
        iteration: 0,
        objective: prev,
        rate: rate_of(prev, problem),
        max_residual: lifted_residual(&base, problem, cfg.constraint_margin),
        step_norm: 0.0,
        solver_status: None,
    }];
    let mut stalled = 0;
    let mut status = ScaStatus::IterationCap;
    for it in 1..=cfg.max_outer_iterations {
        let sub = linearize(&base, problem, cfg);
        let report = convex::solve(&sub.program, &sub.base, &cfg.solver);
        match report.status {
            SolveStatus::Infeasible => {
                status = ScaStatus::SubproblemInfeasible;
                break;
            }
            SolveStatus::NumericalFailure => {
                status = ScaStatus::SubproblemFailure;
                break;
            }
            SolveStatus::Optimal | SolveStatus::IterationCap => {}
        }
        let cand = sub.lifted(&report.x);
        let obj = evaluate_g_hat(&cand).user;
        if !obj.is_finite() {
            status = ScaStatus::SubproblemFailure;
            break;
        }
        if obj < prev - 1e-8 * prev.abs() {
            if report.status == SolveStatus::Optimal && !report.used_phase_one {
                return Err(Error::NonMonotoneStep { previous: prev, current: obj });
            }
            // an unconverged or phase-1 solve may land below the base point
            status = ScaStatus::SubproblemFailure;
            break;
        }
        trace.push(ScaIterate {
            iteration: it,
            objective: obj,
            rate: rate_of(obj, problem),
            max_residual: lifted_residual(&cand, problem, cfg.constraint_margin),
            step_norm: step_norm(&base, &cand),
            solver_status: Some(report.status),
        });
        let rel = (obj - prev) / prev.abs().max(f64::MIN_POSITIVE);
        base = cand;
        prev = obj;
        stalled = if rel < cfg.objective_tolerance { stalled + 1 } else { 0 };
        if stalled >= cfg.stall_iterations {
            status = ScaStatus::Converged;
            break;
        }
    }
    Ok(ScaOutcome { solution: base, trace, status })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitOutcome {
    Feasible(LiftedVariables),
    Infeasible { max_radar_snr: f64 },
}

/// All antennas at the target, all power on `h_t`. Infeasible exactly when
/// that configuration misses the radar requirement.
pub fn feasible_init(problem: &Problem) -> InitOutcome {
    let geom = &problem.geometry;
    let x = vec![geom.clamp_x(geom.target.x); geom.num_tx()];
    let s = AlignedChannelSummary::new(geom, &x).sums(&problem.rf);
    let max_radar_snr = problem.radar_snr_from_gain(problem.p_max * s.tt);
    if max_radar_snr < problem.detection.radar_snr_requirement {
        return InitOutcome::Infeasible { max_radar_snr };
    }
    let c_t = (problem.p_max / s.tt).sqrt();
    InitOutcome::Feasible(lift_tight(&SpanCoefficients::real(0.0, c_t), &x, geom))
}

/// CSV with columns iteration, objective, rate, max_residual, step_norm.
pub fn write_trace_csv<W: Write>(trace: &[ScaIterate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "objective", "rate", "max_residual", "step_norm"])?;
    for t in trace {
        w.write_record([
            t.iteration.to_string(),
            t.objective.to_string(),
            t.rate.to_string(),
            t.max_residual.to_string(),
            t.step_norm.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}
