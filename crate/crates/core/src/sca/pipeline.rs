use serde::{Deserialize, Serialize};

use crate::baselines::{aligned_beamforming, beamform_channels, BeamformingSolution, PlacementKind, PlacementPolicy};
use crate::beamspan::{
    evaluate_f_hat, fine_tune_positions, gauge_to_user, realize_solution, reconstruct_beamformer,
    AlignedChannelSummary, SpanCoefficients,
};
use crate::error::Result;
use crate::geometry::{squared_norm, tx_channels};
use crate::problem::Problem;
use crate::C64;

use super::lifted::{lift_tight, LiftedVariables};
use super::solve::{feasible_init, sca_solve, InitOutcome, ScaIterate, ScaStatus};
use super::ScaConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    TargetOriented,
    UserLeaning,
    Midpoint,
    /// The given number of antennas whose waveguides are closest to the
    /// user (in y) start at the user, the rest at the target.
    Split(usize),
}

impl StartKind {
    pub const ALL: [StartKind; 3] = [Self::TargetOriented, Self::UserLeaning, Self::Midpoint];

    pub fn positions(self, problem: &Problem) -> Vec<f64> {
        let g = &problem.geometry;
        let (xu, xt) = (g.clamp_x(g.user.x), g.clamp_x(g.target.x));
        let m = g.num_tx();
        match self {
            Self::TargetOriented => vec![xt; m],
            Self::UserLeaning => vec![xu; m],
            Self::Midpoint => vec![g.clamp_x(0.5 * (g.user.x + g.target.x)); m],
            Self::Split(k) => {
                let mut order: Vec<usize> = (0..m).collect();
                order.sort_by(|&i, &j| (g.tx_y[i] - g.user.y).abs().total_cmp(&(g.tx_y[j] - g.user.y).abs()));
                let mut x = vec![xt; m];
                for &i in order.iter().take(k) {
                    x[i] = xu;
                }
                x
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sca: ScaConfig,
    pub starts: Vec<StartKind>,
    /// Append `Split(k)` for every `k` in `1..M`.
    pub split_starts: bool,
    /// Also evaluate the four fixed placements as candidates.
    pub include_benchmarks: bool,
    /// Realization may miss the radar requirement by this relative amount
    /// before it is rejected.
    pub realization_margin: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sca: ScaConfig::default(),
            starts: StartKind::ALL.to_vec(),
            split_starts: true,
            include_benchmarks: true,
            realization_margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "detail")]
pub enum CandidateSource {
    Sca {
        start: StartKind,
        polished: bool,
    },
    Benchmark(PlacementKind),
    Hint,
    /// Every antenna at the user with MRT already meets the radar
    /// requirement, which makes it the unconstrained optimum.
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRun {
    pub start: StartKind,
    pub status: Option<ScaStatus>,
    pub error: Option<String>,
    pub trace: Vec<ScaIterate>,
    /// Rate of the phase-aligned model at the SCA solution.
    pub model_rate: Option<f64>,
    pub realized_rate: Option<f64>,
    pub polished_rate: Option<f64>,
    pub solution: Option<LiftedVariables>,
}

impl StartRun {
    fn new(start: StartKind) -> Self {
        Self {
            start,
            status: None,
            error: None,
            trace: Vec::new(),
            model_rate: None,
            realized_rate: None,
            polished_rate: None,
            solution: None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub feasible: bool,
    /// 0 when infeasible.
    pub rate: f64,
    pub radar_snr: f64,
    pub power: f64,
    pub positions: Vec<f64>,
    pub beamformer: Vec<C64>,
    pub source: Option<CandidateSource>,
    pub runs: Vec<StartRun>,
    /// Radar SNR with all antennas at the target and all power on it.
    pub max_radar_snr: f64,
    pub benchmark_rates: Vec<(PlacementKind, f64)>,
}

impl OptimizeOutcome {
    pub fn sca_iterations(&self) -> usize {
        self.runs.iter().map(StartRun::iterations).sum()
    }
}

struct Candidate {
    source: CandidateSource,
    positions: Vec<f64>,
    beamformer: Vec<C64>,
    rate: f64,
    radar_snr: f64,
    power: f64,
}

fn closed_form_candidate(x: &[f64], problem: &Problem, source: CandidateSource) -> Result<Option<Candidate>> {
    let (h_u, h_t) = tx_channels(&problem.geometry, x, &problem.rf)?;
    let Some(BeamformingSolution { coefficients, .. }) =
        beamform_channels(&h_u, &h_t, problem, problem.p_max, problem.sensing_threshold(0.0))
    else {
        return Ok(None);
    };
    let mut w = reconstruct_beamformer(&coefficients, &h_u, &h_t);
    gauge_to_user(&mut w, &h_u);
    Ok(Some(Candidate {
        source,
        positions: x.to_vec(),
        rate: problem.rate_from_gain(h_u.inner(&w).norm_sqr()),
        radar_snr: problem.radar_snr_from_gain(h_t.inner(&w).norm_sqr()),
        power: squared_norm(&w),
        beamformer: w,
    }))
}

fn unconstrained_optimum(problem: &Problem) -> Result<Option<Candidate>> {
    let g = &problem.geometry;
    let x = vec![g.clamp_x(g.user.x); g.num_tx()];
    let (h_u, h_t) = tx_channels(g, &x, &problem.rf)?;
    let scale = C64::from((problem.p_max / h_u.squared_norm).sqrt());
    let w: Vec<C64> = h_u.coefficients.iter().map(|&h| h * scale).collect();
    let radar_snr = problem.radar_snr_from_gain(h_t.inner(&w).norm_sqr());
    if radar_snr < problem.detection.radar_snr_requirement {
        return Ok(None);
    }
    Ok(Some(Candidate {
        source: CandidateSource::Unconstrained,
        positions: x,
        rate: problem.rate_from_gain(h_u.inner(&w).norm_sqr()),
        radar_snr,
        power: squared_norm(&w),
        beamformer: w,
    }))
}

fn nudge(c: SpanCoefficients) -> SpanCoefficients {
    const RATIO: f64 = 1e-4;
    let (au, at) = (c.c_u.norm(), c.c_t.norm());
    let mut out = c;
    if at < RATIO * au {
        out.c_t = c.c_u * (RATIO);
    } else if au < RATIO * at {
        out.c_u = c.c_t * (RATIO);
    }
    out
}

/// Build an SCA start at positions `x`: the aligned-model optimum for a
/// slightly reduced budget and slightly raised sensing threshold, with
/// neither coefficient vanishing (a zero coefficient leaves the subproblem's
/// lower lifting bound `e^p ≤ 2Re{c̃*c} - |c̃|²` without interior).
pub fn prepare_start(problem: &Problem, x: &[f64], cfg: &ScaConfig) -> Option<LiftedVariables> {
    let delta = cfg.constraint_margin;
    let budget = problem.p_max * (1.0 - delta);
    let sol = aligned_beamforming(x, problem, budget, problem.sensing_threshold(3.0 * delta))?;
    let c = nudge(sol.coefficients);
    let aligned = AlignedChannelSummary::new(&problem.geometry, x);
    let p = evaluate_f_hat(&c, &aligned, &problem.rf).power;
    let c = c.scaled((budget / p).sqrt());
    Some(lift_tight(&c, x, &problem.geometry))
}

fn infeasible_outcome(problem: &Problem, max_radar_snr: f64) -> OptimizeOutcome {
    OptimizeOutcome {
        feasible: false,
        rate: 0.0,
        radar_snr: 0.0,
        power: 0.0,
        positions: vec![problem.geometry.clamp_x(problem.geometry.target.x); problem.num_tx()],
        beamformer: Vec::new(),
        source: None,
        runs: Vec::new(),
        max_radar_snr,
        benchmark_rates: PlacementKind::BENCHMARKS.iter().map(|&k| (k, 0.0)).collect(),
    }
}

pub fn optimize(problem: &Problem, cfg: &PipelineConfig) -> Result<OptimizeOutcome> {
    optimize_with_hints(problem, cfg, &[])
}

/// Multi-start SCA, realization and polishing, compared against the fixed
/// placements and any hinted positions; the best feasible candidate wins.
pub fn optimize_with_hints(problem: &Problem, cfg: &PipelineConfig, hints: &[Vec<f64>]) -> Result<OptimizeOutcome> {
    let max_radar_snr = match feasible_init(problem) {
        InitOutcome::Infeasible { max_radar_snr } => return Ok(infeasible_outcome(problem, max_radar_snr)),
        InitOutcome::Feasible(init) => {
            let s = AlignedChannelSummary::new(&problem.geometry, &init.x).sums(&problem.rf);
            problem.radar_snr_from_gain(problem.p_max * s.tt)
        }
    };
    let mut benchmark_rates = Vec::new();
    let mut candidates = Vec::new();
    for kind in PlacementKind::BENCHMARKS {
        let policy = PlacementPolicy::benchmark(kind, &problem.geometry);
        let c = closed_form_candidate(&policy.positions, problem, CandidateSource::Benchmark(kind))?;
        benchmark_rates.push((kind, c.as_ref().map_or(0.0, |c| c.rate)));
        if cfg.include_benchmarks {
            candidates.extend(c);
        }
    }
    if let Some(c) = unconstrained_optimum(problem)? {
        return Ok(OptimizeOutcome {
            feasible: true,
            rate: c.rate,
            radar_snr: c.radar_snr,
            power: c.power,
            positions: c.positions,
            beamformer: c.beamformer,
            source: Some(c.source),
            runs: Vec::new(),
            max_radar_snr,
            benchmark_rates,
        });
    }
    let mut runs = Vec::new();
    let mut starts = cfg.starts.clone();
    if cfg.split_starts {
        starts.extend((1..problem.num_tx()).map(StartKind::Split));
    }
    for start in starts {
        let mut run = StartRun::new(start);
        let x0 = start.positions(problem);
        let Some(init) = prepare_start(problem, &x0, &cfg.sca) else {
            run.error = Some("no start meets the sensing requirement at these positions".into());
            runs.push(run);
            continue;
        };
        match sca_solve(problem, &init, &cfg.sca) {
            Ok(out) => {
                let sol = &out.solution;
                let coeffs = sol.coefficients();
                let aligned = AlignedChannelSummary::new(&problem.geometry, &sol.x);
                run.model_rate = Some(problem.rate_from_gain(evaluate_f_hat(&coeffs, &aligned, &problem.rf).user));
                run.status = Some(out.status);
                match realize_solution(&coeffs, &sol.x, problem, cfg.realization_margin) {
                    Ok(r) => {
                        run.realized_rate = Some(r.rate);
                        candidates.push(Candidate {
                            source: CandidateSource::Sca { start, polished: false },
                            positions: r.positions.clone(),
                            beamformer: r.beamformer,
                            rate: r.rate,
                            radar_snr: r.radar_snr,
                            power: r.power,
                        });
                    }
                    Err(e) => run.error = Some(e.to_string()),
                }
                let tuned = fine_tune_positions(&sol.x, &problem.geometry, &problem.rf).positions;
                if let Some(c) = closed_form_candidate(&tuned, problem, CandidateSource::Sca { start, polished: true })?
                {
                    run.polished_rate = Some(c.rate);
                    candidates.push(c);
                }
                run.trace = out.trace;
                run.solution = Some(out.solution);
            }
            Err(e) => run.error = Some(e.to_string()),
        }
        runs.push(run);
    }
    for h in hints {
        let x: Vec<f64> = h.iter().map(|&x| problem.geometry.clamp_x(x)).collect();
        candidates.extend(closed_form_candidate(&x, problem, CandidateSource::Hint)?);
    }

    let required = problem.detection.radar_snr_requirement * (1.0 - 1e-9);
    let best = candidates.into_iter().filter(|c| c.radar_snr >= required && c.rate.is_finite()).fold(
        None::<Candidate>,
        |best, c| match best {
            Some(b) if b.rate >= c.rate => Some(b),
            _ => Some(c),
        },
    );
    Ok(match best {
        Some(c) => OptimizeOutcome {
            feasible: true,
            rate: c.rate,
            radar_snr: c.radar_snr,
            power: c.power,
            positions: c.positions,
            beamformer: c.beamformer,
            source: Some(c.source),
            runs,
            max_radar_snr,
            benchmark_rates,
        },
        None => OptimizeOutcome { runs, ..infeasible_outcome(problem, max_radar_snr) },
    })
}
