//! Fixed-position beamforming, the exhaustive placement oracle and the four
//! placement benchmarks.
//!
//! For frozen positions the beamformer lives in `span{h_u, h_t}` and the
//! problem reduces to choosing one angle: write `w = √P (cos φ e₁ + sin φ
//! e^{jψ} e₂)` with `e₁ = h_u/‖h_u‖`. The user gain is `P‖h_u‖² cos²φ` and
//! the sensing gain is `P‖h_t‖² cos²(φ - φ₀)` once `ψ` is phase-matched, so
//! the optimum is the smallest `φ` meeting the sensing threshold.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamspan::{f_from_gram, fine_tune_positions, AlignedChannelSummary, SpanCoefficients};
use crate::error::{Error, Result};
use crate::geometry::{tx_channels, ChannelVector, SystemGeometry};
use crate::problem::Problem;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementKind {
    ConventionalFixed,
    UserCentric,
    TargetOriented,
    Midpoint,
    Grid,
    Optimized,
}

impl PlacementKind {
    pub const BENCHMARKS: [PlacementKind; 4] =
        [Self::ConventionalFixed, Self::UserCentric, Self::TargetOriented, Self::Midpoint];

    pub fn label(self) -> &'static str {
        match self {
            Self::ConventionalFixed => "conventional",
            Self::UserCentric => "user_centric",
            Self::TargetOriented => "target_oriented",
            Self::Midpoint => "midpoint",
            Self::Grid => "grid",
            Self::Optimized => "pinching",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementPolicy {
    pub kind: PlacementKind,
    pub positions: Vec<f64>,
}

impl PlacementPolicy {
    /// Place every antenna at the same clamped coordinate.
    fn uniform(kind: PlacementKind, geom: &SystemGeometry, x: f64) -> Self {
        Self { kind, positions: vec![geom.clamp_x(x); geom.num_tx()] }
    }

    pub fn benchmark(kind: PlacementKind, geom: &SystemGeometry) -> Self {
        match kind {
            PlacementKind::ConventionalFixed => Self::uniform(kind, geom, 0.0),
            PlacementKind::UserCentric => Self::uniform(kind, geom, geom.user.x),
            PlacementKind::TargetOriented => Self::uniform(kind, geom, geom.target.x),
            PlacementKind::Midpoint => Self::uniform(kind, geom, 0.5 * (geom.user.x + geom.target.x)),
            PlacementKind::Grid | PlacementKind::Optimized => {
                panic!("{kind:?} is not a fixed benchmark policy")
            }
        }
    }

    pub fn grid(geom: &SystemGeometry, x: &[f64]) -> Self {
        Self { kind: PlacementKind::Grid, positions: x.iter().map(|&x| geom.clamp_x(x)).collect() }
    }

    pub fn optimized(geom: &SystemGeometry, x: &[f64]) -> Self {
        Self { kind: PlacementKind::Optimized, positions: x.iter().map(|&x| geom.clamp_x(x)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamformingSolution {
    pub coefficients: SpanCoefficients,
    /// `|h_uᴴ w|²`
    pub user_gain: f64,
    /// `|h_tᴴ w|²`
    pub sensing_gain: f64,
    pub power: f64,
    pub rate: f64,
}

/// Exact optimum of `max |h_uᴴw|²` s.t. `‖w‖² ≤ P`, `|h_tᴴw|² ≥ threshold`
/// from the Gram entries `‖h_u‖²`, `‖h_t‖²`, `h_tᴴh_u`. `None` when the
/// threshold is out of reach.
pub fn optimal_span_beamformer(
    norm_u: f64,
    norm_t: f64,
    inner_tu: C64,
    p_max: f64,
    sensing_threshold: f64,
    user_noise: f64,
) -> Option<BeamformingSolution> {
    let nu = norm_u.sqrt();
    let mu = inner_tu.conj() / nu;
    let mu_abs = mu.norm();
    let r = (norm_t - mu_abs * mu_abs).max(0.0).sqrt();
    let a = norm_t.sqrt();
    let tau = (sensing_threshold.max(0.0) / p_max).sqrt();
    let phi = if mu_abs >= tau {
        0.0
    } else if a < tau || r <= 1e-12 * a {
        return None;
    } else {
        let phi0 = r.atan2(mu_abs);
        (phi0 - (tau / a).min(1.0).acos()).max(0.0)
    };
    let sp = p_max.sqrt();
    let coefficients = if r <= 1e-12 * a || phi == 0.0 {
        SpanCoefficients::new(C64::new(sp / nu, 0.0), C64::new(0.0, 0.0))
    } else {
        let psi = if mu_abs > 0.0 { mu.conj() / mu_abs } else { C64::new(1.0, 0.0) };
        let c_t = psi * (sp * phi.sin() / r);
        let c_u = C64::new(sp * phi.cos() / nu, 0.0) - psi * mu * (sp * phi.sin() / (r * nu));
        SpanCoefficients::new(c_u, c_t)
    };
    let f = f_from_gram(&coefficients, norm_u, norm_t, inner_tu);
    let user_gain = p_max * norm_u * phi.cos().powi(2);
    Some(BeamformingSolution {
        coefficients,
        user_gain,
        sensing_gain: f.sensing,
        power: f.power,
        rate: (1.0 + user_gain / user_noise).log2(),
    })
}

/// Optimal beamforming on the true channels at positions `x`.
pub fn fixed_position_beamforming(x: &[f64], problem: &Problem) -> Result<Option<BeamformingSolution>> {
    let (h_u, h_t) = tx_channels(&problem.geometry, x, &problem.rf)?;
    Ok(beamform_channels(&h_u, &h_t, problem, problem.p_max, problem.sensing_threshold(0.0)))
}

pub fn beamform_channels(
    h_u: &ChannelVector,
    h_t: &ChannelVector,
    problem: &Problem,
    p_max: f64,
    threshold: f64,
) -> Option<BeamformingSolution> {
    let inner_tu = h_t.inner(&h_u.coefficients);
    optimal_span_beamformer(h_u.squared_norm, h_t.squared_norm, inner_tu, p_max, threshold, problem.user_noise)
}

/// Optimal beamforming for the phase-aligned channel model at positions
/// `x`, with an explicit budget and sensing threshold.
pub fn aligned_beamforming(x: &[f64], problem: &Problem, p_max: f64, threshold: f64) -> Option<BeamformingSolution> {
    let s = AlignedChannelSummary::new(&problem.geometry, x).sums(&problem.rf);
    optimal_span_beamformer(s.uu, s.tt, C64::new(s.ut, 0.0), p_max, threshold, problem.user_noise)
}

const GRID_RES: usize = 64;

/// Brute-force counterpart of [`optimal_span_beamformer`]: a 64³ grid over
/// (power level, power split, relative phase) followed by a Nelder–Mead
/// refinement of the best feasible cell.
pub fn grid_beamforming(
    norm_u: f64,
    norm_t: f64,
    inner_tu: C64,
    p_max: f64,
    sensing_threshold: f64,
    user_noise: f64,
) -> Option<BeamformingSolution> {
    let coeffs = |v: &[f64; 3]| -> Option<SpanCoefficients> {
        let (level, split, phase) = (v[0], v[1], v[2]);
        if !(0.0..=1.0).contains(&level) || !(0.0..=1.0).contains(&split) {
            return None;
        }
        let raw = SpanCoefficients::new(
            C64::new((split / norm_u).sqrt(), 0.0),
            C64::from_polar(((1.0 - split) / norm_t).sqrt(), phase),
        );
        let p = f_from_gram(&raw, norm_u, norm_t, inner_tu).power;
        (p > 0.0).then(|| raw.scaled((level * p_max / p).sqrt()))
    };
    let score = |v: &[f64; 3]| -> f64 {
        match coeffs(v) {
            Some(c) => {
                let f = f_from_gram(&c, norm_u, norm_t, inner_tu);
                if f.sensing >= sensing_threshold && f.power <= p_max * (1.0 + 1e-12) {
                    f.user
                } else {
                    f64::NEG_INFINITY
                }
            }
            None => f64::NEG_INFINITY,
        }
    };
    let step = 1.0 / (GRID_RES - 1) as f64;
    let (best, _, best_v) = (0..GRID_RES * GRID_RES * GRID_RES)
        .into_par_iter()
        .map(|k| {
            let (i, j, l) = (k / (GRID_RES * GRID_RES), (k / GRID_RES) % GRID_RES, k % GRID_RES);
            let v = [(i + 1) as f64 / GRID_RES as f64, j as f64 * step, 2.0 * PI * l as f64 / GRID_RES as f64];
            (score(&v), k, v)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, [0.0; 3]),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    if best == f64::NEG_INFINITY {
        return None;
    }
    let refined = nelder_mead(|v| -score(v), best_v, [0.5 * step, 0.5 * step, PI / GRID_RES as f64], 2000);
    let v = if score(&refined) >= best { refined } else { best_v };
    let c = coeffs(&v)?;
    let f = f_from_gram(&c, norm_u, norm_t, inner_tu);
    Some(BeamformingSolution {
        coefficients: c,
        user_gain: f.user,
        sensing_gain: f.sensing,
        power: f.power,
        rate: (1.0 + f.user / user_noise).log2(),
    })
}

fn nelder_mead(f: impl Fn(&[f64; 3]) -> f64, start: [f64; 3], scale: [f64; 3], max_iter: usize) -> [f64; 3] {
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((start, f(&start)));
    for d in 0..3 {
        let mut v = start;
        v[d] += scale[d];
        simplex.push((v, f(&v)));
    }
    let combine =
        |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] { std::array::from_fn(|i| a[i] + t * (b[i] - a[i])) };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[3].1 - simplex[0].1;
        if spread.is_finite() && spread.abs() <= 1e-15 * simplex[0].1.abs() {
            break;
        }
        let centroid: [f64; 3] = std::array::from_fn(|i| simplex[..3].iter().map(|s| s.0[i]).sum::<f64>() / 3.0);
        let worst = simplex[3];
        let reflected = combine(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            simplex[3] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
        } else {
            let contracted = combine(&centroid, &worst.0, 0.5);
            let fc = f(&contracted);
            if fc < worst.1 {
                simplex[3] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    s.0 = combine(&best, &s.0, 0.5);
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    /// Grid coordinates of the winner.
    pub grid_positions: Vec<f64>,
    /// Fine-tuned positions actually used.
    pub positions: Vec<f64>,
    pub solution: BeamformingSolution,
    pub evaluated: usize,
}

const EXHAUSTIVE_MAX_POINTS: f64 = 5e7;

/// Grid every antenna over `[-L/2, L/2]`, fine-tune each grid point and
/// beamform optimally there. `Ok(None)` if no grid point is feasible.
pub fn exhaustive_search(problem: &Problem, step: f64, allow_expensive: bool) -> Result<Option<ExhaustiveResult>> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("grid step must be positive, got {step}")));
    }
    let geom = &problem.geometry;
    let m = geom.num_tx();
    let (lo, hi) = geom.x_bounds();
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let total = (count as f64).powi(m as i32);
    if !allow_expensive && ((m >= 4 && step < 1.0) || total > EXHAUSTIVE_MAX_POINTS) {
        return Err(Error::SearchTooExpensive { antennas: m, step });
    }
    let grid: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();
    // fine tuning is per antenna, so precompute each antenna's tuned grid
    let tuned: Vec<Vec<f64>> = (0..m)
        .map(|ant| {
            grid.iter()
                .map(|&x| {
                    let mut probe = vec![0.0; m];
                    probe[ant] = x;
                    fine_tune_positions(&probe, geom, &problem.rf).positions[ant]
                })
                .collect()
        })
        .collect();
    let total = count.pow(m as u32);
    let threshold = problem.sensing_threshold(0.0);
    let best = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut idx = k;
            let mut x = vec![0.0; m];
            for ant in (0..m).rev() {
                x[ant] = tuned[ant][idx % count];
                idx /= count;
            }
            let rate = tx_channels(geom, &x, &problem.rf)
                .ok()
                .and_then(|(h_u, h_t)| beamform_channels(&h_u, &h_t, problem, problem.p_max, threshold))
                .map_or(f64::NEG_INFINITY, |s| s.rate);
            (rate, k)
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    if best.0 == f64::NEG_INFINITY {
        return Ok(None);
    }
    let mut idx = best.1;
    let mut grid_positions = vec![0.0; m];
    let mut positions = vec![0.0; m];
    for ant in (0..m).rev() {
        grid_positions[ant] = grid[idx % count];
        positions[ant] = tuned[ant][idx % count];
        idx /= count;
    }
    let solution = fixed_position_beamforming(&positions, problem)?.expect("winner was feasible");
    Ok(Some(ExhaustiveResult { grid_positions, positions, solution, evaluated: total }))
}

/// Rate of a placement policy with optimal beamforming; 0 when infeasible.
pub fn benchmark_rate(policy: &PlacementPolicy, problem: &Problem) -> Result<f64> {
    Ok(fixed_position_beamforming(&policy.positions, problem)?.map_or(0.0, |s| s.rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GroundPoint, Link, RfConstants};
    use crate::sensing::DetectionSpec;

    fn problem(m: usize, gamma: f64) -> Problem {
        let g =
            SystemGeometry::uniform(40.0, 20.0, 3.0, m, 4, GroundPoint::new(4.0, 8.0), GroundPoint::new(-4.0, 12.0))
                .unwrap();
        let d = DetectionSpec { radar_snr_requirement: gamma, ..DetectionSpec::default() };
        Problem::new(g, RfConstants::default(), d, 10.0, 1e-9).unwrap()
    }

    #[test]
    fn mrt_without_sensing() {
        let p = problem(3, 0.0);
        let x = [1.0, -3.0, 7.0];
        let s = fixed_position_beamforming(&x, &p).unwrap().unwrap();
        let (h_u, _) = tx_channels(&p.geometry, &x, &p.rf).unwrap();
        let expected = (1.0 + 10.0 * h_u.squared_norm / 1e-9).log2();
        assert!((s.rate - expected).abs() < 1e-6 * expected);
        assert!((s.power - 10.0).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_channels_split_power() {
        let h_u = ChannelVector::new(vec![C64::new(2e-3, 0.0), C64::new(0.0, 0.0)], Link::TxToUser);
        let h_t = ChannelVector::new(vec![C64::new(0.0, 0.0), C64::new(0.0, 1e-3)], Link::TxToTarget);
        let thr = 4e-6;
        let s =
            optimal_span_beamformer(h_u.squared_norm, h_t.squared_norm, C64::new(0.0, 0.0), 10.0, thr, 1e-9).unwrap();
        // minimal power on h_t: thr / ‖h_t‖², the rest on h_u
        let pt = thr / h_t.squared_norm;
        let expected = (10.0 - pt) * h_u.squared_norm;
        assert!((s.user_gain - expected).abs() < 1e-9 * expected);
        assert!((s.sensing_gain - thr).abs() < 1e-9 * thr);
    }

    #[test]
    fn infeasible_when_threshold_out_of_reach() {
        let s = optimal_span_beamformer(1e-6, 1e-6, C64::new(1e-7, 0.0), 10.0, 1e-4, 1e-9);
        assert!(s.is_none());
    }

    #[test]
    fn closed_form_matches_grid() {
        let p = problem(2, 4.0);
        for x in [[1.0, -3.0], [4.0, 4.0], [-4.0, 2.0], [10.0, -12.0]] {
            let (h_u, h_t) = tx_channels(&p.geometry, &x, &p.rf).unwrap();
            let thr = p.sensing_threshold(0.0);
            let inner = h_t.inner(&h_u.coefficients);
            let a = optimal_span_beamformer(h_u.squared_norm, h_t.squared_norm, inner, 10.0, thr, 1e-9);
            let b = grid_beamforming(h_u.squared_norm, h_t.squared_norm, inner, 10.0, thr, 1e-9);
            match (a, b) {
                (Some(a), Some(b)) => {
                    assert!(b.rate <= a.rate + 1e-9, "{} {}", b.rate, a.rate);
                    assert!(a.rate - b.rate < 1e-4 * a.rate, "{} {}", b.rate, a.rate);
                    assert!(a.sensing_gain >= thr * (1.0 - 1e-9));
                }
                (None, None) => {}
                other => panic!("disagreement {other:?}"),
            }
        }
    }

    #[test]
    fn single_antenna_exhaustive_near_user() {
        let p = problem(1, 0.0);
        let r = exhaustive_search(&p, 0.5, false).unwrap().unwrap();
        assert!((r.grid_positions[0] - 4.0).abs() <= 0.25);
    }

    #[test]
    fn cost_guard() {
        let p = problem(4, 4.0);
        assert!(matches!(exhaustive_search(&p, 0.5, false), Err(Error::SearchTooExpensive { .. })));
    }

    #[test]
    fn benchmark_policies_clamp() {
        let p = problem(2, 4.0);
        let m = PlacementPolicy::benchmark(PlacementKind::Midpoint, &p.geometry);
        assert_eq!(m.positions, vec![0.0, 0.0]);
        let c = PlacementPolicy::benchmark(PlacementKind::ConventionalFixed, &p.geometry);
        assert_eq!(c.positions, vec![0.0, 0.0]);
    }
}
