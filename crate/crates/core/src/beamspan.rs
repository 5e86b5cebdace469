//! Span parameterisation of the transmit beamformer and the fine-tuning
//! step that aligns user and target channel phases.
//!
//! An optimal beamformer lies in `span{h_u, h_t}`, so it is carried as two
//! complex coefficients `w = c_u h_u + c_t h_t`. Communication gain, power
//! and sensing gain are then quadratic forms in `(c_u, c_t)` built from
//! `‖h_u‖²`, `‖h_t‖²` and `h_tᴴ h_u`. If every antenna's path-length
//! difference is an integer number of wavelengths, `h_tᴴ h_u` becomes the
//! positive sum `Σ η / (D_u D_t)` and the forms depend on positions through
//! distances only (the "hat" family below).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, inner, squared_norm, ChannelVector, RfConstants, SystemGeometry};
use crate::problem::Problem;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanCoefficients {
    pub c_u: C64,
    pub c_t: C64,
}

impl SpanCoefficients {
    pub fn new(c_u: C64, c_t: C64) -> Self {
        Self { c_u, c_t }
    }

    pub fn real(c_u: f64, c_t: f64) -> Self {
        Self::new(C64::new(c_u, 0.0), C64::new(c_t, 0.0))
    }

    /// `2 Re{c_u c_t*} = |c_u + c_t|² - |c_u|² - |c_t|²`
    pub fn cross(&self) -> f64 {
        2.0 * (self.c_u * self.c_t.conj()).re
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.c_u * s, self.c_t * s)
    }

    pub fn is_finite(&self) -> bool {
        self.c_u.is_finite() && self.c_t.is_finite()
    }
}

/// Communication gain, transmit power and sensing gain of one beamformer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FValues {
    /// `|h_uᴴ w|²`
    pub user: f64,
    /// `‖w‖²`
    pub power: f64,
    /// `|h_tᴴ w|²`
    pub sensing: f64,
}

pub fn reconstruct_beamformer(coeffs: &SpanCoefficients, h_u: &ChannelVector, h_t: &ChannelVector) -> Vec<C64> {
    h_u.coefficients.iter().zip(&h_t.coefficients).map(|(u, t)| coeffs.c_u * u + coeffs.c_t * t).collect()
}

/// Quadratic forms in `(c_u, c_t)` from the channel Gram entries.
pub fn f_from_gram(coeffs: &SpanCoefficients, norm_u: f64, norm_t: f64, inner_tu: C64) -> FValues {
    let cu2 = coeffs.c_u.norm_sqr();
    let ct2 = coeffs.c_t.norm_sqr();
    let rho2 = inner_tu.norm_sqr();
    let cross = 2.0 * (coeffs.c_u * coeffs.c_t.conj() * inner_tu).re;
    FValues {
        user: cu2 * norm_u * norm_u + ct2 * rho2 + norm_u * cross,
        power: cu2 * norm_u + ct2 * norm_t + cross,
        sensing: cu2 * rho2 + ct2 * norm_t * norm_t + norm_t * cross,
    }
}

pub fn evaluate_f(coeffs: &SpanCoefficients, h_u: &ChannelVector, h_t: &ChannelVector) -> FValues {
    let inner_tu = h_t.inner(&h_u.coefficients);
    f_from_gram(coeffs, h_u.squared_norm, h_t.squared_norm, inner_tu)
}

/// Squared distances from every transmit antenna to the user and target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedChannelSummary {
    pub user_dist_sq: Vec<f64>,
    pub target_dist_sq: Vec<f64>,
}

/// `Σ η/U_m`, `Σ η/T_m` and `Σ η/√(U_m T_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedSums {
    pub uu: f64,
    pub tt: f64,
    pub ut: f64,
}

impl AlignedChannelSummary {
    pub fn new(geom: &SystemGeometry, x: &[f64]) -> Self {
        Self {
            user_dist_sq: x.iter().enumerate().map(|(m, &x)| geom.user_distance_sq(m, x)).collect(),
            target_dist_sq: x.iter().enumerate().map(|(m, &x)| geom.target_distance_sq(m, x)).collect(),
        }
    }

    pub fn sums(&self, rf: &RfConstants) -> AlignedSums {
        let eta = rf.path_gain;
        let mut s = AlignedSums { uu: 0.0, tt: 0.0, ut: 0.0 };
        for (u, t) in self.user_dist_sq.iter().zip(&self.target_dist_sq) {
            s.uu += eta / u;
            s.tt += eta / t;
            s.ut += eta / (u * t).sqrt();
        }
        s
    }
}

/// Phase-aligned quadratic forms: every inner product replaced by its
/// coherent positive sum.
pub fn evaluate_f_hat(coeffs: &SpanCoefficients, aligned: &AlignedChannelSummary, rf: &RfConstants) -> FValues {
    let s = aligned.sums(rf);
    f_from_gram(coeffs, s.uu, s.tt, C64::new(s.ut, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineTune {
    pub positions: Vec<f64>,
    /// Antennas for which no integer phase crossing was found nearby; their
    /// position was left unchanged.
    pub unaligned: Vec<bool>,
}

impl FineTune {
    pub fn all_aligned(&self) -> bool {
        !self.unaligned.iter().any(|&u| u)
    }
}

const FINE_TUNE_REACH: f64 = 10.0;
const FINE_TUNE_STEPS_PER_WAVELENGTH: f64 = 16.0;

/// Move every antenna to the nearest position where `θ_m` is an integer.
pub fn fine_tune_positions(x: &[f64], geom: &SystemGeometry, rf: &RfConstants) -> FineTune {
    let mut positions = Vec::with_capacity(x.len());
    let mut unaligned = Vec::with_capacity(x.len());
    for (m, &xm) in x.iter().enumerate() {
        match nearest_integer_crossing(geom, m, xm, rf) {
            Some(xh) => {
                positions.push(xh);
                unaligned.push(false);
            }
            None => {
                log::debug!("antenna {m}: no integer phase crossing within {FINE_TUNE_REACH} wavelengths of x = {xm}");
                positions.push(xm);
                unaligned.push(true);
            }
        }
    }
    FineTune { positions, unaligned }
}

fn nearest_integer_crossing(geom: &SystemGeometry, m: usize, x: f64, rf: &RfConstants) -> Option<f64> {
    let theta = |x: f64| geometry::phase_difference_theta(geom, m, x, rf);
    let t0 = theta(x);
    if (t0 - t0.round()).abs() < 1e-10 {
        return Some(x);
    }
    let (lo, hi) = geom.x_bounds();
    let step = rf.wavelength / FINE_TUNE_STEPS_PER_WAVELENGTH;
    let reach = FINE_TUNE_REACH * rf.wavelength;
    let mut best: Option<f64> = None;
    for dir in [1.0, -1.0] {
        let mut prev_x = x;
        let mut prev_t = t0;
        let mut k = 1;
        loop {
            let cand = (x + dir * step * k as f64).clamp(lo, hi);
            let dist = (cand - x).abs();
            if cand == prev_x || dist > reach * (1.0 + 1e-12) {
                break;
            }
            if let Some(b) = best {
                if dist - step > (b - x).abs() {
                    break;
                }
            }
            let t = theta(cand);
            if t.floor() != prev_t.floor() || t == t.floor() {
                let n = prev_t.floor().max(t.floor());
                let root = bisect(|x| theta(x) - n, prev_x, cand);
                if best.is_none_or(|b| (root - x).abs() < (b - x).abs()) {
                    best = Some(root);
                }
                break;
            }
            prev_x = cand;
            prev_t = t;
            k += 1;
        }
    }
    best
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    if f(b).abs() < fa.abs() {
        b
    } else {
        a
    }
}

/// Phase `ζ` with `Re{e^{jζ} A} = Re{B}`, principal root in `[0, 2π)`.
pub fn zeta_for(a: C64, b: C64) -> Result<f64> {
    let mag = a.norm();
    let required = b.re.abs();
    if mag == 0.0 {
        if required <= 1e-9 * b.norm().max(f64::MIN_POSITIVE) || required == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::NumericalInfeasibility { magnitude: mag, required });
    }
    if required > mag * (1.0 + 1e-9) {
        return Err(Error::NumericalInfeasibility { magnitude: mag, required });
    }
    let ratio = (b.re / mag).clamp(-1.0, 1.0);
    let zeta = (ratio.acos() - a.arg()).rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π
    Ok(if zeta >= 2.0 * PI - 1e-15 { 0.0 } else { zeta })
}

/// Rotation of `c_u` that carries the cross term `Re{c_u c_t* raw}` over to
/// the aligned channels.
pub fn solve_zeta(coeffs: &SpanCoefficients, aligned_inner: f64, raw_inner: C64) -> Result<f64> {
    let k = coeffs.c_u * coeffs.c_t.conj();
    zeta_for(k * aligned_inner, k * raw_inner)
}

/// Orthogonal projection of `w` onto `span{h_u, h_t}`.
pub fn project_onto_span(w: &[C64], h_u: &ChannelVector, h_t: &ChannelVector) -> Vec<C64> {
    let nu = h_u.norm();
    let e1: Vec<C64> = h_u.coefficients.iter().map(|h| h / nu).collect();
    let mu = inner(&e1, &h_t.coefficients);
    let resid: Vec<C64> = h_t.coefficients.iter().zip(&e1).map(|(t, e)| t - mu * e).collect();
    let r = squared_norm(&resid).sqrt();
    let a1 = inner(&e1, w);
    let mut out: Vec<C64> = e1.iter().map(|e| e * a1).collect();
    if r > 1e-12 * h_t.norm() {
        let e2: Vec<C64> = resid.iter().map(|v| v / r).collect();
        let a2 = inner(&e2, w);
        for (o, e) in out.iter_mut().zip(&e2) {
            *o += e * a2;
        }
    }
    out
}

/// Component of `h_u` orthogonal to `h_t`.
fn user_null_direction(h_u: &ChannelVector, h_t: &ChannelVector) -> Vec<C64> {
    let k = h_t.inner(&h_u.coefficients) / h_t.squared_norm;
    h_u.coefficients.iter().zip(&h_t.coefficients).map(|(u, t)| u - k * t).collect()
}

/// The power-activation construction: add
/// `e^{jθ}(√P - ‖w‖) z/‖z‖` with `z` the part of `h_u` orthogonal to `h_t`
/// and `θ = arg(h_uᴴ w)`. Leaves `|h_tᴴ w|` unchanged, raises `|h_uᴴ w|`
/// by `(√P - ‖w‖)‖z‖` and keeps `‖w‖ ≤ √P`.
pub fn power_repair(w: &[C64], h_u: &ChannelVector, h_t: &ChannelVector, p_max: f64) -> Vec<C64> {
    let z = user_null_direction(h_u, h_t);
    let nz = squared_norm(&z).sqrt();
    let theta = h_u.inner(w).arg();
    let k = C64::from_polar((p_max.sqrt() - squared_norm(w).sqrt()) / nz, theta);
    w.iter().zip(&z).map(|(w, z)| w + k * z).collect()
}

/// Same direction as [`power_repair`], but with the step length chosen so
/// the result uses the full budget. Falls back to plain scaling when `h_u`
/// and `h_t` are collinear.
pub fn fill_power(w: &[C64], h_u: &ChannelVector, h_t: &ChannelVector, p_max: f64) -> Vec<C64> {
    let power = squared_norm(w);
    let deficit = p_max - power;
    if deficit <= 0.0 {
        return w.to_vec();
    }
    let z = user_null_direction(h_u, h_t);
    let nz2 = squared_norm(&z);
    if nz2 <= 1e-20 * h_u.squared_norm {
        if power > 0.0 {
            let s = (p_max / power).sqrt();
            return w.iter().map(|w| w * s).collect();
        }
        let s = (p_max / h_u.squared_norm).sqrt();
        return h_u.coefficients.iter().map(|h| h * s).collect();
    }
    let phase = C64::from_polar(1.0, h_u.inner(w).arg());
    let nz = nz2.sqrt();
    let u: Vec<C64> = z.iter().map(|z| phase * z / nz).collect();
    let r = inner(w, &u).re;
    let t = -r + (r * r + deficit).sqrt();
    w.iter().zip(&u).map(|(w, u)| w + t * u).collect()
}

/// Rotate `w` so that `h_uᴴ w` is real and non-negative.
pub fn gauge_to_user(w: &mut [C64], h_u: &ChannelVector) {
    let s = h_u.inner(w);
    if s.norm() > 0.0 {
        let rot = C64::from_polar(1.0, -s.arg());
        for x in w.iter_mut() {
            *x *= rot;
        }
    }
}

/// A feasible point of the original problem, recovered from a solution of
/// the phase-aligned problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub beamformer: Vec<C64>,
    pub positions: Vec<f64>,
    pub coefficients: SpanCoefficients,
    pub zeta: f64,
    pub rate: f64,
    pub radar_snr: f64,
    pub power: f64,
    pub unaligned: Vec<bool>,
}

/// Fine-tune positions, rotate `c_u` so the cross term matches the aligned
/// model, rebuild `w` on the true channels, bring its power to exactly the
/// budget, and report the true rate and radar SNR.
pub fn realize_solution(coeffs: &SpanCoefficients, x: &[f64], problem: &Problem, margin: f64) -> Result<Realization> {
    let geom = &problem.geometry;
    let rf = &problem.rf;
    let tuned = fine_tune_positions(x, geom, rf);
    let (h_u, h_t) = geometry::tx_channels(geom, &tuned.positions, rf)?;
    let true_inner = h_t.inner(&h_u.coefficients);
    let model_inner = AlignedChannelSummary::new(geom, &tuned.positions).sums(rf).ut;
    let k = coeffs.c_u * coeffs.c_t.conj();
    let zeta = zeta_for(k * true_inner, k * model_inner)?;
    let rotated = SpanCoefficients::new(coeffs.c_u * C64::from_polar(1.0, zeta), coeffs.c_t);

    let mut w = reconstruct_beamformer(&rotated, &h_u, &h_t);
    let power = squared_norm(&w);
    if power > problem.p_max {
        let s = (problem.p_max / power).sqrt();
        w.iter_mut().for_each(|x| *x *= s);
    } else {
        w = fill_power(&w, &h_u, &h_t, problem.p_max);
    }
    gauge_to_user(&mut w, &h_u);

    let rate = problem.rate_from_gain(h_u.inner(&w).norm_sqr());
    let radar_snr = problem.radar_snr_from_gain(h_t.inner(&w).norm_sqr());
    let required = problem.detection.radar_snr_requirement;
    if radar_snr < required * (1.0 - margin) {
        return Err(Error::RealizationFailure { achieved: radar_snr, required });
    }
    Ok(Realization {
        power: squared_norm(&w),
        beamformer: w,
        positions: tuned.positions,
        coefficients: rotated,
        zeta,
        rate,
        radar_snr,
        unaligned: tuned.unaligned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{tx_channels, GroundPoint, Link};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom(user: (f64, f64), target: (f64, f64), m: usize) -> SystemGeometry {
        SystemGeometry::uniform(
            40.0,
            20.0,
            3.0,
            m,
            4,
            GroundPoint::new(user.0, user.1),
            GroundPoint::new(target.0, target.1),
        )
        .unwrap()
    }

    fn random_c(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    }

    #[test]
    fn mrt_when_no_target_coefficient() {
        let rf = RfConstants::default();
        let g = geom((3.0, 5.0), (-6.0, 14.0), 3);
        let (h_u, h_t) = tx_channels(&g, &[1.0, -2.0, 4.0], &rf).unwrap();
        let w = reconstruct_beamformer(&SpanCoefficients::real(2.0, 0.0), &h_u, &h_t);
        for (w, h) in w.iter().zip(&h_u.coefficients) {
            assert!((w - h * 2.0).norm() < 1e-18);
        }
        let c_t = 10f64.sqrt() / h_t.norm();
        let w = reconstruct_beamformer(&SpanCoefficients::real(0.0, c_t), &h_u, &h_t);
        assert!((squared_norm(&w) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn f_values_match_direct_evaluation() {
        let rf = RfConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let m = rng.random_range(1..5);
            let g = geom(
                (rng.random_range(-20.0..20.0), rng.random_range(0.0..20.0)),
                (rng.random_range(-20.0..20.0), rng.random_range(0.0..20.0)),
                m,
            );
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-20.0..20.0)).collect();
            let (h_u, h_t) = tx_channels(&g, &x, &rf).unwrap();
            let c = SpanCoefficients::new(random_c(&mut rng, 1e3), random_c(&mut rng, 1e3));
            let f = evaluate_f(&c, &h_u, &h_t);
            let w = reconstruct_beamformer(&c, &h_u, &h_t);
            let fu = h_u.inner(&w).norm_sqr();
            let fp = squared_norm(&w);
            let ft = h_t.inner(&w).norm_sqr();
            assert!((f.user - fu).abs() <= 1e-12 * fu.max(1e-300) + 1e-24, "{} {}", f.user, fu);
            assert!((f.power - fp).abs() <= 1e-12 * fp);
            assert!((f.sensing - ft).abs() <= 1e-12 * ft.max(1e-300) + 1e-24);
        }
    }

    #[test]
    fn orthogonal_channels_have_no_cross_terms() {
        let h_u = ChannelVector::new(vec![C64::new(1e-3, 0.0), C64::new(0.0, 0.0)], Link::TxToUser);
        let h_t = ChannelVector::new(vec![C64::new(0.0, 0.0), C64::new(0.0, 2e-3)], Link::TxToTarget);
        let c = SpanCoefficients::new(C64::new(3.0, 1.0), C64::new(-2.0, 0.5));
        let f = evaluate_f(&c, &h_u, &h_t);
        assert!((f.user - c.c_u.norm_sqr() * 1e-12).abs() < 1e-24);
        assert!((f.sensing - c.c_t.norm_sqr() * 16e-12).abs() < 1e-24);
    }

    #[test]
    fn f_invariant_to_common_phase() {
        let rf = RfConstants::default();
        let g = geom((3.0, 5.0), (-6.0, 14.0), 3);
        let (h_u, h_t) = tx_channels(&g, &[1.0, -2.0, 4.0], &rf).unwrap();
        let c = SpanCoefficients::new(C64::new(300.0, -100.0), C64::new(50.0, 200.0));
        let r = C64::from_polar(1.0, 1.234);
        let a = evaluate_f(&c, &h_u, &h_t);
        let b = evaluate_f(&SpanCoefficients::new(c.c_u * r, c.c_t * r), &h_u, &h_t);
        assert!((a.user - b.user).abs() < 1e-12 * a.user);
        assert!((a.power - b.power).abs() < 1e-12 * a.power);
        assert!((a.sensing - b.sensing).abs() < 1e-12 * a.sensing);
    }

    #[test]
    fn single_antenna_hat_power_is_perfect_square() {
        let rf = RfConstants::default();
        let g = geom((3.0, 5.0), (-6.0, 14.0), 1);
        let aligned = AlignedChannelSummary::new(&g, &[0.5]);
        let c = SpanCoefficients::new(C64::new(30.0, -10.0), C64::new(5.0, 20.0));
        let f = evaluate_f_hat(&c, &aligned, &rf);
        let du = aligned.user_dist_sq[0].sqrt();
        let dt = aligned.target_dist_sq[0].sqrt();
        let expected = rf.path_gain * (c.c_u / du + c.c_t / dt).norm_sqr();
        assert!((f.power - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn hat_dominates_true_values() {
        let rf = RfConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let g = geom(
                (rng.random_range(-20.0..20.0), rng.random_range(0.0..20.0)),
                (rng.random_range(-20.0..20.0), rng.random_range(0.0..20.0)),
                4,
            );
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-20.0..20.0)).collect();
            let (h_u, h_t) = tx_channels(&g, &x, &rf).unwrap();
            let c = SpanCoefficients::real(rng.random_range(0.0..1e3), rng.random_range(0.0..1e3));
            let f = evaluate_f(&c, &h_u, &h_t);
            let fh = evaluate_f_hat(&c, &AlignedChannelSummary::new(&g, &x), &rf);
            assert!(fh.user >= f.user * (1.0 - 1e-12));
            assert!(fh.sensing >= f.sensing * (1.0 - 1e-12));
        }
    }

    #[test]
    fn zeta_cases() {
        let c = SpanCoefficients::real(2.0, 3.0);
        assert_eq!(solve_zeta(&c, 5.0, C64::new(5.0, 0.0)).unwrap(), 0.0);
        let c0 = SpanCoefficients::real(2.0, 0.0);
        assert_eq!(solve_zeta(&c0, 5.0, C64::new(1.0, 2.0)).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let c = SpanCoefficients::new(random_c(&mut rng, 10.0), random_c(&mut rng, 10.0));
            let aligned = rng.random_range(0.1..2.0);
            let raw = C64::from_polar(aligned * rng.random_range(0.0..1.0), rng.random_range(-PI..PI));
            let z = solve_zeta(&c, aligned, raw).unwrap();
            assert!((0.0..2.0 * PI).contains(&z));
            let k = c.c_u * c.c_t.conj();
            let a = k * aligned;
            let resid = (C64::from_polar(1.0, z) * a - k * raw).re;
            assert!(resid.abs() < 1e-10 * a.norm());
        }
    }

    #[test]
    fn zeta_rejects_unaligned() {
        let c = SpanCoefficients::real(1.0, 1.0);
        assert!(matches!(solve_zeta(&c, 1.0, C64::new(2.0, 0.0)), Err(Error::NumericalInfeasibility { .. })));
    }

    #[test]
    fn fine_tune_fixed_point_and_alignment() {
        let rf = RfConstants::default();
        let g = geom((4.0, 8.0), (-4.0, 12.0), 2);
        let x = [1.3, -2.7];
        let t = fine_tune_positions(&x, &g, &rf);
        assert!(t.all_aligned());
        for (m, &xh) in t.positions.iter().enumerate() {
            let th = geometry::phase_difference_theta(&g, m, xh, &rf);
            assert!((th - th.round()).abs() < 1e-9);
            assert!((th - geometry::phase_difference_theta(&g, m, x[m], &rf)).abs() <= 1.0);
        }
        let again = fine_tune_positions(&t.positions, &g, &rf);
        assert_eq!(again.positions, t.positions);
    }

    #[test]
    fn fine_tune_aligns_hat_with_true() {
        let rf = RfConstants::default();
        let g = geom((4.0, 8.0), (-4.0, 12.0), 4);
        let x = [3.1, 0.2, -1.7, -3.9];
        let t = fine_tune_positions(&x, &g, &rf);
        let (h_u, h_t) = tx_channels(&g, &t.positions, &rf).unwrap();
        let c = SpanCoefficients::new(C64::new(400.0, 30.0), C64::new(200.0, -80.0));
        let f = evaluate_f(&c, &h_u, &h_t);
        let fh = evaluate_f_hat(&c, &AlignedChannelSummary::new(&g, &t.positions), &rf);
        assert!((f.user - fh.user).abs() < 1e-10 * fh.user);
        assert!((f.power - fh.power).abs() < 1e-10 * fh.power);
        assert!((f.sensing - fh.sensing).abs() < 1e-10 * fh.sensing);
    }

    #[test]
    fn span_projection_preserves_gains() {
        let rf = RfConstants::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = geom((5.0, 4.0), (-8.0, 15.0), 4);
        let (h_u, h_t) = tx_channels(&g, &[2.0, -1.0, 0.0, -6.0], &rf).unwrap();
        for _ in 0..20 {
            let w: Vec<C64> = (0..4).map(|_| random_c(&mut rng, 1.0)).collect();
            let p = project_onto_span(&w, &h_u, &h_t);
            let a = h_u.inner(&w).norm_sqr();
            assert!((h_u.inner(&p).norm_sqr() - a).abs() < 1e-10 * a);
            let b = h_t.inner(&w).norm_sqr();
            assert!((h_t.inner(&p).norm_sqr() - b).abs() < 1e-10 * b);
            assert!(squared_norm(&p) <= squared_norm(&w) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn repair_and_fill() {
        let rf = RfConstants::default();
        let g = geom((5.0, 4.0), (-8.0, 15.0), 3);
        let (h_u, h_t) = tx_channels(&g, &[2.0, -1.0, 0.0], &rf).unwrap();
        let w = vec![C64::new(0.5, 0.1), C64::new(-0.2, 0.4), C64::new(0.3, 0.0)];
        let r = power_repair(&w, &h_u, &h_t, 10.0);
        assert!(h_u.inner(&r).norm_sqr() > h_u.inner(&w).norm_sqr());
        assert!((h_t.inner(&r).norm() - h_t.inner(&w).norm()).abs() < 1e-12 * h_t.inner(&w).norm());
        assert!(squared_norm(&r) <= 10.0 * (1.0 + 1e-12));
        let f = fill_power(&w, &h_u, &h_t, 10.0);
        assert!((squared_norm(&f) - 10.0).abs() < 1e-12);
        assert!(h_u.inner(&f).norm_sqr() >= h_u.inner(&r).norm_sqr());
    }
}
