//! Quick invariant checks runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamspan::{
    evaluate_f, evaluate_f_hat, fine_tune_positions, power_repair, project_onto_span, AlignedChannelSummary,
    SpanCoefficients,
};
use crate::convex::check_derivatives;
use crate::error::Result;
use crate::geometry::{
    build_channels, rx_at_target, squared_norm, tx_channels, GroundPoint, RfConstants, SystemGeometry,
};
use crate::problem::Problem;
use crate::sca::{
    coefficient_scale, evaluate_g_hat, evaluate_g_tilde, lift_tight, linearize, prepare_start, sca_solve, ScaConfig,
};
use crate::sensing::{
    detection_probability, monte_carlo_detector, optimal_receive_beamformer, radar_snr_bound, radar_snr_full,
    DetectionSpec,
};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn random_geometry(rng: &mut ChaCha8Rng, m: usize) -> Result<SystemGeometry> {
    let mut p = || GroundPoint::new(rng.random_range(-20.0..20.0), rng.random_range(0.0..20.0));
    SystemGeometry::uniform(40.0, 20.0, 3.0, m, 4, p(), p())
}

fn random_x(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-20.0..20.0)).collect()
}

fn random_w(rng: &mut ChaCha8Rng, m: usize, p: f64) -> Vec<C64> {
    let w: Vec<C64> = (0..m).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let s = (p / squared_norm(&w)).sqrt() * rng.random_range(0.1..1.0);
    w.into_iter().map(|x| x * s).collect()
}

fn detection() -> Check {
    let spec = DetectionSpec::default();
    let worst = [0.0, 1.0, 4.0, 10.0]
        .into_iter()
        .map(|g| {
            let est = monte_carlo_detector(&spec, spec.noise_power * (1.0 + g), 100_000, 11);
            (est.detection_probability - detection_probability(g, spec.false_alarm_probability)).abs()
        })
        .fold(0.0, f64::max);
    check("detection_closed_form", worst < 0.01, format!("max |P_D - P_FA^(1/(1+γ))| = {worst:.2e}"))
}

fn span_and_repair(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let rf = RfConstants::default();
    let (mut proj_err, mut power_up, mut repair_fail) = (0.0f64, 0usize, 0usize);
    for _ in 0..100 {
        let g = random_geometry(rng, 4)?;
        let (h_u, h_t) = tx_channels(&g, &random_x(rng, 4), &rf)?;
        let w = random_w(rng, 4, 10.0);
        let pw = project_onto_span(&w, &h_u, &h_t);
        for (a, b) in [
            (h_u.inner(&w).norm_sqr(), h_u.inner(&pw).norm_sqr()),
            (h_t.inner(&w).norm_sqr(), h_t.inner(&pw).norm_sqr()),
        ] {
            proj_err = proj_err.max((a - b).abs() / a.max(f64::MIN_POSITIVE));
        }
        if squared_norm(&pw) > squared_norm(&w) * (1.0 + 1e-12) {
            power_up += 1;
        }
        let r = power_repair(&w, &h_u, &h_t, 10.0);
        if !(h_u.inner(&r).norm_sqr() > h_u.inner(&w).norm_sqr()) || squared_norm(&r) > 10.0 * (1.0 + 1e-12) {
            repair_fail += 1;
        }
    }
    Ok(vec![
        check(
            "span_projection",
            proj_err <= 1e-10 && power_up == 0,
            format!("max relative change {proj_err:.2e}, power increases {power_up}"),
        ),
        check("power_repair", repair_fail == 0, format!("{repair_fail} of 100 points not improved")),
    ])
}

fn cauchy_schwarz(rng: &mut ChaCha8Rng) -> Result<Check> {
    let rf = RfConstants::default();
    let spec = DetectionSpec::default();
    let g = random_geometry(rng, 4)?;
    let ch = build_channels(&g, &random_x(rng, 4), &rx_at_target(&g), &rf)?;
    let w = random_w(rng, 4, 10.0);
    let v = optimal_receive_beamformer(&ch.g_t)?;
    let bound = radar_snr_bound(&ch.g_t, &ch.h_t, &w, &spec);
    let eq = (radar_snr_full(&v, &ch.g_t, &ch.h_t, &w, &spec) - bound).abs() / bound;
    let beaten = (0..1000)
        .filter(|_| {
            let u = random_w(rng, 4, 1.0);
            radar_snr_full(&u, &ch.g_t, &ch.h_t, &w, &spec) > bound * (1.0 + 1e-12)
        })
        .count();
    Ok(check(
        "cauchy_schwarz",
        eq <= 1e-10 && beaten == 0,
        format!("relative gap {eq:.2e}, {beaten} random filters beat it"),
    ))
}

fn fine_tuning(rng: &mut ChaCha8Rng) -> Result<Check> {
    let rf = RfConstants::default();
    let (mut shift, mut dist, mut gap) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let g = random_geometry(rng, 4)?;
        // optimal positions always lie between the user and the target
        let (lo, hi) = (g.user.x.min(g.target.x), g.user.x.max(g.target.x));
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(lo..=hi)).collect();
        let t = fine_tune_positions(&x, &g, &rf);
        if !t.all_aligned() {
            continue;
        }
        for (m, (&a, &b)) in x.iter().zip(&t.positions).enumerate() {
            shift = shift.max((a - b).abs());
            let du = g.user_distance_sq(m, b).sqrt() - g.user_distance_sq(m, a).sqrt();
            let dt = g.target_distance_sq(m, b).sqrt() - g.target_distance_sq(m, a).sqrt();
            dist = dist.max(du.abs()).max(dt.abs());
        }
        let c = SpanCoefficients::real(rng.random_range(0.0..1e3), rng.random_range(0.0..1e3));
        let (h_u, h_t) = tx_channels(&g, &t.positions, &rf)?;
        let f = evaluate_f(&c, &h_u, &h_t);
        let fh = evaluate_f_hat(&c, &AlignedChannelSummary::new(&g, &t.positions), &rf);
        for (a, b) in [(f.user, fh.user), (f.power, fh.power), (f.sensing, fh.sensing)] {
            gap = gap.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(check(
        "fine_tuning",
        dist <= rf.wavelength && gap <= 1e-8,
        format!("max distance change {dist:.3e} m (shift {shift:.3e} m), max |f̂ - f|/f = {gap:.2e}"),
    ))
}

fn sca_checks(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let cfg = ScaConfig::default();
    let (mut tangency, mut deriv) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let g = random_geometry(rng, 3)?;
        let p = Problem::new(g, RfConstants::default(), DetectionSpec::default().with_requirement(0.0), 10.0, 1e-9)?;
        let x = random_x(rng, 3);
        let c = SpanCoefficients::new(
            C64::new(rng.random_range(1.0..1e3), 0.0),
            C64::new(rng.random_range(1.0..1e3), rng.random_range(-1e2..1e2)),
        );
        let base = lift_tight(&c, &x, &p.geometry);
        let at = evaluate_g_tilde(&base, &base, coefficient_scale(&p));
        let ex = evaluate_g_hat(&base);
        for (a, b) in [(at.user, ex.user), (at.power, ex.power), (at.sensing, ex.sensing)] {
            tangency = tangency.max((a - b).abs() / b.abs());
        }
        let sub = linearize(&base, &p, &cfg);
        deriv = deriv.max(check_derivatives(&sub.program, &sub.base));
    }
    let p = Problem::new(
        SystemGeometry::new(
            40.0,
            20.0,
            3.0,
            vec![20.0 / 3.0, 40.0 / 3.0],
            vec![2.5, 7.5, 12.5, 17.5],
            GroundPoint::new(8.0, 8.0),
            GroundPoint::new(-8.0, 12.0),
        )?,
        RfConstants::default(),
        DetectionSpec::default().with_requirement(3.0),
        10.0,
        1e-9,
    )?;
    let monotone = match prepare_start(&p, &[-8.0, -8.0], &cfg) {
        Some(init) => {
            let out = sca_solve(&p, &init, &cfg)?;
            out.trace.windows(2).all(|w| w[1].objective >= w[0].objective)
        }
        None => false,
    };
    Ok(vec![
        check("sca_tangency", tangency <= 1e-10, format!("max relative gap {tangency:.2e}")),
        check("subproblem_derivatives", deriv < 1e-5, format!("max finite-difference error {deriv:.2e}")),
        check("sca_monotone", monotone, "objective trace on the second case study at Γ = 3".into()),
    ])
}

/// Run every check with a fixed seed.
pub fn run(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![detection()];
    out.extend(span_and_repair(&mut rng)?);
    out.push(cauchy_schwarz(&mut rng)?);
    out.push(fine_tuning(&mut rng)?);
    out.extend(sca_checks(&mut rng)?);
    Ok(out)
}
