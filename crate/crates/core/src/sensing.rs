//! Radar-side metrics: matched receive beamforming, radar SNR, the
//! aggregate receive gain `β` and Neyman–Pearson detection.
//!
//! With a complex-Gaussian echo the energy statistic `T = |ỹ|²` is
//! exponential under both hypotheses, so the detection probability for a
//! fixed false-alarm rate reduces to `P_D = P_FA^(1/(1+γ))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inner, squared_norm, ChannelVector, RfConstants, SystemGeometry};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionSpec {
    pub false_alarm_probability: f64,
    /// Required radar SNR `Γ_Req` (linear).
    pub radar_snr_requirement: f64,
    /// Receive noise power `σ_s²` in W.
    pub noise_power: f64,
    /// Target reflection coefficient `α`.
    pub reflection: C64,
}

impl DetectionSpec {
    pub fn validate(&self) -> Result<()> {
        let p = self.false_alarm_probability;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("false-alarm probability must lie in (0, 1), got {p}")));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::Domain(format!("receive noise power must be positive, got {}", self.noise_power)));
        }
        if !(self.radar_snr_requirement >= 0.0 && self.radar_snr_requirement.is_finite()) {
            return Err(Error::Domain(format!(
                "radar SNR requirement must be non-negative, got {}",
                self.radar_snr_requirement
            )));
        }
        Ok(())
    }

    pub fn with_requirement(mut self, radar_snr_requirement: f64) -> Self {
        self.radar_snr_requirement = radar_snr_requirement;
        self
    }
}

impl Default for DetectionSpec {
    fn default() -> Self {
        Self {
            false_alarm_probability: 0.01,
            radar_snr_requirement: 4.0,
            noise_power: 1e-11,
            reflection: C64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarMetrics {
    pub radar_snr: f64,
    pub detection_probability: f64,
    pub threshold: f64,
    pub beta: f64,
}

impl RadarMetrics {
    pub fn evaluate(radar_snr: f64, beta: f64, spec: &DetectionSpec) -> Self {
        Self {
            radar_snr,
            detection_probability: detection_probability(radar_snr, spec.false_alarm_probability),
            threshold: np_threshold(spec.false_alarm_probability, spec.noise_power),
            beta,
        }
    }
}

/// Matched filter `g_t / ‖g_t‖`.
pub fn optimal_receive_beamformer(g_t: &ChannelVector) -> Result<Vec<C64>> {
    let norm = g_t.norm();
    if !(norm > 0.0) {
        return Err(Error::DegenerateChannel("receive channel is zero"));
    }
    Ok(g_t.coefficients.iter().map(|g| g / norm).collect())
}

/// `|α vᴴ g_t h_tᴴ w|² / (σ_s² vᴴv)`
pub fn radar_snr_full(v: &[C64], g_t: &ChannelVector, h_t: &ChannelVector, w: &[C64], spec: &DetectionSpec) -> f64 {
    let echo = spec.reflection * inner(v, &g_t.coefficients) * h_t.inner(w);
    echo.norm_sqr() / (spec.noise_power * squared_norm(v))
}

/// Cauchy–Schwarz bound of [`radar_snr_full`], attained by the matched
/// filter.
pub fn radar_snr_bound(g_t: &ChannelVector, h_t: &ChannelVector, w: &[C64], spec: &DetectionSpec) -> f64 {
    spec.reflection.norm_sqr() * g_t.squared_norm * h_t.inner(w).norm_sqr() / spec.noise_power
}

/// `β = Σ_n η|α|² / ((y_t - y_n)² + H²)`, the receive gain with every
/// receive antenna directly abreast of the target.
pub fn effective_radar_gain_beta(geom: &SystemGeometry, rf: &RfConstants, spec: &DetectionSpec) -> f64 {
    let h2 = geom.height * geom.height;
    let a2 = spec.reflection.norm_sqr();
    geom.rx_y.iter().map(|y| rf.path_gain * a2 / ((geom.target.y - y).powi(2) + h2)).sum()
}

pub fn detection_probability(radar_snr: f64, false_alarm_probability: f64) -> f64 {
    false_alarm_probability.powf(1.0 / (1.0 + radar_snr))
}

/// Energy threshold giving false-alarm probability `P_FA` under
/// `ỹ ~ CN(0, σ_s²)`.
pub fn np_threshold(false_alarm_probability: f64, noise_power: f64) -> f64 {
    -noise_power * false_alarm_probability.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorEstimate {
    pub detection_probability: f64,
    pub false_alarm_probability: f64,
}

const DETECTOR_BLOCK: u64 = 4096;

/// Simulate the energy detector: `ỹ ~ CN(0, σ_s²)` without a target and
/// `ỹ ~ CN(0, κ)` with one, thresholded at the Neyman–Pearson level.
///
/// Trials are split into fixed-size blocks, each with its own ChaCha
/// stream, so the result does not depend on the thread count.
pub fn monte_carlo_detector(spec: &DetectionSpec, kappa: f64, trials: u64, seed: u64) -> DetectorEstimate {
    assert!(trials >= 1, "need at least one trial");
    let threshold = np_threshold(spec.false_alarm_probability, spec.noise_power);
    let sigma2 = spec.noise_power;
    let blocks = trials.div_ceil(DETECTOR_BLOCK);
    let (detections, false_alarms) = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block);
            let n = DETECTOR_BLOCK.min(trials - block * DETECTOR_BLOCK);
            let mut hits = (0u64, 0u64);
            for _ in 0..n {
                let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                if 0.5 * sigma2 * (a * a + b * b) > threshold {
                    hits.1 += 1;
                }
                let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                if 0.5 * kappa * (a * a + b * b) > threshold {
                    hits.0 += 1;
                }
            }
            hits
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    DetectorEstimate {
        detection_probability: detections as f64 / trials as f64,
        false_alarm_probability: false_alarms as f64 / trials as f64,
    }
}
