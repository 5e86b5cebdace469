//! One problem instance: geometry, RF constants, detection requirement and
//! the transmit-side budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RfConstants, SystemGeometry};
use crate::sensing::{effective_radar_gain_beta, DetectionSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub geometry: SystemGeometry,
    pub rf: RfConstants,
    pub detection: DetectionSpec,
    /// Transmit power budget in W.
    pub p_max: f64,
    /// Noise power at the user in W.
    pub user_noise: f64,
}

impl Problem {
    pub fn new(
        geometry: SystemGeometry,
        rf: RfConstants,
        detection: DetectionSpec,
        p_max: f64,
        user_noise: f64,
    ) -> Result<Self> {
        geometry.validate()?;
        detection.validate()?;
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::Domain(format!("power budget must be positive, got {p_max}")));
        }
        if !(user_noise > 0.0 && user_noise.is_finite()) {
            return Err(Error::Domain(format!("user noise power must be positive, got {user_noise}")));
        }
        Ok(Self { geometry, rf, detection, p_max, user_noise })
    }

    pub fn num_tx(&self) -> usize {
        self.geometry.num_tx()
    }

    /// Aggregate receive gain with the receive antennas parked at the target.
    pub fn beta(&self) -> f64 {
        effective_radar_gain_beta(&self.geometry, &self.rf, &self.detection)
    }

    /// Lower bound on `|h_tᴴ w|²` implied by the radar SNR requirement
    /// scaled by `1 + margin`.
    pub fn sensing_threshold(&self, margin: f64) -> f64 {
        self.detection.radar_snr_requirement * (1.0 + margin) * self.detection.noise_power / self.beta()
    }

    pub fn rate_from_gain(&self, f_u: f64) -> f64 {
        (1.0 + f_u / self.user_noise).log2()
    }

    pub fn radar_snr_from_gain(&self, f_t: f64) -> f64 {
        self.beta() * f_t / self.detection.noise_power
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        let mut p = self.clone();
        p.detection.radar_snr_requirement = gamma;
        p
    }

    pub fn with_p_max(&self, p_max: f64) -> Self {
        let mut p = self.clone();
        p.p_max = p_max;
        p
    }
}
