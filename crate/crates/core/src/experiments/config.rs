use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::PlacementKind;
use crate::error::{Error, Result};
use crate::geometry::{GroundPoint, RfConstants, SystemGeometry};
use crate::problem::Problem;
use crate::sensing::DetectionSpec;
use crate::C64;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pinching,
    Exhaustive,
    Conventional,
    UserCentric,
    TargetOriented,
    Midpoint,
}

impl Algorithm {
    pub const BENCHMARKS: [Algorithm; 4] =
        [Self::Conventional, Self::UserCentric, Self::TargetOriented, Self::Midpoint];

    pub fn label(self) -> &'static str {
        match self {
            Self::Pinching => "pinching",
            Self::Exhaustive => "exhaustive",
            Self::Conventional => "conventional",
            Self::UserCentric => "user_centric",
            Self::TargetOriented => "target_oriented",
            Self::Midpoint => "midpoint",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Self::Pinching, Self::Exhaustive, Self::Conventional, Self::UserCentric, Self::TargetOriented, Self::Midpoint]
            .into_iter()
            .find(|a| a.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }

    pub fn placement(self) -> Option<PlacementKind> {
        match self {
            Self::Conventional => Some(PlacementKind::ConventionalFixed),
            Self::UserCentric => Some(PlacementKind::UserCentric),
            Self::TargetOriented => Some(PlacementKind::TargetOriented),
            Self::Midpoint => Some(PlacementKind::Midpoint),
            Self::Pinching | Self::Exhaustive => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    PMax,
    RadarSnrRequirement,
    NumTx,
    NumRx,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            Self::PMax => "p_max_watts",
            Self::RadarSnrRequirement => "radar_snr_requirement",
            Self::NumTx => "num_tx",
            Self::NumRx => "num_rx",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "p_max" | "p_max_watts" => Ok(Self::PMax),
            "gamma" | "radar_snr_requirement" => Ok(Self::RadarSnrRequirement),
            "m" | "num_tx" => Ok(Self::NumTx),
            "n" | "num_rx" => Ok(Self::NumRx),
            _ => Err(Error::Config(format!("unknown sweep axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Placement {
    Fixed {
        user: GroundPoint,
        target: GroundPoint,
    },
    /// Independent uniform draws over the area, resampled until the two
    /// entities are at least `min_separation` apart.
    Uniform {
        min_separation: f64,
    },
}

/// On-disk form: flat keys, units in the names.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioFile {
    length_m: f64,
    width_m: f64,
    height_m: f64,
    wavelength_m: f64,
    effective_refractive_index: f64,
    num_tx: usize,
    num_rx: usize,
    p_max_watts: f64,
    sigma_u_dbm: f64,
    sigma_s_dbm: f64,
    radar_snr_requirement: f64,
    false_alarm_probability: f64,
    reflection_re: f64,
    reflection_im: f64,
    placement: String,
    user_x_m: f64,
    user_y_m: f64,
    target_x_m: f64,
    target_y_m: f64,
    min_separation_m: f64,
    seed: u64,
    trials: usize,
    sweep_axis: Option<String>,
    sweep_values: Vec<f64>,
    algorithms: Vec<String>,
    exhaustive_step_m: f64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            length_m: 40.0,
            width_m: 20.0,
            height_m: 3.0,
            wavelength_m: 0.05,
            effective_refractive_index: 1.4,
            num_tx: 4,
            num_rx: 4,
            p_max_watts: 10.0,
            sigma_u_dbm: -60.0,
            sigma_s_dbm: -80.0,
            radar_snr_requirement: 4.0,
            false_alarm_probability: 0.01,
            reflection_re: 1.0,
            reflection_im: 0.0,
            placement: "uniform".into(),
            user_x_m: 4.0,
            user_y_m: 8.0,
            target_x_m: -4.0,
            target_y_m: 12.0,
            min_separation_m: 1.0,
            seed: 0,
            trials: 200,
            sweep_axis: None,
            sweep_values: Vec::new(),
            algorithms: ["pinching", "conventional", "user_centric", "target_oriented", "midpoint"]
                .map(String::from)
                .to_vec(),
            exhaustive_step_m: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// A scenario with every quantity in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub rf: RfConstants,
    pub num_tx: usize,
    pub num_rx: usize,
    pub p_max: f64,
    pub user_noise: f64,
    pub detection: DetectionSpec,
    pub placement: Placement,
    pub seed: u64,
    pub trials: usize,
    pub sweep: Option<SweepSpec>,
    pub algorithms: Vec<Algorithm>,
    pub exhaustive_step: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::from_file(ScenarioFile::default()).expect("defaults are valid")
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    fn from_file(f: ScenarioFile) -> Result<Self> {
        let rf = RfConstants::from_wavelength(f.wavelength_m, f.effective_refractive_index).map_err(config)?;
        let placement = match f.placement.as_str() {
            "fixed" => Placement::Fixed {
                user: GroundPoint::new(f.user_x_m, f.user_y_m),
                target: GroundPoint::new(f.target_x_m, f.target_y_m),
            },
            "uniform" => Placement::Uniform { min_separation: f.min_separation_m },
            other => return Err(Error::Config(format!("placement must be `fixed` or `uniform`, got `{other}`"))),
        };
        let sweep = match f.sweep_axis {
            Some(axis) => {
                let axis = SweepAxis::parse(&axis)?;
                if f.sweep_values.is_empty() {
                    return Err(Error::Config("sweep_axis given without sweep_values".into()));
                }
                Some(SweepSpec { axis, values: f.sweep_values })
            }
            None if !f.sweep_values.is_empty() => {
                return Err(Error::Config("sweep_values given without sweep_axis".into()));
            }
            None => None,
        };
        let algorithms = f.algorithms.iter().map(|a| Algorithm::parse(a)).collect::<Result<Vec<_>>>()?;
        let cfg = Self {
            length: f.length_m,
            width: f.width_m,
            height: f.height_m,
            rf,
            num_tx: f.num_tx,
            num_rx: f.num_rx,
            p_max: f.p_max_watts,
            user_noise: dbm_to_watts(f.sigma_u_dbm),
            detection: DetectionSpec {
                false_alarm_probability: f.false_alarm_probability,
                radar_snr_requirement: f.radar_snr_requirement,
                noise_power: dbm_to_watts(f.sigma_s_dbm),
                reflection: C64::new(f.reflection_re, f.reflection_im),
            },
            placement,
            seed: f.seed,
            trials: f.trials,
            sweep,
            algorithms,
            exhaustive_step: f.exhaustive_step_m,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if !(self.exhaustive_step > 0.0) {
            return Err(Error::Config(format!("exhaustive_step_m must be positive, got {}", self.exhaustive_step)));
        }
        if let Placement::Uniform { min_separation } = self.placement {
            let diag = self.length.hypot(self.width);
            if !(0.0..diag).contains(&min_separation) {
                return Err(Error::Config(format!("min_separation_m must lie in [0, {diag}), got {min_separation}")));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config("sweep_values must be strictly ascending".into()));
            }
            for &v in &s.values {
                let ok = match s.axis {
                    SweepAxis::PMax => v > 0.0,
                    SweepAxis::RadarSnrRequirement => v >= 0.0,
                    SweepAxis::NumTx | SweepAxis::NumRx => v >= 1.0 && v.fract() == 0.0,
                };
                if !ok || !v.is_finite() {
                    return Err(Error::Config(format!("invalid {} value {v}", s.axis.label())));
                }
            }
        }
        let entities = match self.placement {
            Placement::Fixed { user, target } => (user, target),
            Placement::Uniform { .. } => (GroundPoint::new(0.0, 0.0), GroundPoint::new(0.0, 0.0)),
        };
        self.problem(entities.0, entities.1).map_err(config)?;
        Ok(())
    }

    pub fn geometry(&self, user: GroundPoint, target: GroundPoint) -> Result<SystemGeometry> {
        SystemGeometry::uniform(self.length, self.width, self.height, self.num_tx, self.num_rx, user, target)
    }

    pub fn problem(&self, user: GroundPoint, target: GroundPoint) -> Result<Problem> {
        Problem::new(self.geometry(user, target)?, self.rf, self.detection, self.p_max, self.user_noise)
    }

    /// Copy with one sweep parameter replaced.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Self {
        let mut c = self.clone();
        match axis {
            SweepAxis::PMax => c.p_max = value,
            SweepAxis::RadarSnrRequirement => c.detection.radar_snr_requirement = value,
            SweepAxis::NumTx => c.num_tx = value as usize,
            SweepAxis::NumRx => c.num_rx = value as usize,
        }
        c
    }
}

fn config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}
