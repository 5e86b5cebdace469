//! Serving-area geometry, RF constants and the spherical-wave channel model.
//!
//! Every pinching antenna sits on its own waveguide at height `H`, running
//! along x from a feed point at `x = -L/2`. The channel between an antenna
//! and a ground endpoint carries free-space path loss plus two phase terms:
//! free-space propagation and in-guide propagation at the guided wavelength.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const SPEED_OF_LIGHT: f64 = 3e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfConstants {
    pub carrier_frequency: f64,
    pub speed_of_light: f64,
    pub wavelength: f64,
    pub effective_refractive_index: f64,
    pub guided_wavelength: f64,
    /// `(λ / 4π)²`, the free-space gain constant in m².
    pub path_gain: f64,
}

impl RfConstants {
    pub fn from_wavelength(wavelength: f64, effective_refractive_index: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
        }
        if !(effective_refractive_index > 0.0 && effective_refractive_index.is_finite()) {
            return Err(Error::Domain(format!(
                "effective refractive index must be positive, got {effective_refractive_index}"
            )));
        }
        Ok(Self {
            carrier_frequency: SPEED_OF_LIGHT / wavelength,
            speed_of_light: SPEED_OF_LIGHT,
            wavelength,
            effective_refractive_index,
            guided_wavelength: wavelength / effective_refractive_index,
            path_gain: (wavelength / (4.0 * PI)).powi(2),
        })
    }

    pub fn sqrt_gain(&self) -> f64 {
        self.path_gain.sqrt()
    }
}

impl Default for RfConstants {
    fn default() -> Self {
        Self::from_wavelength(0.05, 1.4).expect("default RF constants are valid")
    }
}

/// A position on the ground plane (`z = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
}

impl GroundPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_3d(self) -> [f64; 3] {
        [self.x, self.y, 0.0]
    }

    pub fn distance(self, other: GroundPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemGeometry {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    /// y-coordinate of each transmit waveguide.
    pub tx_y: Vec<f64>,
    /// y-coordinate of each receive waveguide.
    pub rx_y: Vec<f64>,
    pub user: GroundPoint,
    pub target: GroundPoint,
}

impl SystemGeometry {
    pub fn new(
        length: f64,
        width: f64,
        height: f64,
        tx_y: Vec<f64>,
        rx_y: Vec<f64>,
        user: GroundPoint,
        target: GroundPoint,
    ) -> Result<Self> {
        let geom = Self { length, width, height, tx_y, rx_y, user, target };
        geom.validate()?;
        Ok(geom)
    }

    /// Waveguides evenly spread across the width: the m-th guide (1-based)
    /// sits at `(m - 1/2) W / M`.
    pub fn uniform(
        length: f64,
        width: f64,
        height: f64,
        num_tx: usize,
        num_rx: usize,
        user: GroundPoint,
        target: GroundPoint,
    ) -> Result<Self> {
        Self::new(length, width, height, uniform_layout(width, num_tx), uniform_layout(width, num_rx), user, target)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(Error::Domain(format!("area must have positive extent, got {} x {}", self.length, self.width)));
        }
        if !(self.height > 0.0) {
            return Err(Error::Domain(format!("waveguide height must be positive, got {}", self.height)));
        }
        if self.tx_y.is_empty() || self.rx_y.is_empty() {
            return Err(Error::Domain("need at least one transmit and one receive waveguide".into()));
        }
        for (kind, ys) in [("transmit", &self.tx_y), ("receive", &self.rx_y)] {
            if let Some(y) = ys.iter().find(|y| !(0.0..=self.width).contains(*y)) {
                return Err(Error::Domain(format!("{kind} waveguide at y = {y} is outside [0, {}]", self.width)));
            }
        }
        let (lo, hi) = self.x_bounds();
        for (name, p) in [("user", self.user), ("target", self.target)] {
            if !(lo..=hi).contains(&p.x) || !(0.0..=self.width).contains(&p.y) {
                return Err(Error::Domain(format!("{name} at ({}, {}) is outside the serving area", p.x, p.y)));
            }
        }
        Ok(())
    }

    pub fn num_tx(&self) -> usize {
        self.tx_y.len()
    }

    pub fn num_rx(&self) -> usize {
        self.rx_y.len()
    }

    /// Admissible antenna x-range `[-L/2, L/2]`.
    pub fn x_bounds(&self) -> (f64, f64) {
        (-0.5 * self.length, 0.5 * self.length)
    }

    pub fn clamp_x(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_bounds();
        x.clamp(lo, hi)
    }

    pub fn tx_antenna(&self, m: usize, x: f64) -> [f64; 3] {
        [x, self.tx_y[m], self.height]
    }

    pub fn tx_feed(&self, m: usize) -> [f64; 3] {
        [-0.5 * self.length, self.tx_y[m], self.height]
    }

    pub fn rx_antenna(&self, n: usize, x: f64) -> [f64; 3] {
        [x, self.rx_y[n], self.height]
    }

    pub fn rx_feed(&self, n: usize) -> [f64; 3] {
        [-0.5 * self.length, self.rx_y[n], self.height]
    }

    /// `d_{u,m}² = (y_u - y_m)² + H²`, the part of the squared user distance
    /// that does not depend on the antenna's x.
    pub fn user_offset_sq(&self, m: usize) -> f64 {
        (self.user.y - self.tx_y[m]).powi(2) + self.height * self.height
    }

    pub fn target_offset_sq(&self, m: usize) -> f64 {
        (self.target.y - self.tx_y[m]).powi(2) + self.height * self.height
    }

    pub fn user_distance_sq(&self, m: usize, x: f64) -> f64 {
        (self.user.x - x).powi(2) + self.user_offset_sq(m)
    }

    pub fn target_distance_sq(&self, m: usize, x: f64) -> f64 {
        (self.target.x - x).powi(2) + self.target_offset_sq(m)
    }

    pub fn with_entities(&self, user: GroundPoint, target: GroundPoint) -> Result<Self> {
        let mut g = self.clone();
        g.user = user;
        g.target = target;
        g.validate()?;
        Ok(g)
    }

    fn check_positions(&self, xs: &[f64], expected: usize) -> Result<()> {
        if xs.len() != expected {
            return Err(Error::Domain(format!("expected {expected} antenna positions, got {}", xs.len())));
        }
        let (lo, hi) = self.x_bounds();
        for (index, &x) in xs.iter().enumerate() {
            if !(lo..=hi).contains(&x) {
                return Err(Error::AntennaOutOfRange { index, x, lo, hi });
            }
        }
        Ok(())
    }
}

pub fn uniform_layout(width: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| (i as f64 + 0.5) * width / count as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    TxToUser,
    TxToTarget,
    TargetToRx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub coefficients: Vec<C64>,
    pub squared_norm: f64,
    pub link: Link,
}

impl ChannelVector {
    pub fn new(coefficients: Vec<C64>, link: Link) -> Self {
        let squared_norm = coefficients.iter().map(|c| c.norm_sqr()).sum();
        Self { coefficients, squared_norm, link }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm.sqrt()
    }

    /// `selfᴴ other`
    pub fn inner(&self, other: &[C64]) -> C64 {
        inner(&self.coefficients, other)
    }
}

/// `aᴴ b`
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn squared_norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// The three channels of one placement plus the cached cross term.
#[derive(Debug, Clone, PartialEq)]
pub struct Channels {
    pub h_u: ChannelVector,
    pub h_t: ChannelVector,
    pub g_t: ChannelVector,
    /// `h_tᴴ h_u`
    pub inner_tu: C64,
}

/// Spherical-wave coefficient between a ground endpoint and an antenna fed
/// from `feed`.
pub fn channel_coefficient(endpoint: [f64; 3], antenna: [f64; 3], feed: [f64; 3], rf: &RfConstants) -> C64 {
    let d_free = distance(endpoint, antenna);
    let d_guide = distance(feed, antenna);
    // Whole cycles carry no phase; dropping them first keeps the
    // argument of sin/cos small.
    let cycles = (d_free / rf.wavelength).fract() + (d_guide / rf.guided_wavelength).fract();
    C64::from_polar(rf.sqrt_gain() / d_free, -2.0 * PI * cycles)
}

/// Transmit-side channels only: `(h_u, h_t)`.
pub fn tx_channels(geom: &SystemGeometry, tx_x: &[f64], rf: &RfConstants) -> Result<(ChannelVector, ChannelVector)> {
    geom.check_positions(tx_x, geom.num_tx())?;
    let user = geom.user.to_3d();
    let target = geom.target.to_3d();
    let mut h_u = Vec::with_capacity(tx_x.len());
    let mut h_t = Vec::with_capacity(tx_x.len());
    for (m, &x) in tx_x.iter().enumerate() {
        let antenna = geom.tx_antenna(m, x);
        let feed = geom.tx_feed(m);
        h_u.push(channel_coefficient(user, antenna, feed, rf));
        h_t.push(channel_coefficient(target, antenna, feed, rf));
    }
    Ok((ChannelVector::new(h_u, Link::TxToUser), ChannelVector::new(h_t, Link::TxToTarget)))
}

pub fn rx_channel(geom: &SystemGeometry, rx_x: &[f64], rf: &RfConstants) -> Result<ChannelVector> {
    geom.check_positions(rx_x, geom.num_rx())?;
    let target = geom.target.to_3d();
    let g = rx_x
        .iter()
        .enumerate()
        .map(|(n, &x)| channel_coefficient(target, geom.rx_antenna(n, x), geom.rx_feed(n), rf))
        .collect();
    Ok(ChannelVector::new(g, Link::TargetToRx))
}

pub fn build_channels(geom: &SystemGeometry, tx_x: &[f64], rx_x: &[f64], rf: &RfConstants) -> Result<Channels> {
    let (h_u, h_t) = tx_channels(geom, tx_x, rf)?;
    let g_t = rx_channel(geom, rx_x, rf)?;
    let inner_tu = h_t.inner(&h_u.coefficients);
    Ok(Channels { h_u, h_t, g_t, inner_tu })
}

/// Receive antennas parked at the target's x on every receive waveguide.
pub fn rx_at_target(geom: &SystemGeometry) -> Vec<f64> {
    vec![geom.target.x; geom.num_rx()]
}

/// `θ_m(x)`: target-path minus user-path length of antenna `m`, in
/// wavelengths.
pub fn phase_difference_theta(geom: &SystemGeometry, m: usize, x: f64, rf: &RfConstants) -> f64 {
    let antenna = geom.tx_antenna(m, x);
    (distance(geom.target.to_3d(), antenna) - distance(geom.user.to_3d(), antenna)) / rf.wavelength
}
