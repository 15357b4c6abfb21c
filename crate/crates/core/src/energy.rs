//! Wireless channel model: SNR, Shannon capacity and the per-sample
//! transmission energy `E = d^r · V · (4^b - 1)` needed to deliver `b` bits.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::pow4;
use crate::scene::MIN_DISTANCE;
use crate::{Error, Result};

pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.0;

/// Sensor to fusion-center channels.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel {
    distances: Vec<f64>,
    noise_psd: Vec<f64>,
    path_loss_exponent: f64,
}

impl ChannelModel {
    /// Distances below [`MIN_DISTANCE`] (a sensor on the fusion center) are
    /// clamped.
    pub fn new(distances: Vec<f64>, noise_psd: Vec<f64>, path_loss_exponent: f64) -> Result<Self> {
        if distances.len() != noise_psd.len() {
            return Err(Error::DimensionMismatch {
                what: "channel noise PSD",
                expected: distances.len(),
                found: noise_psd.len(),
            });
        }
        if !(2.0..=6.0).contains(&path_loss_exponent) {
            return Err(Error::invalid(format!(
                "path loss exponent {path_loss_exponent} outside [2, 6]"
            )));
        }
        if let Some(v) = noise_psd.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("channel noise PSD {v} must be positive")));
        }
        if let Some(d) = distances.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(Error::invalid(format!("distance {d} must be finite and non-negative")));
        }
        let distances = distances.into_iter().map(|d| d.max(MIN_DISTANCE)).collect();
        Ok(Self {
            distances,
            noise_psd,
            path_loss_exponent,
        })
    }

    /// Unit channel noise and quadratic path loss.
    pub fn with_unit_noise(distances: Vec<f64>) -> Result<Self> {
        let n = distances.len();
        Self::new(distances, alloc::vec![1.0; n], DEFAULT_PATH_LOSS_EXPONENT)
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn noise_psd(&self) -> &[f64] {
        &self.noise_psd
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    /// `d_k^r · V_k`: the energy price of one unit of `4^b`.
    pub fn cost_weight(&self, k: usize) -> f64 {
        libm::pow(self.distances[k], self.path_loss_exponent) * self.noise_psd[k]
    }

    /// `d_k^r` alone, the distance-only cost used by sensor selection.
    pub fn distance_weight(&self, k: usize) -> f64 {
        libm::pow(self.distances[k], self.path_loss_exponent)
    }

    pub fn energy(&self, k: usize, bits: f64) -> f64 {
        self.cost_weight(k) * (pow4(bits) - 1.0)
    }

    /// Total energy of an allocation. Lengths must already agree.
    pub fn total_energy(&self, bits: &[f64]) -> f64 {
        bits.iter().enumerate().map(|(k, &b)| self.energy(k, b)).sum()
    }
}

/// `d^r · V · (4^b - 1)`.
pub fn transmit_energy(bits: f64, distance: f64, noise_psd: f64, exponent: f64) -> Result<f64> {
    if !(bits >= 0.0) {
        return Err(Error::invalid(format!("rate {bits} must be non-negative")));
    }
    Ok(libm::pow(distance, exponent) * noise_psd * (pow4(bits) - 1.0))
}

/// `½ · log2(1 + SNR)`.
pub fn capacity_bits(snr: f64) -> f64 {
    0.5 * libm::log2(1.0 + snr)
}

/// `d^{-r} · E / V`.
pub fn channel_snr(energy: f64, distance: f64, noise_psd: f64, exponent: f64) -> f64 {
    energy / (libm::pow(distance, exponent) * noise_psd)
}

/// Energies of an allocation and its ratio to the all-at-`b0` budget.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub per_sensor: Vec<f64>,
    pub total: f64,
    pub eur: f64,
}

pub fn energy_usage_ratio(bits: &[f64], channel: &ChannelModel, b0: f64) -> Result<EnergyReport> {
    if bits.len() != channel.len() {
        return Err(Error::DimensionMismatch {
            what: "allocation",
            expected: channel.len(),
            found: bits.len(),
        });
    }
    if let Some(b) = bits.iter().find(|b| !(**b >= 0.0 && **b <= b0)) {
        return Err(Error::invalid(format!("rate {b} outside [0, {b0}]")));
    }
    let per_sensor: Vec<f64> = (0..bits.len()).map(|k| channel.energy(k, bits[k])).collect();
    let total: f64 = per_sensor.iter().sum();
    let e_max: f64 = (0..bits.len()).map(|k| channel.energy(k, b0)).sum();
    let eur = if e_max > 0.0 { total / e_max } else { 0.0 };
    Ok(EnergyReport {
        per_sensor,
        total,
        eur,
    })
}
