//! Uniform quantization and its noise model.
//!
//! A sensor whose signal peaks at `A/2` in magnitude quantizes with `b` bits
//! using cells of width `Δ = A / 2^b`. Under the usual high-rate model the
//! error is white with variance `Δ²/12 = A² / (12 · 4^b)`.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::pow4;
use crate::{CMatrix, Complex64, Error, Result};

/// Mid-rise uniform quantizer with `2^bits` cells over `[-A/2, A/2)`.
///
/// Inputs outside the range are clamped into the outermost cells, so the
/// top boundary `A/2` maps to the top cell. `bits == 0` transmits nothing
/// and returns `0`.
pub fn quantize_uniform(sample: f64, amplitude: f64, bits: u32) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    let delta = amplitude / libm::exp2(bits as f64);
    let half = amplitude / 2.0;
    let clamped = sample.clamp(-half, half - delta / 2.0);
    delta * (libm::floor(clamped / delta) + 0.5)
}

/// Per-sensor peak amplitudes and (possibly fractional) rates.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizerSpec {
    pub amplitudes: Vec<f64>,
    pub bits: Vec<f64>,
}

impl QuantizerSpec {
    pub fn new(amplitudes: Vec<f64>, bits: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != bits.len() {
            return Err(Error::DimensionMismatch {
                what: "quantizer bits",
                expected: amplitudes.len(),
                found: bits.len(),
            });
        }
        if let Some(a) = amplitudes.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::invalid(format!("amplitude {a} must be positive")));
        }
        if let Some(b) = bits.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::invalid(format!("rate {b} must be non-negative")));
        }
        Ok(Self { amplitudes, bits })
    }
}

/// Diagonal of the quantization-noise covariance `R_qq`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantNoiseCov {
    pub diag: Vec<f64>,
}

impl QuantNoiseCov {
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.diag.len();
        CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(self.diag[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// `A² / (12 · 4^b)`.
pub fn quant_noise_variance(amplitude: f64, bits: f64) -> f64 {
    amplitude * amplitude / (12.0 * pow4(bits))
}

pub fn quant_noise_cov(spec: &QuantizerSpec) -> QuantNoiseCov {
    QuantNoiseCov {
        diag: spec
            .amplitudes
            .iter()
            .zip(&spec.bits)
            .map(|(&a, &b)| quant_noise_variance(a, b))
            .collect(),
    }
}

/// Quantizer range for a sensor from its own observations: twice the peak
/// magnitude, so the signal fits `[-A/2, A/2]`.
pub fn estimate_amplitude(signal: &[f64]) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot estimate amplitude of an empty signal"));
    }
    let peak = signal.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::invalid("amplitude undefined for an all-zero or non-finite signal"));
    }
    Ok(2.0 * peak)
}

/// Quantizer ranges predicted from the covariance model: a zero-mean signal
/// of power `R_kk` peaks at about `crest · sqrt(R_kk)`, so `A_k = 2 · crest ·
/// sqrt(R_kk)`.
pub fn model_amplitudes(r_yy: &CMatrix, crest: f64) -> Result<Vec<f64>> {
    if !(crest > 0.0 && crest.is_finite()) {
        return Err(Error::invalid(format!("crest factor {crest} must be positive")));
    }
    (0..r_yy.nrows())
        .map(|k| {
            let p = r_yy[(k, k)].re;
            if p > 0.0 && p.is_finite() {
                Ok(2.0 * crest * libm::sqrt(p))
            } else {
                Err(Error::invalid(format!("sensor {k} has power {p}")))
            }
        })
        .collect()
}
