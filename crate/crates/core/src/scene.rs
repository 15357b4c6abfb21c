//! Network geometry, free-field acoustic transfer functions and the
//! per-frequency covariance model of the recorded signals.
//!
//! Recordings follow `y = A s + B u + v`, with mutually uncorrelated target
//! sources `s`, interferers `u` and sensor self noise `v`, so that
//!
//! ```text
//! R_yy = R_xx + R_nn,   R_xx = A Σ_x A^H,   R_nn = B Σ_u B^H + σ_v² I.
//! ```

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{CMatrix, Complex64, Error, Result};

/// Propagation distances below this are clamped, so a source sitting on a
/// sensor (or a sensor on the fusion center) stays finite.
pub const MIN_DISTANCE: f64 = 0.05;

pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;

/// Self-noise level relative to the target power at 1 m.
pub const DEFAULT_SELF_NOISE_SNR_DB: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    fn inside(&self, room: [f64; 2]) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.x <= room[0] && self.y <= room[1]
    }
}

/// A simulated two-dimensional network: sensors, fusion center and sources.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub room_size: [f64; 2],
    pub sensor_positions: Vec<Point>,
    pub fc_position: Point,
    pub target_positions: Vec<Point>,
    pub interferer_positions: Vec<Point>,
    /// Per-target power (linear), one entry per target.
    pub target_psd: Vec<f64>,
    /// Per-interferer power (linear), one entry per interferer.
    pub interferer_psd: Vec<f64>,
    /// Sensor self-noise power `σ_v²` (linear).
    pub self_noise_psd: f64,
    pub speed_of_sound: f64,
    pub sample_rate: f64,
}

impl SceneConfig {
    /// Self-noise power that sits `DEFAULT_SELF_NOISE_SNR_DB` below the mean
    /// target power observed at 1 m.
    pub fn default_self_noise(target_psd: &[f64]) -> f64 {
        let mean = target_psd.iter().sum::<f64>() / target_psd.len().max(1) as f64;
        mean * libm::pow(10.0, -DEFAULT_SELF_NOISE_SNR_DB / 10.0)
    }

    pub fn num_sensors(&self) -> usize {
        self.sensor_positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let [w, h] = self.room_size;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(Error::invalid(format!("room size {w} x {h} is degenerate")));
        }
        if self.sensor_positions.is_empty() {
            return Err(Error::invalid("scene has no sensors"));
        }
        if self.target_positions.is_empty() {
            return Err(Error::invalid("scene has no target source"));
        }
        if self.target_psd.len() != self.target_positions.len() {
            return Err(Error::DimensionMismatch {
                what: "target_psd",
                expected: self.target_positions.len(),
                found: self.target_psd.len(),
            });
        }
        if self.interferer_psd.len() != self.interferer_positions.len() {
            return Err(Error::DimensionMismatch {
                what: "interferer_psd",
                expected: self.interferer_positions.len(),
                found: self.interferer_psd.len(),
            });
        }
        let all = self
            .sensor_positions
            .iter()
            .chain(&self.target_positions)
            .chain(&self.interferer_positions)
            .chain(core::iter::once(&self.fc_position));
        for p in all {
            if !p.inside(self.room_size) {
                return Err(Error::invalid(format!(
                    "position ({}, {}) lies outside the {w} x {h} room",
                    p.x, p.y
                )));
            }
        }
        let psds = self
            .target_psd
            .iter()
            .chain(&self.interferer_psd)
            .chain(core::iter::once(&self.self_noise_psd));
        for &p in psds {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("power {p} must be finite and non-negative")));
            }
        }
        if !(self.speed_of_sound > 0.0) || !(self.sample_rate > 0.0) {
            return Err(Error::invalid("speed of sound and sample rate must be positive"));
        }
        Ok(())
    }

    pub fn statistics(&self) -> SignalStatistics {
        SignalStatistics {
            sigma_x: self.target_psd.clone(),
            sigma_u: self.interferer_psd.clone(),
            sigma_v: self.self_noise_psd,
        }
    }

    /// Sensor to fusion-center distances, clamped at [`MIN_DISTANCE`].
    pub fn fc_distances(&self) -> Vec<f64> {
        self.sensor_positions
            .iter()
            .map(|p| p.distance(&self.fc_position).max(MIN_DISTANCE))
            .collect()
    }

    /// Index of the sensor closest to the fusion center.
    pub fn sensor_nearest_fc(&self) -> usize {
        let d = self.fc_distances();
        (0..d.len()).fold(0, |best, k| if d[k] < d[best] { k } else { best })
    }
}

/// Lays out `rows * cols` sensors on a uniform lattice inset by `margin`
/// from the walls. Labels run bottom to top within a column, then left to
/// right across columns. A single row or column sits on the room's center
/// line.
pub fn grid_scene(rows: usize, cols: usize, room: [f64; 2], margin: f64) -> Result<Vec<Point>> {
    let [w, h] = room;
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid needs at least one row and one column"));
    }
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::invalid(format!("room size {w} x {h} is degenerate")));
    }
    if !(margin >= 0.0) || 2.0 * margin > w || 2.0 * margin > h {
        return Err(Error::invalid(format!("margin {margin} does not fit a {w} x {h} room")));
    }
    let axis = |n: usize, len: f64, i: usize| {
        if n == 1 {
            len / 2.0
        } else {
            margin + i as f64 * (len - 2.0 * margin) / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        for r in 0..rows {
            out.push(Point::new(axis(cols, w, c), axis(rows, h, r)));
        }
    }
    Ok(out)
}

/// Free-field transfer function at distance `d`: `exp(-j 2π f d / c) / max(d, d_min)`.
pub fn freefield_transfer(distance: f64, frequency: f64, speed_of_sound: f64) -> Complex64 {
    let phase = -2.0 * PI * frequency * distance / speed_of_sound;
    Complex64::from_polar(1.0 / distance.max(MIN_DISTANCE), phase)
}

/// Target (`a`, M x I) and interferer (`b`, M x J) transfer functions at
/// one frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct AtfMatrix {
    pub frequency: f64,
    pub a: CMatrix,
    pub b: CMatrix,
}

pub fn build_freefield_atf(scene: &SceneConfig, frequency: f64) -> Result<AtfMatrix> {
    if !(frequency >= 0.0 && frequency.is_finite()) {
        return Err(Error::invalid(format!("frequency {frequency} must be finite and >= 0")));
    }
    let c = scene.speed_of_sound;
    let build = |sources: &[Point]| {
        CMatrix::from_fn(scene.sensor_positions.len(), sources.len(), |k, i| {
            freefield_transfer(scene.sensor_positions[k].distance(&sources[i]), frequency, c)
        })
    };
    Ok(AtfMatrix {
        frequency,
        a: build(&scene.target_positions),
        b: build(&scene.interferer_positions),
    })
}

/// Source powers entering the covariance model.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalStatistics {
    /// Diagonal of `Σ_x`, one power per target.
    pub sigma_x: Vec<f64>,
    /// Diagonal of `Σ_u`, one power per interferer.
    pub sigma_u: Vec<f64>,
    /// Self-noise power `σ_v²`.
    pub sigma_v: f64,
}

/// Per-frequency covariance matrices of the recorded signals.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSet {
    pub frequency: f64,
    pub r_xx: CMatrix,
    pub r_uu: CMatrix,
    pub r_vv: CMatrix,
    pub r_nn: CMatrix,
    pub r_yy: CMatrix,
}

fn weighted_gram(atf: &CMatrix, powers: &[f64]) -> CMatrix {
    let m = atf.nrows();
    let mut out = CMatrix::zeros(m, m);
    for (i, &p) in powers.iter().enumerate() {
        let col = atf.column(i);
        for c in 0..m {
            let v = col[c].conj() * p;
            for r in 0..m {
                out[(r, c)] += col[r] * v;
            }
        }
    }
    out
}

pub fn assemble_covariances(atf: &AtfMatrix, stats: &SignalStatistics) -> Result<CovarianceSet> {
    let m = atf.a.nrows();
    if atf.b.nrows() != m {
        return Err(Error::DimensionMismatch {
            what: "interferer ATF rows",
            expected: m,
            found: atf.b.nrows(),
        });
    }
    if stats.sigma_x.len() != atf.a.ncols() {
        return Err(Error::DimensionMismatch {
            what: "target powers",
            expected: atf.a.ncols(),
            found: stats.sigma_x.len(),
        });
    }
    if stats.sigma_u.len() != atf.b.ncols() {
        return Err(Error::DimensionMismatch {
            what: "interferer powers",
            expected: atf.b.ncols(),
            found: stats.sigma_u.len(),
        });
    }
    let r_xx = weighted_gram(&atf.a, &stats.sigma_x);
    let r_uu = weighted_gram(&atf.b, &stats.sigma_u);
    let r_vv = CMatrix::identity(m, m).scale(stats.sigma_v);
    let r_nn = &r_uu + &r_vv;
    let r_yy = &r_xx + &r_nn;
    Ok(CovarianceSet {
        frequency: atf.frequency,
        r_xx,
        r_uu,
        r_vv,
        r_nn,
        r_yy,
    })
}
