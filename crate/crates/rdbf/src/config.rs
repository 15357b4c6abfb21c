//! Scenario configuration.
//!
//! A scenario is a TOML file. Every key is optional except the scene, which
//! is either a preset name or a table:
//!
//! ```toml
//! scene = "small24"            # small24 | grid49 | grid169
//! b0 = 16
//! alpha = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
//! constraint_design = "targets-distortionless"   # or "targets-plus-nulls"
//! mode = "per-bin"             # or "aggregate"
//! seed = 1
//! output_dir = "out"
//! frequency = 1000.0           # representative bin for per-bin mode, Hz
//! bins = [1, 40]               # bin range solved in aggregate mode
//! frame_len = 320
//! crest_factor = 4.0
//! noise_psd = 1.0              # channel noise V_k, same for every sensor
//! path_loss_exponent = 2.0
//! draws = 64
//! epsilon = 1e-9
//! duration = 2.0               # seconds synthesized by `denoise`
//! # beta = 1e-3                # fixes β instead of computing it
//! ```
//!
//! A custom scene table:
//!
//! ```toml
//! [scene]
//! room_size = [3.0, 3.0]
//! sensors = [[0.5, 0.5], [2.5, 0.5]]   # or: grid = { rows = 5, cols = 5, margin = 0.5 }
//! fc = [1.5, 1.5]
//! targets = [[0.3, 2.7]]
//! interferers = [[0.3, 0.3]]
//! target_psd = [1.0]
//! interferer_psd = [1.0]
//! # self_noise_psd = 1e-5          # default: 50 dB below target power at 1 m
//! speed_of_sound = 343.0
//! sample_rate = 16000.0
//! ```

use std::path::{Path, PathBuf};

use rdbf_core::scene::{grid_scene, Point, SceneConfig, DEFAULT_SPEED_OF_SOUND};
use serde::Deserialize;

use crate::{Error, Result};

pub const PRESETS: [&str; 3] = ["small24", "grid49", "grid169"];
pub const DEFAULT_ALPHAS: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Solve one representative frequency bin.
    PerBin,
    /// Solve every bin in range and keep each sensor's maximum rate.
    Aggregate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintDesign {
    /// Unit response towards every target.
    TargetsDistortionless,
    /// Unit response towards targets, nulls towards interferers.
    TargetsPlusNulls,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SceneSpec {
    Preset(String),
    Custom(CustomScene),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub margin: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScene {
    pub room_size: [f64; 2],
    #[serde(default)]
    pub sensors: Vec<[f64; 2]>,
    pub grid: Option<GridSpec>,
    pub fc: [f64; 2],
    pub targets: Vec<[f64; 2]>,
    #[serde(default)]
    pub interferers: Vec<[f64; 2]>,
    pub target_psd: Vec<f64>,
    #[serde(default)]
    pub interferer_psd: Vec<f64>,
    pub self_noise_psd: Option<f64>,
    #[serde(default = "default_speed")]
    pub speed_of_sound: f64,
    #[serde(default = "default_rate")]
    pub sample_rate: f64,
}

fn default_speed() -> f64 {
    DEFAULT_SPEED_OF_SOUND
}

fn default_rate() -> f64 {
    16_000.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scene: SceneSpec,
    #[serde(default = "defaults::b0")]
    pub b0: u32,
    #[serde(default = "defaults::alpha")]
    pub alpha: Vec<f64>,
    #[serde(default = "defaults::design")]
    pub constraint_design: ConstraintDesign,
    #[serde(default = "defaults::mode")]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "defaults::frequency")]
    pub frequency: f64,
    pub bins: Option<[usize; 2]>,
    #[serde(default = "defaults::frame_len")]
    pub frame_len: usize,
    #[serde(default = "defaults::crest")]
    pub crest_factor: f64,
    #[serde(default = "defaults::one")]
    pub noise_psd: f64,
    #[serde(default = "defaults::exponent")]
    pub path_loss_exponent: f64,
    #[serde(default = "defaults::draws")]
    pub draws: usize,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::duration")]
    pub duration: f64,
    pub beta: Option<f64>,
}

mod defaults {
    use super::*;

    pub fn b0() -> u32 {
        16
    }
    pub fn alpha() -> Vec<f64> {
        DEFAULT_ALPHAS.to_vec()
    }
    pub fn design() -> ConstraintDesign {
        ConstraintDesign::TargetsDistortionless
    }
    pub fn mode() -> Mode {
        Mode::PerBin
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn frequency() -> f64 {
        1000.0
    }
    pub fn frame_len() -> usize {
        crate::stft::DEFAULT_FRAME_LEN
    }
    pub fn crest() -> f64 {
        4.0
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn exponent() -> f64 {
        rdbf_core::energy::DEFAULT_PATH_LOSS_EXPONENT
    }
    pub fn draws() -> usize {
        rdbf_core::allocation::DEFAULT_DRAWS
    }
    pub fn epsilon() -> f64 {
        1e-9
    }
    pub fn duration() -> f64 {
        2.0
    }
}

impl ScenarioConfig {
    /// Defaults around a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(&format!("scene = {name:?}"))?;
        cfg.scene()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `arg` is a preset name or a path to a TOML file.
    pub fn load(arg: &str) -> Result<Self> {
        if PRESETS.contains(&arg) {
            return Self::preset(arg);
        }
        let text = std::fs::read_to_string(Path::new(arg))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.scene()?;
        if self.alpha.is_empty() || self.alpha.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(Error::Config(format!("alpha values {:?} must lie in (0, 1]", self.alpha)));
        }
        if !(1..=32).contains(&self.b0) {
            return Err(Error::Config(format!("b0 {} outside 1..=32", self.b0)));
        }
        if self.draws == 0 {
            return Err(Error::Config("draws must be positive".into()));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Config("duration must be positive".into()));
        }
        let spec = crate::stft::FrameSpec::new(self.frame_len)?;
        if let Some([lo, hi]) = self.bins {
            if lo > hi || hi >= spec.num_bins() {
                return Err(Error::Config(format!("bin range [{lo}, {hi}] outside 0..{}", spec.num_bins())));
            }
        }
        Ok(())
    }

    pub fn scene(&self) -> Result<SceneConfig> {
        let scene = match &self.scene {
            SceneSpec::Preset(name) => preset_scene(name)?,
            SceneSpec::Custom(c) => c.build()?,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Bins solved by aggregate mode.
    pub fn bin_range(&self) -> [usize; 2] {
        self.bins.unwrap_or([1, self.frame_len / 2])
    }
}

fn points(v: &[[f64; 2]]) -> Vec<Point> {
    v.iter().map(|&[x, y]| Point::new(x, y)).collect()
}

impl CustomScene {
    fn build(&self) -> Result<SceneConfig> {
        let sensor_positions = match (&self.grid, self.sensors.is_empty()) {
            (Some(g), true) => grid_scene(g.rows, g.cols, self.room_size, g.margin)?,
            (None, false) => points(&self.sensors),
            _ => return Err(Error::Config("give exactly one of `sensors` and `grid`".into())),
        };
        Ok(SceneConfig {
            room_size: self.room_size,
            sensor_positions,
            fc_position: Point::new(self.fc[0], self.fc[1]),
            target_positions: points(&self.targets),
            interferer_positions: points(&self.interferers),
            target_psd: self.target_psd.clone(),
            interferer_psd: self.interferer_psd.clone(),
            self_noise_psd: self
                .self_noise_psd
                .unwrap_or_else(|| SceneConfig::default_self_noise(&self.target_psd)),
            speed_of_sound: self.speed_of_sound,
            sample_rate: self.sample_rate,
        })
    }
}

/// Built-in layouts.
///
/// - `small24`: 3 x 3 m room, 5 x 5 lattice at 0.5 m spacing with the center
///   point removed (the fusion center sits there), target at (0.3, 2.7),
///   interferers at (0.3, 0.3) and (2.7, 2.7).
/// - `grid49`: same room and sources, 7 x 7 lattice at 0.3 m spacing whose
///   center sensor coincides with the fusion center.
/// - `grid169`: 12 x 12 m room, 13 x 13 lattice (sensor 85 at the center),
///   targets at (2.4, 9.6) and (9.6, 2.4), interferers at (2.4, 2.4) and
///   (9.6, 9.6).
pub fn preset_scene(name: &str) -> Result<SceneConfig> {
    let small_room = |sensors: Vec<Point>| SceneConfig {
        room_size: [3.0, 3.0],
        sensor_positions: sensors,
        fc_position: Point::new(1.5, 1.5),
        target_positions: vec![Point::new(0.3, 2.7)],
        interferer_positions: vec![Point::new(0.3, 0.3), Point::new(2.7, 2.7)],
        target_psd: vec![1.0],
        interferer_psd: vec![1.0, 1.0],
        self_noise_psd: SceneConfig::default_self_noise(&[1.0]),
        speed_of_sound: DEFAULT_SPEED_OF_SOUND,
        sample_rate: 16_000.0,
    };
    match name {
        "small24" => {
            let fc = Point::new(1.5, 1.5);
            let pts = grid_scene(5, 5, [3.0, 3.0], 0.5)?
                .into_iter()
                .filter(|p| p.distance(&fc) > 1e-9)
                .collect();
            Ok(small_room(pts))
        }
        "grid49" => Ok(small_room(grid_scene(7, 7, [3.0, 3.0], 0.6)?)),
        "grid169" => Ok(SceneConfig {
            room_size: [12.0, 12.0],
            sensor_positions: grid_scene(13, 13, [12.0, 12.0], 0.5)?,
            fc_position: Point::new(6.0, 6.0),
            target_positions: vec![Point::new(2.4, 9.6), Point::new(9.6, 2.4)],
            interferer_positions: vec![Point::new(2.4, 2.4), Point::new(9.6, 9.6)],
            target_psd: vec![1.0, 1.0],
            interferer_psd: vec![1.0, 1.0],
            self_noise_psd: SceneConfig::default_self_noise(&[1.0, 1.0]),
            speed_of_sound: DEFAULT_SPEED_OF_SOUND,
            sample_rate: 16_000.0,
        }),
        other => Err(Error::Config(format!("unknown preset {other:?}; expected one of {PRESETS:?}"))),
    }
}
