//! Scenario runs: rate allocation and sensor selection over an `α` sweep,
//! with CSV reports.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rdbf_core::allocation::{
    bisection_threshold, md_lcmv_select, randomized_round, solve_rd_lcmv, RateAllocationProblem, RdSolution,
};
use rdbf_core::beamforming::LinearConstraintSet;
use rdbf_core::energy::{energy_usage_ratio, ChannelModel, EnergyReport};
use rdbf_core::quantization::model_amplitudes;
use rdbf_core::scene::{assemble_covariances, AtfMatrix, CovarianceSet, SceneConfig};
use rdbf_core::sdp::SdpOptions;

use crate::config::{ConstraintDesign, Mode, ScenarioConfig};
use crate::stft::FrameSpec;
use crate::synth::bin_atf;
use crate::{Error, Result};

/// A validated configuration with everything that does not depend on `α`.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub scene: SceneConfig,
    pub spec: FrameSpec,
    pub channel: ChannelModel,
}

/// Per-bin model quantities.
#[derive(Clone, Debug)]
pub struct BinModel {
    pub bin: usize,
    pub atf: AtfMatrix,
    pub cov: CovarianceSet,
    pub constraints: LinearConstraintSet,
    pub amplitudes: Vec<f64>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let scene = config.scene()?;
        let spec = FrameSpec::new(config.frame_len)?;
        let m = scene.num_sensors();
        let channel = ChannelModel::new(scene.fc_distances(), vec![config.noise_psd; m], config.path_loss_exponent)?;
        Ok(Self {
            config,
            scene,
            spec,
            channel,
        })
    }

    pub fn representative_bin(&self) -> usize {
        self.spec.nearest_bin(self.config.frequency, self.scene.sample_rate)
    }

    /// Bins the optimizer is run on.
    pub fn solve_bins(&self) -> Vec<usize> {
        match self.config.mode {
            Mode::PerBin => vec![self.representative_bin()],
            Mode::Aggregate => {
                let [lo, hi] = self.config.bin_range();
                (lo..=hi).collect()
            }
        }
    }

    pub fn bin_model(&self, bin: usize) -> Result<BinModel> {
        let atf = bin_atf(&self.scene, &self.spec, bin)?;
        let cov = assemble_covariances(&atf, &self.scene.statistics())?;
        let constraints = match self.config.constraint_design {
            ConstraintDesign::TargetsDistortionless => LinearConstraintSet::distortionless(&atf.a)?,
            ConstraintDesign::TargetsPlusNulls => LinearConstraintSet::distortionless_with_nulls(&atf.a, &atf.b)?,
        };
        let amplitudes = model_amplitudes(&cov.r_yy, self.config.crest_factor)?;
        Ok(BinModel {
            bin,
            atf,
            cov,
            constraints,
            amplitudes,
        })
    }

    pub fn problem(&self, model: &BinModel, alpha: f64) -> Result<RateAllocationProblem> {
        Ok(RateAllocationProblem::with_beta(
            model.cov.r_nn.clone(),
            model.constraints.clone(),
            self.channel.clone(),
            model.amplitudes.clone(),
            self.config.b0,
            alpha,
            self.config.beta,
        )?)
    }

    fn problems(&self, alpha: f64) -> Result<Vec<RateAllocationProblem>> {
        self.solve_bins()
            .par_iter()
            .map(|&bin| self.problem(&self.bin_model(bin)?, alpha))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Methods {
    /// Rate allocation with randomized rounding.
    pub rd: bool,
    /// Selection from the Boolean relaxation.
    pub md: bool,
    /// Selection by thresholding the rate allocation.
    pub threshold: bool,
}

impl Methods {
    pub const ALL: Methods = Methods {
        rd: true,
        md: true,
        threshold: true,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub reason: String,
    pub infeasible: bool,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            infeasible: e.is_infeasible(),
            reason: e.to_string(),
        }
    }
}

impl From<rdbf_core::Error> for Failure {
    fn from(e: rdbf_core::Error) -> Self {
        Error::from(e).into()
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Noise power against its bound at the bin where the ratio is largest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseCheck {
    pub bin: usize,
    pub noise_power: f64,
    pub bound: f64,
    /// Relative slack the method was allowed on the bound (`1 + ε` for
    /// thresholding, 1 otherwise).
    pub slack: f64,
}

impl NoiseCheck {
    pub fn noise_db(&self) -> f64 {
        10.0 * self.noise_power.log10()
    }

    pub fn bound_db(&self) -> f64 {
        10.0 * self.bound.log10()
    }

    pub fn holds(&self) -> bool {
        self.noise_power <= self.bound * self.slack
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RdRecord {
    /// Relaxed rates in `[0, b0]` (per-sensor maximum over bins).
    pub continuous: Vec<f64>,
    pub rates: Vec<f64>,
    pub check: NoiseCheck,
    pub energy: EnergyReport,
    pub wall: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectRecord {
    pub subset: Vec<usize>,
    /// Rate threshold (per-bin mode thresholding only).
    pub threshold: Option<f64>,
    pub check: NoiseCheck,
    pub energy: EnergyReport,
    pub wall: Duration,
}

impl SelectRecord {
    pub fn rates(&self, m: usize, b0: u32) -> Vec<f64> {
        let mut r = vec![0.0; m];
        for &k in &self.subset {
            r[k] = b0 as f64;
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaRecord {
    pub alpha: f64,
    pub rd: Option<Outcome<RdRecord>>,
    pub md: Option<Outcome<SelectRecord>>,
    pub threshold: Option<Outcome<SelectRecord>>,
}

impl AlphaRecord {
    fn outcomes(&self) -> impl Iterator<Item = Option<&Failure>> {
        [
            self.rd.as_ref().map(|r| r.as_ref().err()),
            self.md.as_ref().map(|r| r.as_ref().err()),
            self.threshold.as_ref().map(|r| r.as_ref().err()),
        ]
        .into_iter()
        .flatten()
    }

    pub fn failures(&self) -> Vec<&Failure> {
        self.outcomes().flatten().collect()
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub scenario: Scenario,
    pub bins: Vec<usize>,
    pub records: Vec<AlphaRecord>,
}

impl RunReport {
    pub fn any_infeasible(&self) -> bool {
        self.records.iter().any(|r| r.failures().iter().any(|f| f.infeasible))
    }
}

/// Largest noise-to-bound ratio over bins; `None` when some bin cannot meet
/// the constraints at all.
fn worst(problems: &[RateAllocationProblem], bins: &[usize], slack: f64, noise: impl Fn(&RateAllocationProblem) -> Option<f64>) -> Option<NoiseCheck> {
    let mut out: Option<NoiseCheck> = None;
    for (p, &bin) in problems.iter().zip(bins) {
        let c = NoiseCheck {
            bin,
            noise_power: noise(p)?,
            bound: p.noise_bound(),
            slack,
        };
        if out.is_none_or(|o| c.noise_power / c.bound > o.noise_power / o.bound) {
            out = Some(c);
        }
    }
    out
}

fn relax(problems: &[RateAllocationProblem]) -> Outcome<Vec<RdSolution>> {
    let opts = SdpOptions::default();
    problems
        .par_iter()
        .map(|p| solve_rd_lcmv(p, &opts).map_err(Failure::from))
        .collect()
}

fn run_rd(s: &Scenario, problems: &[RateAllocationProblem], bins: &[usize], relaxed: &[RdSolution]) -> Outcome<RdRecord> {
    let start = Instant::now();
    let m = s.scene.num_sensors();
    let per_bin: Vec<Vec<f64>> = problems
        .par_iter()
        .zip(bins)
        .zip(relaxed)
        .map(|((p, &bin), sol)| -> Outcome<_> {
            Ok(randomized_round(&sol.rates, p, s.config.draws, s.config.seed.wrapping_add(bin as u64))?.bits)
        })
        .collect::<Outcome<_>>()?;
    let mut continuous = vec![0.0_f64; m];
    let mut rates = vec![0.0_f64; m];
    for (sol, r) in relaxed.iter().zip(&per_bin) {
        for k in 0..m {
            continuous[k] = continuous[k].max(sol.rates.bits[k]);
            rates[k] = rates[k].max(r[k]);
        }
    }
    let check = worst(problems, bins, 1.0, |p| p.noise_at_rates(&rates).ok()).ok_or_else(|| Failure {
        reason: "noise evaluation failed".into(),
        infeasible: false,
    })?;
    if !check.holds() {
        return Err(Failure {
            reason: format!("rounded allocation exceeds the bound at bin {}", check.bin),
            infeasible: false,
        });
    }
    let energy = energy_usage_ratio(&rates, &s.channel, s.config.b0 as f64)?;
    Ok(RdRecord {
        continuous,
        rates,
        check,
        energy,
        wall: start.elapsed(),
    })
}

fn select_record(s: &Scenario, problems: &[RateAllocationProblem], bins: &[usize], subset: Vec<usize>, threshold: Option<f64>, slack: f64, start: Instant) -> Outcome<SelectRecord> {
    let check = worst(problems, bins, slack, |p| p.subset_noise(&subset)).ok_or_else(|| Failure {
        reason: "selected subset cannot meet the constraints".into(),
        infeasible: false,
    })?;
    if !check.holds() {
        return Err(Failure {
            reason: format!("selected subset exceeds the bound at bin {}", check.bin),
            infeasible: false,
        });
    }
    let m = s.scene.num_sensors();
    let mut rec = SelectRecord {
        subset,
        threshold,
        check,
        energy: EnergyReport {
            per_sensor: vec![],
            total: 0.0,
            eur: 0.0,
        },
        wall: Duration::ZERO,
    };
    rec.energy = energy_usage_ratio(&rec.rates(m, s.config.b0), &s.channel, s.config.b0 as f64)?;
    rec.wall = start.elapsed();
    Ok(rec)
}

fn union(subsets: impl IntoIterator<Item = Vec<usize>>) -> Vec<usize> {
    let mut all: Vec<usize> = subsets.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    all
}

fn run_md(s: &Scenario, problems: &[RateAllocationProblem], bins: &[usize]) -> Outcome<SelectRecord> {
    let start = Instant::now();
    let opts = SdpOptions::default();
    let subsets: Vec<Vec<usize>> = problems
        .par_iter()
        .map(|p| -> Outcome<_> { Ok(md_lcmv_select(p, &opts)?.selection.subset()) })
        .collect::<Outcome<_>>()?;
    select_record(s, problems, bins, union(subsets), None, 1.0, start)
}

fn run_threshold(s: &Scenario, problems: &[RateAllocationProblem], bins: &[usize], relaxed: &[RdSolution]) -> Outcome<SelectRecord> {
    let start = Instant::now();
    let eps = s.config.epsilon;
    let results: Vec<(Vec<usize>, f64)> = problems
        .par_iter()
        .zip(relaxed)
        .map(|(p, rd)| -> Outcome<_> {
            let th = bisection_threshold(&rd.ranking(), p, eps, 64)?;
            Ok((th.subset, th.threshold))
        })
        .collect::<Outcome<_>>()?;
    let threshold = (results.len() == 1).then(|| results[0].1);
    let subset = union(results.into_iter().map(|(s, _)| s));
    select_record(s, problems, bins, subset, threshold, 1.0 + eps, start)
}

pub fn run_alpha(s: &Scenario, alpha: f64, methods: Methods) -> AlphaRecord {
    let bins = s.solve_bins();
    let problems = match s.problems(alpha) {
        Ok(p) => p,
        Err(e) => {
            let f = Failure::from(e);
            return AlphaRecord {
                alpha,
                rd: methods.rd.then(|| Err(f.clone())),
                md: methods.md.then(|| Err(f.clone())),
                threshold: methods.threshold.then_some(Err(f)),
            };
        }
    };
    let ((rd, threshold), md) = rayon::join(
        || {
            if !(methods.rd || methods.threshold) {
                return (None, None);
            }
            let start = Instant::now();
            let relaxed = relax(&problems);
            let elapsed = start.elapsed();
            let with_time = |mut r: Outcome<RdRecord>| {
                if let Ok(x) = &mut r {
                    x.wall += elapsed;
                }
                r
            };
            let with_time_sel = |mut r: Outcome<SelectRecord>| {
                if let Ok(x) = &mut r {
                    x.wall += elapsed;
                }
                r
            };
            match relaxed {
                Ok(relaxed) => (
                    methods.rd.then(|| with_time(run_rd(s, &problems, &bins, &relaxed))),
                    methods.threshold.then(|| with_time_sel(run_threshold(s, &problems, &bins, &relaxed))),
                ),
                Err(f) => (methods.rd.then(|| Err(f.clone())), methods.threshold.then_some(Err(f))),
            }
        },
        || methods.md.then(|| run_md(s, &problems, &bins)),
    );
    AlphaRecord { alpha, rd, md, threshold }
}

/// Runs every `α` of the configuration (concurrently). Per-`α` failures are
/// recorded, not raised.
pub fn run_scenario(config: &ScenarioConfig, methods: Methods) -> Result<RunReport> {
    let scenario = Scenario::new(config.clone())?;
    let records = config
        .alpha
        .par_iter()
        .map(|&alpha| run_alpha(&scenario, alpha, methods))
        .collect();
    Ok(RunReport {
        bins: scenario.solve_bins(),
        scenario,
        records,
    })
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Per-`α`, per-method summary. Wall times are left out so that reruns are
/// byte-identical.
pub fn summary_csv(report: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alpha", "method", "status", "noise_db", "bound_db", "eur", "energy", "active", "threshold", "reason"])?;
    for r in &report.records {
        let rd = r.rd.as_ref().map(|o| o.as_ref().map(|x| (&x.check, &x.energy, x.rates.iter().filter(|b| **b > 0.0).count(), None)));
        let md = r.md.as_ref().map(|o| o.as_ref().map(|x| (&x.check, &x.energy, x.subset.len(), x.threshold)));
        let th = r.threshold.as_ref().map(|o| o.as_ref().map(|x| (&x.check, &x.energy, x.subset.len(), x.threshold)));
        for (method, out) in [("RD", rd), ("MD", md), ("threshold", th)] {
            let Some(out) = out else { continue };
            let row = match out {
                Ok((c, e, n, t)) => vec![
                    num(r.alpha),
                    method.into(),
                    "ok".into(),
                    num(c.noise_db()),
                    num(c.bound_db()),
                    num(e.eur),
                    num(e.total),
                    n.to_string(),
                    t.map(num).unwrap_or_default(),
                    String::new(),
                ],
                Err(f) => vec![
                    num(r.alpha),
                    method.into(),
                    if f.infeasible { "infeasible" } else { "failed" }.into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    f.reason.clone(),
                ],
            };
            w.write_record(&row)?;
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

/// One row per sensor: position, distance to the fusion center, relaxed and
/// rounded RD rates with per-sensor energy, and the MD / threshold
/// selections as rates in `{0, b0}` with a selected flag.
pub fn emit_rate_map(record: &AlphaRecord, scene: &SceneConfig, b0: u32) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sensor",
        "x",
        "y",
        "distance_fc",
        "rd_continuous",
        "rd_rate",
        "rd_energy",
        "md_rate",
        "md_selected",
        "threshold_rate",
        "threshold_selected",
    ])?;
    let rd = record.rd.as_ref().and_then(|o| o.as_ref().ok());
    let sel = |o: &Option<Outcome<SelectRecord>>| o.as_ref().and_then(|o| o.as_ref().ok()).map(|r| r.subset.clone());
    let (md, th) = (sel(&record.md), sel(&record.threshold));
    let d = scene.fc_distances();
    for (k, p) in scene.sensor_positions.iter().enumerate() {
        let flag = |s: &Option<Vec<usize>>| match s {
            Some(s) => {
                let on = s.contains(&k);
                [num(if on { b0 as f64 } else { 0.0 }), (on as u8).to_string()]
            }
            None => [String::new(), String::new()],
        };
        let [md_rate, md_sel] = flag(&md);
        let [th_rate, th_sel] = flag(&th);
        let rd_cols = match rd {
            Some(r) => [num(r.continuous[k]), num(r.rates[k]), num(r.energy.per_sensor[k])],
            None => [String::new(), String::new(), String::new()],
        };
        let [rc, rr, re] = rd_cols;
        w.write_record([(k + 1).to_string(), num(p.x), num(p.y), num(d[k]), rc, rr, re, md_rate, md_sel, th_rate, th_sel])?;
    }
    finish(w)
}

pub fn rate_map_name(alpha: f64) -> String {
    format!("rates_alpha_{alpha}.csv")
}

/// Writes `summary.csv` and one rate map per `α` into `dir`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.csv"), summary_csv(report)?)?;
    let scene = &report.scenario.scene;
    for r in &report.records {
        std::fs::write(dir.join(rate_map_name(r.alpha)), emit_rate_map(r, scene, report.scenario.config.b0)?)?;
    }
    Ok(())
}

/// Human-readable lines (with wall times) for the terminal.
pub fn describe(report: &RunReport) -> String {
    let mut s = String::new();
    for r in &report.records {
        let line = |name: &str, check: &NoiseCheck, eur: f64, n: usize, wall: Duration| {
            format!(
                "alpha {:<4} {name:<9} noise {:>9.3} dB  bound {:>9.3} dB  EUR {:.4}  active {n:>3}  {:.2?}\n",
                r.alpha,
                check.noise_db(),
                check.bound_db(),
                eur,
                wall
            )
        };
        if let Some(o) = &r.rd {
            match o {
                Ok(x) => s += &line("RD", &x.check, x.energy.eur, x.rates.iter().filter(|b| **b > 0.0).count(), x.wall),
                Err(f) => _ = writeln!(s, "alpha {:<4} RD        {}", r.alpha, f.reason),
            }
        }
        for (name, o) in [("MD", &r.md), ("threshold", &r.threshold)] {
            match o {
                Some(Ok(x)) => s += &line(name, &x.check, x.energy.eur, x.subset.len(), x.wall),
                Some(Err(f)) => _ = writeln!(s, "alpha {:<4} {name:<9} {}", r.alpha, f.reason),
                None => {}
            }
        }
    }
    s
}
