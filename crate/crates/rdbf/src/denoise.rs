//! End-to-end noise reduction: synthesize, quantize at the allocated
//! rates, beamform at the fusion center and resynthesize.

use std::path::Path;

use rayon::prelude::*;
use rdbf_core::beamforming::{lcmv, passed_power};
use rdbf_core::quantization::{quant_noise_variance, quantize_uniform};
use rdbf_core::{CMatrix, Complex64};

use crate::experiment::Scenario;
use crate::stft::{stft_synthesize, Spectrogram};
use crate::synth::{bin_atfs, synthesize_signals};
use crate::wav::{write_wav, Pcm};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BinReport {
    pub bin: usize,
    pub frequency: f64,
    /// Noise power at the reference sensor (model).
    pub input_noise: f64,
    /// `f^H (Λ^H R⁻¹ Λ)^{-1} f` with the active sensors' `R_nn + R_qq(b)`.
    pub output_noise_model: f64,
    /// Mean `|w^H (n + q)|²` over the synthesized frames.
    pub output_noise_measured: f64,
    /// `β/α` of this bin.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenoiseReport {
    pub rates: Vec<f64>,
    /// Sensor closest to the fusion center, used as the unprocessed input.
    pub reference: usize,
    pub bins: Vec<BinReport>,
    /// `‖z − f^H s‖ / ‖f^H s‖` over all bins and frames.
    pub distortion: f64,
}

impl DenoiseReport {
    pub fn broadband_input(&self) -> f64 {
        self.bins.iter().map(|b| b.input_noise).sum()
    }

    pub fn broadband_output_model(&self) -> f64 {
        self.bins.iter().map(|b| b.output_noise_model).sum()
    }

    pub fn broadband_output_measured(&self) -> f64 {
        self.bins.iter().map(|b| b.output_noise_measured).sum()
    }

    pub fn broadband_bound(&self) -> f64 {
        self.bins.iter().map(|b| b.bound).sum()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["bin", "frequency", "input_noise", "output_noise_model", "output_noise_measured", "bound"])?;
        for b in &self.bins {
            w.write_record([
                b.bin.to_string(),
                b.frequency.to_string(),
                b.input_noise.to_string(),
                b.output_noise_model.to_string(),
                b.output_noise_measured.to_string(),
                b.bound.to_string(),
            ])?;
        }
        w.write_record([
            "broadband".to_string(),
            String::new(),
            self.broadband_input().to_string(),
            self.broadband_output_model().to_string(),
            self.broadband_output_measured().to_string(),
            self.broadband_bound().to_string(),
        ])?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Time-domain results of a run.
#[derive(Clone, Debug)]
pub struct DenoiseSignals {
    pub reference: Vec<f64>,
    /// Quantized signals of the active sensors, in sensor order.
    pub transmitted: Vec<Vec<f64>>,
    pub output: Vec<f64>,
    /// `f^H s`, what a distortionless output should reproduce.
    pub desired: Vec<f64>,
}

/// Quantizes real and imaginary parts separately over `[-A/(2√2), A/(2√2)]`,
/// which gives the complex coefficient the modeled error `A²/(12 · 4^b)`.
fn quantize_complex(v: Complex64, amplitude: f64, bits: u32) -> Complex64 {
    let a = amplitude / std::f64::consts::SQRT_2;
    Complex64::new(quantize_uniform(v.re, a, bits), quantize_uniform(v.im, a, bits))
}

/// Runs the pipeline with integer `rates` (one per sensor) at bound
/// parameter `alpha`.
pub fn end_to_end_denoise(s: &Scenario, rates: &[f64], alpha: f64, seed: u64) -> Result<(DenoiseReport, DenoiseSignals)> {
    let m = s.scene.num_sensors();
    if rates.len() != m {
        return Err(Error::Config(format!("{} rates for {m} sensors", rates.len())));
    }
    if rates.iter().any(|b| b.fract() != 0.0 || *b < 0.0 || *b > s.config.b0 as f64) {
        return Err(Error::Config("rates must be integers in [0, b0]".into()));
    }
    let active: Vec<usize> = (0..m).filter(|&k| rates[k] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::Infeasible("no sensor transmits".into()));
    }
    let spec = s.spec;
    let atfs = bin_atfs(&s.scene, &spec)?;
    let sig = synthesize_signals(&s.scene, &atfs, &spec, s.config.duration, seed)?;
    let y = sig.mixture();
    let reference = s.scene.sensor_nearest_fc();
    let frames = y.frames;
    let ni = s.scene.target_positions.len();

    struct BinOut {
        report: BinReport,
        transmitted: Vec<Complex64>,
        output: Vec<Complex64>,
        desired: Vec<Complex64>,
    }
    let outs: Vec<BinOut> = (0..spec.num_bins())
        .into_par_iter()
        .map(|bin| -> Result<BinOut> {
            let model = s.bin_model(bin)?;
            let bound = s.problem(&model, alpha).map(|p| p.noise_bound()).unwrap_or(f64::NAN);
            let mut r = CMatrix::from_fn(active.len(), active.len(), |i, j| model.cov.r_nn[(active[i], active[j])]);
            for (i, &k) in active.iter().enumerate() {
                r[(i, i)] += Complex64::new(quant_noise_variance(model.amplitudes[k], rates[k]), 0.0);
            }
            let cons = model.constraints.restrict(&active)?;
            let sol = lcmv(&r, &cons)?;
            let f = cons.f();
            let mut transmitted = Vec::with_capacity(frames * active.len());
            let mut output = Vec::with_capacity(frames);
            let mut desired = Vec::with_capacity(frames);
            let mut noise_acc = 0.0;
            let mut e = CMatrix::zeros(active.len(), 1);
            let mut q = rdbf_core::CVector::zeros(active.len());
            for l in 0..frames {
                for (i, &k) in active.iter().enumerate() {
                    let v = y.get(bin, l, k);
                    let vq = quantize_complex(v, model.amplitudes[k], rates[k] as u32);
                    q[i] = vq;
                    e[(i, 0)] = vq - sig.target.get(bin, l, k);
                }
                transmitted.extend(q.iter().copied());
                output.push(sol.weights.apply(&q));
                noise_acc += sol.weights.w.dotc(&e.column(0)).norm_sqr();
                desired.push((0..ni).map(|i| f[i].conj() * sig.sources.get(bin, l, i)).sum());
            }
            let report = BinReport {
                bin,
                frequency: spec.bin_frequency(bin, s.scene.sample_rate),
                input_noise: model.cov.r_nn[(reference, reference)].re,
                output_noise_model: sol.noise_power,
                output_noise_measured: noise_acc / frames as f64,
                bound,
            };
            debug_assert!((passed_power(&sol.weights, &r) - sol.noise_power).abs() <= 1e-6 * sol.noise_power.max(1e-300));
            Ok(BinOut {
                report,
                transmitted,
                output,
                desired,
            })
        })
        .collect::<Result<_>>()?;

    let mut tx = Spectrogram::for_signal(spec, y.signal_len, active.len());
    let mut out = Spectrogram::for_signal(spec, y.signal_len, 1);
    let mut want = Spectrogram::for_signal(spec, y.signal_len, 1);
    let (mut err, mut norm) = (0.0, 0.0);
    for (bin, o) in outs.iter().enumerate() {
        tx.bin_slice_mut(bin).copy_from_slice(&o.transmitted);
        out.bin_slice_mut(bin).copy_from_slice(&o.output);
        want.bin_slice_mut(bin).copy_from_slice(&o.desired);
        for (a, b) in o.output.iter().zip(&o.desired) {
            err += (a - b).norm_sqr();
            norm += b.norm_sqr();
        }
    }
    let report = DenoiseReport {
        rates: rates.to_vec(),
        reference,
        bins: outs.into_iter().map(|o| o.report).collect(),
        distortion: if norm > 0.0 { (err / norm).sqrt() } else { 0.0 },
    };
    let signals = DenoiseSignals {
        reference: stft_synthesize(&y.select_channels(&[reference]), &spec)?.remove(0),
        transmitted: stft_synthesize(&tx, &spec)?,
        output: stft_synthesize(&out, &spec)?.remove(0),
        desired: stft_synthesize(&want, &spec)?.remove(0),
    };
    Ok((report, signals))
}

/// Writes `reference.wav`, `transmitted.wav`, `output.wav`, `desired.wav`
/// (32-bit float) and `denoise.csv` into `dir`.
pub fn write_denoise(dir: &Path, report: &DenoiseReport, signals: &DenoiseSignals, sample_rate: f64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let fs = sample_rate.round() as u32;
    write_wav(&dir.join("reference.wav"), std::slice::from_ref(&signals.reference), fs, Pcm::Float32)?;
    write_wav(&dir.join("transmitted.wav"), &signals.transmitted, fs, Pcm::Float32)?;
    write_wav(&dir.join("output.wav"), std::slice::from_ref(&signals.output), fs, Pcm::Float32)?;
    write_wav(&dir.join("desired.wav"), std::slice::from_ref(&signals.desired), fs, Pcm::Float32)?;
    std::fs::write(dir.join("denoise.csv"), report.to_csv()?)?;
    Ok(())
}
