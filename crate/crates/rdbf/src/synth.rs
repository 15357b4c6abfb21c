//! Synthetic recordings in the STFT domain.
//!
//! Every bin draws its own circular Gaussian source, interferer and
//! self-noise coefficients (stationary, flat PSDs) and mixes them through
//! the free-field transfer functions of that bin. Bin `ω` uses ChaCha8
//! stream `ω` of the seed, so the result does not depend on how bins are
//! scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rdbf_core::scene::{build_freefield_atf, AtfMatrix, SceneConfig};
use rdbf_core::Complex64;

use crate::stft::{FrameSpec, Spectrogram};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Synthesized {
    /// Target source coefficients, one channel per target.
    pub sources: Spectrogram,
    /// Target component `A s` at every sensor.
    pub target: Spectrogram,
    /// Interference plus self noise `B u + v` at every sensor.
    pub noise: Spectrogram,
}

impl Synthesized {
    /// `y = x + n`.
    pub fn mixture(&self) -> Spectrogram {
        let mut y = self.target.clone();
        for bin in 0..y.bins {
            let n = self.noise.bin_slice(bin);
            for (v, e) in y.bin_slice_mut(bin).iter_mut().zip(n) {
                *v += e;
            }
        }
        y
    }
}

/// Transfer functions at every bin center.
pub fn bin_atfs(scene: &SceneConfig, spec: &FrameSpec) -> Result<Vec<AtfMatrix>> {
    (0..spec.num_bins()).map(|b| bin_atf(scene, spec, b)).collect()
}

/// Free-field ATF at a bin center. DC and Nyquist coefficients of a real
/// signal are real, so there only the real part of the response survives.
pub fn bin_atf(scene: &SceneConfig, spec: &FrameSpec, bin: usize) -> Result<AtfMatrix> {
    let mut atf = build_freefield_atf(scene, spec.bin_frequency(bin, scene.sample_rate))?;
    if bin == 0 || bin + 1 == spec.num_bins() {
        atf.a.apply(|z| z.im = 0.0);
        atf.b.apply(|z| z.im = 0.0);
    }
    Ok(atf)
}

/// Circular complex Gaussian of power `p`; real (still of power `p`) when
/// `real` is set, as DC and Nyquist coefficients of a real signal are.
fn draw(rng: &mut ChaCha8Rng, p: f64, real: bool) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    if real {
        return Complex64::new(re * p.sqrt(), 0.0);
    }
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * (p / 2.0).sqrt()
}

/// Signals of `duration` seconds for `scene`, with `atfs` one per bin.
pub fn synthesize_signals(
    scene: &SceneConfig,
    atfs: &[AtfMatrix],
    spec: &FrameSpec,
    duration: f64,
    seed: u64,
) -> Result<Synthesized> {
    if !(duration > 0.0) {
        return Err(Error::Config(format!("duration {duration} must be positive")));
    }
    if atfs.len() != spec.num_bins() {
        return Err(Error::Config(format!("expected {} ATFs, got {}", spec.num_bins(), atfs.len())));
    }
    let len = ((duration * scene.sample_rate).round() as usize).max(spec.frame_len);
    let m = scene.num_sensors();
    let (ni, nj) = (scene.target_positions.len(), scene.interferer_positions.len());
    let mut sources = Spectrogram::for_signal(*spec, len, ni);
    let mut target = Spectrogram::for_signal(*spec, len, m);
    let mut noise = Spectrogram::for_signal(*spec, len, m);
    let frames = target.frames;
    let nyquist = spec.num_bins() - 1;

    let per_bin: Vec<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> = (0..spec.num_bins())
        .into_par_iter()
        .map(|bin| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(bin as u64);
            let real = bin == 0 || bin == nyquist;
            let atf = &atfs[bin];
            let mut s_out = Vec::with_capacity(frames * ni);
            let mut x_out = Vec::with_capacity(frames * m);
            let mut n_out = Vec::with_capacity(frames * m);
            for _ in 0..frames {
                let s: Vec<Complex64> = scene.target_psd.iter().map(|&p| draw(&mut rng, p, real)).collect();
                let u: Vec<Complex64> = scene.interferer_psd.iter().map(|&p| draw(&mut rng, p, real)).collect();
                for k in 0..m {
                    let x: Complex64 = (0..ni).map(|i| atf.a[(k, i)] * s[i]).sum();
                    let b: Complex64 = (0..nj).map(|j| atf.b[(k, j)] * u[j]).sum();
                    x_out.push(if real { Complex64::new(x.re, 0.0) } else { x });
                    let v = draw(&mut rng, scene.self_noise_psd, real);
                    n_out.push(if real { Complex64::new(b.re, 0.0) } else { b } + v);
                }
                s_out.extend(s);
            }
            (s_out, x_out, n_out)
        })
        .collect();
    for (bin, (s, x, n)) in per_bin.into_iter().enumerate() {
        sources.bin_slice_mut(bin).copy_from_slice(&s);
        target.bin_slice_mut(bin).copy_from_slice(&x);
        noise.bin_slice_mut(bin).copy_from_slice(&n);
    }
    Ok(Synthesized { sources, target, noise })
}
