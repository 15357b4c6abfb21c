//! Square-root Hann STFT with 50% overlap.
//!
//! The signal is padded with `hop` zeros in front and enough zeros at the
//! end that every input sample lies under exactly two frames. Since
//! `w[n]² + w[n + hop]² = 1`, analysis followed by windowed overlap-add
//! reconstructs the whole input.

use std::f64::consts::PI;
use std::sync::Arc;

use rdbf_core::{CVector, Complex64};
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::{Error, Result};

/// 20 ms at 16 kHz.
pub const DEFAULT_FRAME_LEN: usize = 320;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameSpec {
    pub frame_len: usize,
    pub hop: usize,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self::new(DEFAULT_FRAME_LEN).expect("default frame length is valid")
    }
}

impl FrameSpec {
    /// Half-overlapping frames of even length `frame_len`.
    pub fn new(frame_len: usize) -> Result<Self> {
        if frame_len < 2 || !frame_len.is_multiple_of(2) {
            return Err(Error::Config(format!("frame length {frame_len} must be even and at least 2")));
        }
        Ok(Self {
            frame_len,
            hop: frame_len / 2,
        })
    }

    pub fn fft_len(&self) -> usize {
        self.frame_len
    }

    pub fn num_bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    /// Center frequency of `bin` in Hz.
    pub fn bin_frequency(&self, bin: usize, sample_rate: f64) -> f64 {
        bin as f64 * sample_rate / self.frame_len as f64
    }

    /// Bin whose center is closest to `frequency`.
    pub fn nearest_bin(&self, frequency: f64, sample_rate: f64) -> usize {
        let b = (frequency * self.frame_len as f64 / sample_rate).round();
        (b.max(0.0) as usize).min(self.num_bins() - 1)
    }

    /// Periodic square-root Hann window, `sin(π n / N)`.
    pub fn window(&self) -> Vec<f64> {
        let n = self.frame_len as f64;
        (0..self.frame_len).map(|i| (PI * i as f64 / n).sin()).collect()
    }

    /// Frames needed to cover `len` samples.
    pub fn num_frames(&self, len: usize) -> usize {
        len.div_ceil(self.hop) + 1
    }
}

/// Complex STFT coefficients indexed `(bin, frame, channel)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    pub spec: FrameSpec,
    pub bins: usize,
    pub frames: usize,
    pub channels: usize,
    /// Length of the time signal this was computed from.
    pub signal_len: usize,
    data: Vec<Complex64>,
}

impl Spectrogram {
    pub fn zeros(spec: FrameSpec, frames: usize, channels: usize, signal_len: usize) -> Self {
        let bins = spec.num_bins();
        Self {
            spec,
            bins,
            frames,
            channels,
            signal_len,
            data: vec![Complex64::new(0.0, 0.0); bins * frames * channels],
        }
    }

    /// Empty spectrogram shaped for a signal of `signal_len` samples.
    pub fn for_signal(spec: FrameSpec, signal_len: usize, channels: usize) -> Self {
        Self::zeros(spec, spec.num_frames(signal_len), channels, signal_len)
    }

    fn idx(&self, bin: usize, frame: usize, ch: usize) -> usize {
        (bin * self.frames + frame) * self.channels + ch
    }

    pub fn get(&self, bin: usize, frame: usize, ch: usize) -> Complex64 {
        self.data[self.idx(bin, frame, ch)]
    }

    pub fn set(&mut self, bin: usize, frame: usize, ch: usize, v: Complex64) {
        let i = self.idx(bin, frame, ch);
        self.data[i] = v;
    }

    /// All channels of one time-frequency point.
    pub fn snapshot(&self, bin: usize, frame: usize) -> CVector {
        let i = self.idx(bin, frame, 0);
        CVector::from_column_slice(&self.data[i..i + self.channels])
    }

    pub fn set_snapshot(&mut self, bin: usize, frame: usize, y: &[Complex64]) {
        let i = self.idx(bin, frame, 0);
        self.data[i..i + self.channels].copy_from_slice(y);
    }

    /// Coefficients of one bin, frame-major then channel.
    pub fn bin_slice(&self, bin: usize) -> &[Complex64] {
        let n = self.frames * self.channels;
        &self.data[bin * n..(bin + 1) * n]
    }

    pub fn bin_slice_mut(&mut self, bin: usize) -> &mut [Complex64] {
        let n = self.frames * self.channels;
        &mut self.data[bin * n..(bin + 1) * n]
    }

    /// Keeps only the listed channels, in order.
    pub fn select_channels(&self, channels: &[usize]) -> Self {
        let mut out = Self::zeros(self.spec, self.frames, channels.len(), self.signal_len);
        for bin in 0..self.bins {
            for l in 0..self.frames {
                for (c, &k) in channels.iter().enumerate() {
                    out.set(bin, l, c, self.get(bin, l, k));
                }
            }
        }
        out
    }
}

struct Plans {
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

fn plans(n: usize) -> Plans {
    let mut planner = RealFftPlanner::<f64>::new();
    Plans {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    }
}

/// Analyzes each channel of `signal` (all of equal length).
pub fn stft_analyze(signal: &[Vec<f64>], spec: &FrameSpec) -> Result<Spectrogram> {
    let channels = signal.len();
    let len = signal.first().map_or(0, Vec::len);
    if channels == 0 || signal.iter().any(|s| s.len() != len) {
        return Err(Error::Config("channels must be non-empty and of equal length".into()));
    }
    if len < spec.frame_len {
        return Err(Error::Config(format!(
            "signal of {len} samples is shorter than one frame ({})",
            spec.frame_len
        )));
    }
    let window = spec.window();
    let fft = plans(spec.fft_len()).forward;
    let mut out = Spectrogram::for_signal(*spec, len, channels);
    let mut frame = fft.make_input_vec();
    let mut bins = fft.make_output_vec();
    for (ch, x) in signal.iter().enumerate() {
        for l in 0..out.frames {
            // frame l covers padded samples [l·hop, l·hop + N), i.e. input
            // samples starting at l·hop − hop
            let start = (l * spec.hop) as isize - spec.hop as isize;
            for (n, v) in frame.iter_mut().enumerate() {
                let i = start + n as isize;
                *v = if i >= 0 && (i as usize) < len {
                    x[i as usize] * window[n]
                } else {
                    0.0
                };
            }
            fft.process(&mut frame, &mut bins)
                .map_err(|e| Error::Config(format!("fft failed: {e}")))?;
            for (b, v) in bins.iter().enumerate() {
                out.set(b, l, ch, *v);
            }
        }
    }
    Ok(out)
}

/// Windowed overlap-add inverse of [`stft_analyze`]. Returns one signal of
/// `signal_len` samples per channel.
pub fn stft_synthesize(tensor: &Spectrogram, spec: &FrameSpec) -> Result<Vec<Vec<f64>>> {
    if tensor.spec != *spec || tensor.bins != spec.num_bins() {
        return Err(Error::Config("spectrogram was produced with a different frame spec".into()));
    }
    let window = spec.window();
    let n = spec.fft_len();
    let ifft = plans(n).inverse;
    let padded = (tensor.frames - 1) * spec.hop + n;
    let mut out = Vec::with_capacity(tensor.channels);
    let mut bins = ifft.make_input_vec();
    let mut frame = ifft.make_output_vec();
    for ch in 0..tensor.channels {
        let mut acc = vec![0.0; padded];
        for l in 0..tensor.frames {
            for (b, v) in bins.iter_mut().enumerate() {
                *v = tensor.get(b, l, ch);
            }
            // the real inverse requires real DC and Nyquist terms
            bins[0].im = 0.0;
            bins[n / 2].im = 0.0;
            ifft.process(&mut bins, &mut frame)
                .map_err(|e| Error::Config(format!("inverse fft failed: {e}")))?;
            let start = l * spec.hop;
            for (i, v) in frame.iter().enumerate() {
                acc[start + i] += v * window[i] / n as f64;
            }
        }
        out.push(acc[spec.hop..spec.hop + tensor.signal_len].to_vec());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn window_is_power_complementary() {
        let spec = FrameSpec::default();
        let w = spec.window();
        for n in 0..spec.hop {
            assert!((w[n] * w[n] + w[n + spec.hop] * w[n + spec.hop] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_signal_gives_zero_tensor() {
        let spec = FrameSpec::default();
        let x = stft_analyze(&[vec![0.0; 1000]], &spec).unwrap();
        assert!((0..x.bins).all(|b| x.bin_slice(b).iter().all(|v| v.norm() == 0.0)));
        let y = stft_synthesize(&Spectrogram::for_signal(spec, 1000, 1), &spec).unwrap();
        assert!(y[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impulse_at_frame_center_is_flat() {
        let spec = FrameSpec::default();
        // frame 1 starts at input sample 0, so its center is sample N/2
        let mut x = vec![0.0; 2 * spec.frame_len];
        x[spec.frame_len / 2] = 1.0;
        let s = stft_analyze(&[x], &spec).unwrap();
        let peak = spec.window()[spec.frame_len / 2];
        for b in 0..s.bins {
            assert!((s.get(b, 1, 0).norm() - peak).abs() < 1e-12);
        }
    }

    #[test]
    fn tone_at_bin_center_concentrates() {
        let spec = FrameSpec::default();
        let k = 17;
        let x: Vec<f64> = (0..4000)
            .map(|n| (2.0 * PI * k as f64 * n as f64 / spec.frame_len as f64).cos())
            .collect();
        let s = stft_analyze(std::slice::from_ref(&x), &spec).unwrap();
        let l = 5;
        let total: f64 = (0..s.bins).map(|b| s.get(b, l, 0).norm_sqr()).sum();
        // a sqrt-Hann window leaks into the two neighbours of the tone bin
        let near: f64 = (k - 1..=k + 1).map(|b| s.get(b, l, 0).norm_sqr()).sum();
        assert!(near / total > 0.99, "{}", near / total);
        // direct DFT of the windowed frame as the oracle
        let w = spec.window();
        let n = spec.frame_len;
        let start = l * spec.hop - spec.hop;
        let expected: Complex64 = (0..n)
            .map(|i| {
                let ph = -2.0 * PI * (k * i) as f64 / n as f64;
                Complex64::from_polar(x[start + i] * w[i], ph)
            })
            .sum();
        assert!((s.get(k, l, 0) - expected).norm() < 1e-9 * expected.norm());
    }

    #[test]
    fn parseval_per_frame() {
        let spec = FrameSpec::default();
        let x = noise(2000, 1);
        let s = stft_analyze(std::slice::from_ref(&x), &spec).unwrap();
        let w = spec.window();
        let n = spec.frame_len;
        for l in 1..s.frames - 1 {
            let start = l * spec.hop - spec.hop;
            let time: f64 = (0..n)
                .map(|i| x.get(start + i).map_or(0.0, |v| (v * w[i]).powi(2)))
                .sum();
            let mut freq = s.get(0, l, 0).norm_sqr() + s.get(n / 2, l, 0).norm_sqr();
            freq += 2.0 * (1..n / 2).map(|b| s.get(b, l, 0).norm_sqr()).sum::<f64>();
            freq /= n as f64;
            assert!((time - freq).abs() <= 1e-10 * time);
        }
    }

    #[test]
    fn roundtrip_white_noise() {
        let spec = FrameSpec::default();
        let x = vec![noise(5000, 2), noise(5000, 3)];
        let y = stft_synthesize(&stft_analyze(&x, &spec).unwrap(), &spec).unwrap();
        for (a, b) in x.iter().zip(&y) {
            let err = a.iter().zip(b).fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()));
            assert!(err <= 1e-10, "{err}");
        }
    }

    #[test]
    fn roundtrip_shaped_signal_snr() {
        // low-passed noise stands in for a speech-like spectrum
        let spec = FrameSpec::default();
        let raw = noise(8000, 4);
        let mut x = vec![0.0; raw.len()];
        for n in 1..raw.len() {
            x[n] = 0.95 * x[n - 1] + raw[n];
        }
        let y = stft_synthesize(&stft_analyze(&[x.clone()], &spec).unwrap(), &spec).unwrap();
        let sig: f64 = x.iter().map(|v| v * v).sum();
        let err: f64 = x.iter().zip(&y[0]).map(|(a, b)| (a - b).powi(2)).sum();
        assert!(10.0 * (sig / err).log10() >= 180.0);
    }

    #[test]
    fn rejects_short_signal_and_spec_mismatch() {
        let spec = FrameSpec::default();
        assert!(stft_analyze(&[vec![0.0; 100]], &spec).is_err());
        let s = stft_analyze(&[vec![0.0; 1000]], &spec).unwrap();
        assert!(stft_synthesize(&s, &FrameSpec::new(256).unwrap()).is_err());
        assert!(FrameSpec::new(321).is_err());
    }

    #[test]
    fn bin_of_one_kilohertz() {
        let spec = FrameSpec::default();
        assert_eq!(spec.nearest_bin(1000.0, 16_000.0), 20);
        assert_eq!(spec.bin_frequency(20, 16_000.0), 1000.0);
    }
}
