//! Medium-frame Fourier harmonic analysis for recovering a missing second pitch.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::{FrameSpec, Waveform};
use crate::error::{Error, Result};
use crate::peripheral::LagRange;
use crate::scalar::Real;
use crate::tracks::PitchTrackPair;

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicParams<T: Real = f64> {
    pub frame_len_ms: T,
    pub max_freq: T,
    pub band_width: T,
    pub peak_ratio: T,
    pub neighbor_tol: T,
    pub order_ratio: T,
    /// Divisors `d` of the known pitch whose `F / d` is removed with the harmonics.
    pub subharmonics: Vec<u32>,
    pub harmonic_match_tol: T,
    /// FFT length is at least this many times the frame length.
    pub zero_pad: usize,
    /// Peaks this far below the frame's strongest peak (dB) are ignored.
    pub floor_db: T,
}

impl<T: Real> Default for HarmonicParams<T> {
    fn default() -> Self {
        Self {
            frame_len_ms: T::lit(50.0),
            max_freq: T::lit(4000.0),
            band_width: T::lit(200.0),
            peak_ratio: T::lit(0.2),
            neighbor_tol: T::lit(8.0),
            order_ratio: T::lit(0.9),
            subharmonics: vec![2, 4, 8],
            harmonic_match_tol: T::lit(3.0),
            zero_pad: 8,
            floor_db: T::lit(-80.0),
        }
    }
}

impl<T: Real> HarmonicParams<T> {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        let nyq = T::from_u32(sample_rate).unwrap() / T::lit(2.0);
        if !(self.peak_ratio > T::zero() && self.peak_ratio < T::one()) {
            return bad("peak_ratio must lie in (0, 1)");
        }
        if !(self.order_ratio > T::zero() && self.order_ratio <= T::one()) {
            return bad("order_ratio must lie in (0, 1]");
        }
        if !(self.max_freq < nyq) {
            return Err(Error::Nyquist(format!("max_freq {} must be below fs/2 = {}", self.max_freq, nyq)));
        }
        if !(self.frame_len_ms > T::zero() && self.band_width > T::zero() && self.harmonic_match_tol > T::zero()) {
            return bad("frame length, band width and match tolerance must be > 0");
        }
        if !(self.neighbor_tol >= T::zero()) || self.zero_pad == 0 || self.subharmonics.contains(&0) {
            return bad("neighbor_tol >= 0, zero_pad >= 1 and nonzero subharmonic divisors required");
        }
        Ok(())
    }

    pub fn frame_len_samples(&self, sample_rate: u32) -> usize {
        crate::scalar::round_usize(self.frame_len_ms * T::from_u32(sample_rate).unwrap() / T::lit(1000.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak<T: Real = f64> {
    pub freq: T,
    pub mag: T,
}

/// Spectral peaks sorted by strictly increasing frequency.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicVector<T: Real = f64> {
    pub peaks: Vec<SpectralPeak<T>>,
}

impl<T: Real> HarmonicVector<T> {
    pub fn from_peaks(mut peaks: Vec<SpectralPeak<T>>) -> Self {
        peaks.sort_by(|a, b| a.freq.partial_cmp(&b.freq).unwrap_or(std::cmp::Ordering::Equal));
        peaks.dedup_by(|a, b| a.freq == b.freq);
        Self { peaks }
    }

    /// Peaks with unit magnitude at the given frequencies.
    pub fn from_freqs(freqs: &[T]) -> Self {
        Self::from_peaks(freqs.iter().map(|&freq| SpectralPeak { freq, mag: T::one() }).collect())
    }

    pub fn freqs(&self) -> Vec<T> {
        self.peaks.iter().map(|p| p.freq).collect()
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    fn nearest(&self, f: T) -> Option<&SpectralPeak<T>> {
        self.peaks
            .iter()
            .min_by(|a, b| (a.freq - f).abs().partial_cmp(&(b.freq - f).abs()).unwrap_or(std::cmp::Ordering::Equal))
    }
}

/// Hann-windowed, zero-padded magnitude spectrum analyser for medium frames.
pub struct HarmonicAnalyzer<T: Real> {
    sample_rate: u32,
    frame_len: usize,
    fft_len: usize,
    window: Vec<T>,
    fft: Arc<dyn Fft<T>>,
    params: HarmonicParams<T>,
}

impl<T: Real> HarmonicAnalyzer<T> {
    pub fn new(sample_rate: u32, params: HarmonicParams<T>) -> Result<Self> {
        params.validate(sample_rate)?;
        let frame_len = params.frame_len_samples(sample_rate).max(2);
        let fft_len = (frame_len * params.zero_pad).next_power_of_two();
        let n = T::from_usize_lossy(frame_len);
        let window = (0..frame_len)
            .map(|i| T::lit(0.5) - T::lit(0.5) * (T::TAU() * (T::from_usize_lossy(i) + T::lit(0.5)) / n).cos())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(fft_len);
        Ok(Self { sample_rate, frame_len, fft_len, window, fft, params })
    }

    pub fn params(&self) -> &HarmonicParams<T> {
        &self.params
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    /// `frame_len` samples centred on `center`, zero outside the signal.
    pub fn medium_frame(&self, x: &[T], center: usize) -> Vec<T> {
        let start = center as isize - (self.frame_len / 2) as isize;
        (0..self.frame_len)
            .map(|i| {
                let k = start + i as isize;
                if k >= 0 && (k as usize) < x.len() { x[k as usize] } else { T::zero() }
            })
            .collect()
    }

    /// Interpolated local maxima of the magnitude spectrum below Nyquist.
    pub fn spectral_peaks(&self, frame: &[T]) -> Vec<SpectralPeak<T>> {
        let mut buf: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); self.fft_len];
        for (b, (&x, &w)) in buf.iter_mut().zip(frame.iter().zip(&self.window)) {
            b.re = x * w;
        }
        self.fft.process(&mut buf);
        let half = self.fft_len / 2;
        let mag: Vec<T> = buf[..=half].iter().map(|c| c.norm()).collect();
        let peak = mag.iter().fold(T::zero(), |m, &v| m.max(v));
        if !(peak > T::zero()) {
            return Vec::new();
        }
        let floor = peak * T::lit(10.0).powf(self.params.floor_db / T::lit(20.0));
        // A peak must dominate one raw-resolution bin on each side, which rejects window sidelobes.
        let radius = (self.fft_len / self.frame_len).max(1);
        let bin_hz = T::from_u32(self.sample_rate).unwrap() / T::from_usize_lossy(self.fft_len);
        let mut out = Vec::new();
        for k in 1..half {
            let v = mag[k];
            if v < floor || !(v > mag[k - 1] && v >= mag[k + 1]) {
                continue;
            }
            let lo = k.saturating_sub(radius);
            let hi = (k + radius).min(half);
            if (lo..=hi).any(|j| j != k && (mag[j] > v || (mag[j] == v && j < k))) {
                continue;
            }
            let (a, b, c) = (mag[k - 1].ln(), v.ln(), mag[k + 1].ln());
            let den = a - b - b + c;
            let d = if den < T::zero() { T::lit(0.5) * (a - c) / den } else { T::zero() };
            out.push(SpectralPeak {
                freq: (T::from_usize_lossy(k) + d) * bin_hz,
                mag: (b - T::lit(0.25) * (a - c) * d).exp(),
            });
        }
        out
    }

    /// Band-selected peaks of one medium frame.
    pub fn band_peaks(&self, frame: &[T]) -> HarmonicVector<T> {
        select_band_peaks(&self.spectral_peaks(frame), &self.params)
    }
}

/// Drop peaks above `max_freq`, then keep peaks reaching `peak_ratio` of their band's strongest.
pub fn select_band_peaks<T: Real>(peaks: &[SpectralPeak<T>], p: &HarmonicParams<T>) -> HarmonicVector<T> {
    let kept: Vec<SpectralPeak<T>> = peaks.iter().copied().filter(|q| q.freq <= p.max_freq && q.freq >= T::zero()).collect();
    let band = |q: &SpectralPeak<T>| (q.freq / p.band_width).floor().to_i64().unwrap_or(0);
    let mut out = Vec::new();
    for q in &kept {
        let b = band(q);
        let top = kept.iter().filter(|r| band(r) == b).fold(T::zero(), |m, r| m.max(r.mag));
        if q.mag >= p.peak_ratio * top {
            out.push(*q);
        }
    }
    HarmonicVector::from_peaks(out)
}

/// One-shot [`HarmonicAnalyzer::band_peaks`].
pub fn band_peaks<T: Real>(frame: &[T], sample_rate: u32, p: &HarmonicParams<T>) -> Result<HarmonicVector<T>> {
    Ok(HarmonicAnalyzer::new(sample_rate, p.clone())?.band_peaks(frame))
}

/// Remove the peaks explained by a known pitch `f`: its multiples and `f / d` subharmonics.
pub fn remove_known_harmonics<T: Real>(v: &HarmonicVector<T>, f: T, p: &HarmonicParams<T>) -> HarmonicVector<T> {
    let tol = p.harmonic_match_tol;
    let kmax = (p.max_freq / f).floor().to_usize().unwrap_or(0).max(1);
    let mut targets: Vec<T> = (1..=kmax).map(|k| T::from_usize_lossy(k) * f).collect();
    targets.extend(p.subharmonics.iter().map(|&d| f / T::from_u32(d).unwrap()));
    HarmonicVector {
        peaks: v.peaks.iter().copied().filter(|q| !targets.iter().any(|&t| (q.freq - t).abs() <= tol)).collect(),
    }
}

/// Number of integer multiples of `cand` matched by a peak, and their mean absolute deviation (Hz).
pub fn harmonic_order<T: Real>(v: &HarmonicVector<T>, cand: T, p: &HarmonicParams<T>) -> (usize, T) {
    let kmax = (p.max_freq / cand).floor().to_usize().unwrap_or(0);
    let mut order = 0usize;
    let mut dev = T::zero();
    for k in 1..=kmax {
        let ideal = T::from_usize_lossy(k) * cand;
        if let Some(q) = v.nearest(ideal) {
            let d = (q.freq - ideal).abs();
            if d <= p.harmonic_match_tol {
                order += 1;
                dev += d;
            }
        }
    }
    let mean = if order > 0 { dev / T::from_usize_lossy(order) } else { T::zero() };
    (order, mean)
}

/// The other talker's pitch among peaks near `f_prev` or `f_next`.
pub fn second_pitch<T: Real>(v: &HarmonicVector<T>, f_prev: Option<T>, f_next: Option<T>, p: &HarmonicParams<T>) -> Option<T> {
    let near = |f: T| [f_prev, f_next].into_iter().flatten().any(|g| (f - g).abs() <= p.neighbor_tol);
    let cands: Vec<(T, usize, T)> = v
        .peaks
        .iter()
        .filter(|q| near(q.freq))
        .map(|q| {
            let (order, dev) = harmonic_order(v, q.freq, p);
            (q.freq, order, dev)
        })
        .collect();
    let max_order = cands.iter().map(|c| c.1).max()?;
    let need = p.order_ratio * T::from_usize_lossy(max_order);
    cands
        .into_iter()
        .filter(|c| T::from_usize_lossy(c.1) >= need)
        .fold(None, |best: Option<(T, usize, T)>, c| match best {
            Some(b) if b.2 <= c.2 => Some(b),
            _ => Some(c),
        })
        .map(|c| c.0)
}

/// Nearest pitched lags before and after frame `m` on one track, scanning the whole track.
pub fn neighbor_lags(track: &[Option<usize>], m: usize) -> (Option<usize>, Option<usize>) {
    let prev = track[..m].iter().rev().find_map(|&x| x);
    let next = track[m + 1..].iter().find_map(|&x| x);
    (prev, next)
}

/// Fill the empty track in every frame that has exactly one pitch.
///
/// Neighbour pitches are read from the input tracks only, so frames are independent.
pub fn fill_second_pitches<T: Real>(
    tracks: &PitchTrackPair,
    mixture: &Waveform<T>,
    frames: &FrameSpec<T>,
    range: LagRange,
    p: &HarmonicParams<T>,
) -> Result<PitchTrackPair> {
    if mixture.sample_rate() != tracks.sample_rate {
        return Err(Error::SampleRateMismatch(mixture.sample_rate(), tracks.sample_rate));
    }
    let fs = tracks.sample_rate;
    let analyzer = HarmonicAnalyzer::new(fs, p.clone())?;
    let fs_t = T::from_u32(fs).unwrap();
    let hz = |lag: usize| fs_t / T::from_usize_lossy(lag);
    let found: Vec<(usize, usize, usize)> = (0..tracks.frame_count())
        .into_par_iter()
        .filter_map(|m| {
            let (known, empty) = match (tracks.track1[m], tracks.track2[m]) {
                (Some(a), None) => (a, 1),
                (None, Some(b)) => (b, 0),
                _ => return None,
            };
            let (prev, next) = neighbor_lags(tracks.track(empty), m);
            if prev.is_none() && next.is_none() {
                return None;
            }
            let frame = analyzer.medium_frame(mixture.samples(), frames.frame_center(m, fs));
            let v = remove_known_harmonics(&analyzer.band_peaks(&frame), hz(known), p);
            let f = second_pitch(&v, prev.map(hz), next.map(hz), p)?;
            let lag = crate::scalar::round_usize(fs_t / f);
            (range.contains(lag) && lag != known).then_some((m, empty, lag))
        })
        .collect();
    let mut out = tracks.clone();
    for (m, empty, lag) in found {
        if empty == 0 {
            out.track1[m] = Some(lag);
        } else {
            out.track2[m] = Some(lag);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::synth_harmonic;

    fn tone(f: f64, fs: u32, n: usize) -> Vec<f64> {
        (0..n).map(|i| (std::f64::consts::TAU * f * i as f64 / fs as f64).sin()).collect()
    }

    #[test]
    fn single_tone_single_peak() {
        let p = HarmonicParams::default();
        let a = HarmonicAnalyzer::new(25_000, p).unwrap();
        let v = a.band_peaks(&tone(1000.0, 25_000, a.frame_len()));
        assert_eq!(v.len(), 1, "{:?}", v);
        assert!((v.peaks[0].freq - 1000.0).abs() < 2.0);
        assert!(a.band_peaks(&tone(5000.0, 25_000, a.frame_len())).is_empty());
    }

    #[test]
    fn band_ratio_rule() {
        let p = HarmonicParams::<f64>::default();
        let peaks = [SpectralPeak { freq: 410.0, mag: 10.0 }, SpectralPeak { freq: 450.0, mag: 1.9 }, SpectralPeak { freq: 650.0, mag: 1.9 }];
        assert_eq!(select_band_peaks(&peaks, &p).freqs(), vec![410.0, 650.0]);
    }

    #[test]
    fn removal_examples() {
        let p = HarmonicParams::<f64>::default();
        let v = HarmonicVector::from_freqs(&[120.0, 190.0, 240.0, 380.0]);
        assert_eq!(remove_known_harmonics(&v, 120.0, &p).freqs(), vec![190.0, 380.0]);
        let v = HarmonicVector::from_freqs(&[60.0, 190.0]);
        assert_eq!(remove_known_harmonics(&v, 120.0, &p).freqs(), vec![190.0]);
        let all: Vec<f64> = (1..=33).map(|k| 120.0 * k as f64).collect();
        assert!(remove_known_harmonics(&HarmonicVector::from_freqs(&all), 120.0, &p).is_empty());
    }

    #[test]
    fn second_pitch_from_mixture_frame() {
        let fs = 25_000;
        let a = synth_harmonic::<f64>(120.0, 30, 0.2, fs, 0.9).unwrap();
        let b = synth_harmonic::<f64>(190.0, 20, 0.2, fs, 0.9).unwrap();
        let x: Vec<f64> = a.samples().iter().zip(b.samples()).map(|(p, q)| p + q).collect();
        let p = HarmonicParams::default();
        let an = HarmonicAnalyzer::new(fs, p.clone()).unwrap();
        let v = remove_known_harmonics(&an.band_peaks(&an.medium_frame(&x, 2500)), 120.0, &p);
        let f = second_pitch(&v, Some(188.0), None, &p).unwrap();
        assert!((f - 190.0).abs() < 2.0, "{f}");
        assert_eq!(second_pitch(&v, Some(300.0), Some(330.0), &p), None);
        assert_eq!(second_pitch(&v, None, None, &p), None);
    }

    #[test]
    fn neighbor_scan() {
        let t = [None, Some(100), None, None, Some(120), None];
        assert_eq!(neighbor_lags(&t, 2), (Some(100), Some(120)));
        assert_eq!(neighbor_lags(&t, 0), (None, Some(100)));
        assert_eq!(neighbor_lags(&t, 5), (Some(120), None));
    }
}
