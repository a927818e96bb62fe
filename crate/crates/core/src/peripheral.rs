//! Auditory periphery: gammatone filterbank, Meddis hair-cell transduction,
//! envelope extraction, running correlograms and the summary autocorrelation.
//!
//! Signals are indexed absolutely over the whole utterance. Frame `m` of a
//! correlogram ends at sample `m * shift + W - 1`; lagged reads that precede the
//! first sample are zero.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::{FrameSpec, Waveform};
use crate::error::{Error, Result};
use crate::scalar::{round_usize, Real};

/// Equivalent rectangular bandwidth (Glasberg & Moore) in Hz.
pub fn erb<T: Real>(f: T) -> T {
    T::lit(24.7) * (T::lit(4.37e-3) * f + T::one())
}

/// ERB-rate (number of ERBs below `f`).
pub fn erb_rate<T: Real>(f: T) -> T {
    T::lit(21.4) * (T::lit(4.37e-3) * f + T::one()).log10()
}

pub fn erb_rate_to_hz<T: Real>(e: T) -> T {
    (T::lit(10.0).powf(e / T::lit(21.4)) - T::one()) / T::lit(4.37e-3)
}

/// Geometry of the gammatone filterbank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterbankSpec<T: Real = f64> {
    pub n_channels: usize,
    pub cf_min: T,
    pub cf_max: T,
}

impl<T: Real> Default for FilterbankSpec<T> {
    fn default() -> Self {
        Self { n_channels: 128, cf_min: T::lit(21.0), cf_max: T::lit(12_500.0) }
    }
}

impl<T: Real> FilterbankSpec<T> {
    /// Checks `0 < cf_min < cf_max <= fs / 2`.
    ///
    /// The upper bound is inclusive: the default 12.5 kHz top channel sits exactly
    /// at Nyquist for 25 kHz material.
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyq = T::from_u32(sample_rate).unwrap() / T::lit(2.0);
        if self.n_channels == 0 {
            return Err(Error::InvalidParameter("filterbank needs at least one channel".into()));
        }
        if !(self.cf_min > T::zero() && self.cf_min < self.cf_max) {
            return Err(Error::InvalidParameter(format!(
                "filterbank range must satisfy 0 < cf_min < cf_max (got {} .. {})",
                self.cf_min, self.cf_max
            )));
        }
        if self.cf_max > nyq {
            return Err(Error::Nyquist(format!(
                "cf_max {} Hz exceeds Nyquist {} Hz",
                self.cf_max, nyq
            )));
        }
        Ok(())
    }

    /// Centre frequencies uniformly spaced on the ERB-rate scale, ascending.
    pub fn center_frequencies(&self) -> Vec<T> {
        if self.n_channels == 1 {
            return vec![self.cf_min];
        }
        let lo = erb_rate(self.cf_min);
        let hi = erb_rate(self.cf_max);
        let step = (hi - lo) / T::from_usize_lossy(self.n_channels - 1);
        (0..self.n_channels)
            .map(|c| match c {
                0 => self.cf_min,
                c if c + 1 == self.n_channels => self.cf_max,
                c => erb_rate_to_hz(lo + step * T::from_usize_lossy(c)),
            })
            .collect()
    }
}

/// Channel × time responses of the periphery.
///
/// `h` holds the filterbank output, replaced by the hair-cell response after
/// [`meddis_transduce`]; `h_e` holds envelopes once [`envelope`] has run.
/// `baseline` is the per-channel resting level of `h` (the spontaneous rate
/// after transduction, zero before); correlograms are taken of `h - baseline`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochleagram<T: Real = f64> {
    pub h: Vec<Vec<T>>,
    pub h_e: Vec<Vec<T>>,
    pub baseline: Vec<T>,
    pub channel_cf: Vec<T>,
    pub sample_rate: u32,
}

impl<T: Real> Cochleagram<T> {
    /// Build directly from channel signals (no envelopes, zero baseline).
    pub fn from_channels(h: Vec<Vec<T>>, channel_cf: Vec<T>, sample_rate: u32) -> Result<Self> {
        if h.len() != channel_cf.len() {
            return Err(Error::GeometryMismatch(format!(
                "{} channel signals for {} centre frequencies",
                h.len(),
                channel_cf.len()
            )));
        }
        let len = h.first().map_or(0, Vec::len);
        if h.iter().any(|row| row.len() != len) {
            return Err(Error::GeometryMismatch("channel signals differ in length".into()));
        }
        let h_e = vec![vec![T::zero(); len]; h.len()];
        let baseline = vec![T::zero(); h.len()];
        Ok(Self { h, h_e, baseline, channel_cf, sample_rate })
    }

    pub fn n_channels(&self) -> usize {
        self.h.len()
    }

    pub fn len(&self) -> usize {
        self.h.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Impulse-invariant 4th-order gammatone, realised as a complex-demodulated
/// cascade of four one-pole low-pass sections.
#[derive(Debug, Clone, Copy)]
pub struct Gammatone {
    cf: f64,
    fs: f64,
    pole: f64,
}

impl Gammatone {
    pub fn new(cf: f64, fs: f64) -> Self {
        let bandwidth = 1.019 * erb(cf);
        Self { cf, fs, pole: (-std::f64::consts::TAU * bandwidth / fs).exp() }
    }

    /// Causal filtering; unity gain at the centre frequency.
    pub fn filter<T: Real>(&self, x: &[T]) -> Vec<T> {
        let a = T::lit(self.pole);
        let g = T::one() - a;
        let two = T::lit(2.0);
        let mut state = [Complex::new(T::zero(), T::zero()); 4];
        let cycles_per_sample = self.cf / self.fs;
        x.iter()
            .enumerate()
            .map(|(n, &xn)| {
                let phase = std::f64::consts::TAU * (cycles_per_sample * n as f64).fract();
                let (s, c) = phase.sin_cos();
                let (s, c) = (T::lit(s), T::lit(c));
                let mut z = Complex::new(xn * c, -xn * s);
                for st in state.iter_mut() {
                    *st = *st * a + z * g;
                    z = *st;
                }
                two * (z.re * c - z.im * s)
            })
            .collect()
    }

    /// Zero-phase response: forward filter, time-reverse, filter, time-reverse.
    pub fn filter_zero_phase<T: Real>(&self, x: &[T]) -> Vec<T> {
        let mut y = self.filter(x);
        y.reverse();
        let mut z = self.filter(&y);
        z.reverse();
        z
    }

    /// Complex frequency response of [`Gammatone::filter`] at `f` Hz.
    pub fn response(&self, f: f64) -> Complex<f64> {
        let theta = std::f64::consts::TAU * f / self.fs;
        let omega = std::f64::consts::TAU * self.cf / self.fs;
        let g = 1.0 - self.pole;
        let lp = |w: f64| {
            let den = Complex::new(1.0, 0.0) - Complex::from_polar(self.pole, -w);
            (Complex::new(g, 0.0) / den).powi(4)
        };
        lp(theta - omega) + lp(theta + omega)
    }
}

/// Filter `w` through the gammatone bank (pre-transduction cochleagram).
pub fn gammatone_filterbank<T: Real>(w: &Waveform<T>, spec: &FilterbankSpec<T>) -> Result<Cochleagram<T>> {
    spec.validate(w.sample_rate())?;
    let cfs = spec.center_frequencies();
    let fs = w.sample_rate() as f64;
    let h: Vec<Vec<T>> = cfs
        .par_iter()
        .map(|cf| Gammatone::new(cf.as_f64(), fs).filter(w.samples()))
        .collect();
    Cochleagram::from_channels(h, cfs, w.sample_rate())
}

/// Constants of the Meddis (1986) inner hair-cell model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HairCellParams<T: Real = f64> {
    /// Permeability offset.
    pub a: T,
    /// Permeability rate constant.
    pub b: T,
    pub g: T,
    /// Replenishment rate.
    pub y: T,
    /// Loss rate.
    pub l: T,
    /// Reuptake rate.
    pub r: T,
    /// Reprocessing rate.
    pub x: T,
    /// Maximum free transmitter.
    pub m: T,
    /// Firing-rate scale.
    pub h: T,
    /// Scale from waveform amplitude to model input units.
    pub input_gain: T,
}

impl<T: Real> Default for HairCellParams<T> {
    fn default() -> Self {
        Self {
            a: T::lit(5.0),
            b: T::lit(300.0),
            g: T::lit(2000.0),
            y: T::lit(5.05),
            l: T::lit(2500.0),
            r: T::lit(6580.0),
            x: T::lit(66.31),
            m: T::one(),
            h: T::lit(50_000.0),
            input_gain: T::lit(1000.0),
        }
    }
}

impl<T: Real> HairCellParams<T> {
    /// Cleft contents at rest.
    fn resting_cleft(&self) -> T {
        let kt = self.g * self.a / (self.a + self.b);
        self.m * self.y * kt / (self.l * kt + self.y * (self.l + self.r))
    }

    /// Output of the model for silent input.
    pub fn spontaneous_rate(&self, sample_rate: u32) -> T {
        let dt = T::one() / T::from_u32(sample_rate).unwrap();
        self.h * self.resting_cleft() * dt
    }

    pub fn transduce(&self, input: &[T], sample_rate: u32) -> Vec<T> {
        let dt = T::one() / T::from_u32(sample_rate).unwrap();
        let rest_kt = self.g * self.a / (self.a + self.b);
        let mut c = self.resting_cleft();
        let mut q = c * (self.l + self.r) / rest_kt;
        let mut w = c * self.r / self.x;
        input
            .iter()
            .map(|&s| {
                let st = (s * self.input_gain + self.a).max(T::zero());
                let kt = self.g * st / (st + self.b);
                let replenish = (self.y * dt * (self.m - q)).max(T::zero());
                let eject = kt * dt * q;
                let loss = self.l * dt * c;
                let reuptake = self.r * dt * c;
                let reprocess = self.x * dt * w;
                q += replenish - eject + reprocess;
                c += eject - loss - reuptake;
                w += reuptake - reprocess;
                (self.h * c * dt).max(T::zero())
            })
            .collect()
    }
}

/// Replace `h` by the Meddis hair-cell firing probability of each channel.
pub fn meddis_transduce<T: Real>(mut c: Cochleagram<T>, params: &HairCellParams<T>) -> Cochleagram<T> {
    let fs = c.sample_rate;
    c.h.par_iter_mut().for_each(|row| *row = params.transduce(row, fs));
    let rest = params.spontaneous_rate(fs);
    c.baseline = vec![rest; c.h.len()];
    c
}

/// Envelope extractor: half-wave rectification and a 4th-order low-pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams<T: Real = f64> {
    pub cutoff_hz: T,
}

impl<T: Real> Default for EnvelopeParams<T> {
    fn default() -> Self {
        Self { cutoff_hz: T::lit(1000.0) }
    }
}

/// Half-wave rectify and smooth with four identical one-pole sections whose
/// combined -3 dB point is `cutoff_hz`. The impulse response is positive, so the
/// output is never negative.
pub fn envelope_signal<T: Real>(x: &[T], sample_rate: u32, params: &EnvelopeParams<T>) -> Vec<T> {
    let fs = T::from_u32(sample_rate).unwrap();
    let section_cutoff = params.cutoff_hz / (T::lit(2.0).powf(T::lit(0.25)) - T::one()).sqrt();
    let alpha = T::one() - (-T::TAU() * section_cutoff / fs).exp();
    let mut st = [T::zero(); 4];
    x.iter()
        .map(|&v| {
            let mut z = v.max(T::zero());
            for s in st.iter_mut() {
                *s += alpha * (z - *s);
                z = *s;
            }
            z.max(T::zero())
        })
        .collect()
}

/// Fill `h_e` from the current `h` (call before transduction).
pub fn envelope<T: Real>(mut c: Cochleagram<T>, params: &EnvelopeParams<T>) -> Cochleagram<T> {
    let fs = c.sample_rate;
    c.h_e = c.h.par_iter().map(|row| envelope_signal(row, fs, params)).collect();
    c
}

/// Inclusive lag interval in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagRange {
    pub min: usize,
    pub max: usize,
}

impl LagRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(Error::InvalidParameter(format!("invalid lag range {min}..={max}")));
        }
        Ok(Self { min, max })
    }

    /// `round(fs / max_hz) ..= round(fs / min_hz)`; 50..=313 at 25 kHz for 80–500 Hz.
    pub fn for_pitch_range<T: Real>(sample_rate: u32, min_hz: T, max_hz: T) -> Result<Self> {
        let fs = T::from_u32(sample_rate).unwrap();
        Self::new(round_usize(fs / max_hz), round_usize(fs / min_hz))
    }

    pub fn speech(sample_rate: u32) -> Self {
        Self::for_pitch_range(sample_rate, 80.0, 500.0).expect("speech pitch range")
    }

    pub fn contains(&self, lag: usize) -> bool {
        (self.min..=self.max).contains(&lag)
    }

    pub fn len(&self) -> usize {
        self.max - self.min + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Correlogram and envelope correlogram of one frame, lags `0..=lag_range.max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelogramFrame<T: Real = f64> {
    pub frame: usize,
    pub lag_range: LagRange,
    pub window_len: usize,
    n_channels: usize,
    a_h: Vec<T>,
    a_e: Vec<T>,
}

impl<T: Real> CorrelogramFrame<T> {
    pub fn from_rows(frame: usize, lag_range: LagRange, window_len: usize, a_h: Vec<Vec<T>>, a_e: Vec<Vec<T>>) -> Result<Self> {
        let n_lags = lag_range.max + 1;
        if a_h.len() != a_e.len() || a_h.iter().chain(&a_e).any(|r| r.len() != n_lags) {
            return Err(Error::GeometryMismatch("correlogram rows".into()));
        }
        Ok(Self {
            frame,
            lag_range,
            window_len,
            n_channels: a_h.len(),
            a_h: a_h.concat(),
            a_e: a_e.concat(),
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_lags(&self) -> usize {
        self.lag_range.max + 1
    }

    pub fn a_h(&self, c: usize, lag: usize) -> T {
        self.a_h[c * self.n_lags() + lag]
    }

    pub fn a_e(&self, c: usize, lag: usize) -> T {
        self.a_e[c * self.n_lags() + lag]
    }

    pub fn a_h_row(&self, c: usize) -> &[T] {
        let n = self.n_lags();
        &self.a_h[c * n..(c + 1) * n]
    }

    pub fn a_e_row(&self, c: usize) -> &[T] {
        let n = self.n_lags();
        &self.a_e[c * n..(c + 1) * n]
    }

    /// Multiply one channel's `A_H` row by `k` (used to probe ratio invariance).
    pub fn scale_a_h_row(&mut self, c: usize, k: T) {
        let n = self.n_lags();
        for v in &mut self.a_h[c * n..(c + 1) * n] {
            *v *= k;
        }
    }

    /// Debug dump: `channel,lag,a_h,a_e` per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,lag,a_h,a_e\n");
        for c in 0..self.n_channels {
            for lag in 0..self.n_lags() {
                let _ = writeln!(out, "{c},{lag},{},{}", self.a_h(c, lag), self.a_e(c, lag));
            }
        }
        out
    }
}

/// Reusable FFT plans for computing many correlogram frames.
pub struct CorrelogramEngine<T: Real> {
    window_len: usize,
    shift: usize,
    lag_range: LagRange,
    fft_len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> CorrelogramEngine<T> {
    pub fn new(sample_rate: u32, spec: &FrameSpec<T>, lag_range: LagRange) -> Result<Self> {
        spec.validate()?;
        let window_len = spec.len_samples(sample_rate);
        let shift = spec.shift_samples(sample_rate);
        let fft_len = (window_len + lag_range.max).next_power_of_two();
        let mut planner = FftPlanner::new();
        Ok(Self {
            window_len,
            shift,
            lag_range,
            fft_len,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
        })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn frame_count(&self, signal_len: usize) -> usize {
        if signal_len < self.window_len {
            0
        } else {
            (signal_len - self.window_len) / self.shift + 1
        }
    }

    /// Normalised autocorrelation of `x - baseline` over the window ending at `end`,
    /// for lags `0..=lag_range.max`. Silent windows give all zeros.
    pub fn normalized_acf(&self, x: &[T], baseline: T, end: usize) -> Vec<T> {
        let w = self.window_len;
        let max_lag = self.lag_range.max;
        let n = self.fft_len;
        let at = |i: isize| -> T {
            if i < 0 || i as usize >= x.len() {
                T::zero()
            } else {
                x[i as usize] - baseline
            }
        };
        let start = end as isize - w as isize + 1;
        let zero = Complex::new(T::zero(), T::zero());
        let mut a = vec![zero; n];
        let mut energy = T::zero();
        for (i, slot) in a.iter_mut().take(w).enumerate() {
            let v = at(start + i as isize);
            energy += v * v;
            *slot = Complex::new(v, T::zero());
        }
        if !(energy > T::zero()) {
            return vec![T::zero(); max_lag + 1];
        }
        let mut b = vec![zero; n];
        let b_start = start - max_lag as isize;
        for (j, slot) in b.iter_mut().take(w + max_lag).enumerate() {
            *slot = Complex::new(at(b_start + j as isize), T::zero());
        }
        self.forward.process(&mut a);
        self.forward.process(&mut b);
        for (av, bv) in a.iter_mut().zip(&b) {
            *av = av.conj() * bv;
        }
        self.inverse.process(&mut a);
        let scale = T::one() / (T::from_usize_lossy(n) * energy);
        (0..=max_lag).map(|lag| a[max_lag - lag].re * scale).collect()
    }

    /// Correlogram frame `m` of a cochleagram.
    pub fn frame(&self, c: &Cochleagram<T>, m: usize) -> Result<CorrelogramFrame<T>> {
        let frames = self.frame_count(c.len());
        if m >= frames {
            return Err(Error::FrameOutOfBounds { frame: m, frames });
        }
        let end = m * self.shift + self.window_len - 1;
        let a_h = (0..c.n_channels())
            .map(|ch| self.normalized_acf(&c.h[ch], c.baseline[ch], end))
            .collect();
        let a_e = (0..c.n_channels())
            .map(|ch| self.normalized_acf(&c.h_e[ch], T::zero(), end))
            .collect();
        CorrelogramFrame::from_rows(m, self.lag_range, self.window_len, a_h, a_e)
    }

    /// Every frame of the utterance, computed in parallel.
    pub fn all_frames(&self, c: &Cochleagram<T>) -> Vec<CorrelogramFrame<T>> {
        (0..self.frame_count(c.len()))
            .into_par_iter()
            .map(|m| self.frame(c, m).expect("frame index in range"))
            .collect()
    }
}

/// Correlogram `A_H` and envelope correlogram `A_E` at frame `m`.
pub fn correlogram<T: Real>(
    c: &Cochleagram<T>,
    m: usize,
    spec: &FrameSpec<T>,
    lag_range: LagRange,
) -> Result<CorrelogramFrame<T>> {
    CorrelogramEngine::new(c.sample_rate, spec, lag_range)?.frame(c, m)
}

/// Across-channel sum of `A_H` at every lag, before normalisation.
pub fn raw_summary<T: Real>(cf: &CorrelogramFrame<T>) -> Vec<T> {
    let mut s = vec![T::zero(); cf.n_lags()];
    for c in 0..cf.n_channels() {
        for (acc, &v) in s.iter_mut().zip(cf.a_h_row(c)) {
            *acc += v;
        }
    }
    s
}

/// Summary autocorrelation scaled so its maximum over the pitch lag range is 1.
/// All zeros when that maximum is not positive (silent frame).
pub fn summary_acf<T: Real>(cf: &CorrelogramFrame<T>) -> Vec<T> {
    normalize_summary(raw_summary(cf), cf.lag_range)
}

pub(crate) fn normalize_summary<T: Real>(mut s: Vec<T>, range: LagRange) -> Vec<T> {
    let peak = s[range.min..=range.max].iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    if peak > T::zero() {
        for v in &mut s {
            *v /= peak;
        }
    } else {
        s.iter_mut().for_each(|v| *v = T::zero());
    }
    s
}

/// Options for a full peripheral analysis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeripheralParams<T: Real = f64> {
    pub filterbank: FilterbankSpec<T>,
    pub hair_cell: HairCellParams<T>,
    pub envelope: EnvelopeParams<T>,
    pub frame: FrameSpec<T>,
}

/// Filterbank → envelopes → hair cells → correlograms for every frame.
#[derive(Debug, Clone)]
pub struct PeripheralAnalysis<T: Real = f64> {
    pub cochleagram: Cochleagram<T>,
    pub frames: Vec<CorrelogramFrame<T>>,
    pub lag_range: LagRange,
}

impl<T: Real> PeripheralAnalysis<T> {
    pub fn run(w: &Waveform<T>, params: &PeripheralParams<T>, lag_range: LagRange) -> Result<Self> {
        let fb = gammatone_filterbank(w, &params.filterbank)?;
        let fb = envelope(fb, &params.envelope);
        let cochleagram = meddis_transduce(fb, &params.hair_cell);
        let engine = CorrelogramEngine::new(w.sample_rate(), &params.frame, lag_range)?;
        let frames = engine.all_frames(&cochleagram);
        Ok(Self { cochleagram, frames, lag_range })
    }

    pub fn summaries(&self) -> Vec<Vec<T>> {
        self.frames.iter().map(summary_acf).collect()
    }
}
