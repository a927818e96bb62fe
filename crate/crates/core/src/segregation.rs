//! Time-frequency unit labelling from two pitch tracks, mask grouping and resynthesis.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::{FrameSpec, Waveform};
use crate::error::{Error, Result};
use crate::peripheral::{CorrelogramFrame, FilterbankSpec, Gammatone};
use crate::scalar::Real;
use crate::tracks::PitchTrackPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Label {
    #[default]
    Unlabeled,
    Source1,
    Source2,
}

impl Label {
    pub fn opposite(self) -> Self {
        match self {
            Label::Source1 => Label::Source2,
            Label::Source2 => Label::Source1,
            Label::Unlabeled => Label::Unlabeled,
        }
    }

    fn of_track(k: usize) -> Self {
        if k == 0 { Label::Source1 } else { Label::Source2 }
    }

    pub fn as_char(self) -> char {
        match self {
            Label::Unlabeled => '0',
            Label::Source1 => '1',
            Label::Source2 => '2',
        }
    }
}

/// Channel x frame labels, stored frame-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TFMask {
    n_channels: usize,
    n_frames: usize,
    labels: Vec<Label>,
}

impl TFMask {
    pub fn new(n_channels: usize, n_frames: usize) -> Self {
        Self::filled(n_channels, n_frames, Label::Unlabeled)
    }

    pub fn filled(n_channels: usize, n_frames: usize, label: Label) -> Self {
        Self { n_channels, n_frames, labels: vec![label; n_channels * n_frames] }
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn get(&self, c: usize, m: usize) -> Label {
        self.labels[m * self.n_channels + c]
    }

    pub fn set(&mut self, c: usize, m: usize, l: Label) {
        self.labels[m * self.n_channels + c] = l;
    }

    /// Binary mask for one source: 1 where the unit carries `label`.
    pub fn binary(&self, label: Label) -> Vec<Vec<bool>> {
        (0..self.n_frames).map(|m| (0..self.n_channels).map(|c| self.get(c, m) == label).collect()).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn swapped(&self) -> Self {
        Self { labels: self.labels.iter().map(|l| l.opposite()).collect(), ..self.clone() }
    }

    /// One line per frame, one `0`/`1`/`2` character per channel.
    pub fn to_dump(&self) -> String {
        let mut out = String::with_capacity((self.n_channels + 1) * self.n_frames);
        for m in 0..self.n_frames {
            out.extend((0..self.n_channels).map(|c| self.get(c, m).as_char()));
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        let n_channels = rows.first().map_or(0, |r| r.len());
        let mut mask = Self::new(n_channels, rows.len());
        for (m, row) in rows.iter().enumerate() {
            if row.len() != n_channels {
                return Err(Error::Parse(format!("mask row {m} has {} channels, expected {n_channels}", row.len())));
            }
            for (c, ch) in row.chars().enumerate() {
                let l = match ch {
                    '0' => Label::Unlabeled,
                    '1' => Label::Source1,
                    '2' => Label::Source2,
                    _ => return Err(Error::Parse(format!("bad mask character {ch:?}"))),
                };
                mask.set(c, m, l);
            }
        }
        Ok(mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelParams<T: Real = f64> {
    pub ah_threshold: T,
    pub ae_threshold: T,
    /// Channels below this centre frequency are judged on `A_H`, the rest on `A_E`.
    pub type1_cf_cutoff: T,
}

impl<T: Real> Default for LabelParams<T> {
    fn default() -> Self {
        Self { ah_threshold: T::lit(0.85), ae_threshold: T::lit(0.7), type1_cf_cutoff: T::lit(1000.0) }
    }
}

impl<T: Real> LabelParams<T> {
    pub fn validate(&self) -> Result<()> {
        let inside = |x: T| x > T::zero() && x < T::one();
        if !inside(self.ah_threshold) || !inside(self.ae_threshold) {
            return Err(Error::InvalidParameter("label thresholds must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Whether unit `(c, frame)` is dominated by the period `lag`.
fn unit_passes<T: Real>(cf: &CorrelogramFrame<T>, c: usize, lag: usize, type1: bool, p: &LabelParams<T>) -> bool {
    let r = cf.lag_range;
    let (row, thresh) = if type1 { (cf.a_h_row(c), p.ah_threshold) } else { (cf.a_e_row(c), p.ae_threshold) };
    let peak = row[r.min..=r.max].iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    peak > T::zero() && row[lag] / peak > thresh
}

/// Label every T-F unit from the two pitch tracks.
pub fn label_units<T: Real>(
    frames: &[CorrelogramFrame<T>],
    channel_cf: &[T],
    tracks: &PitchTrackPair,
    p: &LabelParams<T>,
) -> Result<TFMask> {
    if frames.len() != tracks.frame_count() {
        return Err(Error::LengthMismatch(frames.len(), tracks.frame_count()));
    }
    let n_channels = channel_cf.len();
    if frames.iter().any(|f| f.n_channels() != n_channels) {
        return Err(Error::GeometryMismatch("correlogram channel count differs from filterbank".into()));
    }
    let columns: Vec<Vec<Label>> = frames
        .par_iter()
        .enumerate()
        .map(|(m, cf)| {
            let pitches: Vec<(usize, usize)> =
                [(0, tracks.track1[m]), (1, tracks.track2[m])].into_iter().filter_map(|(k, l)| l.map(|l| (k, l))).collect();
            (0..n_channels)
                .map(|c| {
                    let type1 = channel_cf[c] < p.type1_cf_cutoff;
                    match pitches.as_slice() {
                        [] => Label::Unlabeled,
                        [(k, lag)] => {
                            let own = Label::of_track(*k);
                            if unit_passes(cf, c, *lag, type1, p) { own } else { own.opposite() }
                        }
                        [(k1, l1), (k2, l2)] => match (unit_passes(cf, c, *l1, type1, p), unit_passes(cf, c, *l2, type1, p)) {
                            (true, false) => Label::of_track(*k1),
                            (false, true) => Label::of_track(*k2),
                            _ => Label::Unlabeled,
                        },
                        _ => unreachable!("at most two tracks"),
                    }
                })
                .collect()
        })
        .collect();
    let mut mask = TFMask::new(n_channels, frames.len());
    for (m, col) in columns.into_iter().enumerate() {
        for (c, l) in col.into_iter().enumerate() {
            mask.set(c, m, l);
        }
    }
    Ok(mask)
}

/// Give each unlabeled unit the strict majority label of its labelled 4-neighbours.
pub fn group_unlabeled(mask: &TFMask) -> TFMask {
    let mut out = mask.clone();
    let (nc, nm) = (mask.n_channels, mask.n_frames);
    for m in 0..nm {
        for c in 0..nc {
            if mask.get(c, m) != Label::Unlabeled {
                continue;
            }
            let mut votes = [0usize; 2];
            let neighbours = [
                (c.checked_sub(1), Some(m)),
                ((c + 1 < nc).then_some(c + 1), Some(m)),
                (Some(c), m.checked_sub(1)),
                (Some(c), (m + 1 < nm).then_some(m + 1)),
            ];
            for (cc, mm) in neighbours {
                if let (Some(cc), Some(mm)) = (cc, mm) {
                    match mask.get(cc, mm) {
                        Label::Source1 => votes[0] += 1,
                        Label::Source2 => votes[1] += 1,
                        Label::Unlabeled => {}
                    }
                }
            }
            if votes[0] > votes[1] {
                out.set(c, m, Label::Source1);
            } else if votes[1] > votes[0] {
                out.set(c, m, Label::Source2);
            }
        }
    }
    out
}

/// Zero-phase filterbank decomposition of one signal, reusable for any number of masks.
pub struct Resynthesizer<T: Real = f64> {
    channels: Vec<Vec<T>>,
    gain: T,
    frames: FrameSpec<T>,
    sample_rate: u32,
    len: usize,
}

impl<T: Real> Resynthesizer<T> {
    pub fn new(w: &Waveform<T>, spec: &FilterbankSpec<T>, frames: &FrameSpec<T>) -> Result<Self> {
        spec.validate(w.sample_rate())?;
        frames.validate()?;
        let fs = w.sample_rate() as f64;
        let bank: Vec<Gammatone> = spec.center_frequencies().iter().map(|&cf| Gammatone::new(cf.as_f64(), fs)).collect();
        let channels = bank.par_iter().map(|g| g.filter_zero_phase(w.samples())).collect();
        // Zero-phase filtering applies |H|^2; normalise by its average over the speech band.
        let probe: Vec<f64> = (1..=100).map(|k| 50.0 * k as f64).filter(|&f| f < fs / 2.0).collect();
        let total: f64 = probe.iter().map(|&f| bank.iter().map(|g| g.response(f).norm_sqr()).sum::<f64>()).sum();
        let gain = T::lit(total / probe.len().max(1) as f64);
        Ok(Self { channels, gain, frames: *frames, sample_rate: w.sample_rate(), len: w.len() })
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, c: usize) -> &[T] {
        &self.channels[c]
    }

    /// Sum of channels weighted by `weight(c, m)` with raised-cosine cross-fades between frame centres.
    pub fn synthesize_weighted(&self, n_frames: usize, weight: impl Fn(usize, usize) -> T + Sync) -> Waveform<T> {
        let centers: Vec<usize> = (0..n_frames).map(|m| self.frames.frame_center(m, self.sample_rate)).collect();
        let parts: Vec<Vec<T>> = self
            .channels
            .par_iter()
            .enumerate()
            .map(|(c, x)| {
                let mut y = vec![T::zero(); self.len];
                if n_frames == 0 {
                    return y;
                }
                for (n, (yv, &xv)) in y.iter_mut().zip(x).enumerate() {
                    let k = centers.partition_point(|&t| t <= n);
                    let g = if k == 0 {
                        weight(c, 0)
                    } else if k == n_frames {
                        weight(c, n_frames - 1)
                    } else {
                        let (a, b) = (centers[k - 1], centers[k]);
                        let phi = T::lit(0.5) * (T::one() + (T::PI() * T::from_usize_lossy(n - a) / T::from_usize_lossy(b - a)).cos());
                        phi * weight(c, k - 1) + (T::one() - phi) * weight(c, k)
                    };
                    if g != T::zero() {
                        *yv = g * xv;
                    }
                }
                y
            })
            .collect();
        let mut out = vec![T::zero(); self.len];
        for p in parts {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|v| *v /= self.gain);
        Waveform::new(out, self.sample_rate).expect("finite resynthesis")
    }

    pub fn synthesize(&self, mask: &TFMask, label: Label) -> Result<Waveform<T>> {
        if mask.n_channels() != self.channels.len() {
            return Err(Error::GeometryMismatch(format!(
                "mask has {} channels, filterbank has {}",
                mask.n_channels(),
                self.channels.len()
            )));
        }
        Ok(self.synthesize_weighted(mask.n_frames(), |c, m| if mask.get(c, m) == label { T::one() } else { T::zero() }))
    }

    pub fn synthesize_all(&self, n_frames: usize) -> Waveform<T> {
        self.synthesize_weighted(n_frames, |_, _| T::one())
    }
}

/// Both sources' waveforms from a labelled mask.
pub fn resynthesize<T: Real>(
    mixture: &Waveform<T>,
    mask: &TFMask,
    spec: &FilterbankSpec<T>,
    frames: &FrameSpec<T>,
) -> Result<(Waveform<T>, Waveform<T>)> {
    if mask.n_channels() != spec.n_channels {
        return Err(Error::GeometryMismatch(format!("mask has {} channels, spec has {}", mask.n_channels(), spec.n_channels)));
    }
    let r = Resynthesizer::new(mixture, spec, frames)?;
    Ok((r.synthesize(mask, Label::Source1)?, r.synthesize(mask, Label::Source2)?))
}

/// Per channel-frame energy of the zero-phase filterbank output.
pub fn unit_energies<T: Real>(r: &Resynthesizer<T>, frames: &FrameSpec<T>, n_frames: usize) -> Vec<Vec<T>> {
    let fs = r.sample_rate;
    let w = frames.len_samples(fs);
    (0..n_frames)
        .map(|m| {
            let s = frames.frame_start(m, fs);
            (0..r.n_channels())
                .map(|c| {
                    let x = r.channel(c);
                    let e = (s.min(x.len())..(s + w).min(x.len())).map(|n| x[n] * x[n]);
                    e.fold(T::zero(), |a, v| a + v)
                })
                .collect()
        })
        .collect()
}

/// Oracle mask: each unit goes to the source with more energy there; exact ties stay unlabeled.
pub fn ideal_binary_mask<T: Real>(
    clean1: &Waveform<T>,
    clean2: &Waveform<T>,
    spec: &FilterbankSpec<T>,
    frames: &FrameSpec<T>,
) -> Result<TFMask> {
    if clean1.sample_rate() != clean2.sample_rate() {
        return Err(Error::SampleRateMismatch(clean1.sample_rate(), clean2.sample_rate()));
    }
    if clean1.len() != clean2.len() {
        return Err(Error::LengthMismatch(clean1.len(), clean2.len()));
    }
    let n_frames = frames.frame_count(clean1.len(), clean1.sample_rate());
    let e1 = unit_energies(&Resynthesizer::new(clean1, spec, frames)?, frames, n_frames);
    let e2 = unit_energies(&Resynthesizer::new(clean2, spec, frames)?, frames, n_frames);
    let mut mask = TFMask::new(spec.n_channels, n_frames);
    for m in 0..n_frames {
        for c in 0..spec.n_channels {
            let l = match e1[m][c].partial_cmp(&e2[m][c]) {
                Some(std::cmp::Ordering::Greater) => Label::Source1,
                Some(std::cmp::Ordering::Less) => Label::Source2,
                _ => Label::Unlabeled,
            };
            mask.set(c, m, l);
        }
    }
    Ok(mask)
}

/// Pitch-driven sinusoidal harmonic selection, frame by frame with overlap-add.
///
/// Two-pitch frames rebuild each talker from the peaks nearest its harmonics;
/// one-pitch frames give the other talker the remainder; unpitched frames go to talker 1.
pub fn harmonic_selection_baseline<T: Real>(
    mixture: &Waveform<T>,
    tracks: &PitchTrackPair,
    frames: &FrameSpec<T>,
) -> Result<(Waveform<T>, Waveform<T>)> {
    const MAX_FREQ: f64 = 4000.0;
    if mixture.sample_rate() != tracks.sample_rate {
        return Err(Error::SampleRateMismatch(mixture.sample_rate(), tracks.sample_rate));
    }
    frames.validate()?;
    let fs = mixture.sample_rate();
    let x = mixture.samples();
    let n = x.len();
    let w_len = frames.len_samples(fs);
    let hop = frames.shift_samples(fs);
    let window: Vec<f64> = (0..w_len).map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * (i as f64 + 0.5) / w_len as f64).cos()).collect();
    let wsum: f64 = window.iter().sum();
    let fft_len = (w_len * 8).next_power_of_two();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_len);
    let n_frames = if n <= w_len { 1 } else { (n - w_len).div_ceil(hop) + 1 };

    let frame_out: Vec<(Vec<f64>, Vec<f64>)> = (0..n_frames)
        .into_par_iter()
        .map(|m| {
            let s = m * hop;
            let seg: Vec<f64> = (0..w_len).map(|i| if s + i < n { x[s + i].as_f64() * window[i] } else { 0.0 }).collect();
            let lags = if m < tracks.frame_count() { [tracks.track1[m], tracks.track2[m]] } else { [None, None] };
            let mut buf: Vec<Complex<f64>> = seg.iter().map(|&v| Complex::new(v, 0.0)).collect();
            buf.resize(fft_len, Complex::new(0.0, 0.0));
            fft.process(&mut buf);
            let mag: Vec<f64> = buf[..=fft_len / 2].iter().map(|c| c.norm()).collect();
            let bin_hz = fs as f64 / fft_len as f64;
            let rebuild = |f0: f64| -> Vec<f64> {
                let mut used: Vec<usize> = Vec::new();
                let mut y = vec![0.0; w_len];
                let mut k = 1;
                while k as f64 * f0 <= MAX_FREQ {
                    let target = k as f64 * f0;
                    k += 1;
                    let lo = (((target - f0 / 2.0) / bin_hz).ceil().max(1.0)) as usize;
                    let hi = (((target + f0 / 2.0) / bin_hz).floor() as usize).min(fft_len / 2 - 1);
                    let peak = (lo..=hi)
                        .filter(|&b| mag[b] > mag[b - 1] && mag[b] >= mag[b + 1])
                        .min_by(|&a, &b| (a as f64 * bin_hz - target).abs().total_cmp(&(b as f64 * bin_hz - target).abs()));
                    let Some(b) = peak else { continue };
                    if used.contains(&b) {
                        continue;
                    }
                    used.push(b);
                    let (a0, b0, c0) = (mag[b - 1].max(1e-300).ln(), mag[b].max(1e-300).ln(), mag[b + 1].max(1e-300).ln());
                    let den = a0 - 2.0 * b0 + c0;
                    let d = if den < 0.0 { 0.5 * (a0 - c0) / den } else { 0.0 };
                    let omega = std::f64::consts::TAU * (b as f64 + d) * bin_hz / fs as f64;
                    let xk: Complex<f64> = seg.iter().enumerate().map(|(i, &v)| Complex::from_polar(v, -omega * i as f64)).sum();
                    let amp = 2.0 * xk.norm() / wsum;
                    let phase = xk.arg();
                    for (i, yv) in y.iter_mut().enumerate() {
                        *yv += window[i] * amp * (omega * i as f64 + phase).cos();
                    }
                }
                y
            };
            let hz = |l: usize| fs as f64 / l as f64;
            match lags {
                [Some(a), Some(b)] => (rebuild(hz(a)), rebuild(hz(b))),
                [Some(a), None] => {
                    let y = rebuild(hz(a));
                    let rest = seg.iter().zip(&y).map(|(s, y)| s - y).collect();
                    (y, rest)
                }
                [None, Some(b)] => {
                    let y = rebuild(hz(b));
                    let rest = seg.iter().zip(&y).map(|(s, y)| s - y).collect();
                    (rest, y)
                }
                [None, None] => (seg.clone(), vec![0.0; w_len]),
            }
        })
        .collect();

    let mut out1 = vec![0.0; n];
    let mut out2 = vec![0.0; n];
    let mut norm = vec![0.0; n];
    for (m, (y1, y2)) in frame_out.iter().enumerate() {
        let s = m * hop;
        for i in 0..w_len {
            if s + i < n {
                out1[s + i] += y1[i];
                out2[s + i] += y2[i];
                norm[s + i] += window[i];
            }
        }
    }
    let finish = |v: Vec<f64>| -> Result<Waveform<T>> {
        let samples = v.iter().zip(&norm).map(|(&y, &g)| T::lit(if g > 1e-6 { y / g } else { 0.0 })).collect();
        Waveform::new(samples, fs)
    };
    Ok((finish(out1)?, finish(out2)?))
}
