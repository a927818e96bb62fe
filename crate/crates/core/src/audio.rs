//! Waveform container, WAV interchange, mixing at a target-to-masker ratio,
//! framing, and synthetic harmonic test material.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scalar::{rms, round_usize, Real};

/// Default sample rate of the two-talker test material.
pub const DEFAULT_SAMPLE_RATE: u32 = 25_000;

/// Mono sampled audio.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T: Real = f64> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Real> Waveform<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidWaveform("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidWaveform(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![T::zero(); len], sample_rate)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn fs(&self) -> T {
        T::from_u32(self.sample_rate).unwrap()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> T {
        T::from_usize_lossy(self.len()) / self.fs()
    }

    pub fn peak(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn rms(&self) -> T {
        rms(&self.samples)
    }

    /// Multiply every sample by `gain`.
    pub fn scaled(&self, gain: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&x| x * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Truncate or zero-pad to exactly `len` samples.
    pub fn resized(&self, len: usize) -> Self {
        let mut samples = self.samples.clone();
        samples.resize(len, T::zero());
        Self { samples, sample_rate: self.sample_rate }
    }

    /// Divide by the peak when it exceeds one; returns the applied factor (≤ 1).
    pub fn peak_normalize(&mut self) -> T {
        let peak = self.peak();
        if peak > T::one() {
            let g = T::one() / peak;
            for x in &mut self.samples {
                *x *= g;
            }
            g
        } else {
            T::one()
        }
    }

    /// Convert to another scalar type.
    pub fn cast<U: Real>(&self) -> Waveform<U> {
        Waveform {
            samples: self.samples.iter().map(|x| U::lit(x.as_f64())).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Frame geometry in milliseconds.
///
/// Frame `m` covers samples `[m * shift, m * shift + len)`; indexing is 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec<T: Real = f64> {
    pub frame_shift_ms: T,
    pub frame_len_ms: T,
}

impl<T: Real> Default for FrameSpec<T> {
    fn default() -> Self {
        Self::correlogram()
    }
}

impl<T: Real> FrameSpec<T> {
    /// 10 ms shift, 20 ms window.
    pub fn correlogram() -> Self {
        Self { frame_shift_ms: T::lit(10.0), frame_len_ms: T::lit(20.0) }
    }

    /// 10 ms shift, 50 ms window.
    pub fn harmonic() -> Self {
        Self { frame_shift_ms: T::lit(10.0), frame_len_ms: T::lit(50.0) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_shift_ms > T::zero()) {
            return Err(Error::InvalidParameter("frame_shift_ms must be > 0".into()));
        }
        if !(self.frame_len_ms >= self.frame_shift_ms) {
            return Err(Error::InvalidParameter("frame_len_ms must be >= frame_shift_ms".into()));
        }
        Ok(())
    }

    pub fn shift_samples(&self, sample_rate: u32) -> usize {
        round_usize(self.frame_shift_ms * T::from_u32(sample_rate).unwrap() / T::lit(1000.0)).max(1)
    }

    pub fn len_samples(&self, sample_rate: u32) -> usize {
        round_usize(self.frame_len_ms * T::from_u32(sample_rate).unwrap() / T::lit(1000.0)).max(1)
    }

    /// `floor((len - frame_len) / shift) + 1`, or 0 when the signal is shorter than a frame.
    pub fn frame_count(&self, signal_len: usize, sample_rate: u32) -> usize {
        let w = self.len_samples(sample_rate);
        if signal_len < w {
            return 0;
        }
        (signal_len - w) / self.shift_samples(sample_rate) + 1
    }

    pub fn frame_start(&self, m: usize, sample_rate: u32) -> usize {
        m * self.shift_samples(sample_rate)
    }

    /// Sample index at the centre of frame `m`.
    pub fn frame_center(&self, m: usize, sample_rate: u32) -> usize {
        self.frame_start(m, sample_rate) + self.len_samples(sample_rate) / 2
    }

    pub fn frame_time_s(&self, m: usize, sample_rate: u32) -> T {
        T::from_usize_lossy(self.frame_center(m, sample_rate)) / T::from_u32(sample_rate).unwrap()
    }
}

/// Read a mono RIFF WAV (16-bit PCM or 32-bit float) into `[-1, 1]` amplitudes.
pub fn read_wav<T: Real>(path: impl AsRef<Path>) -> Result<Waveform<T>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = hound::WavReader::open(path).map_err(|e| Error::Wav(e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::NonMono { path: path.to_path_buf(), channels: spec.channels });
    }
    let samples: Vec<T> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| T::lit(v as f64 / 32768.0)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Wav(e.to_string()))?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| T::lit(v as f64)))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Wav(e.to_string()))?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding(format!("{fmt:?} {bits}-bit")));
        }
    };
    Waveform::new(samples, spec.sample_rate)
}

/// Sample encoding used when writing WAV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    #[default]
    Pcm16,
    Float32,
}

/// Write a 16-bit PCM mono WAV. Fails if any sample has `|x| > 1`.
pub fn write_wav<T: Real>(path: impl AsRef<Path>, w: &Waveform<T>) -> Result<()> {
    write_wav_as(path, w, WavEncoding::Pcm16)
}

/// Write a mono WAV with the requested encoding, atomically (temp file + rename).
pub fn write_wav_as<T: Real>(path: impl AsRef<Path>, w: &Waveform<T>, encoding: WavEncoding) -> Result<()> {
    let peak = w.peak();
    if peak > T::one() {
        return Err(Error::AmplitudeOutOfRange(peak.as_f64()));
    }
    let spec = match encoding {
        WavEncoding::Pcm16 => hound::WavSpec {
            channels: 1,
            sample_rate: w.sample_rate(),
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        },
        WavEncoding::Float32 => hound::WavSpec {
            channels: 1,
            sample_rate: w.sample_rate(),
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        },
    };
    let path = path.as_ref();
    let tmp = temp_sibling(path);
    let wav_err = |e: hound::Error| Error::Wav(e.to_string());
    {
        let mut writer = hound::WavWriter::create(&tmp, spec).map_err(wav_err)?;
        for &x in w.samples() {
            match encoding {
                WavEncoding::Pcm16 => {
                    let q = (x.as_f64() * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(q).map_err(wav_err)?;
                }
                WavEncoding::Float32 => writer.write_sample(x.as_f64() as f32).map_err(wav_err)?,
            }
        }
        writer.finalize().map_err(wav_err)?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub(crate) fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Result of [`mix`]: the mixture plus the gains that produced it.
#[derive(Debug, Clone)]
pub struct Mixture<T: Real = f64> {
    pub mixture: Waveform<T>,
    /// Gain applied to the masker before summation.
    pub masker_scale: T,
    /// Gain applied to the sum so that its peak is at most one.
    pub peak_scale: T,
}

/// Mix `masker` into `target` at `tmr_db` target-to-masker ratio.
///
/// The masker is truncated or zero-padded to the target length; both RMS values
/// are measured over the overlapping samples.
pub fn mix<T: Real>(target: &Waveform<T>, masker: &Waveform<T>, tmr_db: T) -> Result<Mixture<T>> {
    if target.sample_rate() != masker.sample_rate() {
        return Err(Error::SampleRateMismatch(target.sample_rate(), masker.sample_rate()));
    }
    let overlap = target.len().min(masker.len());
    let rms_t = rms(&target.samples()[..overlap]);
    let rms_m = rms(&masker.samples()[..overlap]);
    if !(rms_m > T::zero()) {
        return Err(Error::SilentMasker);
    }
    let masker_scale = rms_t / (rms_m * T::lit(10.0).powf(tmr_db / T::lit(20.0)));
    let masker = masker.resized(target.len());
    let sum: Vec<T> = target
        .samples()
        .iter()
        .zip(masker.samples())
        .map(|(&t, &m)| t + masker_scale * m)
        .collect();
    let mut mixture = Waveform::new(sum, target.sample_rate())?;
    let peak_scale = mixture.peak_normalize();
    Ok(Mixture { mixture, masker_scale, peak_scale })
}

/// Sum of cosines at `k * f0`, `k = 1..=n_harmonics`, harmonic `k` scaled by `decay^(k-1)`.
pub fn synth_harmonic<T: Real>(
    f0: T,
    n_harmonics: usize,
    duration_s: T,
    sample_rate: u32,
    amplitude_decay: T,
) -> Result<Waveform<T>> {
    let fs = T::from_u32(sample_rate).unwrap();
    let highest = f0 * T::from_usize_lossy(n_harmonics);
    if n_harmonics == 0 || !(highest < fs / T::lit(2.0)) || !(f0 > T::zero()) {
        return Err(Error::Aliasing { highest_hz: highest.as_f64(), nyquist_hz: fs.as_f64() / 2.0 });
    }
    let len = round_usize(duration_s * fs);
    let two_pi = T::TAU();
    let mut out = vec![T::zero(); len];
    let mut amp = T::one();
    for k in 1..=n_harmonics {
        let fk = f0 * T::from_usize_lossy(k);
        for (n, y) in out.iter_mut().enumerate() {
            // Phase reduced to one period before the trig call keeps long signals exact.
            let cycles = fk * T::from_usize_lossy(n) / fs;
            *y += amp * (two_pi * cycles.fract()).cos();
        }
        amp *= amplitude_decay;
    }
    Waveform::new(out, sample_rate)
}
