use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the analysis/segregation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("non-mono input: {channels} channels in {path}")]
    NonMono { path: PathBuf, channels: u16 },
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("amplitude out of range: |x| = {0} > 1")]
    AmplitudeOutOfRange(f64),
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),
    #[error("silent masker cannot be scaled to a finite TMR")]
    SilentMasker,
    #[error("aliasing: highest harmonic {highest_hz} Hz reaches Nyquist {nyquist_hz} Hz")]
    Aliasing { highest_hz: f64, nyquist_hz: f64 },
    #[error("filterbank violates Nyquist: {0}")]
    Nyquist(String),
    #[error("frame {frame} out of bounds ({frames} frames)")]
    FrameOutOfBounds { frame: usize, frames: usize },
    #[error("summary autocorrelation is not normalized (max {0})")]
    Unnormalized(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("silent reference signal")]
    SilentReference,
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("wav: {0}")]
    Wav(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
