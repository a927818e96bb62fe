//! Co-channel speech segregation: multipitch tracking, harmonic extraction
//! and pitch-based CASA masking.

pub mod audio;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod harmonic;
pub mod multipitch;
pub mod peripheral;
pub mod pipeline;
pub mod scalar;
pub mod segregation;
pub mod tracks;

pub use error::{Error, Result};

pub type Waveform32 = audio::Waveform<f32>;
pub type Waveform64 = audio::Waveform<f64>;
pub type PeripheralAnalysis32 = peripheral::PeripheralAnalysis<f32>;
pub type PeripheralAnalysis64 = peripheral::PeripheralAnalysis<f64>;
pub type Tracker32 = multipitch::Tracker<f32>;
pub type Tracker64 = multipitch::Tracker<f64>;
pub type PipelineConfig32 = pipeline::PipelineConfig<f32>;
pub type PipelineConfig64 = pipeline::PipelineConfig<f64>;
