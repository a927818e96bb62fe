//! End-to-end pitch tracking and segregation of one mixture.

use crate::audio::Waveform;
use crate::error::{Error, Result};
use crate::evaluation::Denominator;
use crate::harmonic::{fill_second_pitches, HarmonicParams};
use crate::multipitch::{PitchState, Tracker, TrackerParams};
use crate::peripheral::{LagRange, PeripheralAnalysis, PeripheralParams};
use crate::scalar::Real;
use crate::segregation::{group_unlabeled, label_units, LabelParams, Label, Resynthesizer, TFMask};
use crate::tracks::{enrich, group, prominent_pitch, refine, EnrichmentParams, PitchTrackPair};

/// Every tunable of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T: Real = f64> {
    pub peripheral: PeripheralParams<T>,
    pub pitch_min_hz: T,
    pub pitch_max_hz: T,
    pub tracker: TrackerParams<T>,
    /// Enrichment/grouping parameters; `lag_threshold` is in samples at 25 kHz.
    pub enrichment: EnrichmentParams<T>,
    pub min_run: usize,
    pub harmonic: HarmonicParams<T>,
    pub label: LabelParams<T>,
    pub group_unlabeled: bool,
    pub voicing_threshold: T,
    pub denominator: Denominator,
}

impl<T: Real> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            peripheral: PeripheralParams::default(),
            pitch_min_hz: T::lit(80.0),
            pitch_max_hz: T::lit(500.0),
            tracker: TrackerParams::default(),
            enrichment: EnrichmentParams::default(),
            min_run: 5,
            harmonic: HarmonicParams::default(),
            label: LabelParams::default(),
            group_unlabeled: true,
            voicing_threshold: T::lit(0.4),
            denominator: Denominator::Voiced,
        }
    }
}

impl<T: Real> PipelineConfig<T> {
    /// Checks that do not depend on the sample rate.
    pub fn validate(&self) -> Result<()> {
        self.peripheral.frame.validate()?;
        self.tracker.validate()?;
        self.enrichment.validate()?;
        self.label.validate()?;
        if self.peripheral.filterbank.n_channels == 0 || !(self.peripheral.filterbank.cf_min > T::zero()) {
            return Err(Error::InvalidParameter("filterbank needs >= 1 channel and cf_min > 0".into()));
        }
        if !(self.pitch_min_hz > T::zero() && self.pitch_min_hz < self.pitch_max_hz) {
            return Err(Error::InvalidParameter("pitch range must satisfy 0 < min < max".into()));
        }
        if self.min_run == 0 {
            return Err(Error::InvalidParameter("min_run must be >= 1".into()));
        }
        if !(self.voicing_threshold >= T::zero() && self.voicing_threshold <= T::one()) {
            return Err(Error::InvalidParameter("voicing_threshold must lie in [0, 1]".into()));
        }
        if !(self.peripheral.envelope.cutoff_hz > T::zero()) || !(self.peripheral.hair_cell.input_gain > T::zero()) {
            return Err(Error::InvalidParameter("envelope cutoff and hair-cell gain must be > 0".into()));
        }
        Ok(())
    }

    /// Full validation for a given sample rate.
    pub fn validate_for(&self, sample_rate: u32) -> Result<()> {
        self.validate()?;
        self.peripheral.filterbank.validate(sample_rate)?;
        self.harmonic.validate(sample_rate)?;
        self.lag_range(sample_rate).map(|_| ())
    }

    pub fn lag_range(&self, sample_rate: u32) -> Result<LagRange> {
        LagRange::for_pitch_range(sample_rate, self.pitch_min_hz, self.pitch_max_hz)
    }

    pub fn enrichment_for(&self, sample_rate: u32) -> EnrichmentParams<T> {
        let lag_threshold = ((self.enrichment.lag_threshold as f64 * sample_rate as f64 / 25_000.0).round() as usize).max(1);
        EnrichmentParams { lag_threshold, ..self.enrichment }
    }
}

/// Intermediate and final results of the tracking stage.
#[derive(Debug, Clone)]
pub struct Tracking<T: Real = f64> {
    pub analysis: PeripheralAnalysis<T>,
    pub states: Vec<PitchState>,
    pub prominent: Vec<Option<usize>>,
    pub enriched: Vec<PitchState>,
    pub grouped: PitchTrackPair,
    pub refined: PitchTrackPair,
    pub tracks: PitchTrackPair,
}

pub fn analyze<T: Real>(mixture: &Waveform<T>, cfg: &PipelineConfig<T>) -> Result<PeripheralAnalysis<T>> {
    cfg.validate_for(mixture.sample_rate())?;
    PeripheralAnalysis::run(mixture, &cfg.peripheral, cfg.lag_range(mixture.sample_rate())?)
}

/// Tracking on an existing peripheral analysis of `mixture`.
pub fn track_analyzed<T: Real>(mixture: &Waveform<T>, analysis: PeripheralAnalysis<T>, cfg: &PipelineConfig<T>) -> Result<Tracking<T>> {
    let fs = mixture.sample_rate();
    let range = analysis.lag_range;
    let ep = cfg.enrichment_for(fs);
    let states = if analysis.frames.is_empty() {
        Vec::new()
    } else {
        Tracker::new(range, cfg.tracker)?.track_correlograms(&analysis.frames)?
    };
    let prominent: Vec<Option<usize>> = analysis.summaries().iter().map(|s| prominent_pitch(s, range, &ep)).collect();
    let enriched = enrich(&states, &prominent, &ep)?;
    let grouped = group(&enriched, &ep, fs);
    let refined = refine(&grouped, cfg.min_run);
    let tracks = fill_second_pitches(&refined, mixture, &cfg.peripheral.frame, range, &cfg.harmonic)?;
    Ok(Tracking { analysis, states, prominent, enriched, grouped, refined, tracks })
}

/// Peripheral analysis, Viterbi, enrichment, grouping, refinement and second-pitch filling.
pub fn track<T: Real>(mixture: &Waveform<T>, cfg: &PipelineConfig<T>) -> Result<Tracking<T>> {
    let analysis = analyze(mixture, cfg)?;
    track_analyzed(mixture, analysis, cfg)
}

#[derive(Debug, Clone)]
pub struct Segregation<T: Real = f64> {
    pub mask: TFMask,
    pub source1: Waveform<T>,
    pub source2: Waveform<T>,
}

/// Label, group and resynthesise both sources from given tracks.
pub fn segregate_with_tracks<T: Real>(
    mixture: &Waveform<T>,
    analysis: &PeripheralAnalysis<T>,
    tracks: &PitchTrackPair,
    cfg: &PipelineConfig<T>,
) -> Result<Segregation<T>> {
    if tracks.frame_count() != analysis.frames.len() {
        return Err(Error::GeometryMismatch(format!(
            "tracks have {} frames, the mixture has {}",
            tracks.frame_count(),
            analysis.frames.len()
        )));
    }
    if tracks.sample_rate != mixture.sample_rate() {
        return Err(Error::SampleRateMismatch(tracks.sample_rate, mixture.sample_rate()));
    }
    tracks.validate(analysis.lag_range)?;
    let mut mask = label_units(&analysis.frames, &analysis.cochleagram.channel_cf, tracks, &cfg.label)?;
    if cfg.group_unlabeled {
        mask = group_unlabeled(&mask);
    }
    let r = Resynthesizer::new(mixture, &cfg.peripheral.filterbank, &cfg.peripheral.frame)?;
    Ok(Segregation { source1: r.synthesize(&mask, Label::Source1)?, source2: r.synthesize(&mask, Label::Source2)?, mask })
}

/// The full two-stage system on one mixture.
pub fn separate<T: Real>(mixture: &Waveform<T>, cfg: &PipelineConfig<T>) -> Result<(Tracking<T>, Segregation<T>)> {
    let t = track(mixture, cfg)?;
    let s = segregate_with_tracks(mixture, &t.analysis, &t.tracks, cfg)?;
    Ok((t, s))
}

