//! Prominent-pitch enrichment, continuity grouping into two tracks, and refinement.

use std::fmt::Write as _;
use std::path::Path;

use crate::audio::{temp_sibling, FrameSpec};
use crate::error::{Error, Result};
use crate::multipitch::{half_lag, PitchState};
use crate::peripheral::LagRange;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnrichmentParams<T: Real = f64> {
    /// Lag distance (samples) beyond which two pitches are treated as different talkers.
    pub lag_threshold: usize,
    /// Same meaning as the tracker's octave cost; used when picking the prominent pitch.
    pub octave_cost: T,
    pub floor: T,
}

impl<T: Real> Default for EnrichmentParams<T> {
    fn default() -> Self {
        Self { lag_threshold: 32, octave_cost: T::lit(0.5), floor: T::lit(1e-3) }
    }
}

impl<T: Real> EnrichmentParams<T> {
    /// Defaults with the lag threshold scaled from 25 kHz to `sample_rate`.
    pub fn for_rate(sample_rate: u32) -> Self {
        let lag_threshold = ((32.0 * sample_rate as f64 / 25_000.0).round() as usize).max(1);
        Self { lag_threshold, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag_threshold == 0 {
            return Err(Error::InvalidParameter("lag_threshold must be > 0".into()));
        }
        if !(self.octave_cost >= T::zero()) || !(self.floor > T::zero()) {
            return Err(Error::InvalidParameter("octave_cost must be >= 0 and floor > 0".into()));
        }
        Ok(())
    }
}

/// Strongest pitch lag of a normalised summary, or `None` for a silent frame.
///
/// Each lag scores `ln(floor + s(lag)) - octave_cost * s(lag / 2)`; the
/// smaller lag wins ties.
pub fn prominent_pitch<T: Real>(s: &[T], range: LagRange, p: &EnrichmentParams<T>) -> Option<usize> {
    let window = &s[range.min..=range.max];
    if !window.iter().any(|&v| v > T::zero()) {
        return None;
    }
    let mut best = None;
    let mut best_v = T::neg_infinity();
    for lag in range.min..=range.max {
        let pen = half_lag(lag, range).map_or(T::zero(), |h| p.octave_cost * s[h].max(T::zero()));
        let v = (p.floor + s[lag].max(T::zero())).ln() - pen;
        if v > best_v {
            best_v = v;
            best = Some(lag);
        }
    }
    best
}

/// Override tracker states with the prominent pitch (S0 -> S1, distant S1 -> S2).
pub fn enrich<T: Real>(states: &[PitchState], prominents: &[Option<usize>], p: &EnrichmentParams<T>) -> Result<Vec<PitchState>> {
    if states.len() != prominents.len() {
        return Err(Error::LengthMismatch(states.len(), prominents.len()));
    }
    Ok(states
        .iter()
        .zip(prominents)
        .map(|(&s, &pr)| match (s, pr) {
            (PitchState::Zero, Some(q)) => PitchState::One(q),
            (PitchState::One(t), Some(q)) if t.abs_diff(q) > p.lag_threshold => PitchState::pair(t, q),
            _ => s,
        })
        .collect())
}

/// Per-frame pitch lags of two talker tracks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitchTrackPair {
    pub track1: Vec<Option<usize>>,
    pub track2: Vec<Option<usize>>,
    pub sample_rate: u32,
}

impl PitchTrackPair {
    pub fn empty(frames: usize, sample_rate: u32) -> Self {
        Self { track1: vec![None; frames], track2: vec![None; frames], sample_rate }
    }

    pub fn new(track1: Vec<Option<usize>>, track2: Vec<Option<usize>>, sample_rate: u32) -> Result<Self> {
        if track1.len() != track2.len() {
            return Err(Error::LengthMismatch(track1.len(), track2.len()));
        }
        if let Some(m) = (0..track1.len()).find(|&m| track1[m].is_some() && track1[m] == track2[m]) {
            return Err(Error::InvalidParameter(format!("frame {m} has the same lag on both tracks")));
        }
        Ok(Self { track1, track2, sample_rate })
    }

    pub fn frame_count(&self) -> usize {
        self.track1.len()
    }

    pub fn track(&self, k: usize) -> &[Option<usize>] {
        if k == 0 { &self.track1 } else { &self.track2 }
    }

    pub fn lag_to_hz(&self, lag: usize) -> f64 {
        self.sample_rate as f64 / lag as f64
    }

    pub fn hz(&self, k: usize, frame: usize) -> Option<f64> {
        self.track(k)[frame].map(|l| self.lag_to_hz(l))
    }

    pub fn swapped(&self) -> Self {
        Self { track1: self.track2.clone(), track2: self.track1.clone(), sample_rate: self.sample_rate }
    }

    /// Lags present in frame `m`, sorted.
    pub fn lags_at(&self, m: usize) -> Vec<usize> {
        let mut v: Vec<usize> = [self.track1[m], self.track2[m]].into_iter().flatten().collect();
        v.sort_unstable();
        v
    }

    pub fn validate(&self, range: LagRange) -> Result<()> {
        for (m, (a, b)) in self.track1.iter().zip(&self.track2).enumerate() {
            if a.is_some() && a == b {
                return Err(Error::InvalidParameter(format!("frame {m} has the same lag on both tracks")));
            }
            if let Some(l) = a.iter().chain(b).find(|&&l| !range.contains(l)) {
                return Err(Error::InvalidParameter(format!("frame {m}: lag {l} out of range")));
            }
        }
        Ok(())
    }

    /// CSV `frame,time_s,track1_hz,track2_hz`; absent pitches are written as 0.
    pub fn to_csv<T: Real>(&self, frames: &FrameSpec<T>) -> String {
        let mut out = String::from("frame,time_s,track1_hz,track2_hz\n");
        for m in 0..self.frame_count() {
            let t = frames.frame_time_s(m, self.sample_rate).as_f64();
            let f1 = self.hz(0, m).unwrap_or(0.0);
            let f2 = self.hz(1, m).unwrap_or(0.0);
            let _ = writeln!(out, "{m},{t:.4},{f1:.4},{f2:.4}");
        }
        out
    }

    pub fn write_csv<T: Real>(&self, path: impl AsRef<Path>, frames: &FrameSpec<T>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv(frames).as_bytes())
    }

    /// Parse the CSV written by [`PitchTrackPair::to_csv`].
    pub fn from_csv(text: &str, sample_rate: u32) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("frame,time_s,track1_hz,track2_hz") {
            return Err(Error::Parse("missing pitch track header".into()));
        }
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns", n + 2)));
            }
            let lag = |s: &str| -> Result<Option<usize>> {
                let hz: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", n + 2)))?;
                Ok((hz > 0.0).then(|| (sample_rate as f64 / hz).round() as usize))
            };
            t1.push(lag(cols[2])?);
            t2.push(lag(cols[3])?);
        }
        Self::new(t1, t2, sample_rate)
    }

    pub fn read_csv(path: impl AsRef<Path>, sample_rate: u32) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        Self::from_csv(&text, sample_rate)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(e)
    })
}

/// Which track the first pitched frame's smaller lag goes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Seed {
    #[default]
    SmallerLagTrack1,
    SmallerLagTrack2,
}

pub fn group<T: Real>(states: &[PitchState], p: &EnrichmentParams<T>, sample_rate: u32) -> PitchTrackPair {
    group_with_seed(states, p, sample_rate, Seed::default())
}

/// Assign each frame's pitches to two tracks by continuity with the previous pitched frame.
pub fn group_with_seed<T: Real>(states: &[PitchState], p: &EnrichmentParams<T>, sample_rate: u32, seed: Seed) -> PitchTrackPair {
    let mut out = PitchTrackPair::empty(states.len(), sample_rate);
    // Previous pitched frame's assignment as (track1, track2).
    let mut prev: Option<(Option<usize>, Option<usize>)> = None;
    for (m, s) in states.iter().enumerate() {
        let assigned = match (*s, prev) {
            (PitchState::Zero, _) => continue,
            (PitchState::One(a), None) => match seed {
                Seed::SmallerLagTrack1 => (Some(a), None),
                Seed::SmallerLagTrack2 => (None, Some(a)),
            },
            (PitchState::Two(a, b), None) => match seed {
                Seed::SmallerLagTrack1 => (Some(a), Some(b)),
                Seed::SmallerLagTrack2 => (Some(b), Some(a)),
            },
            (PitchState::Two(a, b), Some((Some(x), Some(y)))) => {
                let keep = a.abs_diff(x) + b.abs_diff(y);
                let swap = a.abs_diff(y) + b.abs_diff(x);
                // Ties send the smaller lag to the track that had the smaller lag.
                if keep < swap || (keep == swap && x < y) { (Some(a), Some(b)) } else { (Some(b), Some(a)) }
            }
            (PitchState::Two(a, b), Some((one1, one2))) => {
                let (q, on_track1) = match (one1, one2) {
                    (Some(q), None) => (q, true),
                    (None, Some(q)) => (q, false),
                    _ => unreachable!("a pitched frame has at least one pitch"),
                };
                let (near, far) = if a.abs_diff(q) <= b.abs_diff(q) { (a, b) } else { (b, a) };
                if on_track1 { (Some(near), Some(far)) } else { (Some(far), Some(near)) }
            }
            (PitchState::One(a), Some((Some(x), Some(y)))) => {
                let (dx, dy) = (a.abs_diff(x), a.abs_diff(y));
                if dx < dy || (dx == dy && x < y) { (Some(a), None) } else { (None, Some(a)) }
            }
            (PitchState::One(a), Some((one1, one2))) => {
                let (q, on_track1) = match (one1, one2) {
                    (Some(q), None) => (q, true),
                    (None, Some(q)) => (q, false),
                    _ => unreachable!("a pitched frame has at least one pitch"),
                };
                let same = a.abs_diff(q) <= p.lag_threshold;
                if same == on_track1 { (Some(a), None) } else { (None, Some(a)) }
            }
        };
        out.track1[m] = assigned.0;
        out.track2[m] = assigned.1;
        prev = Some(assigned);
    }
    out
}

/// Clear every run of consecutive pitched frames shorter than `min_run`, per track.
pub fn refine(tracks: &PitchTrackPair, min_run: usize) -> PitchTrackPair {
    let clean = |t: &[Option<usize>]| {
        let mut out = t.to_vec();
        let mut m = 0;
        while m < t.len() {
            if t[m].is_none() {
                m += 1;
                continue;
            }
            let start = m;
            while m < t.len() && t[m].is_some() {
                m += 1;
            }
            if m - start < min_run {
                out[start..m].iter_mut().for_each(|v| *v = None);
            }
        }
        out
    };
    PitchTrackPair { track1: clean(&tracks.track1), track2: clean(&tracks.track2), sample_rate: tracks.sample_rate }
}
