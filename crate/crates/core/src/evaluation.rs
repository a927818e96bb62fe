//! Pitch error metrics against summary-correlogram ground truth, and compensated SNR.

use std::fmt::Write as _;

use crate::audio::{FrameSpec, Waveform};
use crate::error::{Error, Result};
use crate::peripheral::{normalize_summary, raw_summary, FilterbankSpec, LagRange, PeripheralAnalysis, PeripheralParams};
use crate::scalar::Real;
use crate::segregation::Resynthesizer;
use crate::tracks::{prominent_pitch, EnrichmentParams, PitchTrackPair};

pub const SNR_CAP_DB: f64 = 100.0;

/// How frames without a ground-truth pitch are treated by [`gross_fine_error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// Only frames with a ground-truth pitch are scored.
    #[default]
    Voiced,
    /// Frames where only the estimate has a pitch also count, as gross errors.
    Strict,
}

/// Per-frame ground-truth pitch lags of a clean source.
///
/// A frame is voiced when its summary peak over the pitch range reaches
/// `voicing_threshold` times the summary at lag zero.
pub fn ground_truth_pitch<T: Real>(
    clean: &Waveform<T>,
    params: &PeripheralParams<T>,
    range: LagRange,
    enrich: &EnrichmentParams<T>,
    voicing_threshold: T,
) -> Result<Vec<Option<usize>>> {
    let an = PeripheralAnalysis::run(clean, params, range)?;
    Ok(an
        .frames
        .iter()
        .map(|f| {
            let raw = raw_summary(f);
            let peak = raw[range.min..=range.max].iter().fold(T::neg_infinity(), |m, &v| m.max(v));
            if !(raw[0] > T::zero()) || peak / raw[0] < voicing_threshold {
                return None;
            }
            prominent_pitch(&normalize_summary(raw, range), range, enrich)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PitchErrors {
    /// Gross error rate, percent of scored frames.
    pub e_gs: f64,
    /// Mean relative deviation of non-gross frames, percent.
    pub e_fn: f64,
    pub scored: usize,
    pub gross: usize,
}

/// Gross (> 20% relative deviation or missing) and fine error of one track, in Hz.
pub fn gross_fine_error(est: &[Option<f64>], gt: &[Option<f64>], denominator: Denominator) -> Result<PitchErrors> {
    if est.len() != gt.len() {
        return Err(Error::LengthMismatch(est.len(), gt.len()));
    }
    let mut scored = 0usize;
    let mut gross = 0usize;
    let mut fine = 0.0;
    let mut fine_n = 0usize;
    for (e, g) in est.iter().zip(gt) {
        match (e, g) {
            (_, Some(g)) => {
                scored += 1;
                match e {
                    Some(e) if (e - g).abs() / g <= 0.2 => {
                        fine += 100.0 * (e - g).abs() / g;
                        fine_n += 1;
                    }
                    _ => gross += 1,
                }
            }
            (Some(_), None) if denominator == Denominator::Strict => {
                scored += 1;
                gross += 1;
            }
            _ => {}
        }
    }
    Ok(PitchErrors {
        e_gs: if scored > 0 { 100.0 * gross as f64 / scored as f64 } else { 0.0 },
        e_fn: if fine_n > 0 { fine / fine_n as f64 } else { 0.0 },
        scored,
        gross,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairedErrors {
    /// Track 1 was scored against ground truth 2 (and vice versa).
    pub swapped: bool,
    pub per_track: [PitchErrors; 2],
    pub e_gs_sum: f64,
    pub e_fn_sum: f64,
}

fn lags_to_hz(lags: &[Option<usize>], fs: u32) -> Vec<Option<f64>> {
    lags.iter().map(|l| l.map(|l| fs as f64 / l as f64)).collect()
}

/// Score both tracks under the pairing with the smaller summed gross error.
pub fn pair_and_sum_errors(
    tracks: &PitchTrackPair,
    gt1: &[Option<usize>],
    gt2: &[Option<usize>],
    denominator: Denominator,
) -> Result<PairedErrors> {
    let fs = tracks.sample_rate;
    let (t1, t2) = (lags_to_hz(&tracks.track1, fs), lags_to_hz(&tracks.track2, fs));
    let (g1, g2) = (lags_to_hz(gt1, fs), lags_to_hz(gt2, fs));
    let build = |a: PitchErrors, b: PitchErrors, swapped| PairedErrors {
        swapped,
        per_track: [a, b],
        e_gs_sum: a.e_gs + b.e_gs,
        e_fn_sum: a.e_fn + b.e_fn,
    };
    let direct = build(gross_fine_error(&t1, &g1, denominator)?, gross_fine_error(&t2, &g2, denominator)?, false);
    let swapped = build(gross_fine_error(&t1, &g2, denominator)?, gross_fine_error(&t2, &g1, denominator)?, true);
    Ok(if swapped.e_gs_sum < direct.e_gs_sum { swapped } else { direct })
}

/// The clean source passed through the filterbank and an all-ones-mask resynthesis.
pub fn compensated_reference<T: Real>(clean: &Waveform<T>, spec: &FilterbankSpec<T>, frames: &FrameSpec<T>) -> Result<Waveform<T>> {
    let r = Resynthesizer::new(clean, spec, frames)?;
    Ok(r.synthesize_all(frames.frame_count(clean.len(), clean.sample_rate()).max(1)))
}

/// `10 log10(sum ref^2 / sum (ref - est)^2)`, capped at +100 dB; the shorter signal is zero-padded.
pub fn snr<T: Real>(est: &Waveform<T>, reference: &Waveform<T>) -> Result<f64> {
    if est.sample_rate() != reference.sample_rate() {
        return Err(Error::SampleRateMismatch(est.sample_rate(), reference.sample_rate()));
    }
    let n = est.len().max(reference.len());
    let at = |x: &[T], i: usize| x.get(i).map_or(0.0, |v| v.as_f64());
    let (mut sig, mut err) = (0.0, 0.0);
    for i in 0..n {
        let r = at(reference.samples(), i);
        let d = r - at(est.samples(), i);
        sig += r * r;
        err += d * d;
    }
    if sig == 0.0 {
        return Err(Error::SilentReference);
    }
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (sig / err).log10()).min(SNR_CAP_DB))
}

/// Pitch and separation scores for one mixture.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub condition: String,
    pub method: String,
    pub pitch: Option<PairedErrors>,
    pub snr1: f64,
    pub snr2: f64,
    pub snr_avg: f64,
    pub mixture_snr_avg: f64,
    pub voicing_threshold: f64,
    pub frames: usize,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "condition,method,e_gs_sum,e_fn_sum,e_gs1,e_fn1,e_gs2,e_fn2,scored1,scored2,swapped,snr1_db,snr2_db,snr_avg_db,mixture_snr_avg_db,voicing_threshold,frames";

    pub fn csv_row(&self) -> String {
        let p = self.pitch.unwrap_or_default();
        let [a, b] = p.per_track;
        format!(
            "{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
            self.condition,
            self.method,
            p.e_gs_sum,
            p.e_fn_sum,
            a.e_gs,
            a.e_fn,
            b.e_gs,
            b.e_fn,
            a.scored,
            b.scored,
            u8::from(p.swapped),
            self.snr1,
            self.snr2,
            self.snr_avg,
            self.mixture_snr_avg,
            self.voicing_threshold,
            self.frames
        )
    }

    pub fn to_csv(reports: &[EvalReport]) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    /// Two fixed-width tables: pitch errors, then segregation SNR.
    pub fn to_table(reports: &[EvalReport]) -> String {
        let mut out = String::from("PITCH TRACKING\n");
        let _ = writeln!(out, "{:<24} {:<20} {:>10} {:>10}", "condition", "method", "E_gs %", "E_fn %");
        for r in reports.iter().filter(|r| r.pitch.is_some()) {
            let p = r.pitch.unwrap();
            let _ = writeln!(out, "{:<24} {:<20} {:>10.2} {:>10.2}", r.condition, r.method, p.e_gs_sum, p.e_fn_sum);
        }
        out.push_str("\nSEGREGATION\n");
        let _ = writeln!(out, "{:<24} {:<20} {:>10} {:>10} {:>10} {:>10}", "condition", "method", "SNR1 dB", "SNR2 dB", "avg dB", "mix dB");
        for r in reports {
            let _ = writeln!(
                out,
                "{:<24} {:<20} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
                r.condition, r.method, r.snr1, r.snr2, r.snr_avg, r.mixture_snr_avg
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gross_and_fine_examples() {
        let gt = [Some(100.0)];
        let e = gross_fine_error(&[Some(130.0)], &gt, Denominator::Voiced).unwrap();
        assert_eq!((e.e_gs, e.e_fn), (100.0, 0.0));
        let e = gross_fine_error(&[Some(110.0)], &gt, Denominator::Voiced).unwrap();
        assert_eq!(e.e_gs, 0.0);
        assert!((e.e_fn - 10.0).abs() < 1e-9);
        let same = [Some(120.0), None, Some(80.0)];
        assert_eq!(gross_fine_error(&same, &same, Denominator::Voiced).unwrap().e_gs, 0.0);
        assert!(gross_fine_error(&same, &gt, Denominator::Voiced).is_err());
    }

    #[test]
    fn strict_counts_spurious_pitches() {
        let gt = [Some(100.0), None];
        let est = [Some(100.0), Some(150.0)];
        assert_eq!(gross_fine_error(&est, &gt, Denominator::Voiced).unwrap().e_gs, 0.0);
        assert_eq!(gross_fine_error(&est, &gt, Denominator::Strict).unwrap().e_gs, 50.0);
    }

    #[test]
    fn pairing_resolves_label_swap() {
        let g1 = vec![Some(200), Some(200)];
        let g2 = vec![Some(130), None];
        let t = PitchTrackPair::new(g2.clone(), g1.clone(), 25_000).unwrap();
        let r = pair_and_sum_errors(&t, &g1, &g2, Denominator::Voiced).unwrap();
        assert!(r.swapped);
        assert_eq!((r.e_gs_sum, r.e_fn_sum), (0.0, 0.0));
    }

    #[test]
    fn snr_definition() {
        let r = Waveform::<f64>::new(vec![1.0, -1.0, 1.0, -1.0], 8000).unwrap();
        assert_eq!(snr(&r, &r).unwrap(), SNR_CAP_DB);
        let e = Waveform::new(vec![0.0, 0.0, 2.0, 0.0], 8000).unwrap();
        assert!((snr(&e, &r).unwrap() - 0.0).abs() < 1e-12);
        let z = Waveform::<f64>::silence(4, 8000).unwrap();
        assert!(matches!(snr(&r, &z), Err(Error::SilentReference)));
    }
}
