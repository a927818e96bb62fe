//! Hand-computed fixtures and synthetic test signals.

use cocasa::audio::{mix, synth_harmonic, Waveform};
use cocasa::evaluation::{gross_fine_error, pair_and_sum_errors, Denominator};
use cocasa::harmonic::{remove_known_harmonics, second_pitch, select_band_peaks, HarmonicParams, HarmonicVector, SpectralPeak};
use cocasa::tracks::PitchTrackPair;

pub const FS: u32 = 25_000;

/// Two sources as they appear in their 0 dB mixture, and the mixture.
pub struct Scene {
    pub source1: Waveform<f64>,
    pub source2: Waveform<f64>,
    pub mixture: Waveform<f64>,
}

pub fn scene(a: &Waveform<f64>, b: &Waveform<f64>, tmr_db: f64) -> Scene {
    let m = mix(a, b, tmr_db).unwrap();
    Scene {
        source1: a.scaled(m.peak_scale),
        source2: b.resized(a.len()).scaled(m.masker_scale * m.peak_scale),
        mixture: m.mixture,
    }
}

/// Harmonic complexes at 120 Hz and 190 Hz, mixed at 0 dB.
pub fn two_complex(secs: f64) -> Scene {
    let a = synth_harmonic::<f64>(120.0, 30, secs, FS, 0.9).unwrap().scaled(0.1);
    let b = synth_harmonic::<f64>(190.0, 20, secs, FS, 0.9).unwrap().scaled(0.1);
    scene(&a, &b, 0.0)
}

/// A 200 Hz complex below 1 kHz and a 125 Hz complex confined to 3-5 kHz.
pub fn disjoint_band(secs: f64) -> Scene {
    let a = synth_harmonic::<f64>(200.0, 5, secs, FS, 1.0).unwrap().scaled(0.1);
    let b: Vec<f64> = (0..a.len())
        .map(|i| {
            let t = i as f64 / FS as f64;
            (24..=40).map(|k| (std::f64::consts::TAU * 125.0 * k as f64 * t).cos()).sum::<f64>() * 0.02
        })
        .collect();
    scene(&a, &Waveform::new(b, FS).unwrap(), 0.0)
}

/// Fraction of frames whose lags include both `f1` and `f2` within 5%.
pub fn both_within_5pct(t: &PitchTrackPair, f1: f64, f2: f64) -> f64 {
    let n = t.frame_count();
    let hit = |m: usize, f: f64| t.lags_at(m).iter().any(|&l| (t.lag_to_hz(l) - f).abs() <= 0.05 * f);
    (0..n).filter(|&m| hit(m, f1) && hit(m, f2)).count() as f64 / n.max(1) as f64
}

fn peaks(v: &[(f64, f64)]) -> Vec<SpectralPeak<f64>> {
    v.iter().map(|&(freq, mag)| SpectralPeak { freq, mag }).collect()
}

fn unit(v: &[f64]) -> Vec<SpectralPeak<f64>> {
    v.iter().map(|&freq| SpectralPeak { freq, mag: 1.0 }).collect()
}

/// One rule and its fixture outcomes: `(name, passed, detail)`.
pub type RuleReport = (&'static str, Vec<(bool, String)>);

fn compare(got: Vec<f64>, want: &[f64]) -> (bool, String) {
    (got == want, format!("got {got:?}, want {want:?}"))
}

fn check_select(cases: &[(Vec<SpectralPeak<f64>>, Vec<f64>)]) -> Vec<(bool, String)> {
    let p = HarmonicParams::<f64>::default();
    cases.iter().map(|(input, want)| compare(select_band_peaks(input, &p).freqs(), want)).collect()
}

pub fn cutoff_rule() -> RuleReport {
    let cases = vec![
        (unit(&[3990.0, 4000.0, 4010.0]), vec![3990.0, 4000.0]),
        (unit(&[100.0, 5000.0]), vec![100.0]),
        (unit(&[4000.5]), vec![]),
        (unit(&[3999.9, 8000.0, 12000.0]), vec![3999.9]),
        // The strong 4100 Hz peak is removed before banding, so 4000 Hz survives.
        (peaks(&[(4000.0, 1.0), (4100.0, 10.0)]), vec![4000.0]),
    ];
    ("4000 Hz cutoff", check_select(&cases))
}

pub fn banding_rule() -> RuleReport {
    let cases = vec![
        (peaks(&[(100.0, 1.0), (150.0, 0.2)]), vec![100.0, 150.0]),
        (peaks(&[(100.0, 1.0), (150.0, 0.19)]), vec![100.0]),
        (peaks(&[(190.0, 1.0), (210.0, 0.1)]), vec![190.0, 210.0]),
        (peaks(&[(200.0, 0.1), (399.0, 1.0)]), vec![399.0]),
        (peaks(&[(50.0, 5.0), (120.0, 1.0), (180.0, 0.5), (250.0, 0.3)]), vec![50.0, 120.0, 250.0]),
        (peaks(&[(3810.0, 0.3), (3990.0, 2.0), (4000.0, 0.3)]), vec![3990.0, 4000.0]),
    ];
    ("200 Hz banding, 1/5 ratio", check_select(&cases))
}

pub fn subharmonic_rule() -> RuleReport {
    let p = HarmonicParams::<f64>::default();
    let cases: Vec<(f64, Vec<f64>, Vec<f64>)> = vec![
        (200.0, vec![100.0, 200.0, 300.0, 400.0], vec![300.0]),
        (200.0, vec![25.0, 50.0, 75.0], vec![75.0]),
        (160.0, vec![20.0, 40.0, 60.0, 80.0, 120.0], vec![60.0, 120.0]),
        (200.0, vec![102.9, 103.1, 1197.5], vec![103.1]),
        (300.0, vec![37.5, 75.0, 100.0, 150.0, 600.0], vec![100.0]),
        (240.0, vec![30.0, 60.0, 80.0, 120.0, 3840.0], vec![80.0]),
    ];
    let out = cases
        .iter()
        .map(|(f, input, want)| compare(remove_known_harmonics(&HarmonicVector::from_freqs(input), *f, &p).freqs(), want))
        .collect();
    ("subharmonic removal (1/2, 1/4, 1/8)", out)
}

fn multiples(f: f64, upto: f64) -> Vec<f64> {
    (1..).map(|k| k as f64 * f).take_while(|&x| x <= upto).collect()
}

fn check_second(cases: &[(Vec<f64>, Option<f64>, Option<f64>, Option<f64>)]) -> Vec<(bool, String)> {
    let p = HarmonicParams::<f64>::default();
    cases
        .iter()
        .map(|(v, prev, next, want)| {
            let got = second_pitch(&HarmonicVector::from_freqs(v), *prev, *next, &p);
            (got == *want, format!("prev {prev:?} next {next:?}: got {got:?}, want {want:?}"))
        })
        .collect()
}

pub fn gating_rule() -> RuleReport {
    let h150 = multiples(150.0, 3900.0);
    let cases = vec![
        (h150.clone(), Some(150.0), None, Some(150.0)),
        (h150.clone(), Some(158.0), None, Some(150.0)),
        (h150.clone(), Some(158.5), None, None),
        (h150.clone(), None, Some(145.0), Some(150.0)),
        (h150.clone(), None, None, None),
        (h150.clone(), Some(141.5), Some(159.0), None),
        (h150, Some(100.0), Some(142.0), Some(150.0)),
    ];
    ("8 Hz candidate gating", check_second(&cases))
}

/// 200 Hz with upper harmonics 1 Hz sharp (order `n_a`, mean deviation > 0)
/// plus an exact 130 Hz series of order `n_b`.
fn order_fixture(n_a: usize, n_b: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (1..=n_a).map(|k| if k == 1 { 200.0 } else { 200.0 * k as f64 + 1.0 }).collect();
    v.extend((1..=n_b).map(|k| 130.0 * k as f64));
    v
}

pub fn order_rule() -> RuleReport {
    let cases = vec![
        // 9 >= 0.9 * 10: both pass and the exact 130 Hz series wins on deviation.
        (order_fixture(10, 9), Some(200.0), Some(130.0), Some(130.0)),
        // 8 < 9: the 130 Hz candidate is filtered out.
        (order_fixture(10, 8), Some(200.0), Some(130.0), Some(200.0)),
        // 9 < 0.9 * 11 = 9.9.
        (order_fixture(11, 9), Some(200.0), Some(130.0), Some(200.0)),
        // 10 >= 0.9 * 11.
        (order_fixture(11, 10), Some(200.0), Some(130.0), Some(130.0)),
        // Only one candidate is gated in, so the filter keeps it.
        (order_fixture(10, 5), None, Some(130.0), Some(130.0)),
        // 200 Hz harmonics of an exact 100 Hz series: 100 has order 40, 200 only 20.
        (multiples(100.0, 4000.0), Some(100.0), Some(200.0), Some(100.0)),
    ];
    ("9/10 harmonic-order filter", check_second(&cases))
}

pub fn harmonic_rules() -> Vec<RuleReport> {
    vec![cutoff_rule(), banding_rule(), subharmonic_rule(), gating_rule(), order_rule()]
}

/// `(name, passed, detail)` for each hand-computed metric fixture.
pub fn metric_fixtures() -> Vec<(&'static str, bool, String)> {
    let mut out = Vec::new();
    let mut check = |name: &'static str, est: &[Option<f64>], gt: &[Option<f64>], d: Denominator, want: (f64, f64, usize, usize)| {
        let e = gross_fine_error(est, gt, d).unwrap();
        let got = (e.e_gs, e.e_fn, e.scored, e.gross);
        out.push((name, got == want, format!("got {got:?}, want {want:?}")));
    };
    let g = Some(100.0);
    check("mixed errors", &[Some(100.0), Some(110.0), Some(90.0), None], &[g; 4], Denominator::Voiced, (25.0, 20.0 / 3.0, 4, 1));
    check(
        "exact-arithmetic boundary",
        &[Some(119.5), Some(120.0), Some(120.5), Some(130.1)],
        &[g; 4],
        Denominator::Voiced,
        (50.0, 19.75, 4, 2),
    );
    check(
        "20% boundary, 119.9 vs 120.1",
        &[Some(119.9), Some(120.1)],
        &[g; 2],
        Denominator::Voiced,
        (50.0, 100.0 * (119.9f64 - 100.0) / 100.0, 2, 1),
    );
    check("129.9 and 130.1 Hz", &[Some(129.9), Some(130.1)], &[g; 2], Denominator::Voiced, (100.0, 0.0, 2, 2));
    let est = [Some(210.0), Some(100.0), None, None];
    let gt = [Some(200.0), None, None, Some(150.0)];
    check("voiced denominator", &est, &gt, Denominator::Voiced, (50.0, 5.0, 2, 1));
    check("strict denominator", &est, &gt, Denominator::Strict, (200.0 / 3.0, 5.0, 3, 2));

    let lag = |hz: f64| (FS as f64 / hz).round() as usize;
    let g1 = vec![Some(lag(200.0)); 4];
    let g2 = vec![Some(lag(125.0)), Some(lag(125.0)), None, None];
    let t = PitchTrackPair::new(vec![Some(lag(125.0)), None, None, Some(lag(250.0))], g1.clone(), FS).unwrap();
    let r = pair_and_sum_errors(&t, &g1, &g2, Denominator::Voiced).unwrap();
    // Swapped: track 2 scores 0% on g1, track 1 scores 50% on g2 (one miss of two).
    let want = (true, 50.0, 0.0);
    let got = (r.swapped, r.e_gs_sum, r.e_fn_sum);
    out.push(("pairing picks the swapped assignment", got == want, format!("got {got:?}, want {want:?}")));
    out
}
