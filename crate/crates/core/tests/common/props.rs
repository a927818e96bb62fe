//! Randomised property checks shared by the proptest suites and the acceptance run.

use cocasa::audio::Waveform;
use cocasa::multipitch::PitchState;
use cocasa::peripheral::{FilterbankSpec, LagRange, PeripheralAnalysis, PeripheralParams};
use cocasa::tracks::{enrich, group, group_with_seed, refine, EnrichmentParams, PitchTrackPair, Seed};
use rand::Rng;

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond { Ok(()) } else { Err(msg()) }
}

/// A random-walk lag inside `range`, jumping anywhere with small probability.
fn walk<R: Rng>(rng: &mut R, prev: usize, range: LagRange) -> usize {
    if rng.gen_bool(0.1) {
        rng.gen_range(range.min..=range.max)
    } else {
        let step = rng.gen_range(-6i64..=6);
        (prev as i64 + step).clamp(range.min as i64, range.max as i64) as usize
    }
}

pub fn random_states<R: Rng>(rng: &mut R, range: LagRange, frames: usize) -> Vec<PitchState> {
    let (mut a, mut b) = (rng.gen_range(range.min..=range.max), rng.gen_range(range.min..=range.max));
    (0..frames)
        .map(|_| {
            a = walk(rng, a, range);
            b = walk(rng, b, range);
            match rng.gen_range(0..10) {
                0..=1 => PitchState::Zero,
                2..=5 => PitchState::One(if rng.gen_bool(0.5) { a } else { b }),
                _ => PitchState::pair(a, b),
            }
        })
        .collect()
}

pub fn random_prominents<R: Rng>(rng: &mut R, states: &[PitchState], range: LagRange) -> Vec<Option<usize>> {
    states
        .iter()
        .map(|s| match rng.gen_range(0..4) {
            0 => None,
            1 => s.lags().first().copied(),
            _ => Some(rng.gen_range(range.min..=range.max)),
        })
        .collect()
}

fn random_track<R: Rng>(rng: &mut R, frames: usize, range: LagRange) -> Vec<Option<usize>> {
    let mut on = rng.gen_bool(0.5);
    let mut lag = rng.gen_range(range.min..=range.max);
    (0..frames)
        .map(|_| {
            if rng.gen_bool(0.25) {
                on = !on;
            }
            lag = walk(rng, lag, range);
            on.then_some(lag)
        })
        .collect()
}

/// Two tracks that never carry the same lag in a frame.
pub fn random_tracks<R: Rng>(rng: &mut R, frames: usize, range: LagRange, fs: u32) -> PitchTrackPair {
    let t1 = random_track(rng, frames, range);
    let mut t2 = random_track(rng, frames, range);
    for (a, b) in t1.iter().zip(t2.iter_mut()) {
        if a.is_some() && a == b {
            *b = None;
        }
    }
    PitchTrackPair::new(t1, t2, fs).expect("distinct lags")
}

fn shape<R: Rng>(rng: &mut R) -> (LagRange, usize) {
    let range = if rng.gen_bool(0.5) { LagRange::speech(25_000) } else { LagRange::new(40, 40 + rng.gen_range(1..40)).unwrap() };
    (range, rng.gen_range(0..80))
}

/// Enrichment never lowers a frame's pitch count, never drops an HMM lag,
/// leaves two-pitch frames alone and pitches every frame with a prominent pitch.
pub fn enrichment_never_lowers_cardinality<R: Rng>(rng: &mut R) -> Check {
    let (range, frames) = shape(rng);
    let states = random_states(rng, range, frames);
    let prom = random_prominents(rng, &states, range);
    let p = EnrichmentParams::<f64> { lag_threshold: rng.gen_range(1..60), ..EnrichmentParams::default() };
    let out = enrich(&states, &prom, &p).map_err(|e| e.to_string())?;
    ensure(out.len() == states.len(), || "length changed".into())?;
    for (m, (a, b)) in states.iter().zip(&out).enumerate() {
        ensure(b.cardinality() >= a.cardinality(), || format!("frame {m}: {a:?} -> {b:?}"))?;
        ensure(a.lags().iter().all(|&l| b.contains(l)), || format!("frame {m}: lag dropped {a:?} -> {b:?}"))?;
        ensure(b.validate(range).is_ok(), || format!("frame {m}: invalid {b:?}"))?;
        ensure(!matches!(a, PitchState::Two(..)) || a == b, || format!("frame {m}: two-pitch frame changed"))?;
        ensure(prom[m].is_none() || b.cardinality() >= 1, || format!("frame {m}: prominent pitch ignored"))?;
    }
    Ok(())
}

fn runs(t: &[Option<usize>]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 0;
    for v in t.iter().chain(std::iter::once(&None)) {
        if v.is_some() {
            n += 1;
        } else if n > 0 {
            out.push(n);
            n = 0;
        }
    }
    out
}

/// Refinement leaves no run shorter than `min_run`, only clears frames, and is idempotent.
pub fn refine_removes_short_runs_idempotently<R: Rng>(rng: &mut R) -> Check {
    let (range, frames) = shape(rng);
    let t = random_tracks(rng, frames, range, 25_000);
    let min_run = rng.gen_range(1..10);
    let r = refine(&t, min_run);
    for k in 0..2 {
        ensure(runs(r.track(k)).iter().all(|&n| n >= min_run), || format!("track {k}: short run left, min {min_run}"))?;
        for (m, (a, b)) in t.track(k).iter().zip(r.track(k)).enumerate() {
            ensure(b.is_none() || a == b, || format!("track {k} frame {m}: {a:?} -> {b:?}"))?;
        }
    }
    ensure(refine(&r, min_run) == r, || "refine is not idempotent".into())
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Grouping moves lags between tracks but keeps every frame's lag multiset.
pub fn grouping_preserves_lag_multiset<R: Rng>(rng: &mut R) -> Check {
    let (range, frames) = shape(rng);
    let states = random_states(rng, range, frames);
    let p = EnrichmentParams::<f64> { lag_threshold: rng.gen_range(1..60), ..EnrichmentParams::default() };
    let seed = if rng.gen_bool(0.5) { Seed::SmallerLagTrack1 } else { Seed::SmallerLagTrack2 };
    let g = group_with_seed(&states, &p, 25_000, seed);
    ensure(g.frame_count() == states.len(), || "frame count changed".into())?;
    for (m, s) in states.iter().enumerate() {
        let got = sorted(g.lags_at(m));
        ensure(got == sorted(s.lags()), || format!("frame {m}: {s:?} grouped as {got:?}"))?;
    }
    Ok(())
}

/// Flipping the seed swaps the two tracks exactly.
pub fn seed_flip_swaps_tracks<R: Rng>(rng: &mut R) -> Check {
    let (range, frames) = shape(rng);
    let states = random_states(rng, range, frames);
    let p = EnrichmentParams::<f64>::default();
    let a = group(&states, &p, 25_000);
    let b = group_with_seed(&states, &p, 25_000, Seed::SmallerLagTrack2);
    ensure(a.swapped() == b, || "seed flip is not a track swap".into())
}

/// Direct double-loop normalised autocorrelation of `x - baseline` over the
/// `w` samples ending at `end`; reads before sample 0 are zero.
pub fn direct_acf(x: &[f64], baseline: f64, end: usize, w: usize, lag: usize) -> f64 {
    let at = |i: i64| if i < 0 { 0.0 } else { x[i as usize] - baseline };
    let (mut num, mut den) = (0.0, 0.0);
    for n in 0..w as i64 {
        let t = end as i64 - n;
        num += at(t) * at(t - lag as i64);
        den += at(t) * at(t);
    }
    if den > 0.0 { num / den } else { 0.0 }
}

/// One random (signal, channel, frame, lag) case of the full peripheral model
/// against the direct sums; returns the worst relative error of `A_H` and `A_E`.
pub fn correlogram_case<R: Rng>(rng: &mut R) -> Result<f64, String> {
    let fs = 25_000;
    let n = rng.gen_range(1_000..3_000);
    let f0 = rng.gen_range(80.0..400.0);
    let noise = rng.gen_range(0.0..1.0);
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs as f64;
            let h: f64 = (1..=8).map(|k| (std::f64::consts::TAU * f0 * k as f64 * t).cos() / k as f64).sum();
            0.05 * h + 0.05 * noise * rng.gen_range(-1.0..1.0)
        })
        .collect();
    let w = Waveform::new(x, fs).map_err(|e| e.to_string())?;
    let params = PeripheralParams {
        filterbank: FilterbankSpec { n_channels: 12, ..FilterbankSpec::default() },
        ..PeripheralParams::default()
    };
    let range = LagRange::speech(fs);
    let an = PeripheralAnalysis::run(&w, &params, range).map_err(|e| e.to_string())?;
    if an.frames.is_empty() {
        return Err("no frames".into());
    }
    let c = rng.gen_range(0..12);
    let m = rng.gen_range(0..an.frames.len());
    let lag = rng.gen_range(0..=range.max);
    let win = params.frame.len_samples(fs);
    let end = m * params.frame.shift_samples(fs) + win - 1;
    let cg = &an.cochleagram;
    let oh = direct_acf(&cg.h[c], cg.baseline[c], end, win, lag);
    let oe = direct_acf(&cg.h_e[c], 0.0, end, win, lag);
    let rel = |a: f64, o: f64| (a - o).abs() / o.abs().max(1e-3);
    Ok(rel(an.frames[m].a_h(c, lag), oh).max(rel(an.frames[m].a_e(c, lag), oe)))
}
