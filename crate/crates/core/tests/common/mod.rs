#![allow(dead_code)]

pub mod fixtures;
pub mod props;

use cocasa::multipitch::{FrameEvidence, LagGrid, PitchState, Tracker};
use cocasa::peripheral::LagRange;
use rand::Rng;

/// Random normalised summary plus residual table on `grid`.
pub fn random_evidence<R: Rng>(rng: &mut R, grid: &LagGrid) -> FrameEvidence<f64> {
    let range = grid.range();
    let mut s: Vec<f64> = (0..=range.max).map(|_| rng.gen_range(-0.2..1.0)).collect();
    if rng.gen_bool(0.1) {
        s.iter_mut().for_each(|v| *v = 0.0);
    } else {
        let peak = s[range.min..=range.max].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if peak <= 0.0 {
            s[range.min] = 1.0;
        } else {
            s.iter_mut().for_each(|v| *v /= peak);
            let at = rng.gen_range(range.min..=range.max);
            s[at] = 1.0;
        }
    }
    let l = grid.len();
    let residual = (0..l * l).map(|_| rng.gen_range(0.0..1.0)).collect();
    FrameEvidence::with_residual(s, grid, residual).unwrap()
}

/// Maximum path score by enumerating every state sequence, accumulated in the
/// same order as `Tracker::path_score`.
pub fn exhaustive_best(tracker: &Tracker<f64>, evidence: &[FrameEvidence<f64>]) -> (f64, Vec<PitchState>) {
    let states = tracker.states().to_vec();
    let obs: Vec<Vec<f64>> = evidence
        .iter()
        .map(|ev| states.iter().map(|s| tracker.observation_score(s, ev).unwrap()).collect())
        .collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut path = Vec::with_capacity(evidence.len());
    fn rec(
        t: usize,
        acc: f64,
        path: &mut Vec<usize>,
        states: &[PitchState],
        obs: &[Vec<f64>],
        tracker: &Tracker<f64>,
        best: &mut (f64, Vec<PitchState>),
    ) {
        if t == obs.len() {
            if acc > best.0 {
                *best = (acc, path.iter().map(|&k| states[k]).collect());
            }
            return;
        }
        for k in 0..states.len() {
            let v = if t == 0 {
                obs[0][k]
            } else {
                acc + tracker.transition_score(&states[path[t - 1]], &states[k]) + obs[t][k]
            };
            path.push(k);
            rec(t + 1, v, path, states, obs, tracker, best);
            path.pop();
        }
    }
    rec(0, 0.0, &mut path, &states, &obs, tracker, &mut best);
    best
}

/// A small instance shape whose state-sequence count stays enumerable.
pub fn small_shape<R: Rng>(rng: &mut R) -> (LagRange, usize) {
    loop {
        let l = rng.gen_range(1..=8usize);
        let frames = rng.gen_range(1..=6usize);
        let states = 1 + l + l * (l - 1) / 2;
        if (states as f64).powi(frames as i32) <= 2.0e6 {
            return (LagRange::new(50, 50 + l - 1).unwrap(), frames);
        }
    }
}
