//! Zero/one/two-pitch state space and Viterbi tracking over summary correlograms.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::peripheral::{summary_acf, CorrelogramFrame, LagRange};
use crate::scalar::Real;

/// A frame's pitch hypothesis. Two-pitch states keep their lags sorted (`a < b`).
///
/// The derived ordering (fewer pitches first, then lexicographic lags) is the
/// tracker's tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PitchState {
    Zero,
    One(usize),
    Two(usize, usize),
}

impl PitchState {
    /// Unordered pair; collapses to a single pitch if both lags coincide.
    pub fn pair(a: usize, b: usize) -> Self {
        match a.cmp(&b) {
            Ordering::Less => PitchState::Two(a, b),
            Ordering::Greater => PitchState::Two(b, a),
            Ordering::Equal => PitchState::One(a),
        }
    }

    pub fn from_lags(lags: &[usize]) -> Self {
        match *lags {
            [] => PitchState::Zero,
            [a] => PitchState::One(a),
            [a, b] => PitchState::pair(a, b),
            _ => panic!("at most two pitches per frame"),
        }
    }

    pub fn cardinality(&self) -> usize {
        match self {
            PitchState::Zero => 0,
            PitchState::One(_) => 1,
            PitchState::Two(..) => 2,
        }
    }

    pub fn lags(&self) -> Vec<usize> {
        match *self {
            PitchState::Zero => vec![],
            PitchState::One(a) => vec![a],
            PitchState::Two(a, b) => vec![a, b],
        }
    }

    pub fn contains(&self, lag: usize) -> bool {
        self.lags().contains(&lag)
    }

    pub fn validate(&self, range: LagRange) -> Result<()> {
        if let PitchState::Two(a, b) = *self {
            if a >= b {
                return Err(Error::InvalidParameter(format!("two-pitch state ({a}, {b}) is not a sorted distinct pair")));
            }
        }
        match self.lags().into_iter().find(|&l| !range.contains(l)) {
            Some(l) => Err(Error::InvalidParameter(format!("lag {l} outside [{}, {}]", range.min, range.max))),
            None => Ok(()),
        }
    }
}

/// Tracker model parameters (log-score units unless noted).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerParams<T: Real = f64> {
    /// Cost per pitch present and per change in pitch count.
    pub beta: T,
    /// Continuity scale in lag samples.
    pub sigma: T,
    pub self_bonus: T,
    pub floor: T,
    /// Penalty on a lag whose half-lag is also periodic, scaled by the
    /// summary at the half-lag. Counters octave-down errors.
    pub octave_cost: T,
    /// A channel belongs to a pitch when its correlogram peak near that lag
    /// reaches this fraction of its overall peak.
    pub exclusion_ratio: T,
    pub lag_stride: usize,
}

impl<T: Real> Default for TrackerParams<T> {
    fn default() -> Self {
        Self {
            beta: T::lit(0.35),
            sigma: T::lit(4.0),
            self_bonus: T::lit(0.1),
            floor: T::lit(1e-3),
            octave_cost: T::lit(0.5),
            exclusion_ratio: T::lit(0.85),
            lag_stride: 1,
        }
    }
}

impl<T: Real> TrackerParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.beta > T::zero()) {
            return bad("beta must be > 0");
        }
        if !(self.sigma > T::zero()) {
            return bad("sigma must be > 0");
        }
        if !(self.floor > T::zero()) {
            return bad("floor must be > 0");
        }
        if !(self.octave_cost >= T::zero()) {
            return bad("octave_cost must be >= 0");
        }
        if !(self.exclusion_ratio > T::zero() && self.exclusion_ratio <= T::one()) {
            return bad("exclusion_ratio must lie in (0, 1]");
        }
        if self.lag_stride == 0 {
            return bad("lag_stride must be >= 1");
        }
        Ok(())
    }
}

/// Candidate lags `min, min + stride, ...` up to `max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagGrid {
    range: LagRange,
    stride: usize,
    lags: Vec<usize>,
}

impl LagGrid {
    pub fn new(range: LagRange, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidParameter("lag stride must be >= 1".into()));
        }
        let lags = (range.min..=range.max).step_by(stride).collect();
        Ok(Self { range, stride, lags })
    }

    pub fn range(&self) -> LagRange {
        self.range
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn index_of(&self, lag: usize) -> Option<usize> {
        if lag < self.range.min || lag > self.range.max || (lag - self.range.min) % self.stride != 0 {
            return None;
        }
        Some((lag - self.range.min) / self.stride)
    }

    pub fn state_count(&self) -> usize {
        let l = self.len();
        1 + l + l * l.saturating_sub(1) / 2
    }

    /// Position of a state in [`enumerate_states`] order.
    pub fn state_index(&self, s: &PitchState) -> Option<usize> {
        let l = self.len();
        match *s {
            PitchState::Zero => Some(0),
            PitchState::One(a) => self.index_of(a).map(|i| 1 + i),
            PitchState::Two(a, b) => {
                let (i, j) = (self.index_of(a)?, self.index_of(b)?);
                (i < j).then(|| 1 + l + pair_index(l, i, j))
            }
        }
    }

    pub fn state_at(&self, idx: usize) -> PitchState {
        let l = self.len();
        if idx == 0 {
            return PitchState::Zero;
        }
        if idx <= l {
            return PitchState::One(self.lags[idx - 1]);
        }
        let mut k = idx - 1 - l;
        for i in 0..l {
            let row = l - i - 1;
            if k < row {
                return PitchState::Two(self.lags[i], self.lags[i + 1 + k]);
            }
            k -= row;
        }
        panic!("state index {idx} out of range");
    }
}

fn pair_index(l: usize, i: usize, j: usize) -> usize {
    i * l - i * (i + 1) / 2 + (j - i - 1)
}

/// Every state over the grid: S0, then each S1, then each unordered S2 pair.
pub fn enumerate_states(range: LagRange, stride: usize) -> Result<Vec<PitchState>> {
    let grid = LagGrid::new(range, stride)?;
    let lags = grid.lags();
    let mut out = Vec::with_capacity(grid.state_count());
    out.push(PitchState::Zero);
    out.extend(lags.iter().map(|&a| PitchState::One(a)));
    for (i, &a) in lags.iter().enumerate() {
        out.extend(lags[i + 1..].iter().map(|&b| PitchState::Two(a, b)));
    }
    Ok(out)
}

/// Per-frame evidence for the observation model.
///
/// `residual[i * L + j]` is the mean correlogram at grid lag `j` over the
/// channels that do not belong to grid lag `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEvidence<T: Real = f64> {
    summary: Vec<T>,
    grid: LagGrid,
    residual: Option<Vec<T>>,
}

impl<T: Real> FrameEvidence<T> {
    /// Evidence from a normalised summary alone; no second-pitch evidence.
    pub fn from_summary(summary: Vec<T>, grid: &LagGrid) -> Result<Self> {
        check_normalized(&summary, grid.range())?;
        Ok(Self { summary, grid: grid.clone(), residual: None })
    }

    /// Evidence from a normalised summary plus an explicit residual table.
    pub fn with_residual(summary: Vec<T>, grid: &LagGrid, residual: Vec<T>) -> Result<Self> {
        check_normalized(&summary, grid.range())?;
        if residual.len() != grid.len() * grid.len() {
            return Err(Error::GeometryMismatch("residual table must be L x L".into()));
        }
        Ok(Self { summary, grid: grid.clone(), residual: Some(residual) })
    }

    pub fn from_correlogram(cf: &CorrelogramFrame<T>, grid: &LagGrid, params: &TrackerParams<T>) -> Result<Self> {
        if cf.lag_range != grid.range() {
            return Err(Error::GeometryMismatch("correlogram and grid lag ranges differ".into()));
        }
        let summary = summary_acf(cf);
        let residual = residual_table(cf, grid, params);
        Ok(Self { summary, grid: grid.clone(), residual: Some(residual) })
    }

    pub fn summary(&self) -> &[T] {
        &self.summary
    }

    pub fn grid(&self) -> &LagGrid {
        &self.grid
    }

    pub fn residual(&self, i: usize, j: usize) -> T {
        match &self.residual {
            Some(r) => r[i * self.grid.len() + j],
            None => T::zero(),
        }
    }

    fn residual_peak(&self, i: usize) -> T {
        let l = self.grid.len();
        match &self.residual {
            Some(r) => r[i * l..(i + 1) * l].iter().fold(T::zero(), |m, &v| m.max(v)),
            None => T::zero(),
        }
    }
}

/// `round(lag / 2)` when it is still an admissible pitch lag.
pub(crate) fn half_lag(lag: usize, range: LagRange) -> Option<usize> {
    let h = (lag + 1) / 2;
    (h >= range.min).then_some(h)
}

fn check_normalized<T: Real>(s: &[T], range: LagRange) -> Result<()> {
    if s.len() <= range.max {
        return Err(Error::GeometryMismatch(format!("summary has {} lags, need {}", s.len(), range.max + 1)));
    }
    let peak = s[range.min..=range.max].iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let peak = peak.as_f64();
    if !(peak == 0.0 || (peak - 1.0).abs() <= 1e-9) {
        return Err(Error::Unnormalized(peak));
    }
    Ok(())
}

fn residual_table<T: Real>(cf: &CorrelogramFrame<T>, grid: &LagGrid, params: &TrackerParams<T>) -> Vec<T> {
    let l = grid.len();
    let range = grid.range();
    let radius = params.sigma.floor().to_usize().unwrap_or(0);
    let lags = grid.lags();
    // Channel membership test per grid lag; silent channels never count.
    let mut member = vec![vec![true; l]; cf.n_channels()];
    for (c, m) in member.iter_mut().enumerate() {
        let row = cf.a_h_row(c);
        let peak = row[range.min..=range.max].iter().fold(T::neg_infinity(), |a, &v| a.max(v));
        if !(peak > T::zero()) {
            continue;
        }
        let thresh = params.exclusion_ratio * peak;
        for (i, &lag) in lags.iter().enumerate() {
            let lo = lag.saturating_sub(radius).max(range.min);
            let hi = (lag + radius).min(range.max);
            let local = row[lo..=hi].iter().fold(T::neg_infinity(), |a, &v| a.max(v));
            m[i] = local >= thresh;
        }
    }
    let mut out = vec![T::zero(); l * l];
    for i in 0..l {
        let mut count = 0usize;
        let dst = &mut out[i * l..(i + 1) * l];
        for (c, m) in member.iter().enumerate() {
            if m[i] {
                continue;
            }
            count += 1;
            let row = cf.a_h_row(c);
            for (d, &lag) in dst.iter_mut().zip(lags) {
                *d += row[lag];
            }
        }
        if count > 0 {
            let n = T::from_usize_lossy(count);
            dst.iter_mut().for_each(|v| *v /= n);
        }
    }
    out
}

/// Scores the observation and transition models over one lag grid.
#[derive(Debug, Clone)]
pub struct Tracker<T: Real = f64> {
    params: TrackerParams<T>,
    grid: LagGrid,
    half: Vec<Option<usize>>,
    states: Vec<PitchState>,
}

/// Dense observation scores for one frame, in state-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScores<T: Real = f64> {
    pub scores: Vec<T>,
}

impl<T: Real> Tracker<T> {
    pub fn new(range: LagRange, params: TrackerParams<T>) -> Result<Self> {
        params.validate()?;
        let grid = LagGrid::new(range, params.lag_stride)?;
        let half = grid.lags().iter().map(|&lag| half_lag(lag, range)).collect();
        let states = enumerate_states(range, params.lag_stride)?;
        Ok(Self { params, grid, half, states })
    }

    pub fn params(&self) -> &TrackerParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &LagGrid {
        &self.grid
    }

    /// All states in index order.
    pub fn states(&self) -> &[PitchState] {
        &self.states
    }

    pub fn evidence(&self, cf: &CorrelogramFrame<T>) -> Result<FrameEvidence<T>> {
        FrameEvidence::from_correlogram(cf, &self.grid, &self.params)
    }

    fn log_floor(&self, x: T) -> T {
        (self.params.floor + x.max(T::zero())).ln()
    }

    fn octave_penalty(&self, ev: &FrameEvidence<T>, i: usize) -> T {
        match self.half[i] {
            Some(h) => self.params.octave_cost * ev.summary[h].max(T::zero()),
            None => T::zero(),
        }
    }

    fn obs_zero(&self, ev: &FrameEvidence<T>) -> T {
        let r = self.grid.range();
        let peak = ev.summary[r.min..=r.max].iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        self.log_floor(T::one() - peak)
    }

    fn obs_one(&self, ev: &FrameEvidence<T>, i: usize) -> T {
        let lag = self.grid.lags()[i];
        let unexplained = (T::one() - ev.residual_peak(i)).max(T::zero());
        let eps = self.params.floor;
        self.log_floor(ev.summary[lag]) - self.params.beta - self.octave_penalty(ev, i) + ((eps + unexplained) / (T::one() + eps)).ln()
    }

    fn obs_two(&self, ev: &FrameEvidence<T>, i: usize, j: usize) -> T {
        let lags = self.grid.lags();
        let ij = self.log_floor(ev.summary[lags[i]]) + self.log_floor(ev.residual(i, j));
        let ji = self.log_floor(ev.summary[lags[j]]) + self.log_floor(ev.residual(j, i));
        ij.max(ji) - (self.params.beta + self.params.beta) - (self.octave_penalty(ev, i) + self.octave_penalty(ev, j))
    }

    /// Log-score of `state` given the frame evidence.
    pub fn observation_score(&self, state: &PitchState, ev: &FrameEvidence<T>) -> Result<T> {
        if ev.grid != self.grid {
            return Err(Error::GeometryMismatch("evidence built on a different grid".into()));
        }
        let idx = |lag: usize| {
            self.grid
                .index_of(lag)
                .ok_or_else(|| Error::InvalidParameter(format!("lag {lag} is not on the grid")))
        };
        Ok(match *state {
            PitchState::Zero => self.obs_zero(ev),
            PitchState::One(a) => self.obs_one(ev, idx(a)?),
            PitchState::Two(a, b) => {
                if a == b {
                    return Err(Error::InvalidParameter("two-pitch state needs distinct lags".into()));
                }
                self.obs_two(ev, idx(a)?, idx(b)?)
            }
        })
    }

    /// Scores of every state, in [`LagGrid::state_index`] order.
    pub fn frame_scores(&self, ev: &FrameEvidence<T>) -> Result<FrameScores<T>> {
        if ev.grid != self.grid {
            return Err(Error::GeometryMismatch("evidence built on a different grid".into()));
        }
        let l = self.grid.len();
        let mut scores = Vec::with_capacity(self.grid.state_count());
        scores.push(self.obs_zero(ev));
        scores.extend((0..l).map(|i| self.obs_one(ev, i)));
        let pairs: Vec<T> = (0..l)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..l).map(move |j| (i, j)))
            .map(|(i, j)| self.obs_two(ev, i, j))
            .collect();
        scores.extend(pairs);
        Ok(FrameScores { scores })
    }

    /// Log-score of moving from `prev` to `next`.
    pub fn transition_score(&self, prev: &PitchState, next: &PitchState) -> T {
        transition_score(prev, next, &self.params)
    }

    /// Sum of observation and transition scores along `path`, accumulated left to right.
    pub fn path_score(&self, evidence: &[FrameEvidence<T>], path: &[PitchState]) -> Result<T> {
        if evidence.len() != path.len() {
            return Err(Error::LengthMismatch(evidence.len(), path.len()));
        }
        let mut total = T::zero();
        for (t, (ev, s)) in evidence.iter().zip(path).enumerate() {
            if t == 0 {
                total = self.observation_score(s, ev)?;
            } else {
                total = total + self.transition_score(&path[t - 1], s) + self.observation_score(s, ev)?;
            }
        }
        Ok(total)
    }

    /// Maximum-score state path over the evidence frames.
    pub fn track(&self, evidence: &[FrameEvidence<T>]) -> Result<Vec<PitchState>> {
        if evidence.is_empty() {
            return Err(Error::InvalidParameter("need at least one frame".into()));
        }
        let scores = evidence.iter().map(|ev| self.frame_scores(ev)).collect::<Result<Vec<_>>>()?;
        Ok(self.viterbi(&scores))
    }

    /// Evidence, scoring and Viterbi directly on correlogram frames.
    pub fn track_correlograms(&self, frames: &[CorrelogramFrame<T>]) -> Result<Vec<PitchState>> {
        if frames.is_empty() {
            return Err(Error::InvalidParameter("need at least one frame".into()));
        }
        let scores = frames
            .par_iter()
            .map(|cf| self.evidence(cf).and_then(|ev| self.frame_scores(&ev)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.viterbi(&scores))
    }

    /// Viterbi over precomputed frame scores using L1 distance transforms.
    pub fn viterbi(&self, frames: &[FrameScores<T>]) -> Vec<PitchState> {
        let grid = &self.grid;
        let l = grid.len();
        let n_states = grid.state_count();
        let w = T::from_usize_lossy(grid.stride()) / self.params.sigma;
        let two = |i: usize, j: usize| 1 + l + pair_index(l, i.min(j), i.max(j));
        let ninf = T::neg_infinity();

        let mut delta: Vec<T> = frames[0].scores.clone();
        let mut back: Vec<Vec<u32>> = Vec::with_capacity(frames.len());
        for fs in &frames[1..] {
            let d1 = &delta[1..=l];
            // Symmetric two-pitch table with an empty diagonal.
            let mut sym = vec![ninf; l * l];
            for i in 0..l {
                for j in i + 1..l {
                    let v = delta[two(i, j)];
                    sym[i * l + j] = v;
                    sym[j * l + i] = v;
                }
            }
            let best_of = |idx: &mut dyn Iterator<Item = usize>| {
                let mut best = 0usize;
                let mut bv = ninf;
                for k in idx {
                    if delta[k] > bv {
                        bv = delta[k];
                        best = k;
                    }
                }
                (best, bv)
            };
            let (best1, _) = best_of(&mut (1..=l));
            let (best2, _) = best_of(&mut (l + 1..n_states));
            let (_, dt1_arg) = distance_transform(d1, w);
            let mut row_max = vec![ninf; l];
            let mut row_arg = vec![0usize; l];
            for i in 0..l {
                for j in 0..l {
                    if sym[i * l + j] > row_max[i] {
                        row_max[i] = sym[i * l + j];
                        row_arg[i] = j;
                    }
                }
            }
            let (_, dtm_arg) = distance_transform(&row_max, w);
            // Separable 2D transform: along j within each row, then along i.
            let mut g = vec![ninf; l * l];
            let mut g_arg = vec![0usize; l * l];
            for i in 0..l {
                let (v, a) = distance_transform(&sym[i * l..(i + 1) * l], w);
                g[i * l..(i + 1) * l].copy_from_slice(&v);
                g_arg[i * l..(i + 1) * l].copy_from_slice(&a);
            }
            let mut dt2_arg = vec![(0usize, 0usize); l * l];
            for j in 0..l {
                let col: Vec<T> = (0..l).map(|i| g[i * l + j]).collect();
                let (_, a) = distance_transform(&col, w);
                for i in 0..l {
                    dt2_arg[i * l + j] = (a[i], g_arg[a[i] * l + j]);
                }
            }

            let mut next = vec![ninf; n_states];
            let mut bp = vec![0u32; n_states];
            let states = &self;
            let mut choose = |target: usize, cands: &[Option<usize>]| {
                let next_state = states.states[target];
                let mut bv = ninf;
                let mut bk = 0usize;
                let mut seen: [usize; 4] = [usize::MAX; 4];
                for (n, &c) in cands.iter().enumerate() {
                    let Some(k) = c else { continue };
                    if seen[..n].contains(&k) {
                        continue;
                    }
                    seen[n] = k;
                    if delta[k] == ninf {
                        continue;
                    }
                    let v = delta[k] + states.transition_score(&states.states[k], &next_state);
                    if v > bv || (v == bv && k < bk) {
                        bv = v;
                        bk = k;
                    }
                }
                next[target] = bv + fs.scores[target];
                bp[target] = bk as u32;
            };
            choose(0, &[Some(0), (l > 0).then_some(best1), (l > 1).then_some(best2)]);
            for i in 0..l {
                let from_two = (l > 1 && row_max[dtm_arg[i]] > ninf).then(|| two(dtm_arg[i], row_arg[dtm_arg[i]]));
                choose(1 + i, &[Some(0), Some(1 + dt1_arg[i]), from_two]);
            }
            for i in 0..l {
                for j in i + 1..l {
                    let from_one = {
                        let (a, b) = (dt1_arg[i], dt1_arg[j]);
                        let va = d1[a] - w * T::from_usize_lossy(a.abs_diff(i));
                        let vb = d1[b] - w * T::from_usize_lossy(b.abs_diff(j));
                        if vb > va { 1 + b } else { 1 + a }
                    };
                    let (pi, pj) = dt2_arg[i * l + j];
                    let from_two = (pi != pj).then(|| two(pi, pj));
                    choose(two(i, j), &[Some(0), Some(from_one), from_two]);
                }
            }
            delta = next;
            back.push(bp);
        }

        let mut k = 0usize;
        for s in 1..n_states {
            if delta[s] > delta[k] {
                k = s;
            }
        }
        let mut path = vec![self.states[k]];
        for bp in back.iter().rev() {
            k = bp[k] as usize;
            path.push(self.states[k]);
        }
        path.reverse();
        path
    }
}

/// Log-score of moving from `prev` to `next` (cardinality term plus lag continuity).
pub fn transition_score<T: Real>(prev: &PitchState, next: &PitchState, params: &TrackerParams<T>) -> T {
    let (kp, kn) = (prev.cardinality(), next.cardinality());
    let card = if kp == kn {
        params.self_bonus
    } else {
        -params.beta * T::from_usize_lossy(kp.abs_diff(kn))
    };
    let d = |a: usize, b: usize| a.abs_diff(b);
    let dist = match (*prev, *next) {
        (PitchState::Zero, _) | (_, PitchState::Zero) => 0,
        (PitchState::One(a), PitchState::One(b)) => d(a, b),
        (PitchState::One(t), PitchState::Two(a, b)) | (PitchState::Two(a, b), PitchState::One(t)) => d(t, a).min(d(t, b)),
        (PitchState::Two(a, b), PitchState::Two(x, y)) => (d(a, x) + d(b, y)).min(d(a, y) + d(b, x)),
    };
    card - T::from_usize_lossy(dist) / params.sigma
}

/// `out[i] = max_j v[j] - w |i - j|` with the maximising `j` (smallest on ties).
fn distance_transform<T: Real>(v: &[T], w: T) -> (Vec<T>, Vec<usize>) {
    let n = v.len();
    let mut val = v.to_vec();
    let mut arg: Vec<usize> = (0..n).collect();
    for i in 1..n {
        let cand = val[i - 1] - w;
        if cand >= val[i] {
            val[i] = cand;
            arg[i] = arg[i - 1];
        }
    }
    for i in (0..n.saturating_sub(1)).rev() {
        let cand = val[i + 1] - w;
        if cand > val[i] {
            val[i] = cand;
            arg[i] = arg[i + 1];
        }
    }
    (val, arg)
}

/// Viterbi tracking of normalised summaries with no second-pitch evidence.
pub fn viterbi_track<T: Real>(summaries: &[Vec<T>], range: LagRange, params: &TrackerParams<T>) -> Result<Vec<PitchState>> {
    let tracker = Tracker::new(range, *params)?;
    let ev = summaries
        .iter()
        .map(|s| FrameEvidence::from_summary(s.clone(), tracker.grid()))
        .collect::<Result<Vec<_>>>()?;
    tracker.track(&ev)
}
