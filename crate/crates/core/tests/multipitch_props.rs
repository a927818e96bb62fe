mod common;

use cocasa::multipitch::{enumerate_states, LagGrid, PitchState, Tracker, TrackerParams};
use cocasa::peripheral::LagRange;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn viterbi_matches_exhaustive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (range, frames) = common::small_shape(&mut rng);
        let tracker = Tracker::new(range, TrackerParams::default()).unwrap();
        let ev: Vec<_> = (0..frames).map(|_| common::random_evidence(&mut rng, tracker.grid())).collect();
        let path = tracker.track(&ev).unwrap();
        let (best, _) = common::exhaustive_best(&tracker, &ev);
        prop_assert_eq!(tracker.path_score(&ev, &path).unwrap(), best);
        prop_assert_eq!(tracker.track(&ev).unwrap(), path);
    }

    #[test]
    fn emitted_lags_stay_in_range(seed in any::<u64>(), fs in prop::sample::select(vec![8_000u32, 16_000, 22_050, 25_000])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let range = LagRange::speech(fs);
        let params = TrackerParams { lag_stride: 7, ..TrackerParams::default() };
        let tracker = Tracker::new(range, params).unwrap();
        let ev: Vec<_> = (0..3).map(|_| common::random_evidence(&mut rng, tracker.grid())).collect();
        for s in tracker.track(&ev).unwrap() {
            prop_assert!(s.validate(range).is_ok());
            for lag in s.lags() {
                let hz = fs as f64 / lag as f64;
                prop_assert!((79.0..=505.0).contains(&hz), "{} Hz", hz);
            }
        }
    }

    #[test]
    fn state_count_formula(stride in 1usize..300, min in 20usize..80, width in 0usize..300) {
        let range = LagRange::new(min, min + width).unwrap();
        let states = enumerate_states(range, stride).unwrap();
        let l = LagGrid::new(range, stride).unwrap().len();
        prop_assert_eq!(states.len(), 1 + l + l * l.saturating_sub(1) / 2);
        let direct = 1 + (min..=min + width).step_by(stride).count()
            + (min..=min + width).step_by(stride).flat_map(|a| (min..=min + width).step_by(stride).filter(move |&b| b > a)).count();
        prop_assert_eq!(states.len(), direct);
        prop_assert!(states.iter().filter(|s| matches!(s, PitchState::Two(..))).all(|s| s.validate(range).is_ok()));
    }
}

#[test]
fn viterbi_matches_exhaustive_on_largest_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (l, frames) in [(8usize, 4usize), (4, 6)] {
        let range = LagRange::new(50, 50 + l - 1).unwrap();
        let tracker = Tracker::new(range, TrackerParams::default()).unwrap();
        let ev: Vec<_> = (0..frames).map(|_| common::random_evidence(&mut rng, tracker.grid())).collect();
        let path = tracker.track(&ev).unwrap();
        let (best, best_path) = common::exhaustive_best(&tracker, &ev);
        assert_eq!(tracker.path_score(&ev, &path).unwrap(), best, "{path:?} vs {best_path:?}");
    }
}
