mod common;

use cocasa::audio::FrameSpec;
use cocasa::harmonic::{fill_second_pitches, HarmonicParams};
use cocasa::peripheral::LagRange;
use cocasa::tracks::PitchTrackPair;
use common::fixtures::{two_complex, FS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lag(hz: f64) -> usize {
    (FS as f64 / hz).round() as usize
}

#[test]
fn missed_interior_frames_are_filled_near_190_hz() {
    let sc = two_complex(0.6);
    let n = FrameSpec::<f64>::correlogram().frame_count(sc.mixture.len(), FS);
    let mut t2 = vec![Some(lag(190.0)); n];
    for m in [20, 21, 22] {
        t2[m] = None;
    }
    t2[40] = None;
    let t1 = vec![Some(lag(120.0)); n];
    let mut t1_gap = t1.clone();
    t1_gap[40] = None;
    let tracks = PitchTrackPair::new(t1_gap, t2, FS).unwrap();
    let range = LagRange::speech(FS);
    let out = fill_second_pitches(&tracks, &sc.mixture, &FrameSpec::correlogram(), range, &HarmonicParams::default()).unwrap();
    for m in [20, 21, 22] {
        let hz = out.hz(1, m).expect("filled");
        assert!((hz - 190.0).abs() <= 3.0, "frame {m}: {hz} Hz");
        assert_eq!(out.track1[m], tracks.track1[m]);
    }
    assert_eq!((out.track1[40], out.track2[40]), (None, None), "zero-pitch frame untouched");
    for m in (0..n).filter(|m| ![20, 21, 22].contains(m)) {
        assert_eq!((out.track1[m], out.track2[m]), (tracks.track1[m], tracks.track2[m]), "frame {m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn filling_never_touches_known_pitches(seed in any::<u64>()) {
        let sc = two_complex(0.4);
        let n = FrameSpec::<f64>::correlogram().frame_count(sc.mixture.len(), FS);
        let range = LagRange::speech(FS);
        let tracks = common::props::random_tracks(&mut ChaCha8Rng::seed_from_u64(seed), n, range, FS);
        let out = fill_second_pitches(&tracks, &sc.mixture, &FrameSpec::correlogram(), range, &HarmonicParams::default()).unwrap();
        let pitched = |t: &PitchTrackPair| (0..n).filter(|&m| !t.lags_at(m).is_empty()).count();
        prop_assert!(pitched(&out) >= pitched(&tracks));
        for k in 0..2 {
            for m in 0..n {
                if tracks.track(k)[m].is_some() {
                    prop_assert_eq!(out.track(k)[m], tracks.track(k)[m]);
                }
            }
        }
        for m in 0..n {
            let before = tracks.lags_at(m).len();
            if before != 1 {
                prop_assert_eq!(out.lags_at(m), tracks.lags_at(m));
            }
            for l in out.lags_at(m) {
                prop_assert!(range.contains(l));
            }
        }
    }
}
