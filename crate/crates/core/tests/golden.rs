//! Report numbers on the synthetic suite against committed golden files.
//! Set `UPDATE_GOLDEN=1` to rewrite them.

mod common;

use std::path::{Path, PathBuf};

use cocasa::audio::{synth_harmonic, write_wav_as, WavEncoding, Waveform};
use cocasa::cli::{cmd_evaluate, cmd_segregate, Baseline, EvaluateArgs, SegregateArgs};
use cocasa::evaluation::EvalReport;
use cocasa::pipeline::PipelineConfig;
use common::fixtures::{disjoint_band, scene, two_complex, Scene, FS};

fn suite() -> Vec<(&'static str, Scene)> {
    let a = synth_harmonic::<f64>(110.0, 30, 1.0, FS, 0.9).unwrap().scaled(0.1);
    let b = synth_harmonic::<f64>(230.0, 15, 1.0, FS, 0.85).unwrap().scaled(0.1);
    vec![
        ("two_complex_0db", two_complex(1.0)),
        ("disjoint_band_0db", disjoint_band(1.0)),
        ("110_230_plus6db", scene(&a, &b, 6.0)),
    ]
}

fn wav(dir: &Path, name: &str, w: &Waveform<f64>) -> PathBuf {
    let p = dir.join(name);
    write_wav_as(&p, w, WavEncoding::Float32).unwrap();
    p
}

fn reports() -> Vec<EvalReport> {
    let cfg = PipelineConfig::<f64>::default();
    let dir = tempfile::tempdir().unwrap();
    let mut out = Vec::new();
    for (name, sc) in suite() {
        let d = dir.path();
        let mix = wav(d, &format!("{name}.wav"), &sc.mixture);
        let c1 = wav(d, &format!("{name}.c1.wav"), &sc.source1);
        let c2 = wav(d, &format!("{name}.c2.wav"), &sc.source2);
        let tracks = d.join(format!("{name}.tracks.csv"));
        for (method, baseline) in [("casa", None), ("harmonic_selection", Some(Baseline::Harmonic))] {
            let (o1, o2) = (d.join(format!("{name}.{method}.1.wav")), d.join(format!("{name}.{method}.2.wav")));
            let args = SegregateArgs {
                input: mix.clone(),
                out1: o1.clone(),
                out2: o2.clone(),
                tracks: baseline.map(|_| tracks.clone()),
                baseline,
                tracks_out: baseline.is_none().then(|| tracks.clone()),
                mask_out: None,
            };
            cmd_segregate(&args, &cfg, WavEncoding::Float32).unwrap();
            let eval = EvaluateArgs {
                clean1: c1.clone(),
                clean2: c2.clone(),
                est1: o1,
                est2: o2,
                tracks: Some(tracks.clone()),
                mixture: Some(mix.clone()),
                out: Some(d.join("report.csv")),
                table: None,
                condition: name.to_string(),
                method: method.to_string(),
            };
            out.push(cmd_evaluate(&eval, &cfg).unwrap());
        }
    }
    out
}

fn check(path: &Path, got: &str) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, got).unwrap();
    }
    let want = std::fs::read_to_string(path).unwrap_or_else(|_| panic!("{} missing; run with UPDATE_GOLDEN=1", path.display()));
    assert_eq!(got, want, "{} differs", path.display());
}

#[test]
fn synthetic_suite_matches_golden_reports() {
    let r = reports();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    check(&dir.join("synthetic_suite.csv"), &EvalReport::to_csv(&r));
    check(&dir.join("synthetic_suite.txt"), &EvalReport::to_table(&r));
}
