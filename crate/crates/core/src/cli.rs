//! The `cocasa` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audio::{mix, read_wav, write_wav_as, WavEncoding, Waveform};
use crate::config;
use crate::error::{Error, Result};
use crate::evaluation::{compensated_reference, ground_truth_pitch, pair_and_sum_errors, snr, EvalReport};
use crate::peripheral::PeripheralAnalysis;
use crate::pipeline::{analyze, segregate_with_tracks, track, track_analyzed, PipelineConfig};
use crate::segregation::harmonic_selection_baseline;
use crate::tracks::{write_atomic, PitchTrackPair};

#[derive(Debug, Parser)]
#[command(name = "cocasa", version, about = "Two-talker co-channel speech segregation")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, help_heading = "Global options")]
    pub jobs: Option<usize>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, help_heading = "Global options")]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, help_heading = "Global options", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Sample encoding of written WAV files.
    #[arg(long, global = true, help_heading = "Global options", value_enum, default_value_t = Encoding::Float32)]
    pub encoding: Encoding,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    Pcm16,
    Float32,
}

impl From<Encoding> for WavEncoding {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Pcm16 => WavEncoding::Pcm16,
            Encoding::Float32 => WavEncoding::Float32,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mix a target and a masker at a given target-to-masker ratio.
    Mix(MixArgs),
    /// Track up to two pitches and write the pitch-track CSV.
    Track(TrackArgs),
    /// Separate a mixture into two source estimates.
    Segregate(SegregateArgs),
    /// Score source estimates (and optionally pitch tracks) against clean sources.
    Evaluate(EvaluateArgs),
    /// Dump one correlogram frame as CSV.
    Correlogram(CorrelogramArgs),
    /// Print the effective configuration.
    Config,
}

#[derive(Debug, Clone, Args)]
pub struct MixArgs {
    pub target: PathBuf,
    pub masker: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tmr: f64,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write the target as it appears in the mixture.
    #[arg(long)]
    pub source1_out: Option<PathBuf>,
    /// Also write the scaled masker as it appears in the mixture.
    #[arg(long)]
    pub source2_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrackArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Harmonic,
}

#[derive(Debug, Clone, Args)]
pub struct SegregateArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out1: PathBuf,
    #[arg(long)]
    pub out2: PathBuf,
    /// Use these pitch tracks instead of tracking the mixture.
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    /// Write the tracks used.
    #[arg(long)]
    pub tracks_out: Option<PathBuf>,
    /// Write the labelled mask (one row per frame, one character per channel).
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub clean1: PathBuf,
    #[arg(long)]
    pub clean2: PathBuf,
    #[arg(long)]
    pub est1: PathBuf,
    #[arg(long)]
    pub est2: PathBuf,
    #[arg(long)]
    pub tracks: Option<PathBuf>,
    /// The unseparated mixture; defaults to `clean1 + clean2`.
    #[arg(long)]
    pub mixture: Option<PathBuf>,
    /// Report CSV path; printed to stdout when neither output is given.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Fixed-width table path.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value = "mixture")]
    pub condition: String,
    #[arg(long, default_value = "casa")]
    pub method: String,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelogramArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub frame: usize,
    #[arg(short, long)]
    pub out: PathBuf,
}

/// Parse arguments, run, and map failures to exit code 1 with a diagnostic on stderr.
pub fn main_with_args<I, S>(args: I) -> std::process::ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return std::process::ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cocasa: error: {e}");
            std::process::ExitCode::from(1)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = config::load::<f64>(cli.config.as_deref(), &cli.set)?;
    let enc = WavEncoding::from(cli.encoding);
    let go = || match &cli.command {
        Command::Mix(a) => cmd_mix(a, enc),
        Command::Track(a) => cmd_track(a, &cfg),
        Command::Segregate(a) => cmd_segregate(a, &cfg, enc),
        Command::Evaluate(a) => cmd_evaluate(a, &cfg).map(|_| ()),
        Command::Correlogram(a) => cmd_correlogram(a, &cfg),
        Command::Config => {
            print!("{}", config::to_text(&cfg));
            Ok(())
        }
    };
    match cli.jobs {
        Some(0) => Err(Error::InvalidParameter("--jobs must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(go),
        None => go(),
    }
}

/// Write a WAV atomically and check that it reads back with the same geometry.
fn write_checked(path: &Path, w: &Waveform<f64>, enc: WavEncoding) -> Result<()> {
    write_wav_as(path, w, enc)?;
    let back = read_wav::<f64>(path)?;
    if back.len() != w.len() || back.sample_rate() != w.sample_rate() {
        return Err(Error::Wav(format!("{} did not read back intact", path.display())));
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".mix.txt");
    out.with_file_name(name)
}

pub fn cmd_mix(a: &MixArgs, enc: WavEncoding) -> Result<()> {
    let target = read_wav::<f64>(&a.target)?;
    let masker = read_wav::<f64>(&a.masker)?;
    let m = mix(&target, &masker, a.tmr)?;
    write_checked(&a.out, &m.mixture, enc)?;
    if let Some(p) = &a.source1_out {
        write_checked(p, &target.scaled(m.peak_scale), enc)?;
    }
    if let Some(p) = &a.source2_out {
        write_checked(p, &masker.resized(target.len()).scaled(m.masker_scale * m.peak_scale), enc)?;
    }
    let side = format!("tmr_db = {}\nmasker_scale = {}\npeak_scale = {}\n", a.tmr, m.masker_scale, m.peak_scale);
    write_atomic(&sidecar_path(&a.out), side.as_bytes())
}

pub fn cmd_track(a: &TrackArgs, cfg: &PipelineConfig<f64>) -> Result<()> {
    let x = read_wav::<f64>(&a.input)?;
    let t = track(&x, cfg)?;
    t.tracks.write_csv(&a.out, &cfg.peripheral.frame)?;
    PitchTrackPair::read_csv(&a.out, x.sample_rate())?;
    Ok(())
}

pub fn cmd_segregate(a: &SegregateArgs, cfg: &PipelineConfig<f64>, enc: WavEncoding) -> Result<()> {
    let x = read_wav::<f64>(&a.input)?;
    let fs = x.sample_rate();
    if a.baseline.is_some() && a.mask_out.is_some() {
        return Err(Error::InvalidParameter("--mask-out is not available with --baseline".into()));
    }
    let given = a.tracks.as_ref().map(|p| PitchTrackPair::read_csv(p, fs)).transpose()?;
    let (s1, s2, tracks) = match a.baseline {
        Some(Baseline::Harmonic) => {
            cfg.validate_for(fs)?;
            let tracks = match given {
                Some(t) => t,
                None => track(&x, cfg)?.tracks,
            };
            let (s1, s2) = harmonic_selection_baseline(&x, &tracks, &cfg.peripheral.frame)?;
            (s1, s2, tracks)
        }
        None => {
            let analysis: PeripheralAnalysis<f64> = analyze(&x, cfg)?;
            let tracks = match given {
                Some(t) => t,
                None => track_analyzed(&x, analysis.clone(), cfg)?.tracks,
            };
            let seg = segregate_with_tracks(&x, &analysis, &tracks, cfg)?;
            if let Some(p) = &a.mask_out {
                write_atomic(p, seg.mask.to_dump().as_bytes())?;
            }
            (seg.source1, seg.source2, tracks)
        }
    };
    for w in [&s1, &s2] {
        if w.len() != x.len() {
            return Err(Error::LengthMismatch(w.len(), x.len()));
        }
    }
    write_checked(&a.out1, &s1, enc)?;
    write_checked(&a.out2, &s2, enc)?;
    if let Some(p) = &a.tracks_out {
        tracks.write_csv(p, &cfg.peripheral.frame)?;
    }
    Ok(())
}

/// Bring `w` to `n` samples, allowing at most `tol` samples of padding or truncation.
fn fit_length(w: &Waveform<f64>, n: usize, tol: usize) -> Result<Waveform<f64>> {
    if w.len().abs_diff(n) > tol {
        return Err(Error::LengthMismatch(w.len(), n));
    }
    Ok(w.resized(n))
}

/// Scores for one mixture; also writes the requested report files.
pub fn cmd_evaluate(a: &EvaluateArgs, cfg: &PipelineConfig<f64>) -> Result<EvalReport> {
    let c1 = read_wav::<f64>(&a.clean1)?;
    let fs = c1.sample_rate();
    cfg.validate_for(fs)?;
    let tol = cfg.peripheral.frame.len_samples(fs);
    let n = c1.len();
    let load = |p: &Path| -> Result<Waveform<f64>> {
        let w = read_wav::<f64>(p)?;
        if w.sample_rate() != fs {
            return Err(Error::SampleRateMismatch(w.sample_rate(), fs));
        }
        fit_length(&w, n, tol)
    };
    let c2 = load(&a.clean2)?;
    let e1 = load(&a.est1)?;
    let e2 = load(&a.est2)?;
    let mixture = match &a.mixture {
        Some(p) => load(p)?,
        None => Waveform::new(c1.samples().iter().zip(c2.samples()).map(|(x, y)| x + y).collect(), fs)?,
    };

    let (fb, fr) = (&cfg.peripheral.filterbank, &cfg.peripheral.frame);
    let r1 = compensated_reference(&c1, fb, fr)?;
    let r2 = compensated_reference(&c2, fb, fr)?;
    let direct = (snr(&e1, &r1)?, snr(&e2, &r2)?);
    let crossed = (snr(&e2, &r1)?, snr(&e1, &r2)?);
    let (snr1, snr2) = if crossed.0 + crossed.1 > direct.0 + direct.1 { crossed } else { direct };
    let mc = compensated_reference(&mixture, fb, fr)?;
    let mixture_snr_avg = 0.5 * (snr(&mc, &r1)? + snr(&mc, &r2)?);

    let frames = fr.frame_count(n, fs);
    let pitch = match &a.tracks {
        None => None,
        Some(p) => {
            let t = PitchTrackPair::read_csv(p, fs)?;
            let max_diff = tol.div_ceil(fr.shift_samples(fs)) + 1;
            if t.frame_count().abs_diff(frames) > max_diff {
                return Err(Error::GeometryMismatch(format!("tracks have {} frames, the sources {}", t.frame_count(), frames)));
            }
            let fit = |v: &[Option<usize>]| {
                let mut v = v.to_vec();
                v.resize(frames, None);
                v
            };
            let t = PitchTrackPair { track1: fit(&t.track1), track2: fit(&t.track2), sample_rate: fs };
            let range = cfg.lag_range(fs)?;
            let ep = cfg.enrichment_for(fs);
            let g1 = ground_truth_pitch(&c1, &cfg.peripheral, range, &ep, cfg.voicing_threshold)?;
            let g2 = ground_truth_pitch(&c2, &cfg.peripheral, range, &ep, cfg.voicing_threshold)?;
            Some(pair_and_sum_errors(&t, &g1, &g2, cfg.denominator)?)
        }
    };
    let report = EvalReport {
        condition: a.condition.clone(),
        method: a.method.clone(),
        pitch,
        snr1,
        snr2,
        snr_avg: 0.5 * (snr1 + snr2),
        mixture_snr_avg,
        voicing_threshold: cfg.voicing_threshold,
        frames,
    };
    let reports = std::slice::from_ref(&report);
    if let Some(p) = &a.out {
        write_atomic(p, EvalReport::to_csv(reports).as_bytes())?;
    }
    if let Some(p) = &a.table {
        write_atomic(p, EvalReport::to_table(reports).as_bytes())?;
    }
    if a.out.is_none() && a.table.is_none() {
        let mut s = EvalReport::to_csv(reports);
        let _ = write!(s, "\n{}", EvalReport::to_table(reports));
        print!("{s}");
    }
    Ok(report)
}

pub fn cmd_correlogram(a: &CorrelogramArgs, cfg: &PipelineConfig<f64>) -> Result<()> {
    let x = read_wav::<f64>(&a.input)?;
    let an = analyze(&x, cfg)?;
    let f = an.frames.get(a.frame).ok_or(Error::FrameOutOfBounds { frame: a.frame, frames: an.frames.len() })?;
    write_atomic(&a.out, f.to_csv().as_bytes())
}
