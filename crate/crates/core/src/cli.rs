//! Command-line front end: simulate a scene, track it, score the result.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::beamform::{beam_pattern, design_wls_weights, pattern_summary};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate, EvalConfig, Evaluation};
use crate::geometry::MicArray;
use crate::glmb::{FilterParams, TrackRow};
use crate::io;
use crate::pipeline::{track, FrontEndConfig, TrackingRun};
use crate::scene::{frame_count, ground_truth, reference_scenario, render_mixture, Scenario, ScenarioFile, TruthRow};

#[derive(Debug, Parser)]
#[command(name = "speaker-glmb", version, about = "Track and separate speakers on a circular microphone array")]
pub struct Cli {
    /// Run configuration (JSON). Defaults to the built-in reference scene.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Noise seed of the simulated scene; overrides the scenario.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write the per-frame DOA spectra.
    #[arg(long, global = true)]
    pub dump_spectrum: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the scenario to a multichannel WAV plus ground truth.
    Simulate,
    /// Track speakers in a recording and write tracks and separated streams.
    Track {
        /// Multichannel WAV; defaults to mixture.wav in the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Score the tracks in the output directory against the ground truth.
    Evaluate,
    /// simulate, track and evaluate in one go.
    RunAll,
    /// Design a beamformer and write its response.
    BeamPattern {
        /// Look direction in degrees; overrides the config.
        #[arg(long)]
        look: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamPatternConfig {
    pub look_doa: f64,
    pub freq_min: f64,
    pub freq_max: f64,
    pub freq_step: f64,
    pub angle_step: f64,
}

impl Default for BeamPatternConfig {
    fn default() -> Self {
        BeamPatternConfig {
            look_doa: 232.1,
            freq_min: 300.0,
            freq_max: 3000.0,
            freq_step: 30.0,
            angle_step: 1.0,
        }
    }
}

/// Contents of the `--config` file. Relative paths are resolved against
/// the file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario file; the reference scene when absent.
    pub scenario: Option<PathBuf>,
    /// Filter parameter file; takes precedence over `filter`.
    pub filter_params: Option<PathBuf>,
    pub filter: FilterParams,
    pub front_end: FrontEndConfig,
    pub evaluation: EvalConfig,
    pub beam_pattern: BeamPatternConfig,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        resolve(&mut cfg.scenario);
        resolve(&mut cfg.filter_params);
        resolve(&mut cfg.out_dir);
        if let Some(fp) = &cfg.filter_params {
            cfg.filter = io::read_json(fp)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.front_end.validate()?;
        self.evaluation.validate()?;
        let b = &self.beam_pattern;
        if !(b.freq_min > 0.0 && b.freq_max >= b.freq_min && b.freq_step > 0.0 && b.angle_step > 0.0) {
            return Err(Error::config("beam_pattern ranges are invalid"));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(p) => io::read_json::<ScenarioFile>(p)?.into_scenario(),
            None => Ok(reference_scenario()),
        }
    }
}

/// Resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub dump_spectrum: bool,
}

impl Context {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let config = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let out_dir = cli
            .out_dir
            .clone()
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Context {
            config,
            out_dir,
            seed: cli.seed,
            dump_spectrum: cli.dump_spectrum,
        })
    }

    fn scenario(&self) -> Result<Scenario> {
        let mut scn = self.config.scenario()?;
        if let Some(s) = self.seed {
            scn.seed = s;
        }
        Ok(scn)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

pub const MIXTURE_WAV: &str = "mixture.wav";
pub const TRUTH_CSV: &str = "truth.csv";
pub const TRACKS_CSV: &str = "tracks.csv";
pub const DIAGNOSTICS_JSON: &str = "diagnostics.json";
pub const METRICS_JSON: &str = "metrics.json";
pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const SOURCES_DIR: &str = "sources";
pub const STREAMS_DIR: &str = "streams";

fn source_file(id: usize) -> String {
    format!("source_{id}.wav")
}

fn stream_file(label: &str) -> String {
    format!("track_{label}.wav")
}

/// Renders the scenario; writes the mixture, the truth table, the clean
/// sources and the resolved scenario.
pub fn cmd_simulate(ctx: &Context) -> Result<Scenario> {
    let scn = ctx.scenario()?;
    let mix = render_mixture(&scn)?;
    let fs = scn.array.sample_rate;
    io::write_wav(&ctx.path(MIXTURE_WAV), &mix, fs)?;
    io::write_csv(&ctx.path(TRUTH_CSV), &ground_truth(&scn))?;
    for (i, s) in scn.source_signals().into_iter().enumerate() {
        io::write_wav(&ctx.path(SOURCES_DIR).join(source_file(i)), &[s], fs)?;
    }
    io::write_json(&ctx.path("scenario.json"), &ScenarioFile::from(&scn))?;
    println!(
        "simulated {} sources, {:.1} s, {} channels -> {}",
        scn.sources.len(),
        scn.duration_s,
        scn.array.len(),
        ctx.out_dir.display()
    );
    Ok(scn)
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    frame: usize,
    doa_deg: f64,
    value: f64,
}

/// Tracks the recording at `input` (or the simulated mixture) and writes
/// the track table, one WAV per label and the filter diagnostics.
pub fn cmd_track(ctx: &Context, input: Option<&Path>) -> Result<TrackingRun> {
    let array = ctx.config.scenario()?.array;
    let input = input.map_or_else(|| ctx.path(MIXTURE_WAV), Path::to_path_buf);
    let (channels, fs) = io::read_wav(&input)?;
    check_recording(&channels, fs, &array)?;
    let run = track(
        &channels,
        &array,
        &ctx.config.front_end,
        &ctx.config.filter,
        ctx.dump_spectrum,
    )?;
    io::write_csv(&ctx.path(TRACKS_CSV), &run.streams.rows)?;
    let streams = ctx.path(STREAMS_DIR);
    for (label, audio) in &run.streams.audio {
        io::write_wav(&streams.join(stream_file(&label.to_string())), std::slice::from_ref(audio), fs)?;
    }
    io::write_json(&ctx.path(DIAGNOSTICS_JSON), &run.diagnostics)?;
    if ctx.dump_spectrum {
        let rows: Vec<SpectrumRow> = run
            .features
            .iter()
            .filter_map(|f| f.spectrum.as_ref())
            .flat_map(|s| {
                s.grid.iter().zip(&s.values).map(|(&doa_deg, &value)| SpectrumRow {
                    frame: s.frame_index,
                    doa_deg,
                    value,
                })
            })
            .collect();
        io::write_csv(&ctx.path(SPECTRUM_CSV), &rows)?;
    }
    println!(
        "tracked {} frames: {} labels, {} track rows -> {}",
        run.num_frames,
        run.streams.audio.len(),
        run.streams.rows.len(),
        ctx.out_dir.display()
    );
    Ok(run)
}

fn check_recording(channels: &[Vec<f64>], fs: f64, array: &MicArray) -> Result<()> {
    if (fs - array.sample_rate).abs() > 1e-9 {
        return Err(Error::data(format!(
            "recording is at {fs} Hz, the array expects {} Hz",
            array.sample_rate
        )));
    }
    if channels.len() != array.len() {
        return Err(Error::data(format!(
            "recording has {} channels, the array has {}",
            channels.len(),
            array.len()
        )));
    }
    Ok(())
}

/// Scores the outputs of `simulate` and `track` in the output directory.
pub fn cmd_evaluate(ctx: &Context) -> Result<Evaluation> {
    let truth: Vec<TruthRow> = io::read_csv(&ctx.path(TRUTH_CSV))?;
    let tracks: Vec<TrackRow> = io::read_csv(&ctx.path(TRACKS_CSV))?;
    let (mix, fs) = io::read_wav(&ctx.path(MIXTURE_WAV))?;
    let reference = mix
        .into_iter()
        .next()
        .ok_or_else(|| Error::data("mixture has no channels"))?;
    let num_frames = frame_count(reference.len(), fs);
    let num_sources = truth.iter().map(|r| r.source_id + 1).max().unwrap_or(0);
    let mut sources = Vec::with_capacity(num_sources);
    for i in 0..num_sources {
        let (s, _) = io::read_wav(&ctx.path(SOURCES_DIR).join(source_file(i)))?;
        sources.push(s.into_iter().next().unwrap_or_default());
    }
    let mut labels: Vec<&str> = tracks.iter().map(|r| r.label.as_str()).collect();
    labels.dedup();
    let mut streams = BTreeMap::new();
    for l in labels {
        let p = ctx.path(STREAMS_DIR).join(stream_file(l));
        if p.exists() {
            let (s, _) = io::read_wav(&p)?;
            streams.insert(l.to_string(), s.into_iter().next().unwrap_or_default());
        }
    }
    let ev = evaluate(
        &truth,
        &tracks,
        &streams,
        &sources,
        &reference,
        num_frames,
        &ctx.config.evaluation,
    )?;
    io::write_json(&ctx.path(METRICS_JSON), &ev)?;
    println!(
        "labels {:?}; mean OSPA {:.2}°, steady-state {:.2}°",
        ev.labels, ev.mean_ospa, ev.steady_state_ospa
    );
    for s in &ev.separation {
        println!(
            "  {} -> source {}: SI-SDR {:.1} dB ({:+.1} dB over the mixture)",
            s.label, s.source_id, s.si_sdr_db, s.improvement_db
        );
    }
    Ok(ev)
}

/// Writes the response of a beamformer designed for `look` (or the
/// configured look direction) and prints its summary.
pub fn cmd_beam_pattern(ctx: &Context, look: Option<f64>) -> Result<()> {
    let array = ctx.config.scenario()?.array;
    let b = &ctx.config.beam_pattern;
    let look = look.unwrap_or(b.look_doa);
    if !look.is_finite() {
        return Err(Error::config("look direction must be finite"));
    }
    let params = &ctx.config.front_end.beamformer;
    params.validate()?;
    let w = design_wls_weights(&array, look, params);
    let n = ((b.freq_max - b.freq_min) / b.freq_step + 1e-9).floor() as usize;
    let freqs: Vec<f64> = (0..=n).map(|i| b.freq_min + i as f64 * b.freq_step).collect();
    let m = (360.0 / b.angle_step).round().max(1.0) as usize;
    let doas: Vec<f64> = (0..m).map(|i| i as f64 * 360.0 / m as f64).collect();
    io::write_csv(&ctx.path("beam_pattern.csv"), &beam_pattern(&array, &w, &freqs, &doas))?;
    let s = pattern_summary(&array, &w, &freqs, params.sidelobe_edge);
    io::write_json(&ctx.path("beam_summary.json"), &s)?;
    println!(
        "look {look:.1}°: gain {:+.2}..{:+.2} dB, mean sidelobe level {:.2} dB",
        s.look_gain_min_db, s.look_gain_max_db, s.mean_sidelobe_db
    );
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = Context::from_cli(cli)?;
    match &cli.command {
        Command::Simulate => cmd_simulate(&ctx).map(drop),
        Command::Track { input } => cmd_track(&ctx, input.as_deref()).map(drop),
        Command::Evaluate => cmd_evaluate(&ctx).map(drop),
        Command::RunAll => {
            cmd_simulate(&ctx)?;
            cmd_track(&ctx, None)?;
            cmd_evaluate(&ctx).map(drop)
        }
        Command::BeamPattern { look } => cmd_beam_pattern(&ctx, *look),
    }
}
