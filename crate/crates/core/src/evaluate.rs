//! Scoring a tracking run against ground truth.
//!
//! Labels are matched to sources greedily by the distance between their
//! median DOA and pitch; each matched stream is scored by SI-SDR against
//! its clean source, relative to the unprocessed mixture at one microphone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{circ_diff, circ_dist, wrap_deg};
use crate::glmb::TrackRow;
use crate::metrics::{ospa, si_sdr_with_lag, OspaResult};
use crate::scene::{TruthRow, FRAME_SECONDS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub ospa_cutoff: f64,
    pub ospa_order: f64,
    /// Frames within this time after a track's first detection are left out
    /// of the steady-state average.
    pub settle_s: f64,
    /// DOA difference (degrees) counted as one unit of matching distance.
    pub match_doa_scale: f64,
    /// Pitch difference (Hz) counted as one unit of matching distance.
    pub match_pitch_scale: f64,
    /// Labels matched to a source must be within this distance.
    pub match_gate: f64,
    /// Labels reported in fewer frames are not matched.
    pub min_track_frames: usize,
    /// Alignment search of the SI-SDR, in samples.
    pub max_lag: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ospa_cutoff: 5.0,
            ospa_order: 1.0,
            settle_s: 0.3,
            match_doa_scale: 2.0,
            match_pitch_scale: 10.0,
            match_gate: 10.0,
            min_track_frames: 3,
            max_lag: crate::metrics::DEFAULT_MAX_LAG,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ospa_cutoff > 0.0 && self.ospa_order >= 1.0) {
            return Err(Error::config("OSPA needs cutoff > 0 and order >= 1"));
        }
        if !(self.settle_s >= 0.0 && self.match_doa_scale > 0.0 && self.match_pitch_scale > 0.0 && self.match_gate > 0.0)
        {
            return Err(Error::config("evaluation scales must be positive"));
        }
        Ok(())
    }

    fn settle_frames(&self) -> usize {
        (self.settle_s / FRAME_SECONDS - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameOspa {
    pub frame: usize,
    pub truth: usize,
    pub estimated: usize,
    #[serde(flatten)]
    pub ospa: OspaResult,
    /// Counted in the steady-state average.
    pub steady: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelMatch {
    pub label: String,
    pub source_id: usize,
    pub distance: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationScore {
    pub label: String,
    pub source_id: usize,
    pub si_sdr_db: f64,
    pub baseline_db: f64,
    pub improvement_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub labels: Vec<String>,
    pub matches: Vec<LabelMatch>,
    pub unmatched_sources: Vec<usize>,
    pub mean_ospa: f64,
    pub steady_state_ospa: f64,
    pub max_ospa: f64,
    pub separation: Vec<SeparationScore>,
    pub frames: Vec<FrameOspa>,
}

fn check_frames(truth: &[TruthRow], tracks: &[TrackRow], num_frames: usize) -> Result<()> {
    if let Some(r) = truth.iter().find(|r| r.frame_index >= num_frames) {
        return Err(Error::data(format!("truth row for frame {} past the {num_frames} frames", r.frame_index)));
    }
    if let Some(r) = tracks.iter().find(|r| r.frame < 0 || r.frame as usize >= num_frames) {
        return Err(Error::data(format!("track row for frame {} outside 0..{num_frames}", r.frame)));
    }
    Ok(())
}

/// Per-frame OSPA between the active true DOAs and the reported ones.
pub fn frame_ospa(
    truth: &[TruthRow],
    tracks: &[TrackRow],
    num_frames: usize,
    cutoff: f64,
    order: f64,
) -> Result<Vec<OspaResult>> {
    check_frames(truth, tracks, num_frames)?;
    let mut t = vec![Vec::new(); num_frames];
    let mut e = vec![Vec::new(); num_frames];
    for r in truth.iter().filter(|r| r.active) {
        t[r.frame_index].push(r.doa_deg);
    }
    for r in tracks {
        e[r.frame as usize].push(r.doa_deg);
    }
    Ok(t.iter().zip(&e).map(|(t, e)| ospa(t, e, cutoff, order)).collect())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median of angles, taken around their circular mean.
fn circ_median(v: &[f64]) -> f64 {
    let (s, c) = v
        .iter()
        .fold((0.0, 0.0), |(s, c), a| (s + a.to_radians().sin(), c + a.to_radians().cos()));
    let centre = s.atan2(c).to_degrees();
    wrap_deg(centre + median(v.iter().map(|a| circ_diff(*a, centre)).collect()))
}

/// Greedy one-to-one matching of labels to sources.
pub fn match_labels(truth: &[TruthRow], tracks: &[TrackRow], cfg: &EvalConfig) -> Vec<LabelMatch> {
    let mut by_label: BTreeMap<&str, Vec<&TrackRow>> = BTreeMap::new();
    for r in tracks {
        by_label.entry(&r.label).or_default().push(r);
    }
    let mut by_source: BTreeMap<usize, Vec<&TruthRow>> = BTreeMap::new();
    for r in truth.iter().filter(|r| r.active) {
        by_source.entry(r.source_id).or_default().push(r);
    }
    let sources: Vec<(usize, f64, f64)> = by_source
        .iter()
        .map(|(id, rows)| {
            let doas: Vec<f64> = rows.iter().map(|r| r.doa_deg).collect();
            (*id, circ_median(&doas), median(rows.iter().map(|r| r.pitch_hz).collect()))
        })
        .collect();
    let mut candidates = Vec::new();
    for (label, rows) in &by_label {
        if rows.len() < cfg.min_track_frames {
            continue;
        }
        let doas: Vec<f64> = rows.iter().map(|r| r.doa_deg).collect();
        let (d, p) = (circ_median(&doas), median(rows.iter().map(|r| r.pitch_hz).collect()));
        for &(id, sd, sp) in &sources {
            let dist = (circ_dist(d, sd) / cfg.match_doa_scale).hypot((p - sp) / cfg.match_pitch_scale);
            if dist <= cfg.match_gate {
                candidates.push((dist, label.to_string(), id, rows.len()));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out: Vec<LabelMatch> = Vec::new();
    for (distance, label, source_id, frames) in candidates {
        if out.iter().any(|m| m.label == label || m.source_id == source_id) {
            continue;
        }
        out.push(LabelMatch {
            label,
            source_id,
            distance,
            frames,
        });
    }
    out.sort_by_key(|m| m.source_id);
    out
}

/// Frames that count towards the steady-state OSPA: everything except the
/// stretch from each voiced onset until `settle_s` after the matched track
/// first reports it.
pub fn steady_state_mask(
    truth: &[TruthRow],
    tracks: &[TrackRow],
    matches: &[LabelMatch],
    num_frames: usize,
    cfg: &EvalConfig,
) -> Vec<bool> {
    let settle = cfg.settle_frames();
    let mut steady = vec![true; num_frames];
    let mut active: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    for r in truth.iter().filter(|r| r.frame_index < num_frames) {
        active.entry(r.source_id).or_insert_with(|| vec![false; num_frames])[r.frame_index] = r.active;
    }
    for (id, act) in &active {
        let label = matches.iter().find(|m| m.source_id == *id).map(|m| m.label.as_str());
        let reported = |k: usize| label.is_some_and(|l| tracks.iter().any(|r| r.frame == k as i64 && r.label == l));
        for onset in (0..num_frames).filter(|&k| act[k] && (k == 0 || !act[k - 1])) {
            let first = (onset..num_frames).take_while(|&k| act[k]).find(|&k| reported(k));
            let end = (first.unwrap_or(onset) + settle).min(num_frames);
            steady[onset..end].iter_mut().for_each(|s| *s = false);
        }
    }
    steady
}

/// Scores a run: per-frame and steady-state OSPA, label matching and, for
/// every matched label with a stream, the SI-SDR improvement over `mixture`.
pub fn evaluate(
    truth: &[TruthRow],
    tracks: &[TrackRow],
    streams: &BTreeMap<String, Vec<f64>>,
    sources: &[Vec<f64>],
    mixture: &[f64],
    num_frames: usize,
    cfg: &EvalConfig,
) -> Result<Evaluation> {
    cfg.validate()?;
    let per_frame = frame_ospa(truth, tracks, num_frames, cfg.ospa_cutoff, cfg.ospa_order)?;
    let matches = match_labels(truth, tracks, cfg);
    let steady = steady_state_mask(truth, tracks, &matches, num_frames, cfg);
    let mut counts = vec![(0, 0); num_frames];
    for r in truth.iter().filter(|r| r.active) {
        counts[r.frame_index].0 += 1;
    }
    for r in tracks {
        counts[r.frame as usize].1 += 1;
    }
    let frames: Vec<FrameOspa> = per_frame
        .iter()
        .enumerate()
        .map(|(k, o)| FrameOspa {
            frame: k,
            truth: counts[k].0,
            estimated: counts[k].1,
            ospa: *o,
            steady: steady[k],
        })
        .collect();
    let mean = |it: &mut dyn Iterator<Item = f64>| {
        let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    };
    let mean_ospa = mean(&mut frames.iter().map(|f| f.ospa.total));
    let steady_state_ospa = mean(&mut frames.iter().filter(|f| f.steady).map(|f| f.ospa.total));
    let max_ospa = frames.iter().map(|f| f.ospa.total).fold(0.0, f64::max);

    let mut separation = Vec::new();
    for m in &matches {
        let (Some(stream), Some(source)) = (streams.get(&m.label), sources.get(m.source_id)) else {
            continue;
        };
        let len = source.len().min(mixture.len());
        let si_sdr_db = si_sdr_with_lag(&source[..len], stream, cfg.max_lag);
        let baseline_db = si_sdr_with_lag(&source[..len], &mixture[..len], cfg.max_lag);
        separation.push(SeparationScore {
            label: m.label.clone(),
            source_id: m.source_id,
            si_sdr_db,
            baseline_db,
            improvement_db: si_sdr_db - baseline_db,
        });
    }
    let mut labels: Vec<String> = tracks.iter().map(|r| r.label.clone()).collect();
    labels.sort();
    labels.dedup();
    let matched: Vec<usize> = matches.iter().map(|m| m.source_id).collect();
    let mut unmatched_sources: Vec<usize> = truth
        .iter()
        .filter(|r| r.active && !matched.contains(&r.source_id))
        .map(|r| r.source_id)
        .collect();
    unmatched_sources.dedup();
    Ok(Evaluation {
        labels,
        matches,
        unmatched_sources,
        mean_ospa,
        steady_state_ospa,
        max_ospa,
        separation,
        frames,
    })
}
