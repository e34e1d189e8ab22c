use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{Label, SoundPayload};
use super::state::GlmbState;

/// One reported track at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackEstimate {
    pub label: Label,
    pub doa: f64,
    pub doa_std: f64,
    pub doa_rate: f64,
    pub pitch: f64,
    pub pitch_std: f64,
    pub sound: SoundPayload,
    /// Index of the associated measurement, `None` when missed.
    pub association: Option<usize>,
}

/// Tracks of the MAP-cardinality hypothesis with the highest weight.
pub fn extract_estimates(state: &GlmbState) -> Vec<TrackEstimate> {
    let dist = state.cardinality_distribution();
    let Some((n, _)) = dist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(&a.0)))
    else {
        return Vec::new();
    };
    let best = state
        .hypotheses
        .iter()
        .filter(|h| h.cardinality() == n)
        .max_by(|a, b| a.weight.total_cmp(&b.weight));
    let Some(best) = best else {
        return Vec::new();
    };
    best.targets
        .iter()
        .map(|t| TrackEstimate {
            label: t.label,
            doa: t.mean[0],
            doa_std: t.cov[(0, 0)].max(0.0).sqrt(),
            doa_rate: t.mean[1],
            pitch: t.mean[2],
            pitch_std: t.cov[(2, 2)].max(0.0).sqrt(),
            sound: t.sound.clone(),
            association: best.history.association(t.label, state.frame_index).flatten(),
        })
        .collect()
}

/// Estimates reported for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEstimates {
    pub frame_index: i64,
    pub tracks: Vec<TrackEstimate>,
}

/// One row of the track table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub frame: i64,
    pub time_s: f64,
    pub label: String,
    pub doa_deg: f64,
    pub doa_std_deg: f64,
    pub pitch_hz: f64,
    pub pitch_std_hz: f64,
    /// Measurement index or `miss`.
    pub association: String,
}

/// Per-label audio and the track table of a run.
#[derive(Debug, Clone, Default)]
pub struct Streams {
    pub audio: BTreeMap<Label, Vec<f64>>,
    pub rows: Vec<TrackRow>,
}

/// Concatenates each label's sound blocks in frame order; frames where a
/// label is not reported (or was missed) are zero.
pub fn assemble_streams(frames: &[FrameEstimates], num_frames: usize, block_len: usize, frame_period: f64) -> Streams {
    let mut streams = Streams::default();
    for fe in frames {
        for t in &fe.tracks {
            streams.rows.push(TrackRow {
                frame: fe.frame_index,
                time_s: (fe.frame_index as f64 * frame_period * 1e9).round() / 1e9,
                label: t.label.to_string(),
                doa_deg: t.doa,
                doa_std_deg: t.doa_std,
                pitch_hz: t.pitch,
                pitch_std_hz: t.pitch_std,
                association: t.association.map_or_else(|| "miss".to_string(), |j| j.to_string()),
            });
            if fe.frame_index < 0 || fe.frame_index as usize >= num_frames {
                continue;
            }
            let audio = streams
                .audio
                .entry(t.label)
                .or_insert_with(|| vec![0.0; num_frames * block_len]);
            let start = fe.frame_index as usize * block_len;
            t.sound.write_into(&mut audio[start..start + block_len]);
        }
    }
    streams
}
