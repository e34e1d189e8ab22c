//! End-to-end tracking of a multichannel recording.
//!
//! The front-end runs independently per frame (localize, steer a
//! beamformer at every detected direction, estimate the pitch of each
//! extracted block) and is parallelized over frames. The filter then runs
//! sequentially over the resulting observations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamform::{extract_sound, DesignParams, WeightCache, WlsDesigner};
use crate::error::{Error, Result};
use crate::geometry::MicArray;
use crate::glmb::{
    assemble_streams, extract_estimates, FeatureObservation, FilterParams, FrameEstimates, GlmbFilter,
    HypothesisSummary, Streams,
};
use crate::localization::{DoaSpectrum, Localizer, LocalizerConfig};
use crate::pitch::{PitchConfig, PitchEstimate, PitchEstimator};
use crate::scene::{frame_len, PITCH_RANGE_HZ};

/// Front-end settings used by the tracker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontEndConfig {
    pub localizer: LocalizerConfig,
    pub beamformer: DesignParams,
    pub pitch: PitchConfig,
}

impl Default for FrontEndConfig {
    fn default() -> Self {
        FrontEndConfig {
            localizer: LocalizerConfig {
                rel_threshold: 0.0,
                min_pair_mean: 0.25,
                ..LocalizerConfig::default()
            },
            beamformer: DesignParams::default(),
            pitch: PitchConfig::default(),
        }
    }
}

impl FrontEndConfig {
    pub fn validate(&self) -> Result<()> {
        let l = &self.localizer;
        if !(l.grid_step > 0.0 && l.grid_step <= 360.0) {
            return Err(Error::config("localizer grid_step must be in (0, 360]"));
        }
        if !(l.f_min >= 0.0 && l.f_max > l.f_min && l.f_max.is_finite()) {
            return Err(Error::config("localizer band is invalid"));
        }
        if l.fft_size == 0 || l.max_detections == 0 {
            return Err(Error::config("localizer fft_size and max_detections must be positive"));
        }
        if !(l.epsilon > 0.0 && l.rel_threshold >= 0.0 && l.min_pair_mean >= 0.0) {
            return Err(Error::config("localizer thresholds must be non-negative"));
        }
        self.beamformer.validate()?;
        self.pitch.validate()
    }
}

/// One direction found in a frame, with what the front-end made of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub doa: f64,
    /// Value of the DOA spectrum at the peak.
    pub strength: f64,
    pub pitch: PitchEstimate,
}

/// Front-end output of one frame.
#[derive(Debug, Clone)]
pub struct FrameFeatures {
    pub frame_index: usize,
    pub detections: Vec<Detection>,
    pub observations: Vec<FeatureObservation>,
    pub spectrum: Option<DoaSpectrum>,
}

/// Localizer, beamformer cache and pitch estimator for one array.
#[derive(Debug)]
pub struct FrontEnd {
    localizer: Localizer,
    weights: WeightCache,
    pitch: PitchEstimator,
    block_len: usize,
    channels: usize,
}

impl FrontEnd {
    pub fn new(array: &MicArray, cfg: &FrontEndConfig) -> Result<Self> {
        array.validate()?;
        cfg.validate()?;
        let block_len = frame_len(array.sample_rate);
        if block_len < cfg.beamformer.taps {
            return Err(Error::config("frame is shorter than the beamformer"));
        }
        Ok(FrontEnd {
            localizer: Localizer::new(array.clone(), cfg.localizer.clone()),
            weights: WeightCache::new(WlsDesigner::new(array.clone(), cfg.beamformer.clone())),
            pitch: PitchEstimator::new(array.sample_rate, cfg.pitch.clone())?,
            block_len,
            channels: array.len(),
        })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn localizer(&self) -> &Localizer {
        &self.localizer
    }

    pub fn weights(&self) -> &WeightCache {
        &self.weights
    }

    fn block<'a>(&self, channels: &'a [Vec<f64>], k: usize) -> Vec<&'a [f64]> {
        let s = k * self.block_len;
        channels.iter().map(|c| &c[s..s + self.block_len]).collect()
    }

    /// Processes frame `k` of a recording. The next frame, when present,
    /// supplies the beamformer's look-ahead samples.
    pub fn process_frame(&self, channels: &[Vec<f64>], k: usize, keep_spectrum: bool) -> Result<FrameFeatures> {
        let total = check_channels(channels, self.channels)? / self.block_len;
        if k >= total {
            return Err(Error::data(format!("frame {k} is past the end of the recording")));
        }
        let block = self.block(channels, k);
        let next = (k + 1 < total).then(|| self.block(channels, k + 1));
        let (spec, peaks) = self.localizer.localize(&block, k);
        let mut detections = Vec::with_capacity(peaks.len());
        let mut observations = Vec::with_capacity(peaks.len());
        for p in peaks {
            let w = self.weights.get(p.doa);
            let sound = extract_sound(&w, &block, next.as_deref())?;
            let mut pitch = self.pitch.estimate(&sound);
            if let Some(f0) = pitch.f0 {
                if !(PITCH_RANGE_HZ.0..=PITCH_RANGE_HZ.1).contains(&f0) {
                    pitch = PitchEstimate::ABSENT;
                }
            }
            observations.push(FeatureObservation::new(p.doa, pitch.f0, sound, k as i64)?);
            detections.push(Detection {
                doa: p.doa,
                strength: p.value,
                pitch,
            });
        }
        Ok(FrameFeatures {
            frame_index: k,
            detections,
            observations,
            spectrum: keep_spectrum.then_some(spec),
        })
    }

    /// Processes every whole frame of a recording, in parallel.
    pub fn process_all(&self, channels: &[Vec<f64>], keep_spectra: bool) -> Result<Vec<FrameFeatures>> {
        let total = check_channels(channels, self.channels)? / self.block_len;
        (0..total)
            .into_par_iter()
            .map(|k| self.process_frame(channels, k, keep_spectra))
            .collect()
    }
}

/// Validates a recording; returns the number of samples per channel.
fn check_channels(channels: &[Vec<f64>], expected: usize) -> Result<usize> {
    if channels.len() != expected {
        return Err(Error::data(format!(
            "recording has {} channels, the array has {expected}",
            channels.len()
        )));
    }
    let len = channels.first().map_or(0, Vec::len);
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::data("recording channels differ in length"));
    }
    if channels.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::data("recording contains non-finite samples"));
    }
    Ok(len)
}

/// Filter state summary recorded after each frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameDiagnostics {
    pub frame: usize,
    pub hypotheses: usize,
    pub cardinality: Vec<f64>,
    pub top: Vec<HypothesisSummary>,
    pub detections: Vec<Detection>,
}

/// Everything produced by one tracking run.
#[derive(Debug, Clone)]
pub struct TrackingRun {
    pub features: Vec<FrameFeatures>,
    pub estimates: Vec<FrameEstimates>,
    pub diagnostics: Vec<FrameDiagnostics>,
    pub streams: Streams,
    pub num_frames: usize,
    pub block_len: usize,
}

/// Tracks and separates the speakers of a recording.
pub fn track(
    channels: &[Vec<f64>],
    array: &MicArray,
    front_end: &FrontEndConfig,
    filter: &FilterParams,
    keep_spectra: bool,
) -> Result<TrackingRun> {
    let fe = FrontEnd::new(array, front_end)?;
    let features = fe.process_all(channels, keep_spectra)?;
    track_features(features, fe.block_len(), filter)
}

/// Runs the filter over front-end output that is already available.
pub fn track_features(features: Vec<FrameFeatures>, block_len: usize, params: &FilterParams) -> Result<TrackingRun> {
    let mut filter = GlmbFilter::new(params.clone(), block_len)?;
    let mut estimates = Vec::with_capacity(features.len());
    let mut diagnostics = Vec::with_capacity(features.len());
    for f in &features {
        filter.step(&f.observations)?;
        let state = filter.state();
        estimates.push(FrameEstimates {
            frame_index: state.frame_index,
            tracks: extract_estimates(state),
        });
        diagnostics.push(FrameDiagnostics {
            frame: f.frame_index,
            hypotheses: state.hypotheses.len(),
            cardinality: state.cardinality_distribution(),
            top: state.top(10),
            detections: f.detections.clone(),
        });
    }
    let num_frames = features.len();
    let streams = assemble_streams(&estimates, num_frames, block_len, params.frame_period);
    Ok(TrackingRun {
        features,
        estimates,
        diagnostics,
        streams,
        num_frames,
        block_len,
    })
}
