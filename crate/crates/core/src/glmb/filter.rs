use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use super::model::{birth_from, correct, transition, Correction, FeatureObservation, Label, SoundPayload, TargetState};
use super::params::FilterParams;
use super::state::{cap_and_normalize, merge_duplicates, GlmbState, Hypothesis};
use crate::assignment::k_best;
use crate::error::{Error, Result};

/// Number of children to enumerate for a parent of weight `w`.
fn budget(params: &FilterParams, w: f64) -> usize {
    ((params.max_hypotheses as f64 * w).ceil() as usize).clamp(1, params.max_hypotheses)
}

#[derive(Debug, PartialEq)]
struct FlipSet {
    cost: f64,
    seq: usize,
    /// Positions into the cost-sorted free items.
    flips: Vec<usize>,
}

impl Eq for FlipSet {}

impl PartialOrd for FlipSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FlipSet {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// The `k` most probable inclusion patterns of independent Bernoulli items,
/// most probable first, with their log-probabilities.
pub fn k_best_subsets(probs: &[f64], k: usize) -> Vec<(Vec<bool>, f64)> {
    let mut base = Vec::with_capacity(probs.len());
    let mut base_log = 0.0;
    let mut free = Vec::new();
    for (i, &p) in probs.iter().enumerate() {
        if p >= 1.0 {
            base.push(true);
        } else if p <= 0.0 {
            base.push(false);
        } else {
            base.push(p >= 0.5);
            base_log += p.max(1.0 - p).ln();
            free.push((i, (p.ln() - (1.0 - p).ln()).abs()));
        }
    }
    free.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    out.push((base.clone(), base_log));
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    if let Some(&(_, c)) = free.first() {
        heap.push(FlipSet {
            cost: c,
            seq,
            flips: vec![0],
        });
    }
    while out.len() < k {
        let Some(FlipSet { cost, flips, .. }) = heap.pop() else {
            break;
        };
        let mut pattern = base.clone();
        for &f in &flips {
            pattern[free[f].0] = !pattern[free[f].0];
        }
        out.push((pattern, base_log - cost));
        let last = *flips.last().expect("flip sets are never empty");
        if last + 1 < free.len() {
            let next = free[last + 1].1;
            let mut extended = flips.clone();
            extended.push(last + 1);
            seq += 1;
            heap.push(FlipSet {
                cost: cost + next,
                seq,
                flips: extended,
            });
            let mut shifted = flips;
            *shifted.last_mut().expect("non-empty") = last + 1;
            seq += 1;
            heap.push(FlipSet {
                cost: cost - free[last].1 + next,
                seq,
                flips: shifted,
            });
        }
    }
    out
}

/// Birth components for the frame after `state`, seeded from the
/// measurements of the last update that carry a pitch.
fn births(state: &GlmbState, params: &FilterParams) -> Vec<TargetState> {
    let frame = state.frame_index + 1;
    state
        .birth_candidates
        .iter()
        .enumerate()
        .filter_map(|(i, z)| {
            let label = Label {
                birth_frame: frame,
                index: i as u32,
            };
            birth_from(z, label, params)
        })
        .collect()
}

/// Prediction to the next frame: survival/death of every label, inclusion
/// of measurement-driven births, truncation to the hypothesis cap.
pub fn predict(state: &GlmbState, params: &FilterParams) -> GlmbState {
    let born = births(state, params);
    let mut children = Vec::new();
    for hyp in &state.hypotheses {
        if hyp.weight <= 0.0 {
            continue;
        }
        let predicted: Vec<TargetState> = hyp.targets.iter().map(|t| transition(t, params)).collect();
        let probs: Vec<f64> = predicted
            .iter()
            .map(|_| params.survival_prob)
            .chain(born.iter().map(|_| params.birth_weight))
            .collect();
        for (pattern, log_p) in k_best_subsets(&probs, budget(params, hyp.weight)) {
            let mut targets: Vec<TargetState> = predicted
                .iter()
                .chain(&born)
                .zip(&pattern)
                .filter(|(_, &keep)| keep)
                .map(|(t, _)| t.clone())
                .collect();
            targets.sort_by_key(|t| t.label);
            children.push(Hypothesis {
                weight: hyp.weight * log_p.exp(),
                targets,
                history: hyp.history.clone(),
            });
        }
    }
    GlmbState {
        hypotheses: cap_and_normalize(merge_duplicates(children), params.max_hypotheses, 0.0),
        frame_index: state.frame_index + 1,
        birth_candidates: Vec::new(),
        block_len: state.block_len,
    }
}

/// Cost of associating / missing each target of one hypothesis.
struct Costs {
    matrix: Vec<Vec<f64>>,
    corrections: Vec<Vec<Correction>>,
}

fn costs(targets: &[TargetState], obs: &[FeatureObservation], params: &FilterParams) -> Costs {
    let (n, m) = (targets.len(), obs.len());
    let mut matrix = vec![vec![f64::INFINITY; m + n]; n];
    let mut corrections = Vec::with_capacity(n);
    for (i, t) in targets.iter().enumerate() {
        let pd = params.detection_prob(t.pitch());
        let row: Vec<Correction> = obs.iter().map(|z| correct(t, z, params)).collect();
        for (j, (c, z)) in row.iter().zip(obs).enumerate() {
            let kappa = if z.pitch.is_some() {
                params.clutter_density()
            } else {
                params.clutter_density_doa()
            };
            let ratio = pd * c.likelihood / kappa;
            if ratio > 0.0 {
                matrix[i][j] = -ratio.ln();
            }
        }
        if pd < 1.0 {
            matrix[i][m + i] = -(1.0 - pd).ln();
        }
        corrections.push(row);
    }
    Costs {
        matrix,
        corrections,
    }
}

/// Bayes update with one frame of observations.
pub fn update(state: &GlmbState, obs: &[FeatureObservation], params: &FilterParams) -> Result<GlmbState> {
    for z in obs {
        if z.frame_index != state.frame_index {
            return Err(Error::FrameMismatch {
                expected: state.frame_index,
                got: z.frame_index,
            });
        }
        z.validate()?;
    }
    let m = obs.len();
    let block_len = obs.first().map_or(state.block_len, |z| z.sound.len());

    let mut children = Vec::new();
    let mut log_weights = Vec::new();
    for hyp in &state.hypotheses {
        if hyp.weight <= 0.0 {
            continue;
        }
        let c = costs(&hyp.targets, obs, params);
        for a in k_best(&c.matrix, budget(params, hyp.weight)) {
            let mut record = Vec::with_capacity(hyp.targets.len());
            let targets = hyp
                .targets
                .iter()
                .zip(&a.cols)
                .enumerate()
                .map(|(i, (t, &j))| {
                    if j < m {
                        record.push((t.label, Some(j)));
                        let corr = &c.corrections[i][j];
                        TargetState {
                            label: t.label,
                            mean: corr.mean,
                            cov: corr.cov,
                            sound: SoundPayload::Block(Arc::clone(&obs[j].sound)),
                        }
                    } else {
                        record.push((t.label, None));
                        TargetState {
                            sound: SoundPayload::Silence(block_len),
                            ..t.clone()
                        }
                    }
                })
                .collect();
            log_weights.push(hyp.weight.ln() - a.cost);
            children.push(Hypothesis {
                weight: 0.0,
                targets,
                history: hyp.history.extend(state.frame_index, record),
            });
        }
    }
    // normalize in the log domain so that large costs do not underflow
    let top = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (h, lw) in children.iter_mut().zip(&log_weights) {
        h.weight = (lw - top).exp();
    }
    Ok(GlmbState {
        hypotheses: cap_and_normalize(
            merge_duplicates(children),
            params.max_hypotheses,
            params.prune_threshold,
        ),
        frame_index: state.frame_index,
        birth_candidates: obs.to_vec(),
        block_len,
    })
}

/// Sequential filter owning its state.
#[derive(Debug, Clone)]
pub struct GlmbFilter {
    params: FilterParams,
    state: GlmbState,
}

impl GlmbFilter {
    pub fn new(params: FilterParams, block_len: usize) -> Result<Self> {
        params.validate()?;
        Ok(GlmbFilter {
            params,
            state: GlmbState::new(block_len),
        })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn state(&self) -> &GlmbState {
        &self.state
    }

    /// Index of the next frame the filter expects.
    pub fn next_frame(&self) -> i64 {
        self.state.frame_index + 1
    }

    /// Predicts to the next frame and updates with its observations.
    pub fn step(&mut self, obs: &[FeatureObservation]) -> Result<()> {
        let predicted = predict(&self.state, &self.params);
        self.state = update(&predicted, obs, &self.params)?;
        Ok(())
    }
}
