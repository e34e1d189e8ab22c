use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::Serialize;

use super::model::{FeatureObservation, Label, TargetState};

#[derive(Debug)]
struct HistoryNode {
    frame: i64,
    /// Measurement index per label, `None` for a miss.
    assoc: Vec<(Label, Option<usize>)>,
    parent: Option<Arc<HistoryNode>>,
}

/// Persistent list of the association maps a hypothesis went through.
/// Children share their parent's tail.
#[derive(Debug, Clone, Default)]
pub struct AssocHistory {
    head: Option<Arc<HistoryNode>>,
    key: u64,
}

impl AssocHistory {
    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn extend(&self, frame: i64, assoc: Vec<(Label, Option<usize>)>) -> AssocHistory {
        let mut h = DefaultHasher::new();
        self.key.hash(&mut h);
        frame.hash(&mut h);
        assoc.hash(&mut h);
        AssocHistory {
            key: h.finish(),
            head: Some(Arc::new(HistoryNode {
                frame,
                assoc,
                parent: self.head.clone(),
            })),
        }
    }

    /// Association of `label` in `frame`: `Some(Some(j))` for measurement
    /// `j`, `Some(None)` for a miss, `None` if not recorded.
    pub fn association(&self, label: Label, frame: i64) -> Option<Option<usize>> {
        let mut node = self.head.as_deref();
        while let Some(n) = node {
            if n.frame == frame {
                return n.assoc.iter().find(|(l, _)| *l == label).map(|(_, a)| *a);
            }
            if n.frame < frame {
                return None;
            }
            node = n.parent.as_deref();
        }
        None
    }

    pub fn len(&self) -> usize {
        let mut node = self.head.as_deref();
        let mut n = 0;
        while let Some(x) = node {
            n += 1;
            node = x.parent.as_deref();
        }
        n
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_none()
    }
}

/// One component of the labeled multi-target density: a label set, its
/// association history and a Gaussian per label.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub weight: f64,
    /// Sorted by label.
    pub targets: Vec<TargetState>,
    pub history: AssocHistory,
}

impl Hypothesis {
    pub fn empty(weight: f64) -> Self {
        Hypothesis {
            weight,
            targets: Vec::new(),
            history: AssocHistory::default(),
        }
    }

    pub fn labels(&self) -> Vec<Label> {
        self.targets.iter().map(|t| t.label).collect()
    }

    pub fn cardinality(&self) -> usize {
        self.targets.len()
    }

    /// Identity for merging duplicates: label set plus history.
    pub fn key(&self) -> (Vec<Label>, u64) {
        (self.labels(), self.history.key())
    }
}

/// Weighted set of hypotheses at one frame.
#[derive(Debug, Clone)]
pub struct GlmbState {
    pub hypotheses: Vec<Hypothesis>,
    /// Frame the density refers to; `-1` before the first frame.
    pub frame_index: i64,
    /// Measurements of the last update, used to seed births.
    pub birth_candidates: Vec<FeatureObservation>,
    /// Samples per frame, used for the zero blocks of missed targets.
    pub block_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisSummary {
    pub weight: f64,
    pub labels: Vec<String>,
}

impl GlmbState {
    /// The empty multi-target density: no targets with certainty.
    pub fn new(block_len: usize) -> Self {
        GlmbState {
            hypotheses: vec![Hypothesis::empty(1.0)],
            frame_index: -1,
            birth_candidates: Vec::new(),
            block_len,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.hypotheses.iter().map(|h| h.weight).sum()
    }

    /// `P(|X| = n)` for `n = 0..=max`.
    pub fn cardinality_distribution(&self) -> Vec<f64> {
        let max = self.hypotheses.iter().map(Hypothesis::cardinality).max().unwrap_or(0);
        let mut dist = vec![0.0; max + 1];
        for h in &self.hypotheses {
            dist[h.cardinality()] += h.weight;
        }
        dist
    }

    /// Highest-weight hypotheses, best first.
    pub fn top(&self, n: usize) -> Vec<HypothesisSummary> {
        let mut idx: Vec<usize> = (0..self.hypotheses.len()).collect();
        idx.sort_by(|&a, &b| self.hypotheses[b].weight.total_cmp(&self.hypotheses[a].weight));
        idx.into_iter()
            .take(n)
            .map(|i| HypothesisSummary {
                weight: self.hypotheses[i].weight,
                labels: self.hypotheses[i].labels().iter().map(Label::to_string).collect(),
            })
            .collect()
    }

    /// Checks the structural invariants; returns a description of the
    /// first violation.
    pub fn check(&self, tol: f64) -> std::result::Result<(), String> {
        if self.hypotheses.is_empty() {
            return Err("no hypotheses".into());
        }
        let total = self.total_weight();
        if (total - 1.0).abs() > tol {
            return Err(format!("weights sum to {total}"));
        }
        for (i, h) in self.hypotheses.iter().enumerate() {
            if !(h.weight >= 0.0) {
                return Err(format!("hypothesis {i} has weight {}", h.weight));
            }
            for w in h.targets.windows(2) {
                if w[0].label >= w[1].label {
                    return Err(format!("hypothesis {i} has unsorted or repeated labels"));
                }
            }
            for t in &h.targets {
                if !(0.0..360.0).contains(&t.mean[0]) {
                    return Err(format!("label {} has DOA {}", t.label, t.mean[0]));
                }
                let eig = t.cov.symmetric_eigenvalues();
                if eig.iter().any(|&e| e < -1e-9) {
                    return Err(format!("label {} has an indefinite covariance", t.label));
                }
            }
        }
        Ok(())
    }
}

/// Merges hypotheses with equal keys, keeping first-seen order.
pub(crate) fn merge_duplicates(hyps: Vec<Hypothesis>) -> Vec<Hypothesis> {
    let mut index: HashMap<(Vec<Label>, u64), usize> = HashMap::with_capacity(hyps.len());
    let mut out: Vec<Hypothesis> = Vec::with_capacity(hyps.len());
    for h in hyps {
        match index.get(&h.key()) {
            Some(&i) => out[i].weight += h.weight,
            None => {
                index.insert(h.key(), out.len());
                out.push(h);
            }
        }
    }
    out
}

/// Sorts by weight, drops hypotheses below `prune` (relative to the total,
/// always keeping the best), keeps at most `cap` and renormalizes.
pub(crate) fn cap_and_normalize(mut hyps: Vec<Hypothesis>, cap: usize, prune: f64) -> Vec<Hypothesis> {
    hyps.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    let total: f64 = hyps.iter().map(|h| h.weight).sum();
    if !(total > 0.0) {
        // everything underflowed: keep the first as certain
        hyps.truncate(1);
        if let Some(h) = hyps.first_mut() {
            h.weight = 1.0;
        }
        return hyps;
    }
    let keep = hyps
        .iter()
        .take(cap.max(1))
        .enumerate()
        .take_while(|(i, h)| *i == 0 || h.weight / total >= prune)
        .count();
    hyps.truncate(keep);
    let kept: f64 = hyps.iter().map(|h| h.weight).sum();
    for h in &mut hyps {
        h.weight /= kept;
    }
    hyps
}
