//! Labeled multi-target tracking of speakers with a δ-GLMB filter.
//!
//! Each target carries a DOA with Langevin dynamics, a random-walk pitch
//! and the sound block of its latest associated measurement. The density
//! is a weighted set of hypotheses (label set + association history), each
//! with one Gaussian per label; prediction enumerates the most likely
//! survival/birth patterns and the update ranks association maps with a
//! K-best assignment solver.

mod filter;
mod model;
mod output;
mod params;
mod state;

pub use filter::{k_best_subsets, predict, update, GlmbFilter};
pub use model::{
    birth_from, correct, likelihood, transition, Correction, FeatureObservation, Label, SoundPayload, TargetState,
};
pub use output::{assemble_streams, extract_estimates, FrameEstimates, Streams, TrackEstimate, TrackRow};
pub use params::{detection_prob, FilterParams};
pub use state::{AssocHistory, GlmbState, Hypothesis, HypothesisSummary};
