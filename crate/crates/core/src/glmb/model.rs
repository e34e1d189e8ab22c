use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, RowVector3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::params::FilterParams;
use crate::error::{Error, Result};
use crate::geometry::{circ_diff, wrap_deg};
use crate::scene::PITCH_RANGE_HZ;

/// Track label: the frame a target was born in and its index among that
/// frame's births.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub birth_frame: i64,
    pub index: u32,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.birth_frame, self.index)
    }
}

/// Audio carried by a target.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SoundPayload {
    /// Nothing assigned yet (right after prediction).
    #[default]
    Empty,
    /// A zero block of the given length (target missed).
    Silence(usize),
    /// The extracted block of the associated measurement.
    Block(Arc<Vec<f64>>),
}

impl SoundPayload {
    pub fn is_empty(&self) -> bool {
        matches!(self, SoundPayload::Empty)
    }

    pub fn len(&self) -> usize {
        match self {
            SoundPayload::Empty => 0,
            SoundPayload::Silence(n) => *n,
            SoundPayload::Block(b) => b.len(),
        }
    }

    /// Writes the payload into `out`, zero-filling whatever it does not cover.
    pub fn write_into(&self, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if let SoundPayload::Block(b) = self {
            let n = b.len().min(out.len());
            out[..n].copy_from_slice(&b[..n]);
        }
    }
}

/// One detection: a DOA, optionally a pitch, and the sound extracted
/// towards that DOA.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureObservation {
    pub doa: f64,
    pub pitch: Option<f64>,
    pub sound: Arc<Vec<f64>>,
    pub frame_index: i64,
}

impl FeatureObservation {
    pub fn new(doa: f64, pitch: Option<f64>, sound: Vec<f64>, frame_index: i64) -> Result<Self> {
        let obs = FeatureObservation {
            doa,
            pitch,
            sound: Arc::new(sound),
            frame_index,
        };
        obs.validate()?;
        Ok(obs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..360.0).contains(&self.doa) {
            return Err(Error::data(format!("observation DOA {} outside [0, 360)", self.doa)));
        }
        if let Some(p) = self.pitch {
            let (lo, hi) = PITCH_RANGE_HZ;
            if !(lo..=hi).contains(&p) {
                return Err(Error::data(format!("observation pitch {p} outside [{lo}, {hi}] Hz")));
            }
        }
        Ok(())
    }
}

/// Gaussian density of one labeled target over `(doa, doa rate, pitch)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub label: Label,
    pub mean: Vector3<f64>,
    pub cov: Matrix3<f64>,
    pub sound: SoundPayload,
}

impl TargetState {
    pub fn doa(&self) -> f64 {
        self.mean[0]
    }

    pub fn pitch(&self) -> f64 {
        self.mean[2]
    }
}

fn symmetrize(m: Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// One-frame prediction. The sound payload is dropped.
pub fn transition(state: &TargetState, params: &FilterParams) -> TargetState {
    let f = params.transition_matrix();
    let mut mean = f * state.mean;
    mean[0] = wrap_deg(mean[0]);
    TargetState {
        label: state.label,
        mean,
        cov: symmetrize(f * state.cov * f.transpose() + params.process_noise()),
        sound: SoundPayload::Empty,
    }
}

/// Result of conditioning a target on one observation.
#[derive(Debug, Clone)]
pub struct Correction {
    pub mean: Vector3<f64>,
    pub cov: Matrix3<f64>,
    /// Predictive density of the observation.
    pub likelihood: f64,
}

/// Kalman update with a circular DOA innovation (Joseph form). Without a
/// pitch, only the DOA row of the measurement model is used.
pub fn correct(state: &TargetState, obs: &FeatureObservation, params: &FilterParams) -> Correction {
    let (p, x) = (&state.cov, &state.mean);
    let sd2 = params.sigma_doa.powi(2);
    let (mean, cov, likelihood) = match obs.pitch {
        Some(pitch) => {
            let h = nalgebra::Matrix2x3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
            let r = params.measurement_noise();
            let nu = Vector2::new(circ_diff(obs.doa, x[0]), pitch - x[2]);
            let s = h * p * h.transpose() + r;
            let s_inv = s.try_inverse().expect("innovation covariance is positive definite");
            let k = p * h.transpose() * s_inv;
            let ikh = Matrix3::identity() - k * h;
            let maha = (nu.transpose() * s_inv * nu)[0];
            let lik = (-0.5 * maha).exp() / (2.0 * std::f64::consts::PI * s.determinant().sqrt());
            (x + k * nu, ikh * p * ikh.transpose() + k * r * k.transpose(), lik)
        }
        None => {
            let h = RowVector3::new(1.0, 0.0, 0.0);
            let nu = circ_diff(obs.doa, x[0]);
            let s = p[(0, 0)] + sd2;
            let k = p * h.transpose() / s;
            let ikh = Matrix3::identity() - k * h;
            let lik = (-0.5 * nu * nu / s).exp() / (2.0 * std::f64::consts::PI * s).sqrt();
            (x + k * nu, ikh * p * ikh.transpose() + k * sd2 * k.transpose(), lik)
        }
    };
    let mut mean = mean;
    mean[0] = wrap_deg(mean[0]);
    Correction {
        mean,
        cov: symmetrize(cov),
        likelihood,
    }
}

/// Predictive likelihood of `obs` under the target density.
pub fn likelihood(obs: &FeatureObservation, state: &TargetState, params: &FilterParams) -> f64 {
    correct(state, obs, params).likelihood
}

/// A new target seeded from a previous-frame measurement that has a pitch.
pub fn birth_from(obs: &FeatureObservation, label: Label, params: &FilterParams) -> Option<TargetState> {
    let pitch = obs.pitch?;
    Some(TargetState {
        label,
        mean: Vector3::new(wrap_deg(obs.doa), 0.0, pitch),
        cov: params.birth_cov(),
        sound: SoundPayload::Empty,
    })
}
