use nalgebra::{Matrix2, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tuning of the labeled multi-target filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    pub survival_prob: f64,
    /// Mean number of clutter measurements per frame.
    pub clutter_rate: f64,
    /// Extent of the DOA measurement space (degrees).
    pub doa_span: f64,
    /// Extent of the pitch measurement space (Hz).
    pub pitch_span: f64,
    pub detection_max: f64,
    pub detection_pitch_center: f64,
    pub detection_pitch_std: f64,
    /// Measurement noise std of the DOA (degrees).
    pub sigma_doa: f64,
    /// Measurement noise std of the pitch (Hz).
    pub sigma_pitch: f64,
    /// Time between frames (s).
    pub frame_period: f64,
    /// Langevin damping of the DOA velocity (1/s).
    pub langevin_beta: f64,
    /// Steady-state std of the DOA velocity (degrees/s).
    pub langevin_sigma: f64,
    /// Random-walk std of the pitch per frame (Hz).
    pub pitch_walk_std: f64,
    pub birth_std_doa: f64,
    pub birth_std_velocity: f64,
    pub birth_std_pitch: f64,
    /// Existence probability of each measurement-driven birth.
    pub birth_weight: f64,
    pub max_hypotheses: usize,
    pub prune_threshold: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            survival_prob: 0.75,
            clutter_rate: 0.044,
            doa_span: 360.0,
            pitch_span: 450.0,
            detection_max: 0.98,
            detection_pitch_center: 280.0,
            detection_pitch_std: 30.0,
            sigma_doa: 2.0,
            sigma_pitch: 10.0,
            frame_period: 0.1,
            langevin_beta: 0.2,
            langevin_sigma: 10.0,
            pitch_walk_std: 30.0,
            birth_std_doa: 5.0,
            birth_std_velocity: 10.0,
            birth_std_pitch: 30.0,
            birth_weight: 0.1,
            max_hypotheses: 300,
            prune_threshold: 1e-5,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be a probability, got {v}")))
            }
        };
        prob("survival_prob", self.survival_prob)?;
        prob("detection_max", self.detection_max)?;
        prob("birth_weight", self.birth_weight)?;
        let positive = [
            ("clutter_rate", self.clutter_rate),
            ("doa_span", self.doa_span),
            ("pitch_span", self.pitch_span),
            ("detection_pitch_std", self.detection_pitch_std),
            ("sigma_doa", self.sigma_doa),
            ("sigma_pitch", self.sigma_pitch),
            ("frame_period", self.frame_period),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("langevin_beta", self.langevin_beta),
            ("langevin_sigma", self.langevin_sigma),
            ("pitch_walk_std", self.pitch_walk_std),
            ("birth_std_doa", self.birth_std_doa),
            ("birth_std_velocity", self.birth_std_velocity),
            ("birth_std_pitch", self.birth_std_pitch),
            ("prune_threshold", self.prune_threshold),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.max_hypotheses == 0 {
            return Err(Error::config("max_hypotheses must be at least 1"));
        }
        Ok(())
    }

    /// Clutter intensity per (degree · Hz).
    pub fn clutter_density(&self) -> f64 {
        self.clutter_rate / (self.doa_span * self.pitch_span)
    }

    /// Clutter intensity per degree, for measurements without pitch.
    pub fn clutter_density_doa(&self) -> f64 {
        self.clutter_rate / self.doa_span
    }

    /// Probability of detecting a speaker whose pitch is `f0`.
    pub fn detection_prob(&self, f0: f64) -> f64 {
        if !f0.is_finite() {
            return 0.0;
        }
        let z = (f0 - self.detection_pitch_center) / self.detection_pitch_std;
        (self.detection_max * (-0.5 * z * z).exp()).clamp(0.0, self.detection_max)
    }

    /// State transition for `(doa, doa rate, pitch)`.
    pub fn transition_matrix(&self) -> Matrix3<f64> {
        let decay = (-self.langevin_beta * self.frame_period).exp();
        Matrix3::new(
            1.0,
            self.frame_period,
            0.0,
            0.0,
            decay,
            0.0,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Std of the velocity noise added per frame.
    pub fn velocity_noise_std(&self) -> f64 {
        let decay2 = (-2.0 * self.langevin_beta * self.frame_period).exp();
        self.langevin_sigma * (1.0 - decay2).sqrt()
    }

    pub fn process_noise(&self) -> Matrix3<f64> {
        let qv = self.velocity_noise_std();
        Matrix3::from_diagonal(&[0.0, qv * qv, self.pitch_walk_std.powi(2)].into())
    }

    pub fn measurement_noise(&self) -> Matrix2<f64> {
        Matrix2::from_diagonal(&[self.sigma_doa.powi(2), self.sigma_pitch.powi(2)].into())
    }

    pub fn birth_cov(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(
            &[
                self.birth_std_doa.powi(2),
                self.birth_std_velocity.powi(2),
                self.birth_std_pitch.powi(2),
            ]
            .into(),
        )
    }
}

/// Detection probability with the default parameters.
pub fn detection_prob(f0: f64) -> f64 {
    FilterParams::default().detection_prob(f0)
}
