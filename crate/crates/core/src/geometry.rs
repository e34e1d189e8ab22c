//! Microphone array geometry and angle arithmetic.
//!
//! Directions of arrival are azimuths in degrees measured counter-clockwise
//! from the +x axis of the array-centered frame. Sources sit on a circle of
//! radius [`SOURCE_DISTANCE`] around the array center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance of the modelled source from the array center, in meters.
pub const SOURCE_DISTANCE: f64 = 1.0;

/// Wraps an angle in degrees to `[0, 360)`.
pub fn wrap_deg(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Minimal signed circular difference `a - b`, in `[-180, 180)`.
pub fn circ_diff(a: f64, b: f64) -> f64 {
    let d = (a - b + 180.0).rem_euclid(360.0) - 180.0;
    if d >= 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Circular distance `min(|a-b|, 360-|a-b|)` in degrees.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Planar microphone array with its sampling setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicArray {
    /// Microphone coordinates in meters, array-centered frame.
    pub positions: Vec<[f64; 2]>,
    /// Sampling rate in Hz.
    pub sample_rate: f64,
    /// Speed of sound in m/s.
    pub sound_speed: f64,
}

impl Default for MicArray {
    /// Eight microphones on a 0.1 m diameter circle, 48 kHz, 343 m/s.
    fn default() -> Self {
        MicArray::circular(8, 0.1, 48_000.0, 343.0)
    }
}

impl MicArray {
    /// Evenly spaced microphones on a circle, the first one on the +x axis.
    pub fn circular(count: usize, diameter: f64, sample_rate: f64, sound_speed: f64) -> Self {
        let radius = diameter / 2.0;
        let positions = (0..count)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                [radius * phi.cos(), radius * phi.sin()]
            })
            .collect();
        MicArray {
            positions,
            sample_rate,
            sound_speed,
        }
    }

    pub fn new(positions: Vec<[f64; 2]>, sample_rate: f64, sound_speed: f64) -> Result<Self> {
        let array = MicArray {
            positions,
            sample_rate,
            sound_speed,
        };
        array.validate()?;
        Ok(array)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::config("microphone array has no microphones"));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::config("sample_rate must be positive"));
        }
        if !(self.sound_speed > 0.0 && self.sound_speed.is_finite()) {
            return Err(Error::config("sound_speed must be positive"));
        }
        for (i, a) in self.positions.iter().enumerate() {
            if !a.iter().all(|c| c.is_finite()) {
                return Err(Error::config(format!("microphone {i} has a non-finite position")));
            }
            for (j, b) in self.positions.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(Error::config(format!("microphones {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    /// Propagation time from a source at `doa_deg` to microphone `mic`,
    /// relative to the propagation time to the array center.
    pub fn delay_to_center(&self, mic: usize, doa_deg: f64) -> f64 {
        (self.path_length(mic, doa_deg) - SOURCE_DISTANCE) / self.sound_speed
    }

    /// Time difference of arrival between microphones `i` and `j`.
    pub fn tdoa(&self, i: usize, j: usize, doa_deg: f64) -> f64 {
        (self.path_length(i, doa_deg) - self.path_length(j, doa_deg)) / self.sound_speed
    }

    /// Same array rotated counter-clockwise by `deg` degrees.
    pub fn rotated(&self, deg: f64) -> MicArray {
        let (s, c) = deg.to_radians().sin_cos();
        MicArray {
            positions: self
                .positions
                .iter()
                .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
                .collect(),
            ..self.clone()
        }
    }

    fn path_length(&self, mic: usize, doa_deg: f64) -> f64 {
        let src = source_position(doa_deg);
        let m = self.positions[mic];
        (src[0] - m[0]).hypot(src[1] - m[1])
    }
}

/// Source location on the circle of radius [`SOURCE_DISTANCE`].
pub fn source_position(doa_deg: f64) -> [f64; 2] {
    let (s, c) = doa_deg.to_radians().sin_cos();
    [SOURCE_DISTANCE * c, SOURCE_DISTANCE * s]
}
