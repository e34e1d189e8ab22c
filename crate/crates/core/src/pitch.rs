//! Frame-level fundamental-frequency estimation by harmonic summation.
//!
//! Each frame is cut into short overlapping sub-frames. For every sub-frame
//! the weighted sum of spectral magnitudes at the first few harmonics is
//! scored over a log-spaced F0 grid, the score at half the candidate is
//! subtracted to discourage octave-down errors, and the best candidate is
//! kept if it stands out from the median score. Voiced sub-frame estimates
//! are averaged into one value per frame.

use serde::{Deserialize, Serialize};

use crate::dsp::rfft;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchEstimate {
    /// Averaged F0 in Hz, `None` when the frame is unvoiced.
    pub f0: Option<f64>,
    /// Fraction of voiced sub-frames.
    pub confidence: f64,
}

impl PitchEstimate {
    pub const ABSENT: PitchEstimate = PitchEstimate {
        f0: None,
        confidence: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PitchConfig {
    pub f_min: f64,
    pub f_max: f64,
    pub grid_points: usize,
    pub harmonics: usize,
    /// Sub-frame length in seconds.
    pub sub_frame_s: f64,
    /// Sub-frame overlap as a fraction of the sub-frame length.
    pub overlap: f64,
    /// Weight of the half-F0 score subtracted from each candidate.
    pub subharmonic_penalty: f64,
    /// A sub-frame is voiced when its peak reaches this multiple of the
    /// median score.
    pub voicing_ratio: f64,
    pub min_voiced: usize,
    /// Minimum FFT length; the sub-frame is zero-padded up to it.
    pub fft_size: usize,
}

impl Default for PitchConfig {
    fn default() -> Self {
        PitchConfig {
            f_min: 50.0,
            f_max: 500.0,
            grid_points: 256,
            harmonics: 8,
            sub_frame_s: 0.025,
            overlap: 0.5,
            subharmonic_penalty: 0.5,
            voicing_ratio: 2.0,
            min_voiced: 2,
            fft_size: 8192,
        }
    }
}

impl PitchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_min > 0.0 && self.f_max > self.f_min && self.f_max.is_finite()) {
            return Err(Error::config("pitch range must satisfy 0 < f_min < f_max"));
        }
        if self.grid_points < 3 || self.harmonics == 0 {
            return Err(Error::config("pitch grid needs ≥ 3 points and ≥ 1 harmonic"));
        }
        if !(self.sub_frame_s > 0.0) || !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::config("pitch sub-frame length or overlap is invalid"));
        }
        if !(self.voicing_ratio > 0.0) || self.subharmonic_penalty < 0.0 {
            return Err(Error::config("pitch thresholds must be positive"));
        }
        Ok(())
    }

    /// The log-spaced candidate grid.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.f_min.ln(), self.f_max.ln());
        let n = self.grid_points;
        (0..n)
            .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }
}

/// Harmonic-summation pitch estimator with a precomputed grid.
#[derive(Debug, Clone)]
pub struct PitchEstimator {
    cfg: PitchConfig,
    fs: f64,
    sub_len: usize,
    hop: usize,
    nfft: usize,
    grid: Vec<f64>,
}

impl PitchEstimator {
    pub fn new(fs: f64, cfg: PitchConfig) -> Result<Self> {
        cfg.validate()?;
        if !(fs > 0.0) {
            return Err(Error::config("sample rate must be positive"));
        }
        let sub_len = ((cfg.sub_frame_s * fs).round() as usize).max(2);
        let hop = (((1.0 - cfg.overlap) * sub_len as f64).round() as usize).max(1);
        let nfft = cfg.fft_size.max(sub_len).next_power_of_two();
        Ok(PitchEstimator {
            grid: cfg.grid(),
            cfg,
            fs,
            sub_len,
            hop,
            nfft,
        })
    }

    pub fn config(&self) -> &PitchConfig {
        &self.cfg
    }

    pub fn sub_frame_len(&self) -> usize {
        self.sub_len
    }

    pub fn estimate(&self, frame: &[f64]) -> PitchEstimate {
        if frame.len() < self.sub_len || frame.iter().any(|v| !v.is_finite()) {
            return PitchEstimate::ABSENT;
        }
        let count = (frame.len() - self.sub_len) / self.hop + 1;
        let voiced: Vec<f64> = (0..count)
            .filter_map(|i| self.sub_frame(&frame[i * self.hop..i * self.hop + self.sub_len]))
            .collect();
        let confidence = voiced.len() as f64 / count as f64;
        let f0 = (voiced.len() >= self.cfg.min_voiced.max(1))
            .then(|| voiced.iter().sum::<f64>() / voiced.len() as f64);
        PitchEstimate { f0, confidence }
    }

    /// Peak F0 of one sub-frame, or `None` if it fails the voicing test.
    fn sub_frame(&self, x: &[f64]) -> Option<f64> {
        // no taper: at 25 ms a Hann main lobe is ±80 Hz wide, which smears
        // low harmonics across too much of the F0 grid
        let spec = rfft(x, self.nfft);
        let mag: Vec<f64> = spec[..=self.nfft / 2].iter().map(|c| c.norm()).collect();
        let bin_hz = self.fs / self.nfft as f64;
        let at = |f: f64| -> f64 {
            let pos = f / bin_hz;
            let k = pos.floor() as usize;
            if k + 1 >= mag.len() {
                return 0.0;
            }
            let frac = pos - k as f64;
            mag[k] * (1.0 - frac) + mag[k + 1] * frac
        };
        let score = |f0: f64| -> f64 {
            (1..=self.cfg.harmonics)
                .map(|h| at(h as f64 * f0) / h as f64)
                .sum()
        };

        let raw: Vec<f64> = self.grid.iter().map(|&f| score(f)).collect();
        let penalized: Vec<f64> = self
            .grid
            .iter()
            .zip(&raw)
            .map(|(&f, s)| s - self.cfg.subharmonic_penalty * score(f / 2.0))
            .collect();
        let (best, &peak) = penalized
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        // voicing is judged on the unpenalized score, which is flat for noise
        let mut sorted = raw.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        if !(peak > 0.0 && raw[best] >= self.cfg.voicing_ratio * median) {
            return None;
        }

        // parabola through the peak and its neighbours on the log grid
        let mut idx = best as f64;
        if best > 0 && best + 1 < penalized.len() {
            let (l, c, r) = (penalized[best - 1], peak, penalized[best + 1]);
            let denom = l - 2.0 * c + r;
            if denom < 0.0 {
                idx += (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
            }
        }
        let (lo, hi) = (self.cfg.f_min.ln(), self.cfg.f_max.ln());
        let f = (lo + (hi - lo) * idx / (self.grid.len() - 1) as f64).exp();
        Some(f.clamp(self.cfg.f_min, self.cfg.f_max))
    }
}

/// One-shot estimate with the default configuration.
pub fn estimate_pitch(frame: &[f64], fs: f64) -> PitchEstimate {
    match PitchEstimator::new(fs, PitchConfig::default()) {
        Ok(est) => est.estimate(frame),
        Err(_) => PitchEstimate::ABSENT,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    const FS: f64 = 48_000.0;

    fn harmonic(f0: f64, harmonics: usize, len: usize, phase: f64) -> Vec<f64> {
        (0..len)
            .map(|n| {
                let t = n as f64 / FS;
                (1..=harmonics)
                    .map(|h| (2.0 * PI * h as f64 * f0 * t + phase * h as f64).sin() / h as f64)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn harmonic_source_is_found() {
        let est = estimate_pitch(&harmonic(220.0, 6, 4800, 0.3), FS);
        let f0 = est.f0.expect("voiced");
        assert!((f0 - 220.0).abs() <= 5.0, "{f0}");
        assert_eq!(est.confidence, 1.0);
    }

    #[test]
    fn pure_sine() {
        let f0 = estimate_pitch(&harmonic(150.0, 1, 4800, 0.0), FS).f0.unwrap();
        assert!((f0 - 150.0).abs() <= 5.0, "{f0}");
    }

    #[test]
    fn white_noise_is_unvoiced() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let absent = (0..100)
            .filter(|_| {
                let x: Vec<f64> = (0..4800).map(|_| normal.sample(&mut rng)).collect();
                estimate_pitch(&x, FS).f0.is_none()
            })
            .count();
        assert!(absent >= 95, "{absent}/100 noise frames unvoiced");
    }

    #[test]
    fn scaling_does_not_change_the_estimate() {
        let x = harmonic(180.0, 5, 4800, 1.1);
        let base = estimate_pitch(&x, FS);
        for alpha in [0.25, 3.7, 1e4] {
            let y: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let e = estimate_pitch(&y, FS);
            assert_eq!(e.confidence, base.confidence);
            assert!((e.f0.unwrap() - base.f0.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn no_octave_errors_across_pitches() {
        let mut octave = 0;
        let mut total = 0;
        for i in 0..40 {
            let f0 = 90.0 + 9.0 * i as f64;
            let e = estimate_pitch(&harmonic(f0, 6, 4800, 0.17 * i as f64), FS);
            total += 1;
            if let Some(f) = e.f0 {
                assert!((50.0..=500.0).contains(&f));
                if (f - f0 / 2.0).abs() <= 5.0 || (f - 2.0 * f0).abs() <= 5.0 {
                    octave += 1;
                }
            }
        }
        assert!(octave as f64 <= 0.05 * total as f64, "{octave} octave errors");
    }

    #[test]
    fn degenerate_frames_are_absent() {
        assert_eq!(estimate_pitch(&[0.0; 4800], FS), PitchEstimate::ABSENT);
        assert_eq!(estimate_pitch(&[1.0; 100], FS), PitchEstimate::ABSENT);
        assert_eq!(estimate_pitch(&[], FS), PitchEstimate::ABSENT);
    }

    #[test]
    fn grid_spans_search_range() {
        let g = PitchConfig::default().grid();
        assert_eq!(g.len(), 256);
        assert!((g[0] - 50.0).abs() < 1e-9 && (g[255] - 500.0).abs() < 1e-9);
    }
}
