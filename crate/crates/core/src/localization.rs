//! Multi-channel GCC-PHAT localization.
//!
//! For every microphone pair whose spacing is below half the shortest
//! wavelength of interest, the PHAT-weighted cross-spectrum of one frame is
//! evaluated at the time difference implied by each candidate direction.
//! The per-pair values are combined by a product (taken in the log domain
//! over rectified values) into a pseudo-likelihood over azimuth, whose local
//! peaks are the candidate speaker directions of the frame.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::geometry::{wrap_deg, MicArray};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizerConfig {
    /// Azimuth grid spacing in degrees; must divide 360.
    pub grid_step: f64,
    /// Lower edge of the summation band in Hz.
    pub f_min: f64,
    /// Upper edge of the summation band, also the spatial-alias limit.
    pub f_max: f64,
    pub fft_size: usize,
    /// Rectification floor applied to each pair value before the product.
    pub epsilon: f64,
    /// Floor of the PHAT denominator.
    pub phat_floor: f64,
    /// Apply a Hann window to each block before the transform.
    pub window: bool,
    /// Peaks below this fraction of the global maximum are discarded.
    pub rel_threshold: f64,
    /// Peaks whose per-pair geometric mean falls below this are discarded;
    /// the spectrum value must reach `min_pair_mean ^ pairs`.
    pub min_pair_mean: f64,
    pub max_detections: usize,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        LocalizerConfig {
            grid_step: 1.0,
            f_min: 300.0,
            f_max: 3600.0,
            fft_size: 8192,
            epsilon: 1e-3,
            phat_floor: 1e-12,
            window: false,
            rel_threshold: 0.5,
            min_pair_mean: 0.0,
            max_detections: 4,
        }
    }
}

/// Microphone pairs `(i, j)`, `i < j`, free of spatial aliasing up to `f_max`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairSet {
    pub pairs: Vec<(usize, usize)>,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Selects the pairs with `‖m_i − m_j‖ < v / f_max`.
///
/// An empty result is legal; it is logged since no direction can then be
/// estimated.
pub fn valid_pairs(array: &MicArray, f_max: f64) -> PairSet {
    let limit = array.sound_speed / f_max;
    let mut pairs = Vec::new();
    for i in 0..array.len() {
        for j in i + 1..array.len() {
            if array.distance(i, j) < limit {
                pairs.push((i, j));
            }
        }
    }
    if pairs.is_empty() {
        log::warn!("no microphone pair is closer than {limit:.4} m; localization disabled");
    }
    PairSet { pairs }
}

/// Band-limited PHAT cross-spectrum of one microphone pair.
#[derive(Debug, Clone)]
struct CrossSpectrum {
    first_bin: usize,
    bin_hz: f64,
    values: Vec<Complex64>,
}

impl CrossSpectrum {
    fn new(xi: &[Complex64], xj: &[Complex64], fs: f64, cfg: &LocalizerConfig) -> Self {
        let n = xi.len();
        let bin_hz = fs / n as f64;
        let first_bin = (cfg.f_min / bin_hz).ceil().max(1.0) as usize;
        let last_bin = ((cfg.f_max / bin_hz).floor() as usize).min(n / 2);
        let values = (first_bin..=last_bin)
            .map(|k| {
                let c = xi[k] * xj[k].conj();
                c / c.norm().max(cfg.phat_floor)
            })
            .collect();
        CrossSpectrum {
            first_bin,
            bin_hz,
            values,
        }
    }

    /// Mean of `Re(Ξ(f) e^{i2πfτ})` over the band, in `[-1, 1]`.
    fn eval(&self, tau: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let w = 2.0 * std::f64::consts::PI * tau;
        let step = Complex64::from_polar(1.0, w * self.bin_hz);
        let mut phasor = Complex64::from_polar(1.0, w * self.bin_hz * self.first_bin as f64);
        let mut acc = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            acc += v.re * phasor.re - v.im * phasor.im;
            phasor *= step;
            // renormalize now and then against drift of the recurrence
            if k % 64 == 63 {
                phasor /= phasor.norm();
            }
        }
        acc / self.values.len() as f64
    }
}

/// GCC-PHAT value of two equal-length blocks at a continuous lag `tau`
/// (seconds). Positive `tau` means `frame_j` leads `frame_i`.
pub fn gcc_phat_pair(
    frame_i: &[f64],
    frame_j: &[f64],
    tau: f64,
    fs: f64,
    cfg: &LocalizerConfig,
) -> f64 {
    assert_eq!(frame_i.len(), frame_j.len(), "blocks must have equal length");
    let n = cfg.fft_size.max(frame_i.len());
    let xi = dsp::rfft(frame_i, n);
    let xj = dsp::rfft(frame_j, n);
    CrossSpectrum::new(&xi, &xj, fs, cfg).eval(tau)
}

/// Pseudo-likelihood over a uniform azimuth grid for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaSpectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub frame_index: usize,
}

impl DoaSpectrum {
    pub fn step(&self) -> f64 {
        360.0 / self.grid.len() as f64
    }

    pub fn argmax(&self) -> Option<f64> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| self.grid[i])
    }
}

fn grid(step: f64) -> Vec<f64> {
    let n = (360.0 / step).round().max(1.0) as usize;
    let step = 360.0 / n as f64;
    (0..n).map(|i| i as f64 * step).collect()
}

/// Localizer with the pair set and lag table precomputed for one array.
#[derive(Debug, Clone)]
pub struct Localizer {
    array: MicArray,
    pairs: PairSet,
    cfg: LocalizerConfig,
    grid: Vec<f64>,
    /// `lags[g][p]`: time difference of pair `p` at grid direction `g`.
    lags: Vec<Vec<f64>>,
}

impl Localizer {
    pub fn new(array: MicArray, cfg: LocalizerConfig) -> Self {
        let pairs = valid_pairs(&array, cfg.f_max);
        Self::with_pairs(array, pairs, cfg)
    }

    pub fn with_pairs(array: MicArray, pairs: PairSet, cfg: LocalizerConfig) -> Self {
        let grid = grid(cfg.grid_step);
        let lags = grid
            .iter()
            .map(|&doa| pairs.pairs.iter().map(|&(i, j)| array.tdoa(i, j, doa)).collect())
            .collect();
        Localizer {
            array,
            pairs,
            cfg,
            grid,
            lags,
        }
    }

    fn transform(&self, block: &[f64], n: usize) -> Vec<Complex64> {
        if self.cfg.window {
            let w = dsp::hann(block.len());
            let x: Vec<f64> = block.iter().zip(&w).map(|(a, b)| a * b).collect();
            dsp::rfft(&x, n)
        } else {
            dsp::rfft(block, n)
        }
    }

    pub fn pairs(&self) -> &PairSet {
        &self.pairs
    }

    pub fn config(&self) -> &LocalizerConfig {
        &self.cfg
    }

    pub fn spectrum<T: AsRef<[f64]>>(&self, frames: &[T], frame_index: usize) -> DoaSpectrum {
        assert_eq!(frames.len(), self.array.len(), "one block per microphone");
        let len = frames.iter().map(|f| f.as_ref().len()).max().unwrap_or(0);
        let n = self.cfg.fft_size.max(len);
        let fs = self.array.sample_rate;
        let ffts: Vec<Vec<Complex64>> = frames.iter().map(|f| self.transform(f.as_ref(), n)).collect();
        let cross: Vec<CrossSpectrum> = self
            .pairs
            .pairs
            .iter()
            .map(|&(i, j)| CrossSpectrum::new(&ffts[i], &ffts[j], fs, &self.cfg))
            .collect();
        let eps = self.cfg.epsilon;
        let values = self
            .lags
            .iter()
            .map(|lags| {
                let log_sum: f64 = cross
                    .iter()
                    .zip(lags)
                    .map(|(c, &tau)| c.eval(tau).max(eps).ln())
                    .sum();
                log_sum.exp()
            })
            .collect();
        DoaSpectrum {
            grid: self.grid.clone(),
            values,
            frame_index,
        }
    }

    /// Absolute spectrum floor implied by `min_pair_mean`.
    pub fn floor(&self) -> f64 {
        self.cfg.min_pair_mean.powi(self.pairs.len() as i32)
    }

    /// Spectrum and detected peaks of one frame.
    pub fn localize<T: AsRef<[f64]>>(&self, frames: &[T], frame_index: usize) -> (DoaSpectrum, Vec<Peak>) {
        let spec = self.spectrum(frames, frame_index);
        let peaks = detect_peaks(&spec, self.cfg.rel_threshold, self.floor(), self.cfg.max_detections);
        (spec, peaks)
    }
}

/// MCC-PHAT spectrum of one frame over a `grid_step` azimuth grid.
pub fn mcc_phat_spectrum<T: AsRef<[f64]>>(
    frames: &[T],
    array: &MicArray,
    pairs: &PairSet,
    cfg: &LocalizerConfig,
    frame_index: usize,
) -> DoaSpectrum {
    Localizer::with_pairs(array.clone(), pairs.clone(), cfg.clone()).spectrum(frames, frame_index)
}

/// A local maximum of the DOA spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub doa: f64,
    /// Spectrum value at the grid maximum.
    pub value: f64,
}

/// Circular local maxima of the spectrum that reach both `rel_threshold`
/// times the global maximum and `floor`, refined by a parabola through the
/// log values and sorted by decreasing strength.
pub fn detect_peaks(spec: &DoaSpectrum, rel_threshold: f64, floor: f64, max_detections: usize) -> Vec<Peak> {
    let n = spec.values.len();
    if n < 3 {
        return Vec::new();
    }
    let v = &spec.values;
    let global = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let threshold = (rel_threshold * global).max(floor);
    let step = spec.step();
    let mut peaks: Vec<Peak> = (0..n)
        .filter_map(|i| {
            let left = v[(i + n - 1) % n];
            let right = v[(i + 1) % n];
            let c = v[i];
            if !(c > left && c >= right && c >= threshold && c > 0.0) {
                return None;
            }
            let (l, m, r) = (left.ln(), c.ln(), right.ln());
            let denom = l - 2.0 * m + r;
            let offset = if denom < 0.0 {
                (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            Some(Peak {
                doa: wrap_deg(spec.grid[i] + offset * step),
                value: c,
            })
        })
        .collect();
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks.truncate(max_detections);
    peaks
}

/// Directions of the peaks found by [`detect_peaks`] without a floor.
pub fn detect_doas(spec: &DoaSpectrum, rel_threshold: f64, max_detections: usize) -> Vec<f64> {
    detect_peaks(spec, rel_threshold, 0.0, max_detections)
        .into_iter()
        .map(|p| p.doa)
        .collect()
}
