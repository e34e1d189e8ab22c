//! Wideband filter-and-sum beamforming with weighted least-squares weights.
//!
//! Every channel passes through a `J_t`-tap FIR filter and the filter outputs
//! are summed. Weights are chosen to fit a linear-phase unit response in the
//! look direction and zero response outside a ±15° neighborhood, over a
//! frequency-angle grid, by a ridge-regularized least-squares solve.
//!
//! Tap `j` of the extractor multiplies `x_m(n + j)`, so the extracted signal
//! leads the array-center signal by `(J_t - 1) / 2` samples.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{circ_dist, wrap_deg, MicArray};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignParams {
    /// FIR length per channel.
    pub taps: usize,
    pub freq_min: f64,
    pub freq_max: f64,
    /// Number of uniformly spaced design frequencies.
    pub freq_points: usize,
    /// Spacing of the design angle grid in degrees.
    pub angle_step: f64,
    pub mainlobe_weight: f64,
    pub sidelobe_weight: f64,
    /// Angular distance from the look direction where the stopband starts.
    pub sidelobe_edge: f64,
    /// Stopband rows are only placed at design frequencies up to this value.
    pub sidelobe_freq_max: f64,
    /// Diagonal loading as a fraction of the normal-matrix trace.
    pub loading: f64,
}

impl Default for DesignParams {
    fn default() -> Self {
        DesignParams {
            taps: 32,
            freq_min: 20.0,
            freq_max: 8000.0,
            freq_points: 100,
            angle_step: 5.0,
            mainlobe_weight: 3000.0,
            sidelobe_weight: 1.0,
            sidelobe_edge: 15.0,
            sidelobe_freq_max: 3600.0,
            loading: 1e-9,
        }
    }
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.taps == 0 || self.freq_points == 0 {
            return Err(Error::config("beamformer needs at least one tap and one frequency"));
        }
        if !(positive(self.freq_min) && self.freq_max >= self.freq_min && self.freq_max.is_finite()) {
            return Err(Error::config("beamformer frequency range is invalid"));
        }
        if !positive(self.angle_step) || self.angle_step > 360.0 {
            return Err(Error::config("beamformer angle_step must be in (0, 360]"));
        }
        if !(positive(self.mainlobe_weight) && self.sidelobe_weight >= 0.0 && self.loading >= 0.0) {
            return Err(Error::config("beamformer weights and loading must be non-negative"));
        }
        if !(0.0..180.0).contains(&self.sidelobe_edge) {
            return Err(Error::config("sidelobe_edge must be in [0, 180)"));
        }
        Ok(())
    }

    fn frequencies(&self) -> Vec<f64> {
        if self.freq_points == 1 {
            return vec![self.freq_min];
        }
        let step = (self.freq_max - self.freq_min) / (self.freq_points - 1) as f64;
        (0..self.freq_points)
            .map(|i| self.freq_min + i as f64 * step)
            .collect()
    }

    /// Design angles relative to the look direction.
    fn angle_offsets(&self) -> Vec<f64> {
        let n = (360.0 / self.angle_step).round().max(1.0) as usize;
        (0..n).map(|i| i as f64 * 360.0 / n as f64).collect()
    }
}

/// Per-channel FIR coefficients of a filter-and-sum beamformer.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerWeights {
    pub look_doa: f64,
    /// `taps[j][m]` multiplies `x_m(n + j)`.
    pub taps: Vec<Vec<f64>>,
    pub fs: f64,
}

impl BeamformerWeights {
    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn num_channels(&self) -> usize {
        self.taps.first().map_or(0, Vec::len)
    }

    /// Weight vector stacked tap-major, `J_t · M` long.
    pub fn flatten(&self) -> Vec<f64> {
        self.taps.iter().flatten().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.flatten().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Weights with a single unit tap, mostly useful for tests.
    pub fn delta(taps: usize, channels: usize, tap: usize, channel: usize, fs: f64) -> Self {
        let mut t = vec![vec![0.0; channels]; taps];
        t[tap][channel] = 1.0;
        BeamformerWeights {
            look_doa: 0.0,
            taps: t,
            fs,
        }
    }
}

/// Frequency-angle response of the filter-and-sum structure on one array.
#[derive(Debug, Clone)]
pub struct SteeringModel<'a> {
    array: &'a MicArray,
    taps: usize,
}

impl<'a> SteeringModel<'a> {
    pub fn new(array: &'a MicArray, taps: usize) -> Self {
        SteeringModel { array, taps }
    }

    /// Phase delay (radians) of tap `j`, channel `m` at frequency `f`.
    fn phase(&self, f: f64, tau_m: f64, j: usize) -> f64 {
        let fs = self.array.sample_rate;
        2.0 * PI * f * ((self.taps - 1 - j) as f64 / fs + tau_m)
    }

    /// Stacked steering vector, tap-major, `exp(-i·phase)`.
    pub fn steering_vector(&self, f: f64, doa: f64) -> Vec<Complex64> {
        let taus: Vec<f64> = (0..self.array.len())
            .map(|m| self.array.delay_to_center(m, doa))
            .collect();
        let mut a = Vec::with_capacity(self.taps * taus.len());
        for j in 0..self.taps {
            for &tau in &taus {
                a.push(Complex64::from_polar(1.0, -self.phase(f, tau, j)));
            }
        }
        a
    }

    /// Complex gain for a unit plane wave from `doa` at frequency `f`,
    /// referenced to a `(J_t - 1)` sample delay.
    pub fn response(&self, weights: &BeamformerWeights, f: f64, doa: f64) -> Complex64 {
        self.steering_vector(f, doa)
            .iter()
            .zip(weights.flatten())
            .map(|(a, w)| a * w)
            .sum()
    }

    /// The linear-phase target response in the look direction.
    pub fn desired(&self, f: f64) -> Complex64 {
        let delay = (self.taps - 1) as f64 / (2.0 * self.array.sample_rate);
        Complex64::from_polar(1.0, -2.0 * PI * f * delay)
    }
}

/// Weighted least-squares beamformer design for one array.
///
/// The design angle grid is anchored at the look direction, so the
/// stopband always starts exactly `sidelobe_edge` away from it.
#[derive(Debug, Clone)]
pub struct WlsDesigner {
    array: MicArray,
    params: DesignParams,
    freqs: Vec<f64>,
}

impl WlsDesigner {
    pub fn new(array: MicArray, params: DesignParams) -> Self {
        let freqs = params.frequencies();
        WlsDesigner {
            array,
            params,
            freqs,
        }
    }

    pub fn array(&self) -> &MicArray {
        &self.array
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    /// Sums `γ cos(2πf(Δ/fs + τ_m - τ_m'))` over design frequencies up to
    /// `f_limit` and the given weighted angle rows, for every tap lag `Δ`
    /// and channel pair.
    ///
    /// Layout: `[(Δ + J - 1) * M * M + m * M + m']`.
    fn lag_sums(&self, rows: &[(Vec<f64>, f64)], f_limit: f64) -> Vec<f64> {
        let taps = self.params.taps as isize;
        let mics = self.array.len();
        let fs = self.array.sample_rate;
        let lags = (2 * taps - 1) as usize;
        let mut out = vec![0.0; lags * mics * mics];
        // cos(a + b) = cos a cos b - sin a sin b: sum the angle part per
        // frequency first, then spread it over the lags
        let mut c = vec![0.0; mics * mics];
        let mut s = vec![0.0; mics * mics];
        for &f in self.freqs.iter().filter(|&&f| f <= f_limit) {
            let w = 2.0 * PI * f;
            c.iter_mut().for_each(|v| *v = 0.0);
            s.iter_mut().for_each(|v| *v = 0.0);
            for (delays, gamma) in rows {
                for m in 0..mics {
                    for mp in 0..mics {
                        let (sn, cs) = (w * (delays[m] - delays[mp])).sin_cos();
                        c[m * mics + mp] += gamma * cs;
                        s[m * mics + mp] += gamma * sn;
                    }
                }
            }
            for (li, lag) in (-(taps - 1)..taps).enumerate() {
                let (sl, cl) = (w * lag as f64 / fs).sin_cos();
                let block = &mut out[li * mics * mics..(li + 1) * mics * mics];
                for (k, v) in block.iter_mut().enumerate() {
                    *v += cl * c[k] - sl * s[k];
                }
            }
        }
        out
    }

    fn delays(&self, doa: f64) -> Vec<f64> {
        (0..self.array.len())
            .map(|m| self.array.delay_to_center(m, doa))
            .collect()
    }

    pub fn design(&self, look_doa: f64) -> BeamformerWeights {
        let look = wrap_deg(look_doa);
        let p = &self.params;
        let taps = p.taps;
        let mics = self.array.len();
        let dim = taps * mics;

        let stopband: Vec<(Vec<f64>, f64)> = p
            .angle_offsets()
            .into_iter()
            .filter(|&off| circ_dist(off, 0.0) >= p.sidelobe_edge)
            .map(|off| (self.delays(look + off), p.sidelobe_weight))
            .collect();
        let stop_sums = self.lag_sums(&stopband, p.sidelobe_freq_max);
        let look_sums = self.lag_sums(&[(self.delays(look), p.mainlobe_weight)], f64::INFINITY);
        let lag_value = |li: usize, m: usize, mp: usize| {
            let idx = li * mics * mics + m * mics + mp;
            stop_sums[idx] + look_sums[idx]
        };

        // phase of tap j is 2πf((J-1-j)/fs + τ), so entry (j,m),(j',m') has lag j' - j
        let mut normal = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..taps {
            for jp in 0..taps {
                let li = (jp as isize - j as isize + taps as isize - 1) as usize;
                for m in 0..mics {
                    for mp in 0..mics {
                        normal[(j * mics + m, jp * mics + mp)] = lag_value(li, m, mp);
                    }
                }
            }
        }

        let steering = SteeringModel::new(&self.array, taps);
        let mut rhs = DVector::<f64>::zeros(dim);
        for &f in &self.freqs {
            let d = steering.desired(f);
            let a = steering.steering_vector(f, look);
            for (k, ak) in a.iter().enumerate() {
                // Re(conj(a) d) for a = e^{-iθ}
                rhs[k] += p.mainlobe_weight * (ak.conj() * d).re;
            }
        }

        let loading = p.loading * normal.trace();
        for k in 0..dim {
            normal[(k, k)] += loading;
        }
        let w = match normal.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => normal
                .lu()
                .solve(&rhs)
                .unwrap_or_else(|| DVector::zeros(dim)),
        };

        let taps_matrix = (0..taps)
            .map(|j| (0..mics).map(|m| w[j * mics + m]).collect())
            .collect();
        BeamformerWeights {
            look_doa: look,
            taps: taps_matrix,
            fs: self.array.sample_rate,
        }
    }
}

/// One-shot weight design; prefer [`WlsDesigner`] or [`WeightCache`] when
/// designing for several directions.
pub fn design_wls_weights(array: &MicArray, look_doa: f64, params: &DesignParams) -> BeamformerWeights {
    WlsDesigner::new(array.clone(), params.clone()).design(look_doa)
}

/// Designed weights keyed by look direction rounded to whole degrees.
#[derive(Debug)]
pub struct WeightCache {
    designer: WlsDesigner,
    weights: RwLock<HashMap<u32, Arc<BeamformerWeights>>>,
}

impl WeightCache {
    pub fn new(designer: WlsDesigner) -> Self {
        WeightCache {
            designer,
            weights: RwLock::new(HashMap::new()),
        }
    }

    pub fn designer(&self) -> &WlsDesigner {
        &self.designer
    }

    pub fn get(&self, doa: f64) -> Arc<BeamformerWeights> {
        let key = (wrap_deg(doa).round() as u32) % 360;
        if let Some(w) = self.weights.read().expect("weight cache poisoned").get(&key) {
            return Arc::clone(w);
        }
        let designed = Arc::new(self.designer.design(f64::from(key)));
        let mut map = self.weights.write().expect("weight cache poisoned");
        Arc::clone(map.entry(key).or_insert(designed))
    }

    pub fn len(&self) -> usize {
        self.weights.read().expect("weight cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Applies the filter-and-sum beamformer to one multichannel block.
///
/// `output[n] = Σ_j Σ_m taps[j][m] · x_m(n + j)`. Samples past the end of
/// the block are read from `following` (the next block of the recording)
/// when given, otherwise taken as zero.
pub fn extract_sound<T: AsRef<[f64]>>(
    weights: &BeamformerWeights,
    frame: &[T],
    following: Option<&[T]>,
) -> Result<Vec<f64>> {
    let mics = weights.num_channels();
    if frame.len() != mics {
        return Err(Error::data(format!(
            "beamformer expects {mics} channels, block has {}",
            frame.len()
        )));
    }
    if let Some(next) = following {
        if next.len() != mics {
            return Err(Error::data("following block has a different channel count"));
        }
    }
    let len = frame.first().map_or(0, |c| c.as_ref().len());
    let taps = weights.num_taps();
    if len < taps {
        return Err(Error::data(format!("block of {len} samples is shorter than {taps} taps")));
    }
    let mut out = vec![0.0; len];
    for m in 0..mics {
        let x = frame[m].as_ref();
        if x.len() != len {
            return Err(Error::data("channels of a block differ in length"));
        }
        let tail = following.map_or(&[][..], |f| f[m].as_ref());
        let sample = |i: usize| -> f64 {
            if i < len {
                x[i]
            } else {
                tail.get(i - len).copied().unwrap_or(0.0)
            }
        };
        for (j, row) in weights.taps.iter().enumerate().take(taps) {
            let w = row[m];
            if w == 0.0 {
                continue;
            }
            for (n, y) in out.iter_mut().enumerate() {
                *y += w * sample(n + j);
            }
        }
    }
    Ok(out)
}

/// One point of a beam pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternPoint {
    pub freq_hz: f64,
    pub doa_deg: f64,
    pub gain_db: f64,
}

/// Magnitude response of `weights` over a frequency × direction grid.
pub fn beam_pattern(array: &MicArray, weights: &BeamformerWeights, freqs: &[f64], doas: &[f64]) -> Vec<PatternPoint> {
    let sm = SteeringModel::new(array, weights.num_taps());
    freqs
        .iter()
        .flat_map(|&f| {
            let sm = &sm;
            doas.iter().map(move |&a| PatternPoint {
                freq_hz: f,
                doa_deg: a,
                gain_db: 20.0 * sm.response(weights, f, a).norm().log10(),
            })
        })
        .collect()
}

/// Look-direction gain range and mean sidelobe level of a design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternSummary {
    pub look_gain_min_db: f64,
    pub look_gain_max_db: f64,
    /// Average over frequency of the mean sidelobe power relative to the
    /// look-direction power, in dB.
    pub mean_sidelobe_db: f64,
}

/// Summarizes a design over `freqs`, with sidelobes on a 1° grid at least
/// `sidelobe_edge` degrees from the look direction.
pub fn pattern_summary(
    array: &MicArray,
    weights: &BeamformerWeights,
    freqs: &[f64],
    sidelobe_edge: f64,
) -> PatternSummary {
    let sm = SteeringModel::new(array, weights.num_taps());
    let look = weights.look_doa;
    let side: Vec<f64> = (0..360)
        .map(f64::from)
        .filter(|&a| circ_dist(a, look) >= sidelobe_edge)
        .collect();
    let (mut lo, mut hi, mut acc) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &f in freqs {
        let look_pow = sm.response(weights, f, look).norm_sqr();
        let g = 10.0 * look_pow.log10();
        lo = lo.min(g);
        hi = hi.max(g);
        let mean = side.iter().map(|&a| sm.response(weights, f, a).norm_sqr()).sum::<f64>() / side.len().max(1) as f64;
        acc += 10.0 * (mean / look_pow).log10();
    }
    PatternSummary {
        look_gain_min_db: lo,
        look_gain_max_db: hi,
        mean_sidelobe_db: acc / freqs.len().max(1) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gain_db(sm: &SteeringModel, w: &BeamformerWeights, f: f64, doa: f64) -> f64 {
        20.0 * sm.response(w, f, doa).norm().log10()
    }

    #[test]
    fn delta_weights_pass_one_channel() {
        let frame = vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0]];
        let w = BeamformerWeights::delta(3, 2, 0, 1, 48_000.0);
        assert_eq!(extract_sound(&w, &frame, None).unwrap(), frame[1]);
    }

    #[test]
    fn zero_weights_give_silence() {
        let frame = vec![vec![1.0; 40]; 3];
        let w = BeamformerWeights {
            look_doa: 0.0,
            taps: vec![vec![0.0; 3]; 32],
            fs: 48_000.0,
        };
        assert!(extract_sound(&w, &frame, None).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn channel_count_mismatch_rejected() {
        let frame = vec![vec![0.0; 40]; 3];
        let w = BeamformerWeights::delta(4, 2, 0, 0, 48_000.0);
        assert!(extract_sound(&w, &frame, None).is_err());
    }

    #[test]
    fn following_block_fills_the_tail() {
        let frame = vec![vec![1.0, 2.0, 3.0]];
        let next = vec![vec![4.0, 5.0, 6.0]];
        assert!(extract_sound(&BeamformerWeights::delta(4, 1, 0, 0, 1.0), &frame, None).is_err());
        let w = BeamformerWeights::delta(3, 1, 2, 0, 48_000.0);
        assert_eq!(extract_sound(&w, &frame, Some(&next)).unwrap(), vec![3.0, 4.0, 5.0]);
        assert_eq!(extract_sound(&w, &frame, None).unwrap(), vec![3.0, 0.0, 0.0]);
    }

    #[test]
    fn redesign_is_identical() {
        let designer = WlsDesigner::new(MicArray::default(), DesignParams::default());
        assert_eq!(designer.design(40.0), designer.design(40.0));
        let cache = WeightCache::new(designer);
        let a = cache.get(40.2);
        let b = cache.get(39.8);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn look_direction_is_passed_and_sidelobes_suppressed() {
        let array = MicArray::default();
        let w = design_wls_weights(&array, 40.0, &DesignParams::default());
        let sm = SteeringModel::new(&array, w.num_taps());
        let mut suppression = Vec::new();
        for i in 0..=90 {
            let f = 300.0 + 30.0 * i as f64;
            let look = gain_db(&sm, &w, f, 40.0);
            assert!(look.abs() <= 1.0, "look gain {look} dB at {f} Hz");
            let side: Vec<f64> = (0..360)
                .map(f64::from)
                .filter(|&a| circ_dist(a, 40.0) >= 15.0)
                .map(|a| sm.response(&w, f, a).norm_sqr())
                .collect();
            let mean = side.iter().sum::<f64>() / side.len() as f64;
            suppression.push(10.0 * mean.log10() - 2.0 * look);
        }
        let avg = suppression.iter().sum::<f64>() / suppression.len() as f64;
        assert!(avg <= -10.0, "mean sidelobe level {avg} dB");
    }

    #[test]
    fn look_response_has_linear_phase() {
        let array = MicArray::default();
        let w = design_wls_weights(&array, 232.1, &DesignParams::default());
        let sm = SteeringModel::new(&array, w.num_taps());
        for f in [500.0, 1000.0, 2000.0] {
            let err = (sm.response(&w, f, 232.1) - sm.desired(f)).norm();
            assert!(err < 0.1, "{f} Hz: {err}");
        }
    }

    #[test]
    fn pattern_rotates_with_the_look_direction() {
        let array = MicArray::default();
        let designer = WlsDesigner::new(array.clone(), DesignParams::default());
        let a = designer.design(40.0);
        let b = designer.design(85.0);
        let sm = SteeringModel::new(&array, a.num_taps());
        for f in [300.0, 1000.0, 2500.0, 6000.0] {
            for doa in (0..360).step_by(7).map(f64::from) {
                let ra = sm.response(&a, f, doa);
                let rb = sm.response(&b, f, doa + 45.0);
                assert!((ra - rb).norm() < 1e-6, "{f} Hz {doa}°: {ra} vs {rb}");
            }
        }
    }

    #[test]
    fn more_loading_never_grows_the_weights() {
        let array = MicArray::default();
        let mut last = f64::INFINITY;
        for loading in [1e-10, 1e-9, 1e-8, 1e-6, 1e-4, 1e-2] {
            let p = DesignParams {
                loading,
                ..DesignParams::default()
            };
            let n = design_wls_weights(&array, 100.0, &p).norm();
            assert!(n <= last * (1.0 + 1e-9), "loading {loading}: {n} > {last}");
            last = n;
        }
    }

    #[test]
    fn extraction_is_linear() {
        let w = design_wls_weights(&MicArray::default(), 10.0, &DesignParams::default());
        let ch = |seed: f64| -> Vec<Vec<f64>> {
            (0..8)
                .map(|m| (0..200).map(|n| ((n * (m + 3)) as f64 * seed).sin()).collect())
                .collect()
        };
        let (x, y) = (ch(0.37), ch(1.91));
        let mix: Vec<Vec<f64>> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| 2.0 * p - 0.5 * q).collect())
            .collect();
        let ex = extract_sound(&w, &x, None).unwrap();
        let ey = extract_sound(&w, &y, None).unwrap();
        let em = extract_sound(&w, &mix, None).unwrap();
        for i in 0..200 {
            assert!((em[i] - (2.0 * ex[i] - 0.5 * ey[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(DesignParams::default().validate().is_ok());
        let bad = DesignParams {
            taps: 0,
            ..DesignParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = DesignParams {
            freq_max: 10.0,
            ..DesignParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
