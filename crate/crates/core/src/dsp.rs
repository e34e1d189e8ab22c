//! FFT helpers shared by the signal-processing modules.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Forward FFT of a real block zero-padded (or truncated) to `n` points.
pub fn rfft(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x
        .iter()
        .take(n)
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    forward_plan(n).process(&mut buf);
    buf
}

/// Inverse FFT returning the real part, normalized by `1/n`.
pub fn irfft(spec: &mut [Complex64]) -> Vec<f64> {
    let n = spec.len();
    inverse_plan(n).process(spec);
    let scale = 1.0 / n as f64;
    spec.iter().map(|c| c.re * scale).collect()
}

/// Signed frequency in Hz of FFT bin `k` for an `n`-point transform.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    if k <= n / 2 {
        k as f64 * fs / n as f64
    } else {
        (k as f64 - n as f64) * fs / n as f64
    }
}

pub fn hann(len: usize) -> Vec<f64> {
    if len < 2 {
        return vec![1.0; len];
    }
    (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (len - 1) as f64).cos())
        .collect()
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
