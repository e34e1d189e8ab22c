//! Tracking and separation metrics: circular OSPA and SI-SDR.

use serde::{Deserialize, Serialize};

use crate::assignment::solve;
use crate::geometry::circ_dist;

/// OSPA distance split into its localization and cardinality parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OspaResult {
    pub total: f64,
    pub localization: f64,
    pub cardinality: f64,
}

impl OspaResult {
    pub const ZERO: OspaResult = OspaResult {
        total: 0.0,
        localization: 0.0,
        cardinality: 0.0,
    };
}

/// OSPA between two sets of DOAs (degrees) with circular ground distance.
///
/// For order 1 the two components add up to the total; for other orders
/// each component is reported on the same `(·/m)^(1/p)` scale as the total.
pub fn ospa(truth: &[f64], est: &[f64], cutoff: f64, order: f64) -> OspaResult {
    assert!(cutoff > 0.0 && order >= 1.0, "OSPA needs cutoff > 0 and order ≥ 1");
    let (small, large) = if truth.len() <= est.len() {
        (truth, est)
    } else {
        (est, truth)
    };
    let (n, m) = (small.len(), large.len());
    if m == 0 {
        return OspaResult::ZERO;
    }
    let cost: Vec<Vec<f64>> = small
        .iter()
        .map(|a| large.iter().map(|b| circ_dist(*a, *b).min(cutoff).powf(order)).collect())
        .collect();
    // sum in ascending order so equal multisets of distances give equal sums
    let mut assigned: Vec<f64> = solve(&cost).map_or_else(Vec::new, |a| {
        a.cols.iter().enumerate().map(|(i, &j)| cost[i][j]).collect()
    });
    assigned.sort_by(f64::total_cmp);
    let loc_sum: f64 = assigned.iter().sum();
    let card_sum = cutoff.powf(order) * (m - n) as f64;
    let root = |v: f64| (v / m as f64).powf(1.0 / order);
    OspaResult {
        total: root(loc_sum + card_sum),
        localization: root(loc_sum),
        cardinality: root(card_sum),
    }
}

/// Largest alignment shift searched by [`si_sdr`], in samples.
pub const DEFAULT_MAX_LAG: usize = 16;

/// Scale-invariant SDR in dB, maximized over integer shifts of the estimate
/// up to [`DEFAULT_MAX_LAG`] samples either way.
///
/// Returns `+∞` for a perfect (scaled) match, `-∞` for an all-zero
/// estimate and NaN for an all-zero reference.
pub fn si_sdr(reference: &[f64], estimate: &[f64]) -> f64 {
    si_sdr_with_lag(reference, estimate, DEFAULT_MAX_LAG)
}

pub fn si_sdr_with_lag(reference: &[f64], estimate: &[f64], max_lag: usize) -> f64 {
    let len = reference.len().min(estimate.len());
    let (s, e) = (&reference[..len], &estimate[..len]);
    let ss: f64 = s.iter().map(|v| v * v).sum();
    if ss == 0.0 {
        return f64::NAN;
    }
    if e.iter().all(|&v| v == 0.0) {
        return f64::NEG_INFINITY;
    }
    let lag = max_lag.min(len.saturating_sub(1)) as isize;
    (-lag..=lag)
        .map(|d| {
            // estimate sample n + d is compared with reference sample n
            let at = |n: usize| -> f64 {
                let k = n as isize + d;
                if k < 0 || k >= len as isize {
                    0.0
                } else {
                    e[k as usize]
                }
            };
            let dot: f64 = (0..len).map(|n| s[n] * at(n)).sum();
            let alpha = dot / ss;
            let target: f64 = alpha * alpha * ss;
            let resid: f64 = (0..len).map(|n| (alpha * s[n] - at(n)).powi(2)).sum();
            if resid <= f64::EPSILON * f64::EPSILON * target {
                f64::INFINITY
            } else if target == 0.0 {
                f64::NEG_INFINITY
            } else {
                10.0 * (target / resid).log10()
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
