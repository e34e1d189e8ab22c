//! Designs the WLS filter-and-sum beamformer and prints its pattern.
//!
//!     cargo run --release --example beam_pattern -- [look_deg]

use speaker_glmb::beamform::{beam_pattern, design_wls_weights, pattern_summary, DesignParams};
use speaker_glmb::geometry::MicArray;

fn main() {
    let look: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(40.0);
    let array = MicArray::default();
    let params = DesignParams::default();
    let w = design_wls_weights(&array, look, &params);
    println!("{} taps x {} mics, |w| = {:.2}", w.num_taps(), w.num_channels(), w.norm());

    let freqs: Vec<f64> = (0..=90).map(|i| 300.0 + 30.0 * i as f64).collect();
    let s = pattern_summary(&array, &w, &freqs, params.sidelobe_edge);
    println!(
        "look gain {:+.2}..{:+.2} dB, mean sidelobe level {:.2} dB over 300-3000 Hz",
        s.look_gain_min_db, s.look_gain_max_db, s.mean_sidelobe_db
    );

    // coarse text plot: one row per frequency, one column per 10°
    let doas: Vec<f64> = (0..36).map(|i| i as f64 * 10.0).collect();
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#'];
    for f in [300.0, 500.0, 1000.0, 2000.0, 3000.0] {
        let row: String = beam_pattern(&array, &w, &[f], &doas)
            .iter()
            .map(|p| {
                let level = ((p.gain_db + 35.0) / 5.0).clamp(0.0, 7.0) as usize;
                shades[level]
            })
            .collect();
        println!("{f:6.0} Hz |{row}|");
    }
    println!("          0°{:>34}", "350°");
}
