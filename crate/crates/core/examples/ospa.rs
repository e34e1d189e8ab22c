//! OSPA between DOA sets, and SI-SDR of a few degraded signals.

use speaker_glmb::metrics::{ospa, si_sdr};

fn main() {
    let cases: [(&[f64], &[f64]); 5] = [
        (&[40.0, 232.1], &[40.0, 232.1]),
        (&[40.0, 232.1], &[41.0, 230.1]),
        (&[40.0, 232.1], &[40.0]),
        (&[359.0], &[1.0]),
        (&[], &[90.0, 180.0]),
    ];
    for (truth, est) in cases {
        let r = ospa(truth, est, 5.0, 1.0);
        println!(
            "{truth:?} vs {est:?}: {:.2}° (localization {:.2}°, cardinality {:.2}°)",
            r.total, r.localization, r.cardinality
        );
    }

    let s: Vec<f64> = (0..4800).map(|n| (n as f64 * 0.05).sin() + 0.5 * (n as f64 * 0.13).sin()).collect();
    let other: Vec<f64> = (0..4800).map(|n| (n as f64 * 0.071).cos()).collect();
    let mix = |g: f64| -> Vec<f64> { s.iter().zip(&other).map(|(a, b)| a + g * b).collect() };
    for g in [0.0, 0.1, 0.5, 1.0] {
        println!("interferer gain {g}: SI-SDR {:.1} dB", si_sdr(&s, &mix(g)));
    }
    let mut late = vec![0.0; 5];
    late.extend_from_slice(&s[..4795]);
    println!("5-sample delay: SI-SDR {:.1} dB (alignment searched)", si_sdr(&s, &late));
}
