//! Frame-wise pitch of a gliding harmonic source, with and without noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use speaker_glmb::pitch::{PitchConfig, PitchEstimator};
use speaker_glmb::scene::{frame_len, synthesize_source, SourceTrajectory};

fn main() -> speaker_glmb::Result<()> {
    let fs = 48_000.0;
    let mut src = SourceTrajectory::fixed(0.0, 120.0, vec![[0.1, 1.9]]);
    src.pitch = vec![[0.0, 120.0], [2.0, 320.0]];
    let clean = synthesize_source(&src, fs, 2.0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 0.3).expect("valid std");
    let noisy: Vec<f64> = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();

    let est = PitchEstimator::new(fs, PitchConfig::default())?;
    let n = frame_len(fs);
    println!("frame  truth   clean          noisy");
    for k in 0..clean.len() / n {
        let t = (k as f64 + 0.5) * 0.1;
        let truth = src.pitch_at(t).filter(|_| src.is_active(t));
        let a = est.estimate(&clean[k * n..(k + 1) * n]);
        let b = est.estimate(&noisy[k * n..(k + 1) * n]);
        let show = |f: Option<f64>| f.map_or("   -  ".to_string(), |v| format!("{v:6.1}"));
        println!(
            "{k:5} {}  {} ({:.2})  {} ({:.2})",
            show(truth),
            show(a.f0),
            a.confidence,
            show(b.f0),
            b.confidence
        );
    }
    Ok(())
}
