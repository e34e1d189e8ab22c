//! Renders the reference scene and writes the mixture and ground truth.
//!
//!     cargo run --release --example simulate -- [out_dir]

use std::path::PathBuf;

use speaker_glmb::io::{write_csv, write_wav};
use speaker_glmb::scene::{ground_truth, reference_scenario, render_mixture};

fn main() -> speaker_glmb::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/simulate".into()));
    let scn = reference_scenario();
    let mix = render_mixture(&scn)?;
    write_wav(&out.join("mixture.wav"), &mix, scn.array.sample_rate)?;
    let truth = ground_truth(&scn);
    write_csv(&out.join("truth.csv"), &truth)?;

    for (id, src) in scn.sources.iter().enumerate() {
        let active = truth.iter().filter(|r| r.source_id == id && r.active).count();
        println!(
            "source {id} ({}): {active} voiced frames, pitch {:.0}..{:.0} Hz",
            src.name.as_deref().unwrap_or("?"),
            src.pitch.first().map_or(0.0, |p| p[1]),
            src.pitch.last().map_or(0.0, |p| p[1]),
        );
    }
    let rms = |c: &[f64]| (c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64).sqrt();
    println!("{} channels x {} samples, rms of mic 0: {:.3}", mix.len(), mix[0].len(), rms(&mix[0]));
    println!("wrote {}", out.display());
    Ok(())
}
