//! MCC-PHAT localization of every frame of the reference scene.

use speaker_glmb::geometry::circ_dist;
use speaker_glmb::localization::{Localizer, LocalizerConfig};
use speaker_glmb::pipeline::FrontEndConfig;
use speaker_glmb::scene::{frame_len, ground_truth, reference_scenario, render_mixture};

fn main() -> speaker_glmb::Result<()> {
    let scn = reference_scenario();
    let mix = render_mixture(&scn)?;
    let truth = ground_truth(&scn);
    let cfg: LocalizerConfig = FrontEndConfig::default().localizer;
    let loc = Localizer::new(scn.array.clone(), cfg);
    println!("{} microphone pairs free of spatial aliasing", loc.pairs().len());

    let n = frame_len(scn.array.sample_rate);
    let mut worst: f64 = 0.0;
    for k in 0..scn.num_frames() {
        let block: Vec<&[f64]> = mix.iter().map(|c| &c[k * n..(k + 1) * n]).collect();
        let (_, peaks) = loc.localize(&block, k);
        let expected: Vec<f64> = truth
            .iter()
            .filter(|r| r.frame_index == k && r.active)
            .map(|r| r.doa_deg)
            .collect();
        for p in &peaks {
            if let Some(e) = expected.iter().map(|t| circ_dist(*t, p.doa)).reduce(f64::min) {
                worst = worst.max(e);
            }
        }
        let found: Vec<String> = peaks.iter().map(|p| format!("{:.1}°", p.doa)).collect();
        let want: Vec<String> = expected.iter().map(|d| format!("{d:.1}°")).collect();
        println!("frame {k:2}: truth {want:?} found {found:?}");
    }
    println!("largest error of a detection against its nearest truth: {worst:.2}°");
    Ok(())
}
