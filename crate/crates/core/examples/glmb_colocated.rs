//! Two speakers at the same direction, one after the other, told apart by
//! pitch. The filter is fed synthetic observations directly.

use speaker_glmb::glmb::{extract_estimates, FeatureObservation, FilterParams, GlmbFilter};

fn main() -> speaker_glmb::Result<()> {
    let block = 4800;
    let mut filter = GlmbFilter::new(FilterParams::default(), block)?;
    for k in 0..40i64 {
        // 250 Hz speaker for frames 2..14, 330 Hz speaker for frames 30..40,
        // plus a steady 280 Hz speaker moving from 40°
        let mut obs = Vec::new();
        if (2..14).contains(&k) {
            obs.push(FeatureObservation::new(232.1, Some(250.0), vec![0.0; block], k)?);
        }
        if k >= 30 {
            obs.push(FeatureObservation::new(232.1, Some(330.0), vec![0.0; block], k)?);
        }
        if k >= 5 {
            let doa = 40.0 + 0.6 * (k - 5) as f64;
            obs.push(FeatureObservation::new(doa, Some(280.0), vec![0.0; block], k)?);
        }
        filter.step(&obs)?;
        let tracks: Vec<String> = extract_estimates(filter.state())
            .iter()
            .map(|t| format!("{} @ {:.1}° {:.0} Hz", t.label, t.doa, t.pitch))
            .collect();
        let card = filter.state().cardinality_distribution();
        println!(
            "frame {k:2}: {} hypotheses, P(n) = {:?}\n          {tracks:?}",
            filter.state().hypotheses.len(),
            card.iter().map(|p| (p * 100.0).round() / 100.0).collect::<Vec<_>>()
        );
    }
    Ok(())
}
