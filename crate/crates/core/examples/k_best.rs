//! Ranked assignments of a small cost matrix, as used to enumerate
//! association hypotheses.

use speaker_glmb::assignment::{murty, solve};

fn main() {
    let inf = f64::INFINITY;
    // rows: tracks; columns: two measurements, then one miss column per track
    let cost = vec![vec![0.2, 3.0, 1.5, inf], vec![2.5, 0.4, inf, 1.1]];
    let best = solve(&cost).expect("feasible");
    println!("best: {:?} cost {:.2}", best.cols, best.cost);
    for (i, a) in murty(&cost, 6).iter().enumerate() {
        println!("#{i}: {:?} cost {:.2} weight {:.4}", a.cols, a.cost, (-a.cost).exp());
    }
}
