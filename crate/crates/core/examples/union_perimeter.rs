//! Boundary of large balls inside a small one, and the perimeter of a ball
//! grown by admissible balls.
//!
//! `cargo run --release --example union_perimeter`

use maxvar::coverings::{intersecting_union_envelope, large_ball_campaign, union_perimeter_campaign};
use maxvar::numeric::median;

fn main() -> maxvar::Result<()> {
    for k in [0.5, 2.0, 4.0, 8.0] {
        let recs = large_ball_campaign(2, 512, k, 20, 42)?;
        let raw: Vec<f64> = recs.iter().map(|r| r.ratio).collect();
        let norm: Vec<f64> = recs.iter().map(|r| r.normalized).collect();
        println!(
            "K={k}: ratio median {:.3}, max {:.3}; ratio·K^d median {:.3}",
            median(&raw),
            raw.iter().cloned().fold(0.0, f64::max),
            median(&norm)
        );
    }
    for lambda in [0.05, 0.1, 0.2] {
        let recs = union_perimeter_campaign(2, 256, lambda, 30, 42)?;
        let worst = recs.iter().map(|r| r.ratio).fold(0.0, f64::max);
        println!(
            "λ={lambda}: max per(F∪𝔅)/per(F) {worst:.3} against envelope {:.3}",
            intersecting_union_envelope(2, lambda)
        );
    }
    Ok(())
}
