//! Vitali thinning, half-density boxing balls and surface boxing balls.
//!
//! `cargo run --release --example coverings`

use maxvar::coverings::{boxing_cover, surface_boxing_cover, vitali_subfamily, BallFamily};
use maxvar::geometry::{Ball, Body};
use maxvar::grid::{GridGeometry, GridSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> maxvar::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let balls = (0..300)
        .map(|_| Ball::new(vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)], rng.gen_range(0.005..0.08)))
        .collect();
    let fam = BallFamily::new(balls);
    let thin = vitali_subfamily(&fam);
    println!("vitali: kept {} of {} balls, disjoint: {}", thin.len(), fam.len(), thin.is_disjoint());
    for (scale, members) in fam.buckets() {
        println!("  scale 2^{scale}: {} balls", members.len());
    }

    let g = GridGeometry::unit(2, 128)?;
    let e = GridSet::from_fn(&g, |p| (p[0] - 0.45).powi(2) + (p[1] - 0.5).powi(2) < 0.01);
    let outer = BallFamily::new(vec![Ball::new(vec![0.5, 0.5], 0.4)]);
    let boxed = boxing_cover(&e, &outer)?;
    for b in &boxed.details {
        println!("boxing ball r={:.4}: density {:.4} (tolerance {:.4})", b.ball.radius, b.density, b.tolerance);
    }
    println!("residual E-cells: {}", boxed.residual);

    let x = Body::Ball(Ball::new(vec![0.5, 0.5], 0.3));
    let inner = 0.3 / 2f64.sqrt();
    let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < inner * inner);
    let surf = surface_boxing_cover(&x, &e, 0.4)?;
    println!("surface boxing: {} balls, {} skipped, min perimeter ratio {:.4}", surf.balls.len(), surf.skipped.len(), surf.min_ratio.unwrap_or(f64::NAN));
    Ok(())
}
