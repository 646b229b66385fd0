//! Ball geometry used by the covering arguments, checked numerically.
//!
//! `cargo run --release --example geometry_lemmas`

use maxvar::geometry::{
    ball_intersection_volume, critical_angle_n, isoperimetric_ratio, min_angle_probe, reach_campaign,
    shrink_campaign, shrink_disjoint_check, volume_ratio_check, Ball, Body,
};
use maxvar::grid::{GridGeometry, GridSet};

fn main() -> maxvar::Result<()> {
    let b = Ball::new(vec![0.0, 0.0], 1.0);
    let c = Ball::new(vec![1.8, 0.0], 1.2);
    println!("|B∩C| = {:.5}", ball_intersection_volume(&b, &c)?);
    println!("shrink check on that pair at λ=0.1: {:?}", shrink_disjoint_check(&b, &c, 0.1)?);
    for d in 1..=4 {
        let s = shrink_campaign(d, 2000, 7)?;
        println!("  d={d}: {} counterexamples in {} trials, min relative gap {:.2e}", s.counterexamples, s.trials, s.min_relative_gap);
    }

    let reach = reach_campaign(2, 48, 1000, 7)?;
    println!("reach inside (1−λ/d)B: {} premises met, {} witnesses, {} violations", reach.premise_met, reach.witnesses, reach.violations);

    let vr = volume_ratio_check(25)?;
    println!("σ_d/σ_(d−1) ≤ √d for 3 ≤ d ≤ 25: {} (min slack {:.3})", vr.passes, vr.min_slack);

    let a = min_angle_probe(2, 3.0, 2000, 7)?;
    println!("angle lemma at N=3: max angle {:.4} < π/2: {}; holds from N ≈ {:.4}", a.max_angle, a.passes, critical_angle_n());

    let g = GridGeometry::unit(2, 128)?;
    let e = GridSet::from_fn(&g, |p| p[0] + 0.3 * p[1] < 0.6);
    let cube = Body::Cube { center: vec![0.5, 0.5], half_side: 0.3 };
    let iso = isoperimetric_ratio(&cube, &e)?;
    println!("relative isoperimetric ratio in a cube: {:.4}", iso.ratio);
    Ok(())
}
