//! Uncentered ball maximal function under different radius schedules.
//!
//! `cargo run --release --example uncentered -- 128`

use std::time::Instant;

use maxvar::experiments::variation_ratio;
use maxvar::grid::{Domain, GridGeometry, GridSet};
use maxvar::maximal::{uncentered_maximal, Operator, RadiusSchedule};

fn main() -> maxvar::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(128, |s| s.parse().expect("resolution"));
    let g = GridGeometry::unit(2, n)?;
    let annulus = GridSet::from_fn(&g, |p| {
        let r2 = (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2);
        (0.01..0.04).contains(&r2)
    });
    let h = g.h();
    let schedules = [
        RadiusSchedule::default_for(&g),
        RadiusSchedule::Geometric { r_min: h, r_max: 0.5 * g.diameter(), ratio: 1.2 },
        RadiusSchedule::Arithmetic { r_min: h, r_max: 0.25, step: 2.0 * h },
        RadiusSchedule::Explicit { radii: vec![0.05, 0.1, 0.2] },
    ];
    for s in schedules {
        let t = Instant::now();
        let m = uncentered_maximal(&annulus, &Domain::FreeSpace, &s)?;
        let hole = m.get(g.index([n / 2, n / 2, 0]));
        let ratio = variation_ratio(&annulus, &Domain::FreeSpace, &Operator::Uncentered { schedule: s.clone() })?;
        println!("{:>3} radii: M at the center {hole:.3}, Var(M)/Per(E) {ratio:.4}  ({:.0?})", s.radii().len(), t.elapsed());
    }
    Ok(())
}
