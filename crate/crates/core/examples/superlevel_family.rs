//! The balls (or maximal cubes) whose union is `{M > λ}`, and the
//! lower-semicontinuity check over growing prefixes of that family.
//!
//! `cargo run --release --example superlevel_family`

use maxvar::experiments::lower_semicontinuity_check;
use maxvar::grid::{level_set, Domain, GridGeometry, GridSet};
use maxvar::maximal::{superlevel_family, Operator, RadiusSchedule, SuperlevelFamily};

fn main() -> maxvar::Result<()> {
    let g = GridGeometry::unit(2, 64)?;
    let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.03);
    let lambda = 0.3;
    let ops = [
        Operator::Dyadic,
        Operator::Uncentered { schedule: RadiusSchedule::Geometric { r_min: g.h(), r_max: 0.5, ratio: 1.1 } },
    ];
    for op in &ops {
        let fam = superlevel_family(&e, &Domain::FreeSpace, lambda, op)?;
        let level = level_set(&op.apply(&e, &Domain::FreeSpace)?, lambda)?;
        let kind = match &fam {
            SuperlevelFamily::Balls(_) => "balls",
            SuperlevelFamily::Cubes(_) => "cubes",
        };
        println!("{}: {} {kind}, union equals the level set: {}", op.name(), fam.len(), fam.union(&g) == level);

        let r = lower_semicontinuity_check(&e, &Domain::FreeSpace, op, lambda, &[0.01, 0.1, 0.5, 1.0])?;
        for row in &r.rows {
            println!(
                "  {:>5.1}% ({:>5} members): |A_k| {:.4}  Per {:.4}  |A_k Δ level| {:.3}",
                100.0 * row.fraction,
                row.members,
                row.measure,
                row.perimeter,
                row.relative_difference
            );
        }
        println!("  Per(level) {:.4} ≤ tail min {:.4} + {:.4}: {}", r.level_perimeter, r.tail_min_perimeter, r.tolerance, r.inequality_holds);
    }
    Ok(())
}
