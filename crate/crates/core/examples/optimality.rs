//! Level-set rate of a small ball: the perimeter of `{M > λ}` grows like
//! `λ^{−(d−1)/d}`.
//!
//! `cargo run --release --example optimality -- 2 512`
//! `cargo run --release --example optimality -- 3 128`  (a couple of minutes)

use maxvar::experiments::optimality_experiment;
use maxvar::numeric::logspace;

fn main() -> maxvar::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().map_or(2, |s| s.parse().expect("dimension"));
    let n: usize = args.next().map_or(256, |s| s.parse().expect("resolution"));
    let rep = optimality_experiment(d, n, &logspace(1e-3, 0.3, 25))?;
    for row in &rep.rate.rows {
        println!("λ={:.4e}  Per {:>9.5}  |{{M>λ}}| {:.5}", row.lambda, row.perimeter, row.measure);
    }
    if let Some(fit) = &rep.rate.fit {
        println!("slope {:.4} ± {:.4}, expected {:.4} ± {}", fit.slope, fit.half_width, rep.expected_slope, rep.tolerance);
    }
    for c in &rep.radius_checks {
        println!("λ={:e}: radius {:.5} vs axial oracle {:.5} ({:.2} cells)", c.lambda, c.grid_radius, c.oracle_radius, c.cells_off);
    }
    if rep.resolution_flagged {
        println!("warning: the small-λ levels reach the box; raise the resolution");
    }
    println!("passes: {}", rep.passes());
    Ok(())
}
