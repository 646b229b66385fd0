//! Multi-scale cover of the exposed boundary of a dense ball family, and
//! the finite-family boundary estimate.
//!
//! `cargo run --release --example multiscale -- 0.3 out.csv`

use maxvar::coverings::{finite_family_boundary_ratio, multiscale_covers, random_dense_family};
use maxvar::experiments::{generate_shape, Shape, ShapeSpec};
use maxvar::grid::GridGeometry;

fn main() -> maxvar::Result<()> {
    let mut args = std::env::args().skip(1);
    let lambda: f64 = args.next().map_or(0.3, |s| s.parse().expect("λ"));
    let csv = args.next();

    let g = GridGeometry::unit(2, 128)?;
    let e = generate_shape(&ShapeSpec::new(Shape::parse("balls:6", 2)?).with_seed(5), &g)?;
    let fam = random_dense_family(&e, lambda, 15, 5)?;
    let cover = multiscale_covers(&e, &fam, lambda)?;
    for s in &cover.report.scales {
        println!(
            "scale 2^{:<3} {:>3} balls  disjoint {}  uncovered {}/{}  min c4 {:?}",
            s.n, s.balls, s.disjoint, s.coverage_violations, s.coverage_checked, s.c4_min
        );
    }
    println!("properties hold: {}", cover.report.passes());

    let rec = finite_family_boundary_ratio(&e, &fam, lambda)?;
    println!(
        "exposed boundary {:.4}, inner perimeter {:.4}, constant {:.4}",
        rec.exposed_boundary, rec.inner_perimeter, rec.constant
    );
    if let Some(path) = csv {
        std::fs::write(&path, cover.report.to_csv()?).expect("writable path");
        println!("wrote {path}");
    }
    Ok(())
}
