//! Perimeter, total variation and the discrete coarea identity.
//!
//! `cargo run --release --example coarea`

use maxvar::grid::{
    attained_levels, classify_cells, perimeter, total_variation_direct, variation_coarea, CellClass, Domain,
    GridGeometry, GridSet, ScalarField,
};

fn main() -> maxvar::Result<()> {
    let g = GridGeometry::unit(2, 128)?;
    let disk = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.09);
    // face-count perimeter overestimates 2πr by about 4/π
    println!("disk r=0.3: measure {:.4}, perimeter {:.4} (2πr = {:.4})", disk.measure(), perimeter(&disk, &Domain::FreeSpace)?, 0.6 * std::f64::consts::PI);

    let half = GridSet::from_fn(&g, |p| p[0] < 0.5);
    let inside_half = perimeter(&disk, &Domain::Within(half))?;
    println!("perimeter inside the left half: {inside_half:.4}");

    let parts = classify_cells(&disk, &Domain::FreeSpace)?;
    println!(
        "cells: {} interior, {} boundary, {} exterior",
        parts.count(CellClass::Interior),
        parts.count(CellClass::Boundary),
        parts.count(CellClass::Exterior)
    );

    // a radial profile: the variation is the integral of the level perimeters
    let values = (0..g.len())
        .map(|i| {
            let c = g.center(i);
            (1.0 - 2.0 * ((c[0] - 0.5).powi(2) + (c[1] - 0.5).powi(2)).sqrt()).clamp(0.0, 1.0)
        })
        .collect();
    let f = ScalarField::new(&g, values)?;
    println!(
        "cone: {} levels, coarea {:.6}, direct {:.6}",
        attained_levels(&f).len(),
        variation_coarea(&f, &Domain::FreeSpace)?,
        total_variation_direct(&f, &Domain::FreeSpace)?
    );
    Ok(())
}
