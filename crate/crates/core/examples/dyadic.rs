//! Local dyadic maximal function of a set and its variation ratio.
//!
//! `cargo run --release --example dyadic -- 256`

use maxvar::experiments::variation_ratio;
use maxvar::grid::{level_set, perimeter, variation_coarea, Domain, GridGeometry, GridSet};
use maxvar::maximal::{dyadic_maximal, Operator};

fn main() -> maxvar::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(256, |s| s.parse().expect("resolution"));
    let g = GridGeometry::unit(2, n)?;
    let e = GridSet::from_fn(&g, |p| (p[0] - 0.4).abs() < 0.15 && (p[1] - 0.55).abs() < 0.2);
    let m = dyadic_maximal(&e, &Domain::FreeSpace)?;
    println!("Per(E) = {:.4}, Var(M) = {:.4}", perimeter(&e, &Domain::FreeSpace)?, variation_coarea(&m, &Domain::FreeSpace)?);
    for lambda in [0.05, 0.2, 0.5, 0.9] {
        let s = level_set(&m, lambda)?;
        println!("  λ={lambda:<4}  |{{M > λ}}| = {:.4}  Per = {:.4}", s.measure(), perimeter(&s, &Domain::FreeSpace)?);
    }

    // inside Ω only cubes contained in Ω count
    let omega = GridSet::from_fn(&g, |p| p[0] < 0.75);
    let dom = Domain::Within(omega);
    println!("ratio in free space {:.4}, in Ω {:.4}", variation_ratio(&e, &Domain::FreeSpace, &Operator::Dyadic)?, variation_ratio(&e, &dom, &Operator::Dyadic)?);
    Ok(())
}
