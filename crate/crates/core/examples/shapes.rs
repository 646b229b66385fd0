//! Test shapes and the grid file format.
//!
//! `cargo run --release --example shapes -- /tmp/shapes`

use maxvar::experiments::{generate_shape, Shape, ShapeSpec};
use maxvar::grid::io::{read, write_set, GridFile};
use maxvar::grid::GridGeometry;

fn main() -> maxvar::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(std::env::temp_dir, Into::into);
    std::fs::create_dir_all(&dir)?;
    for (d, text) in [(2, "ball:0.25"), (2, "annulus:0.1,0.3"), (2, "balls:8"), (2, "dyadic:4,0.4"), (2, "half:0.3"), (3, "cube:0.2")] {
        let g = GridGeometry::unit(d, if d == 2 { 128 } else { 32 })?;
        let spec = ShapeSpec::new(Shape::parse(text, d)?).with_seed(9);
        let set = generate_shape(&spec, &g)?;
        let path = dir.join(format!("{}-{d}d.json", text.split(':').next().unwrap_or("shape")));
        write_set(&path, &set)?;
        let back = matches!(read(&path)?, GridFile::Set(s) if s == set);
        println!("{text:<16} d={d}: {:>6} cells, {:>6} bytes on disk, round trip {back}", set.count(), std::fs::metadata(&path)?.len());
    }
    Ok(())
}
