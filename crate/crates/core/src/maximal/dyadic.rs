use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridGeometry, GridSet, ScalarField, MAX_DIM};

/// Half-open dyadic cube `[index·2^level, (index+1)·2^level)^d` in cell units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: [usize; MAX_DIM],
}

impl DyadicCube {
    pub fn side_cells(&self) -> usize {
        1 << self.level
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube { level: self.level + 1, index: self.index.map(|i| i / 2) }
    }

    /// The cube of `level` containing the cell at `coords`.
    pub fn containing(coords: [usize; MAX_DIM], level: u32) -> DyadicCube {
        DyadicCube { level, index: coords.map(|c| c >> level) }
    }

    pub fn contains_cell(&self, coords: [usize; MAX_DIM], d: usize) -> bool {
        (0..d).all(|k| coords[k] >> self.level == self.index[k])
    }

    /// Flat indices of the cells of the cube.
    pub fn cells(&self, geometry: &GridGeometry) -> Vec<usize> {
        let s = self.side_cells();
        let d = geometry.dim();
        let mut ext = [1usize; MAX_DIM];
        ext[..d].fill(s);
        let mut out = Vec::with_capacity(ext.iter().product());
        for k2 in 0..ext[2] {
            for k1 in 0..ext[1] {
                for k0 in 0..ext[0] {
                    let c = [
                        self.index[0] * s + k0,
                        if d > 1 { self.index[1] * s + k1 } else { 0 },
                        if d > 2 { self.index[2] * s + k2 } else { 0 },
                    ];
                    out.push(geometry.index(c));
                }
            }
        }
        out
    }
}

/// Per-level cube counts of `E` cells and `Ω` cells.
pub(crate) struct Pyramid {
    pub d: usize,
    pub levels: Vec<Level>,
}

pub(crate) struct Level {
    pub shape: [usize; MAX_DIM],
    pub set: Vec<u32>,
    pub domain: Vec<u32>,
}

impl Level {
    fn index(&self, c: [usize; MAX_DIM]) -> usize {
        c[0] + self.shape[0] * (c[1] + self.shape[1] * c[2])
    }
}

impl Pyramid {
    pub fn build(set: &GridSet, domain: &Domain) -> Result<Self> {
        let g = set.geometry();
        domain.check_geometry(g)?;
        if !g.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(g.shape().to_vec()));
        }
        let d = g.dim();
        let top = g.shape().iter().map(|n| n.trailing_zeros()).min().expect("d >= 1");
        let mut shape = [1usize; MAX_DIM];
        shape[..d].copy_from_slice(g.shape());
        let base = Level {
            shape,
            set: set.mask().iter().map(|&b| b as u32).collect(),
            domain: (0..g.len()).map(|i| domain.contains(i) as u32).collect(),
        };
        let mut levels = vec![base];
        for _ in 0..top {
            let prev = levels.last().expect("base level");
            let mut shape = prev.shape;
            for s in shape.iter_mut().take(d) {
                *s /= 2;
            }
            let n: usize = shape.iter().product();
            let mut next = Level { shape, set: vec![0; n], domain: vec![0; n] };
            for i2 in 0..prev.shape[2] {
                for i1 in 0..prev.shape[1] {
                    for i0 in 0..prev.shape[0] {
                        let from = prev.index([i0, i1, i2]);
                        let c = [i0 / 2, if d > 1 { i1 / 2 } else { 0 }, if d > 2 { i2 / 2 } else { 0 }];
                        let to = next.index(c);
                        next.set[to] += prev.set[from];
                        next.domain[to] += prev.domain[from];
                    }
                }
            }
            levels.push(next);
        }
        Ok(Self { d, levels })
    }

    pub fn cube_volume(&self, level: usize) -> u32 {
        1u32 << (level * self.d)
    }

    /// Density of the cube if it lies in `Ω`.
    pub fn density(&self, cube: &DyadicCube) -> Option<f64> {
        let lvl = &self.levels[cube.level as usize];
        let i = lvl.index(cube.index);
        let vol = self.cube_volume(cube.level as usize);
        (lvl.domain[i] == vol).then(|| lvl.set[i] as f64 / vol as f64)
    }
}

/// Local dyadic maximal function of the indicator of `set`.
///
/// At each cell of `Ω` the maximum of `|E∩Q|/|Q|` over dyadic cubes `Q` of
/// the grid with the cell in `Q ⊆ Ω`; zero outside `Ω`. Densities are
/// ratios of cell counts and hence exact dyadic rationals.
pub fn dyadic_maximal(set: &GridSet, domain: &Domain) -> Result<ScalarField> {
    let pyr = Pyramid::build(set, domain)?;
    let d = pyr.d;
    // best[level][cube]: max density over admissible cubes at this level or coarser
    let mut best: Vec<f64> = Vec::new();
    for (level, lvl) in pyr.levels.iter().enumerate().rev() {
        let vol = pyr.cube_volume(level) as f64;
        let parent_shape = pyr.levels.get(level + 1).map(|p| p.shape);
        let mut cur = vec![0.0; lvl.set.len()];
        for i2 in 0..lvl.shape[2] {
            for i1 in 0..lvl.shape[1] {
                for i0 in 0..lvl.shape[0] {
                    let i = lvl.index([i0, i1, i2]);
                    let mut v = match parent_shape {
                        Some(ps) => {
                            let pc = [i0 / 2, if d > 1 { i1 / 2 } else { 0 }, if d > 2 { i2 / 2 } else { 0 }];
                            best[pc[0] + ps[0] * (pc[1] + ps[1] * pc[2])]
                        }
                        None => 0.0,
                    };
                    if lvl.domain[i] as f64 == vol {
                        v = v.max(lvl.set[i] as f64 / vol);
                    }
                    cur[i] = v;
                }
            }
        }
        best = cur;
    }
    let g = set.geometry();
    let values = (0..g.len()).map(|i| if domain.contains(i) { best[i] } else { 0.0 }).collect();
    ScalarField::new(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_is_one() {
        let g = GridGeometry::unit(2, 16).unwrap();
        let e = GridSet::full(&g);
        let m = dyadic_maximal(&e, &Domain::Within(e.clone())).unwrap();
        assert!(m.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn corner_cell_in_free_space() {
        let g = GridGeometry::unit(2, 8).unwrap();
        let mut e = GridSet::empty(&g);
        e.insert(0);
        let m = dyadic_maximal(&e, &Domain::FreeSpace).unwrap();
        for i in 0..g.len() {
            let c = g.coords(i);
            let expected = match c[0].max(c[1]) {
                0 => 1.0,
                1 => 0.25,
                2 | 3 => 1.0 / 16.0,
                _ => 1.0 / 64.0,
            };
            assert_eq!(m.get(i), expected, "{c:?}");
        }
    }

    #[test]
    fn cube_restricted_to_itself() {
        let g = GridGeometry::unit(2, 16).unwrap();
        let q = DyadicCube { level: 2, index: [1, 2, 0] };
        let mut e = GridSet::empty(&g);
        for c in q.cells(&g) {
            e.insert(c);
        }
        let m = dyadic_maximal(&e, &Domain::Within(e.clone())).unwrap();
        for i in 0..g.len() {
            assert_eq!(m.get(i), if e.contains(i) { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let g = GridGeometry::unit(2, 12).unwrap();
        assert!(matches!(
            dyadic_maximal(&GridSet::empty(&g), &Domain::FreeSpace),
            Err(Error::NotPowerOfTwo(_))
        ));
    }

    #[test]
    fn rectangular_grid_uses_common_levels() {
        let g = GridGeometry::new(&[8, 4], 1.0, &[0.0, 0.0]).unwrap();
        let mut e = GridSet::empty(&g);
        e.insert(g.index([7, 3, 0]));
        let m = dyadic_maximal(&e, &Domain::FreeSpace).unwrap();
        // largest cube is 4x4, so the left half never sees the cell
        assert_eq!(m.get(g.index([0, 0, 0])), 0.0);
        assert_eq!(m.get(g.index([4, 0, 0])), 1.0 / 16.0);
    }
}
