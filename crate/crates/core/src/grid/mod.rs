//! Uniform grids in one to three dimensions: binary sets, scalar fields and
//! the domain `Ω` they are measured in.
//!
//! Cells are addressed by a flat index with axis 0 varying fastest. A cell
//! belongs to a continuous set iff its center does; every rasterization in
//! the crate goes through [`GridGeometry::center`].

mod faces;
pub mod io;
mod levels;

pub use faces::{
    boundary_faces, boundary_union_check, classify_cells, perimeter, total_variation_direct,
    CellClass, CellPartition, Face, FaceSet, FaceSide, UnionViolation,
};
pub use levels::{attained_levels, level_perimeters, level_set, variation_coarea};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension of a grid.
pub const MAX_DIM: usize = 3;

/// Shape, spacing and placement of a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    d: usize,
    shape: [usize; MAX_DIM],
    h: f64,
    origin: [f64; MAX_DIM],
}

impl GridGeometry {
    pub fn new(shape: &[usize], h: f64, origin: &[f64]) -> Result<Self> {
        let d = shape.len();
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidGeometry(format!("dimension {d} not in 1..=3")));
        }
        if origin.len() != d {
            return Err(Error::InvalidGeometry("origin length differs from dimension".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGeometry(format!("cell size {h} must be positive")));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidGeometry("empty axis".into()));
        }
        shape
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::InvalidGeometry("cell count overflows".into()))?;
        let mut s = [1; MAX_DIM];
        let mut o = [0.0; MAX_DIM];
        s[..d].copy_from_slice(shape);
        o[..d].copy_from_slice(origin);
        Ok(Self { d, shape: s, h, origin: o })
    }

    /// `n^d` cells of side `h` with the low corner at the origin.
    pub fn cube(d: usize, n: usize, h: f64) -> Result<Self> {
        Self::new(&vec![n; d], h, &vec![0.0; d])
    }

    /// `n^d` cells covering the unit box `[0,1)^d`.
    pub fn unit(d: usize, n: usize) -> Result<Self> {
        Self::cube(d, n, 1.0 / n as f64)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.d]
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.d]
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stride of each axis in the flat index.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        [1, self.shape[0], self.shape[0] * self.shape[1]]
    }

    pub fn index(&self, coords: [usize; MAX_DIM]) -> usize {
        coords[0] + self.shape[0] * (coords[1] + self.shape[1] * coords[2])
    }

    pub fn coords(&self, idx: usize) -> [usize; MAX_DIM] {
        let i0 = idx % self.shape[0];
        let rest = idx / self.shape[0];
        [i0, rest % self.shape[1], rest / self.shape[1]]
    }

    /// Flat index of the cell at `coords + offset`, if it lies in the box.
    pub fn offset(&self, coords: [usize; MAX_DIM], offset: [isize; MAX_DIM]) -> Option<usize> {
        let mut c = [0usize; MAX_DIM];
        for k in 0..MAX_DIM {
            let v = coords[k] as isize + offset[k];
            if v < 0 || v >= self.shape[k] as isize {
                return None;
            }
            c[k] = v as usize;
        }
        Some(self.index(c))
    }

    /// World coordinates of a cell center; unused trailing axes are zero.
    pub fn center(&self, idx: usize) -> [f64; MAX_DIM] {
        let c = self.coords(idx);
        let mut p = [0.0; MAX_DIM];
        for k in 0..self.d {
            p[k] = self.origin[k] + (c[k] as f64 + 0.5) * self.h;
        }
        p
    }

    /// Extent of the box along each axis in world units.
    pub fn extent(&self) -> [f64; MAX_DIM] {
        let mut e = [0.0; MAX_DIM];
        for k in 0..self.d {
            e[k] = self.shape[k] as f64 * self.h;
        }
        e
    }

    /// Length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        self.extent().iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    pub fn face_area(&self) -> f64 {
        self.h.powi(self.d as i32 - 1)
    }

    /// Continuous cell coordinates (cell centers at integers) of a world point.
    pub fn to_cell_units(&self, p: &[f64]) -> [f64; MAX_DIM] {
        let mut q = [0.0; MAX_DIM];
        for k in 0..self.d {
            q[k] = (p[k] - self.origin[k]) / self.h - 0.5;
        }
        q
    }

    pub fn is_power_of_two(&self) -> bool {
        self.shape().iter().all(|n| n.is_power_of_two())
    }

    pub fn ensure_same(&self, other: &GridGeometry) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GeometryMismatch)
        }
    }
}

/// A binary set on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSet {
    geometry: GridGeometry,
    mask: Vec<bool>,
}

impl GridSet {
    pub fn empty(geometry: &GridGeometry) -> Self {
        Self { mask: vec![false; geometry.len()], geometry: geometry.clone() }
    }

    pub fn full(geometry: &GridGeometry) -> Self {
        Self { mask: vec![true; geometry.len()], geometry: geometry.clone() }
    }

    pub fn from_mask(geometry: &GridGeometry, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != geometry.len() {
            return Err(Error::InvalidGeometry(format!(
                "mask has {} cells, geometry {}",
                mask.len(),
                geometry.len()
            )));
        }
        Ok(Self { geometry: geometry.clone(), mask })
    }

    /// Rasterize a predicate on world coordinates by the cell-center rule.
    pub fn from_fn(geometry: &GridGeometry, contains: impl Fn(&[f64]) -> bool + Sync) -> Self {
        use rayon::prelude::*;
        let d = geometry.dim();
        let mask = (0..geometry.len())
            .into_par_iter()
            .map(|i| contains(&geometry.center(i)[..d]))
            .collect();
        Self { geometry: geometry.clone(), mask }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn insert(&mut self, idx: usize) {
        self.mask[idx] = true;
    }

    pub fn remove(&mut self, idx: usize) {
        self.mask[idx] = false;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Lebesgue measure: number of set cells times `h^d`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.geometry.cell_volume()
    }

    /// Flat indices of the set cells in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    fn zip_with(&self, other: &GridSet, op: impl Fn(bool, bool) -> bool) -> Result<GridSet> {
        self.geometry.ensure_same(&other.geometry)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect();
        Ok(GridSet { geometry: self.geometry.clone(), mask })
    }

    pub fn union(&self, other: &GridSet) -> Result<GridSet> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &GridSet) -> Result<GridSet> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &GridSet) -> Result<GridSet> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> GridSet {
        GridSet {
            geometry: self.geometry.clone(),
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset(&self, other: &GridSet) -> Result<bool> {
        self.geometry.ensure_same(&other.geometry)?;
        Ok(self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b))
    }

    /// Number of set cells lying in the outer `margin`-cell ring of the box.
    pub fn cells_in_margin(&self, margin: usize) -> usize {
        let shape = self.geometry.shape().to_vec();
        self.cells()
            .filter(|&i| {
                let c = self.geometry.coords(i);
                shape.iter().enumerate().any(|(k, &n)| c[k] < margin || c[k] + margin >= n)
            })
            .count()
    }

    /// Errors if any set cell lies within `margin` cells of the box edge.
    pub fn check_margin(&self, margin: usize) -> Result<()> {
        match self.cells_in_margin(margin) {
            0 => Ok(()),
            count => Err(Error::MarginViolation { margin, count }),
        }
    }

    /// The indicator function of the set.
    pub fn indicator(&self) -> ScalarField {
        ScalarField {
            geometry: self.geometry.clone(),
            values: self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// A real-valued grid function with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(geometry: &GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidGeometry(format!(
                "field has {} values, geometry {}",
                values.len(),
                geometry.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("field value {v} outside [0, 1]")));
        }
        Ok(Self { geometry: geometry.clone(), values })
    }

    pub fn constant(geometry: &GridGeometry, value: f64) -> Result<Self> {
        Self::new(geometry, vec![value; geometry.len()])
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// The open set `Ω` on which maximal functions and variations are taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// `Ω = ℝ^d`: cells outside the box are complement cells with value 0.
    FreeSpace,
    /// `Ω` given by a mask on the same grid; the outside of the box is not in `Ω`.
    Within(GridSet),
}

impl Domain {
    pub fn contains(&self, idx: usize) -> bool {
        match self {
            Domain::FreeSpace => true,
            Domain::Within(s) => s.contains(idx),
        }
    }

    pub fn is_free_space(&self) -> bool {
        matches!(self, Domain::FreeSpace)
    }

    pub fn check_geometry(&self, geometry: &GridGeometry) -> Result<()> {
        match self {
            Domain::FreeSpace => Ok(()),
            Domain::Within(s) => s.geometry().ensure_same(geometry),
        }
    }

    /// The cells of `Ω` inside the box.
    pub fn cells(&self, geometry: &GridGeometry) -> GridSet {
        match self {
            Domain::FreeSpace => GridSet::full(geometry),
            Domain::Within(s) => s.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = GridGeometry::new(&[4, 3, 5], 0.1, &[0.0, 0.0, 0.0]).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(g.coords(i)), i);
        }
        assert_eq!(g.strides(), [1, 4, 12]);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(GridGeometry::new(&[4, 4], 0.0, &[0.0, 0.0]).is_err());
        assert!(GridGeometry::new(&[4, 4, 4, 4], 1.0, &[0.0; 4]).is_err());
        assert!(GridGeometry::new(&[4, 0], 1.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn measure_of_empty_and_full() {
        let g = GridGeometry::cube(2, 16, 1.0 / 16.0).unwrap();
        assert_eq!(GridSet::empty(&g).measure(), 0.0);
        let g = GridGeometry::cube(2, 4, 0.25).unwrap();
        assert_eq!(GridSet::full(&g).measure(), 1.0);
    }

    #[test]
    fn disk_measure_converges() {
        let disk = |n: usize| {
            let g = GridGeometry::unit(2, n).unwrap();
            GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.16).measure()
        };
        let exact = std::f64::consts::PI * 0.16;
        let (coarse, fine) = (disk(128), disk(256));
        assert!((fine - exact).abs() < 0.01);
        // refinement moves the value by O(h)
        assert!((coarse - fine).abs() < 4.0 / 128.0);
    }

    #[test]
    fn margin_check() {
        let g = GridGeometry::unit(2, 8).unwrap();
        let mut s = GridSet::empty(&g);
        s.insert(g.index([1, 4, 0]));
        assert!(s.check_margin(1).is_ok());
        assert!(matches!(s.check_margin(2), Err(Error::MarginViolation { count: 1, .. })));
    }

    #[test]
    fn field_rejects_out_of_range() {
        let g = GridGeometry::unit(1, 4).unwrap();
        assert!(ScalarField::new(&g, vec![0.0, 0.5, 1.0, 1.5]).is_err());
    }
}
