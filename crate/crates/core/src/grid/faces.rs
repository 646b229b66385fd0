//! Faces between cells: discrete perimeter, total variation and the
//! interior/boundary/exterior classification of cells.
//!
//! A face qualifies for a domain when it can carry surface measure inside
//! `Ω`: in free space every face of the box including its outer faces
//! (the outside reads as complement), otherwise only faces whose two
//! cells both lie in `Ω`.

use serde::{Deserialize, Serialize};

use super::{Domain, GridGeometry, GridSet, ScalarField, MAX_DIM};
use crate::error::Result;
use crate::numeric::pairwise_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceSide {
    Minus,
    Plus,
}

/// The face between `cell` and its neighbor in direction `side` along `axis`.
///
/// Faces between two box cells are always stored from the lower cell with
/// [`FaceSide::Plus`]; `Minus` only appears on the low outer faces of the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub cell: usize,
    pub axis: usize,
    pub side: FaceSide,
}

impl Face {
    /// The cell on the other side of the face, `None` outside the box.
    pub fn neighbor(&self, geometry: &GridGeometry) -> Option<usize> {
        let mut off = [0isize; MAX_DIM];
        off[self.axis] = match self.side {
            FaceSide::Plus => 1,
            FaceSide::Minus => -1,
        };
        geometry.offset(geometry.coords(self.cell), off)
    }

    pub fn midpoint(&self, geometry: &GridGeometry) -> [f64; MAX_DIM] {
        let mut p = geometry.center(self.cell);
        let half = 0.5 * geometry.h();
        p[self.axis] += match self.side {
            FaceSide::Plus => half,
            FaceSide::Minus => -half,
        };
        p
    }
}

/// A duplicate-free list of faces in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FaceSet {
    faces: Vec<Face>,
}

impl FaceSet {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Face> {
        self.faces.iter()
    }

    pub fn as_slice(&self) -> &[Face] {
        &self.faces
    }
}

/// Calls `visit(face, inner, outer)` for every face qualifying in `domain`.
pub(crate) fn visit_faces(
    geometry: &GridGeometry,
    domain: &Domain,
    mut visit: impl FnMut(Face, usize, Option<usize>),
) {
    let d = geometry.dim();
    let shape = geometry.shape();
    let strides = geometry.strides();
    let free = domain.is_free_space();
    for axis in 0..d {
        for idx in 0..geometry.len() {
            let ck = geometry.coords(idx)[axis];
            let plus = Face { cell: idx, axis, side: FaceSide::Plus };
            if ck + 1 < shape[axis] {
                let nb = idx + strides[axis];
                if free || (domain.contains(idx) && domain.contains(nb)) {
                    visit(plus, idx, Some(nb));
                }
            } else if free {
                visit(plus, idx, None);
            }
            if ck == 0 && free {
                visit(Face { cell: idx, axis, side: FaceSide::Minus }, idx, None);
            }
        }
    }
}

/// Faces of `domain` separating a cell of `set` from a cell outside it.
pub fn boundary_faces(set: &GridSet, domain: &Domain) -> Result<FaceSet> {
    domain.check_geometry(set.geometry())?;
    let mut faces = Vec::new();
    visit_faces(set.geometry(), domain, |face, a, b| {
        let inside_b = b.is_some_and(|b| set.contains(b));
        if set.contains(a) != inside_b {
            faces.push(face);
        }
    });
    faces.sort_unstable();
    Ok(FaceSet { faces })
}

/// Face-count perimeter of `set` inside `domain`, in world units^(d-1).
pub fn perimeter(set: &GridSet, domain: &Domain) -> Result<f64> {
    domain.check_geometry(set.geometry())?;
    let mut count = 0usize;
    visit_faces(set.geometry(), domain, |_, a, b| {
        if set.contains(a) != b.is_some_and(|b| set.contains(b)) {
            count += 1;
        }
    });
    Ok(count as f64 * set.geometry().face_area())
}

/// `h^(d-1)` times the sum of `|f(a) - f(b)|` over qualifying faces.
pub fn total_variation_direct(field: &ScalarField, domain: &Domain) -> Result<f64> {
    domain.check_geometry(field.geometry())?;
    let v = field.values();
    let mut jumps = Vec::new();
    visit_faces(field.geometry(), domain, |_, a, b| {
        let fb = b.map_or(0.0, |b| v[b]);
        jumps.push((v[a] - fb).abs());
    });
    Ok(pairwise_sum(&jumps) * field.geometry().face_area())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClass {
    Interior,
    Boundary,
    Exterior,
    /// Not a cell of `Ω`.
    Outside,
}

/// Discrete measure-theoretic interior/boundary/exterior of a set in `Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellPartition {
    geometry: GridGeometry,
    classes: Vec<CellClass>,
}

impl CellPartition {
    pub fn class(&self, idx: usize) -> CellClass {
        self.classes[idx]
    }

    pub fn classes(&self) -> &[CellClass] {
        &self.classes
    }

    fn select(&self, keep: impl Fn(CellClass) -> bool) -> GridSet {
        let mask = self.classes.iter().map(|&c| keep(c)).collect();
        GridSet::from_mask(&self.geometry, mask).expect("same geometry")
    }

    pub fn interior(&self) -> GridSet {
        self.select(|c| c == CellClass::Interior)
    }

    pub fn boundary(&self) -> GridSet {
        self.select(|c| c == CellClass::Boundary)
    }

    pub fn exterior(&self) -> GridSet {
        self.select(|c| c == CellClass::Exterior)
    }

    /// Interior together with boundary: the discrete measure-theoretic closure.
    pub fn closure(&self) -> GridSet {
        self.select(|c| matches!(c, CellClass::Interior | CellClass::Boundary))
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }
}

/// Classify each cell of `Ω` by whether it and its face neighbors lie in `set`.
///
/// Neighbors outside the box read as complement cells in free space; with a
/// mask domain only neighbors inside `Ω` are consulted.
pub fn classify_cells(set: &GridSet, domain: &Domain) -> Result<CellPartition> {
    let geometry = set.geometry();
    domain.check_geometry(geometry)?;
    let d = geometry.dim();
    let free = domain.is_free_space();
    let classes = (0..geometry.len())
        .map(|idx| {
            if !domain.contains(idx) {
                return CellClass::Outside;
            }
            let c = geometry.coords(idx);
            let own = set.contains(idx);
            let (mut any_in, mut any_out) = (own, !own);
            for axis in 0..d {
                for step in [-1isize, 1] {
                    let mut off = [0isize; MAX_DIM];
                    off[axis] = step;
                    match geometry.offset(c, off) {
                        Some(nb) if domain.contains(nb) => {
                            if set.contains(nb) {
                                any_in = true;
                            } else {
                                any_out = true;
                            }
                        }
                        Some(_) => {}
                        None if free => any_out = true,
                        None => {}
                    }
                }
            }
            match (any_in, any_out) {
                (true, false) => CellClass::Interior,
                (false, true) => CellClass::Exterior,
                _ => CellClass::Boundary,
            }
        })
        .collect();
    Ok(CellPartition { geometry: geometry.clone(), classes })
}

/// A boundary face of `A ∪ B` not accounted for by the boundaries of `A` and `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionViolation {
    pub face: Face,
}

/// Checks face by face that `∂(A∪B) ⊆ (∂A ∖ cl B) ∪ (∂B ∖ cl A) ∪ (∂A ∩ ∂B)`.
///
/// A face lies in the closure of a set when one of its two cells is in the
/// set. Free-space semantics; the returned list is expected to be empty.
pub fn boundary_union_check(a: &GridSet, b: &GridSet) -> Result<Vec<UnionViolation>> {
    a.geometry().ensure_same(b.geometry())?;
    let union = a.union(b)?;
    let mut violations = Vec::new();
    visit_faces(a.geometry(), &Domain::FreeSpace, |face, p, q| {
        let side = |s: &GridSet| (s.contains(p), q.is_some_and(|q| s.contains(q)));
        let (u0, u1) = side(&union);
        if u0 == u1 {
            return;
        }
        let (a0, a1) = side(a);
        let (b0, b1) = side(b);
        let on_a = a0 != a1;
        let on_b = b0 != b1;
        let touches_a = a0 || a1;
        let touches_b = b0 || b1;
        let explained = (on_a && !touches_b) || (on_b && !touches_a) || (on_a && on_b);
        if !explained {
            violations.push(UnionViolation { face });
        }
    });
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;

    fn geom(d: usize, n: usize) -> GridGeometry {
        GridGeometry::unit(d, n).unwrap()
    }

    #[test]
    fn full_box_perimeter_is_box_boundary() {
        let g = geom(2, 16);
        let p = perimeter(&GridSet::full(&g), &Domain::FreeSpace).unwrap();
        assert!((p - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_cell_perimeter() {
        let g = geom(2, 8);
        let mut s = GridSet::empty(&g);
        s.insert(g.index([3, 4, 0]));
        let p = perimeter(&s, &Domain::FreeSpace).unwrap();
        assert!((p - 4.0 * g.h()).abs() < 1e-15);
    }

    #[test]
    fn disk_perimeter_matches_anisotropic_length() {
        // ∮ (|n1| + |n2|) ds = 8r for a disk
        let g = geom(2, 512);
        let s = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.0625);
        let p = perimeter(&s, &Domain::FreeSpace).unwrap();
        assert!((p - 2.0).abs() < 0.1, "{p}");
    }

    #[test]
    fn mask_domain_ignores_faces_leaving_omega() {
        let g = geom(2, 8);
        let omega = GridSet::from_fn(&g, |p| p[0] < 0.5);
        let e = GridSet::from_fn(&g, |p| p[0] < 0.5 && p[1] < 0.5);
        let p = perimeter(&e, &Domain::Within(omega.clone())).unwrap();
        // only the horizontal interface of length 1/2 inside Ω
        assert!((p - 0.5).abs() < 1e-12);
        assert_eq!(perimeter(&omega, &Domain::Within(omega.clone())).unwrap(), 0.0);
    }

    #[test]
    fn classify_full_and_single() {
        let g = geom(2, 8);
        let part = classify_cells(&GridSet::full(&g), &Domain::Within(GridSet::full(&g))).unwrap();
        assert_eq!(part.count(CellClass::Interior), 64);

        let mut s = GridSet::empty(&g);
        let c = g.index([3, 3, 0]);
        s.insert(c);
        let part = classify_cells(&s, &Domain::FreeSpace).unwrap();
        assert_eq!(part.count(CellClass::Boundary), 5);
        assert_eq!(part.count(CellClass::Exterior), 59);
        for nb in [[2, 3, 0], [4, 3, 0], [3, 2, 0], [3, 4, 0], [3, 3, 0]] {
            assert_eq!(part.class(g.index(nb)), CellClass::Boundary);
        }
    }

    #[test]
    fn classify_half_space_enumeration() {
        let g = geom(2, 32);
        let s = GridSet::from_fn(&g, |p| p[0] < 0.5);
        let part = classify_cells(&s, &Domain::FreeSpace).unwrap();
        for idx in 0..g.len() {
            let col = g.coords(idx)[0];
            let expected = match col {
                15 | 16 => CellClass::Boundary,
                c if c < 15 => CellClass::Interior,
                _ => CellClass::Exterior,
            };
            // the outer ring touches the complement outside the box
            let c = g.coords(idx);
            let on_edge = c[0] == 0 || c[1] == 0 || c[1] == 31;
            if on_edge && expected == CellClass::Interior {
                assert_eq!(part.class(idx), CellClass::Boundary);
            } else {
                assert_eq!(part.class(idx), expected, "cell {c:?}");
            }
        }
    }

    #[test]
    fn half_grid_variation_is_interface_length() {
        let g = geom(2, 16);
        let omega = Domain::Within(GridSet::full(&g));
        let s = GridSet::from_fn(&g, |p| p[0] < 0.5);
        let tv = total_variation_direct(&s.indicator(), &omega).unwrap();
        assert!((tv - 1.0).abs() < 1e-12);
        let c = ScalarField::constant(&g, 0.7).unwrap();
        assert_eq!(total_variation_direct(&c, &omega).unwrap(), 0.0);
    }

    #[test]
    fn boundary_faces_count_matches_perimeter() {
        let g = geom(2, 16);
        let s = GridSet::from_fn(&g, |p| (p[0] - 0.4).abs() < 0.2 && (p[1] - 0.6).abs() < 0.3);
        let faces = boundary_faces(&s, &Domain::FreeSpace).unwrap();
        let p = perimeter(&s, &Domain::FreeSpace).unwrap();
        assert!((faces.len() as f64 * g.h() - p).abs() < 1e-12);
        let mut dedup = faces.as_slice().to_vec();
        dedup.dedup();
        assert_eq!(dedup.len(), faces.len());
    }

    #[test]
    fn union_check_trivial_cases() {
        let g = geom(2, 16);
        let a = GridSet::from_fn(&g, |p| p[0] < 0.3);
        assert!(boundary_union_check(&a, &GridSet::empty(&g)).unwrap().is_empty());
        assert!(boundary_union_check(&a, &a).unwrap().is_empty());
    }
}
