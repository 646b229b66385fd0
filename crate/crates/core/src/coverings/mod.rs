//! Covering constructions: Vitali subfamilies, boxing balls, surface
//! boxing covers, multi-scale covers and union-perimeter measurements.

mod boxing;
mod campaign;
mod multiscale;
mod report;
mod surface;
mod union;

pub use boxing::{boxing_ball, boxing_cover, BoxingBall, BoxingCover};
pub use campaign::{large_ball_campaign, random_dense_family, union_perimeter_campaign};
pub use multiscale::{multiscale_covers, MultiscaleCover};
pub use report::{CoverBallRecord, CoverReport, ScaleRecord, Violation};
pub use surface::{surface_boxing_ball, surface_boxing_cover, SkipRecord, SurfaceBall, SurfaceCover};
pub use union::{
    finite_family_boundary_ratio, intersecting_union_envelope, intersecting_union_perimeter_check,
    large_ball_boundary_ratio, FiniteFamilyRecord, LargeBallRatio, UnionPerimeterRecord,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{dist2, Ball};
use crate::grid::{GridGeometry, GridSet};

/// Scale `n` with `diam ∈ [1/2, 1)·2^n`.
pub fn scale_of(diameter: f64) -> i32 {
    diameter.log2().floor() as i32 + 1
}

/// Ordered list of balls with scale buckets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
}

impl BallFamily {
    pub fn new(balls: Vec<Ball>) -> Self {
        Self { balls }
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Ball> {
        self.balls.iter()
    }

    /// Indices of the balls in each scale bucket.
    pub fn buckets(&self) -> BTreeMap<i32, Vec<usize>> {
        let mut out: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, b) in self.balls.iter().enumerate() {
            out.entry(scale_of(b.diameter())).or_default().push(i);
        }
        out
    }

    pub fn bucket(&self, n: i32) -> BallFamily {
        BallFamily::new(self.balls.iter().filter(|b| scale_of(b.diameter()) == n).cloned().collect())
    }

    /// Concentric copies with radii scaled by `factor`.
    pub fn expanded(&self, factor: f64) -> BallFamily {
        BallFamily::new(self.balls.iter().map(|b| b.scaled(factor)).collect())
    }

    /// Cells of the box whose centers lie in some ball.
    pub fn rasterize(&self, geometry: &GridGeometry) -> GridSet {
        rasterize_balls(&self.balls, geometry)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.balls.iter().any(|b| b.contains(p))
    }

    /// True if no two balls intersect (open balls, exact distance test).
    pub fn is_disjoint(&self) -> bool {
        first_overlap(&self.balls).is_none()
    }
}

impl FromIterator<Ball> for BallFamily {
    fn from_iter<T: IntoIterator<Item = Ball>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

pub(crate) fn first_overlap(balls: &[Ball]) -> Option<(usize, usize)> {
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            if balls[i].intersects(&balls[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Greedy disjoint subfamily: balls in decreasing radius (ties broken by
/// lexicographic center), each kept if it misses all kept balls.
///
/// Every input ball meets a kept ball of at least its radius, so the
/// 3-expansion (in particular the 5-expansion) of the output covers the
/// union of the input.
pub fn vitali_subfamily(family: &BallFamily) -> BallFamily {
    vitali_indices(&family.balls).into_iter().map(|i| family.balls[i].clone()).collect()
}

/// Indices kept by [`vitali_subfamily`], in selection order.
pub(crate) fn vitali_indices(balls: &[Ball]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| {
        let (ba, bb) = (&balls[a], &balls[b]);
        bb.radius
            .total_cmp(&ba.radius)
            .then_with(|| {
                ba.center
                    .iter()
                    .zip(&bb.center)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&k| !balls[k].intersects(&balls[i])) {
            kept.push(i);
        }
    }
    kept
}

/// Visit lattice points `origin + (k + 1/2)h` strictly inside the ball,
/// including points beyond the box (reported with `None`).
pub(crate) fn for_each_lattice_point(
    g: &GridGeometry,
    center: &[f64],
    radius: f64,
    mut f: impl FnMut(Option<usize>, &[f64]),
) {
    let d = g.dim();
    let h = g.h();
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for k in 0..d {
        let o = g.origin()[k];
        lo[k] = ((center[k] - radius - o) / h - 0.5).ceil() as i64;
        hi[k] = ((center[k] + radius - o) / h - 0.5).floor() as i64;
    }
    let r2 = radius * radius;
    let shape = g.shape();
    let mut p = [0.0; 3];
    for k2 in lo[2]..=hi[2] {
        for k1 in lo[1]..=hi[1] {
            for k0 in lo[0]..=hi[0] {
                let ks = [k0, k1, k2];
                for k in 0..d {
                    p[k] = g.origin()[k] + (ks[k] as f64 + 0.5) * h;
                }
                if dist2(&p[..d], center) >= r2 {
                    continue;
                }
                let inside = (0..d).all(|k| ks[k] >= 0 && (ks[k] as usize) < shape[k]);
                let idx = inside.then(|| g.index([k0 as usize, k1.max(0) as usize, k2.max(0) as usize]));
                f(idx, &p[..d]);
            }
        }
    }
}

/// Cell counts of `E` in `ball ∩ {pred}`, lattice points beyond the box included in `cells`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct RegionStats {
    pub cells: usize,
    pub set_cells: usize,
    /// Faces of `∂E` with both cells in the region (world units).
    pub perimeter: f64,
}

impl RegionStats {
    pub fn density(&self) -> f64 {
        if self.cells == 0 {
            0.0
        } else {
            self.set_cells as f64 / self.cells as f64
        }
    }
}

pub(crate) fn region_stats(
    set: &GridSet,
    ball: &Ball,
    pred: impl Fn(&[f64]) -> bool,
    with_perimeter: bool,
) -> RegionStats {
    let g = set.geometry();
    let d = g.dim();
    let mut s = RegionStats::default();
    let mut faces = 0usize;
    for_each_lattice_point(g, &ball.center, ball.radius, |idx, p| {
        if !pred(p) {
            return;
        }
        s.cells += 1;
        let Some(i) = idx else { return };
        let inside = set.contains(i);
        s.set_cells += inside as usize;
        if with_perimeter {
            let c = g.coords(i);
            for k in 0..d {
                let mut off = [0isize; 3];
                off[k] = 1;
                if let Some(j) = g.offset(c, off) {
                    if set.contains(j) != inside {
                        let mut q = [0.0; 3];
                        q[..d].copy_from_slice(p);
                        q[k] += g.h();
                        if ball.contains(&q[..d]) && pred(&q[..d]) {
                            faces += 1;
                        }
                    }
                }
            }
        }
    });
    s.perimeter = faces as f64 * g.face_area();
    s
}

pub(crate) fn rasterize_balls(balls: &[Ball], g: &GridGeometry) -> GridSet {
    let mut set = GridSet::empty(g);
    for b in balls {
        for_each_lattice_point(g, &b.center, b.radius, |idx, _| {
            if let Some(i) = idx {
                set.insert(i);
            }
        });
    }
    set
}

/// Discrete closure test: some cell of `E` has its center within max-norm
/// distance `h` of `p`.
pub(crate) fn near_set(set: &GridSet, p: &[f64]) -> bool {
    let g = set.geometry();
    let d = g.dim();
    let h = g.h();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for k in 0..d {
        let t = (p[k] - g.origin()[k]) / h - 0.5;
        let a = (t - 1.0 - 1e-9).ceil().max(0.0);
        let b = (t + 1.0 + 1e-9).floor();
        if b < 0.0 || a > (g.shape()[k] - 1) as f64 {
            return false;
        }
        lo[k] = a as usize;
        hi[k] = (b as usize).min(g.shape()[k] - 1);
    }
    for c2 in lo[2]..=hi[2] {
        for c1 in lo[1]..=hi[1] {
            for c0 in lo[0]..=hi[0] {
                if set.contains(g.index([c0, c1, c2])) {
                    return true;
                }
            }
        }
    }
    false
}

/// Surface measure `d·σ_d·r^{d−1}` of a sphere.
pub(crate) fn sphere_area(d: usize, r: f64) -> f64 {
    d as f64 * crate::geometry::unit_ball_volume(d).unwrap_or(0.0) * r.powi(d as i32 - 1)
}
