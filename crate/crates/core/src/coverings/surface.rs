use serde::{Deserialize, Serialize};

use super::{near_set, region_stats, sphere_area, BallFamily};
use crate::error::{Error, Result};
use crate::geometry::{distance, Ball, Body};
use crate::grid::{boundary_faces, Domain, GridGeometry, GridSet};

/// A ball centered on `∂X` whose inner region holds `E` at density `λ/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceBall {
    pub ball: Ball,
    /// Discrete density of `E` in `A(r)`.
    pub density: f64,
    /// Perimeter of `E` inside `A(r)`.
    pub perimeter: f64,
    /// `Per(E, A(r)) / (λ^{(d−1)/d} · |∂B(x, r)|)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub point: Vec<f64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCover {
    pub family: BallFamily,
    pub balls: Vec<SurfaceBall>,
    pub skipped: Vec<SkipRecord>,
    /// Smallest measured ratio, `None` for an empty cover.
    pub min_ratio: Option<f64>,
}

/// Distance threshold `λr / (2 d^{d/2−1})` defining `A(r)`.
pub(crate) fn depth_threshold(d: usize, lambda: f64, r: f64) -> f64 {
    lambda * r / (2.0 * (d as f64).powf(d as f64 / 2.0 - 1.0))
}

fn stats(set: &GridSet, x: &Body, lambda: f64, ball: &Ball, perim: bool) -> super::RegionStats {
    let t = depth_threshold(set.geometry().dim(), lambda, ball.radius);
    region_stats(set, ball, |p| x.depth(p) > t, perim)
}

fn body_density(set: &GridSet, x: &Body) -> f64 {
    match x {
        Body::Ball(b) => region_stats(set, b, |_| true, false).density(),
        Body::Cube { center, half_side } => {
            let hull = Ball::new(center.clone(), half_side * (center.len() as f64).sqrt() * 1.000_001);
            region_stats(set, &hull, |p| x.depth(p) > 0.0, false).density()
        }
    }
}

/// Radius `r ≤ diam X` found by bisection so that `E` has density `λ/2` in
/// `A(r) = B(x, r) ∩ {y : dist(y, X^∁) > λr/(2d^{d/2−1})}`.
///
/// Errors if `x` lies in the discrete closure of `E` (an `E`-cell center
/// within max-norm distance `h`) or the density has no sign change on
/// `[h/2, diam X]`.
pub fn surface_boxing_ball(x_body: &Body, set: &GridSet, lambda: f64, x: &[f64]) -> Result<SurfaceBall> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    if near_set(set, x) {
        return Err(Error::InvalidArgument("point lies in the closure of E".into()));
    }
    bisect_radius(x_body, set, lambda, x)
}

fn bisect_radius(x_body: &Body, set: &GridSet, lambda: f64, x: &[f64]) -> Result<SurfaceBall> {
    let g = set.geometry();
    let d = g.dim();
    let target = lambda / 2.0;
    let at = |r: f64| Ball::new(x.to_vec(), r);
    // B(x, h/2) holds at most one lattice point
    let (mut lo, mut hi) = (0.5 * g.h(), x_body.diameter());
    if stats(set, x_body, lambda, &at(lo), false).density() >= target {
        return Err(Error::Premise("density already at λ/2 at half a cell".into()));
    }
    if stats(set, x_body, lambda, &at(hi), false).density() < target {
        return Err(Error::Premise("density below λ/2 at r = diam X".into()));
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if stats(set, x_body, lambda, &at(mid), false).density() >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-3 * g.h() {
            break;
        }
    }
    let ball = at(hi);
    let s = stats(set, x_body, lambda, &ball, true);
    let ratio = s.perimeter / (lambda.powf((d as f64 - 1.0) / d as f64) * sphere_area(d, hi));
    Ok(SurfaceBall { ball, density: s.density(), perimeter: s.perimeter, ratio })
}

/// Project `p` to the nearest point of `∂X`.
pub(crate) fn project_to_boundary(x: &Body, p: &[f64]) -> Vec<f64> {
    match x {
        Body::Ball(b) => {
            let n = distance(p, &b.center);
            if n == 0.0 {
                let mut q = b.center.clone();
                q[0] += b.radius;
                return q;
            }
            b.center.iter().zip(p).map(|(c, v)| c + (v - c) * b.radius / n).collect()
        }
        Body::Cube { center, half_side } => {
            let mut q: Vec<f64> =
                p.iter().zip(center).map(|(v, c)| v.clamp(c - half_side, c + half_side)).collect();
            let k = (0..q.len())
                .max_by(|&a, &b| (q[a] - center[a]).abs().total_cmp(&(q[b] - center[b]).abs()))
                .expect("d ≥ 1");
            q[k] = center[k] + half_side.copysign(q[k] - center[k]);
            q
        }
    }
}

/// Boundary-face midpoints of the raster of `X` paired with their
/// projections onto `∂X`.
pub(crate) fn boundary_points(x: &Body, g: &GridGeometry) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let raster = crate::geometry::rasterize_region(x, g)?;
    let faces = boundary_faces(&raster, &Domain::FreeSpace)?;
    Ok(faces
        .iter()
        .map(|f| {
            let m = f.midpoint(g)[..g.dim()].to_vec();
            let p = project_to_boundary(x, &m);
            (m, p)
        })
        .collect())
}

/// Build balls centered at the projected points `p` of `(m, p)` pairs,
/// skipping pairs whose `m` lies in the discrete closure of `E` or whose
/// `p` is already covered.
pub(crate) fn cover_points(
    x_body: &Body,
    set: &GridSet,
    lambda: f64,
    points: impl IntoIterator<Item = (Vec<f64>, Vec<f64>)>,
) -> SurfaceCover {
    let mut balls: Vec<SurfaceBall> = Vec::new();
    let mut skipped = Vec::new();
    for (m, p) in points {
        if near_set(set, &m) || balls.iter().any(|b| b.ball.contains(&p)) {
            continue;
        }
        match bisect_radius(x_body, set, lambda, &p) {
            Ok(b) => balls.push(b),
            Err(e) => skipped.push(SkipRecord { point: p, reason: e.to_string() }),
        }
    }
    let min_ratio = balls.iter().map(|b| b.ratio).reduce(f64::min);
    SurfaceCover { family: balls.iter().map(|b| b.ball.clone()).collect(), balls, skipped, min_ratio }
}

/// Cover of `∂X ∖ cl E` by balls centered on `∂X` with `diam C ≤ 2 diam X`.
///
/// Candidate centers are the boundary-face midpoints of the raster of `X`
/// projected onto `∂X`, visited in face order; a candidate is skipped when
/// its midpoint lies in the discrete closure of `E` or its projection in an
/// earlier ball.
pub fn surface_boxing_cover(x: &Body, set: &GridSet, lambda: f64) -> Result<SurfaceCover> {
    let g = set.geometry();
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    let dens = body_density(set, x);
    if dens < lambda {
        return Err(Error::Premise(format!("density {dens} of E in X is below λ = {lambda}")));
    }
    Ok(cover_points(x, set, lambda, boundary_points(x, g)?))
}
