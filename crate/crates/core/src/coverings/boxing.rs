use serde::{Deserialize, Serialize};

use super::{region_stats, BallFamily};
use crate::error::{Error, Result};
use crate::geometry::{distance, Ball};
use crate::grid::GridSet;

/// A ball of discrete density close to 1/2 produced by [`boxing_ball`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxingBall {
    pub ball: Ball,
    pub density: f64,
    /// `5h / diam F`.
    pub tolerance: f64,
    /// Path parameter of the returned ball.
    pub t: f64,
}

impl BoxingBall {
    pub fn within_tolerance(&self) -> bool {
        (self.density - 0.5).abs() <= self.tolerance
    }
}

fn density(set: &GridSet, ball: &Ball) -> f64 {
    region_stats(set, ball, |_| true, false).density()
}

/// Find a ball `F` with `x ∈ F ⊆ B1` and density close to 1/2 along the
/// path from a one-cell ball at `x` to `B1`.
///
/// `x` must be the center of an `E`-cell inside `B1`, and the density of
/// `E` in `B1` must be at most 1/2. Densities count lattice points, so
/// points beyond the box count as outside `E`.
pub fn boxing_ball(set: &GridSet, b1: &Ball, x: &[f64]) -> Result<BoxingBall> {
    let g = set.geometry();
    b1.validate()?;
    if b1.dim() != g.dim() || x.len() != g.dim() {
        return Err(Error::GeometryMismatch);
    }
    let d1 = density(set, b1);
    if d1 > 0.5 {
        return Err(Error::Premise(format!("density {d1} of E in B1 exceeds 1/2")));
    }
    let tol = |b: &Ball| 5.0 * g.h() / b.diameter();
    if d1 == 0.5 {
        return Ok(BoxingBall { ball: b1.clone(), density: d1, tolerance: tol(b1), t: 1.0 });
    }
    let room = b1.radius - distance(x, &b1.center);
    let cell = {
        let c = g.to_cell_units(x);
        let in_box = (0..g.dim()).all(|k| c[k] >= 0.0 && c[k] < g.shape()[k] as f64);
        in_box.then(|| {
            let mut k = [0usize; 3];
            for a in 0..g.dim() {
                k[a] = c[a].floor() as usize;
            }
            g.index(k)
        })
    };
    let on_center = cell.is_some_and(|i| {
        let c = g.center(i);
        distance(&c[..g.dim()], x) < 1e-9 * g.h()
    });
    if room <= 0.0 || !on_center || !cell.is_some_and(|i| set.contains(i)) {
        return Err(Error::NoStartingBall);
    }
    // a ball of radius ≤ h around a lattice point holds only that point
    let b0 = Ball::new(x.to_vec(), room.min(g.h()) * 0.5);
    let at = |t: f64| {
        let c = b0.center.iter().zip(&b1.center).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        Ball::new(c, (1.0 - t) * b0.radius + t * b1.radius)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut dlo, mut dhi) = (1.0, d1);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let dm = density(set, &at(mid));
        if dm >= 0.5 {
            lo = mid;
            dlo = dm;
        } else {
            hi = mid;
            dhi = dm;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let (t, dens) = if (dlo - 0.5).abs() <= (dhi - 0.5).abs() { (lo, dlo) } else { (hi, dhi) };
    let ball = at(t);
    Ok(BoxingBall { tolerance: tol(&ball), ball, density: dens, t })
}

/// Output of [`boxing_cover`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxingCover {
    pub family: BallFamily,
    pub details: Vec<BoxingBall>,
    /// Index into the input family of the ball containing each output ball.
    pub parent: Vec<usize>,
    /// Input balls that contain no `E`-cell and hence no output ball.
    pub empty_parents: Vec<usize>,
    /// `E`-cells of the input union not covered by the output.
    pub residual: usize,
    pub residual_fraction: f64,
}

/// Half-density balls covering the `E`-cells of `∪𝔅`.
///
/// For each input ball, `E`-cells inside it (in index order) that no
/// earlier output ball contains get a ball from [`boxing_ball`].
pub fn boxing_cover(set: &GridSet, family: &BallFamily) -> Result<BoxingCover> {
    let g = set.geometry();
    let d = g.dim();
    let mut out: Vec<BoxingBall> = Vec::new();
    let mut parent = Vec::new();
    let mut empty_parents = Vec::new();
    let mut covered = GridSet::empty(g);
    let mut targets = GridSet::empty(g);
    for (bi, b) in family.iter().enumerate() {
        let mut cells = Vec::new();
        super::for_each_lattice_point(g, &b.center, b.radius, |idx, _| {
            if let Some(i) = idx.filter(|&i| set.contains(i)) {
                cells.push(i);
            }
        });
        cells.sort_unstable();
        if cells.is_empty() {
            empty_parents.push(bi);
            continue;
        }
        for i in cells {
            targets.insert(i);
            if covered.contains(i) {
                continue;
            }
            let c = g.center(i);
            let f = boxing_ball(set, b, &c[..d])?;
            super::for_each_lattice_point(g, &f.ball.center, f.ball.radius, |idx, _| {
                if let Some(j) = idx {
                    covered.insert(j);
                }
            });
            out.push(f);
            parent.push(bi);
        }
    }
    let residual = targets.difference(&covered)?.count();
    let e = set.count().max(1);
    Ok(BoxingCover {
        family: out.iter().map(|f| f.ball.clone()).collect(),
        details: out,
        parent,
        empty_parents,
        residual,
        residual_fraction: residual as f64 / e as f64,
    })
}
