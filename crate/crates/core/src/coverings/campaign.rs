//! Seeded random inputs for the covering and union-perimeter lemmas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::union::{intersecting_union_perimeter_check, large_ball_boundary_ratio, LargeBallRatio, UnionPerimeterRecord};
use super::{region_stats, BallFamily};
use crate::error::{Error, Result};
use crate::geometry::{ball_intersection_volume, random_unit, Ball};
use crate::grid::{GridGeometry, GridSet};

/// Up to `count` balls of density above `λ` in `E`, centered near random
/// cells of `E` with log-uniform radii in `[2h, 1/4]` of the box side.
///
/// Rejection sampling with at most `200·count` attempts.
pub fn random_dense_family(set: &GridSet, lambda: f64, count: usize, seed: u64) -> Result<BallFamily> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    let g = set.geometry();
    let d = g.dim();
    let cells: Vec<usize> = set.cells().collect();
    let mut out = Vec::new();
    if cells.is_empty() {
        return Ok(BallFamily::new(out));
    }
    let side = g.extent()[..d].iter().cloned().fold(0.0, f64::max);
    let (lo, hi) = ((2.0 * g.h()).ln(), (0.25 * side).ln());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 * count {
        if out.len() == count {
            break;
        }
        let c = g.center(cells[rng.gen_range(0..cells.len())]);
        let r = rng.gen_range(lo..hi).exp();
        let center: Vec<f64> = (0..d).map(|k| c[k] + rng.gen_range(-0.5..0.5) * r).collect();
        let ball = Ball::new(center, r);
        if region_stats(set, &ball, |_| true, false).density() > lambda {
            out.push(ball);
        }
    }
    Ok(BallFamily::new(out))
}

/// Ball of radius `r` in direction `dir` from the center of `f`, placed at a
/// uniformly random distance up to the farthest one with `|B∩F| ≥ λ|B|`.
fn admissible_ball(rng: &mut ChaCha8Rng, f: &Ball, lambda: f64, r: f64) -> Result<Ball> {
    let d = f.dim();
    let dir = random_unit(rng, d);
    let place = |t: f64| Ball::new(f.center.iter().zip(&dir).map(|(c, u)| c + u * t).collect(), r);
    let target = lambda * Ball::new(vec![0.0; d], r).volume();
    let (mut lo, mut hi) = (0.0, f.radius + r);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ball_intersection_volume(&place(mid), f)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(place(rng.gen_range(0.0..=lo)))
}

/// Random admissible families around `F = B(½, 0.05)` on the unit `n^d`
/// grid: 1 to 8 balls with `|B∩F| ≥ λ|B|` and radii up to `0.95·λ^{−1/d}·r_F`.
pub fn union_perimeter_campaign(
    d: usize,
    n: usize,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<UnionPerimeterRecord>> {
    let g = GridGeometry::unit(d, n)?;
    let f = Ball::new(vec![0.5; d], 0.05);
    let r_max = 0.95 * f.radius * lambda.powf(-1.0 / d as f64);
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let k = rng.gen_range(1..=8);
            let balls = (0..k)
                .map(|_| {
                    let r = rng.gen_range(0.1 * f.radius..r_max);
                    admissible_ball(&mut rng, &f, lambda, r)
                })
                .collect::<Result<Vec<_>>>()?;
            intersecting_union_perimeter_check(&g, &f, &BallFamily::new(balls), lambda)
        })
        .collect()
}

/// Families of 1 to 4 balls with diameters in `[K, 3K]·diam C` whose
/// spheres cross `C = B(½, 0.02)` on the unit `n^d` grid.
pub fn large_ball_campaign(d: usize, n: usize, k: f64, trials: usize, seed: u64) -> Result<Vec<LargeBallRatio>> {
    let g = GridGeometry::unit(d, n)?;
    let c = Ball::new(vec![0.5; d], 0.02);
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let m = rng.gen_range(1..=4);
            let balls: Vec<Ball> = (0..m)
                .map(|_| {
                    let r = k * c.radius * rng.gen_range(1.0..3.0);
                    let dir = random_unit(&mut rng, d);
                    let t = r + rng.gen_range(-1.0..1.0) * c.radius;
                    Ball::new(c.center.iter().zip(&dir).map(|(x, u)| x + u * t).collect(), r)
                })
                .collect();
            large_ball_boundary_ratio(&g, &c, &BallFamily::new(balls), k)
        })
        .collect()
}
