use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{CoverBallRecord, CoverReport, ScaleRecord, Violation};
use super::surface::{cover_points, project_to_boundary};
use super::{near_set, region_stats, scale_of, sphere_area, vitali_indices, BallFamily};
use crate::edt::squared_distance_to_complement;
use crate::error::{Error, Result};
use crate::geometry::{distance, Ball, Body};
use crate::grid::{boundary_faces, Domain, GridSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleCover {
    /// `𝒞_n` by scale.
    pub scales: BTreeMap<i32, BallFamily>,
    pub report: CoverReport,
}

struct Candidate {
    ball: Ball,
    parent: usize,
}

/// Per-scale covers `𝒞_n` of `∂(∪𝔅) ∖ cl E` with the four properties of the
/// multi-scale cover lemma checked on the grid.
///
/// Boundary points are the midpoints of boundary faces of the raster `U`
/// of `∪𝔅` away from the discrete closure of `E`. Each point is projected
/// onto the sphere of every ball it borders and covered with
/// surface-boxing balls of that ball; buckets are Vitali-thinned and
/// balls whose 5-expansion misses every boundary point are dropped.
///
/// Property 4 uses the discrete distance to `U^∁` (cell centers, EDT) and
/// the threshold `λ d^{1−d/2} 2^{n−3}`.
pub fn multiscale_covers(set: &GridSet, family: &BallFamily, lambda: f64) -> Result<MultiscaleCover> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    let g = set.geometry();
    let d = g.dim();
    let h = g.h();
    for b in family.iter() {
        b.validate()?;
        if b.dim() != d {
            return Err(Error::GeometryMismatch);
        }
    }
    let low: Vec<usize> = family
        .iter()
        .enumerate()
        .filter(|(_, b)| region_stats(set, b, |_| true, false).density() <= lambda)
        .map(|(i, _)| i)
        .collect();
    if !low.is_empty() {
        return Err(Error::Premise(format!("balls {low:?} have density ≤ λ")));
    }

    let union = family.rasterize(g);
    let faces = boundary_faces(&union, &Domain::FreeSpace)?;
    // (midpoint, cell of the face inside U)
    let targets: Vec<(Vec<f64>, usize)> = faces
        .iter()
        .filter_map(|f| {
            let m = f.midpoint(g)[..d].to_vec();
            if near_set(set, &m) {
                return None;
            }
            let inside = if union.contains(f.cell) { f.cell } else { f.neighbor(g)? };
            Some((m, inside))
        })
        .collect();

    let band = h * (d as f64).sqrt();
    let per_ball: Vec<(Vec<Candidate>, usize)> = family
        .balls
        .par_iter()
        .enumerate()
        .map(|(bi, b)| {
            let points: Vec<(Vec<f64>, Vec<f64>)> = targets
                .iter()
                .filter(|(m, inside)| {
                    let c = g.center(*inside);
                    b.contains(&c[..d]) && (distance(m, &b.center) - b.radius).abs() <= band
                })
                .map(|(m, _)| (m.clone(), project_to_boundary(&Body::Ball(b.clone()), m)))
                .collect();
            let cover = cover_points(&Body::Ball(b.clone()), set, lambda, points);
            let skipped = cover.skipped.len();
            let cands = cover.family.balls.into_iter().map(|ball| Candidate { ball, parent: bi }).collect();
            (cands, skipped)
        })
        .collect();
    let skipped_points = per_ball.iter().map(|p| p.1).sum();
    let candidates: Vec<Candidate> = per_ball.into_iter().flat_map(|p| p.0).collect();

    // bucket, thin, prune
    let mut by_scale: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        by_scale.entry(scale_of(c.ball.diameter())).or_default().push(i);
    }
    let touches = |b: &Ball| targets.iter().any(|(m, _)| distance(m, &b.center) < 5.0 * b.radius);
    let mut chosen: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (&n, idx) in &by_scale {
        let balls: Vec<Ball> = idx.iter().map(|&i| candidates[i].ball.clone()).collect();
        let kept: Vec<usize> = vitali_indices(&balls)
            .into_iter()
            .map(|k| idx[k])
            .filter(|&i| touches(&candidates[i].ball))
            .collect();
        if !kept.is_empty() {
            chosen.insert(n, kept);
        }
    }

    // property 4 inputs
    let sq = squared_distance_to_complement(&union);
    let depth_at = |p: &[f64]| -> f64 {
        let c = g.to_cell_units(p);
        if (0..d).any(|k| c[k] < 0.0 || c[k] >= g.shape()[k] as f64) {
            return 0.0;
        }
        let mut k = [0usize; 3];
        for a in 0..d {
            k[a] = c[a].floor() as usize;
        }
        sq[g.index(k)].sqrt() * h
    };
    let exponent = (d as f64 - 1.0) / d as f64;
    let df = d as f64;

    let mut violations = Vec::new();
    let mut records = Vec::new();
    let mut scale_rows: BTreeMap<i32, ScaleRecord> = BTreeMap::new();
    for (&n, idx) in &chosen {
        let balls: Vec<&Ball> = idx.iter().map(|&i| &candidates[i].ball).collect();
        let disjoint = (0..balls.len()).all(|i| (i + 1..balls.len()).all(|j| !balls[i].intersects(balls[j])));
        let thr = lambda * df.powf(1.0 - df / 2.0) * 2f64.powi(n - 3);
        let mut proximity_violations = 0;
        let mut c4_min: Option<f64> = None;
        for &i in idx {
            let c = &candidates[i];
            let near = targets
                .iter()
                .map(|(m, _)| distance(m, &c.ball.center) - c.ball.radius)
                .fold(f64::INFINITY, f64::min);
            if near > 2.0 * c.ball.diameter() {
                proximity_violations += 1;
                violations.push(Violation { property: 3, scale: n, point: c.ball.center.clone(), ball: Some(i) });
            }
            let s = region_stats(set, &c.ball, |p| depth_at(p) >= thr, true);
            let c4 = s.perimeter / (lambda.powf(exponent) * sphere_area(d, c.ball.radius));
            c4_min = Some(c4_min.map_or(c4, |v: f64| v.min(c4)));
            records.push(CoverBallRecord {
                scale: n,
                center: c.ball.center.clone(),
                radius: c.ball.radius,
                parent: c.parent,
                c4,
            });
        }
        scale_rows.insert(
            n,
            ScaleRecord {
                n,
                balls: idx.len(),
                disjoint,
                coverage_checked: 0,
                coverage_violations: 0,
                proximity_violations,
                c4_min,
            },
        );
    }

    // property 2: 5𝒞_{≤n} covers ∂U ∩ ∂U_{n−1} ∖ cl E
    for (&m1, members) in &family.buckets() {
        let n = m1 + 1;
        let sub: Vec<Ball> = members.iter().map(|&i| family.balls[i].clone()).collect();
        let sub_union = super::rasterize_balls(&sub, g);
        let covers: Vec<&Ball> =
            chosen.range(..=n).flat_map(|(_, idx)| idx.iter().map(|&i| &candidates[i].ball)).collect();
        let row = scale_rows.entry(n).or_insert(ScaleRecord {
            n,
            balls: 0,
            disjoint: true,
            coverage_checked: 0,
            coverage_violations: 0,
            proximity_violations: 0,
            c4_min: None,
        });
        for (m, inside) in &targets {
            if !sub_union.contains(*inside) {
                continue;
            }
            row.coverage_checked += 1;
            if !covers.iter().any(|c| distance(m, &c.center) < 5.0 * c.radius) {
                row.coverage_violations += 1;
                violations.push(Violation { property: 2, scale: n, point: m.clone(), ball: None });
            }
        }
    }

    let cands = &candidates;
    let all: Vec<(i32, &Ball)> =
        chosen.iter().flat_map(|(&n, idx)| idx.iter().map(move |&i| (n, &cands[i].ball))).collect();
    let mut cross_scale_overlaps = 0;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if all[i].0 != all[j].0 && all[i].1.intersects(all[j].1) {
                cross_scale_overlaps += 1;
            }
        }
    }

    let scales = chosen
        .iter()
        .map(|(&n, idx)| (n, idx.iter().map(|&i| candidates[i].ball.clone()).collect()))
        .collect();
    let report = CoverReport {
        seed: None,
        resolution: g.shape().to_vec(),
        h,
        schedule: None,
        lambda,
        scales: scale_rows.into_values().collect(),
        balls: records,
        violations,
        cross_scale_overlaps,
        skipped_points,
    };
    Ok(MultiscaleCover { scales, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;

    #[test]
    fn one_ball() {
        let g = GridGeometry::unit(2, 128).unwrap();
        let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.15f64.powi(2));
        let fam = BallFamily::new(vec![Ball::new(vec![0.55, 0.5], 0.2)]);
        let cover = multiscale_covers(&e, &fam, 0.3).unwrap();
        assert!(cover.report.passes(), "{:#?}", cover.report.violations);
        assert!(!cover.scales.is_empty());
    }

    #[test]
    fn two_scales() {
        let g = GridGeometry::unit(2, 256).unwrap();
        let big = Ball::new(vec![0.4, 0.5], 0.25);
        let small = Ball::new(vec![0.66, 0.5], 0.04);
        let e = GridSet::from_fn(&g, |p| {
            (p[0] - 0.4).powi(2) + (p[1] - 0.5).powi(2) < 0.2f64.powi(2)
                || (p[0] - 0.68).powi(2) + (p[1] - 0.5).powi(2) < 0.03f64.powi(2)
        });
        let fam = BallFamily::new(vec![big, small]);
        assert_eq!(fam.buckets().len(), 2);
        let cover = multiscale_covers(&e, &fam, 0.3).unwrap();
        assert!(cover.report.passes(), "{:#?}", cover.report);
        assert!(cover.report.scales.iter().filter(|s| s.coverage_checked > 0).count() >= 2);
    }

    #[test]
    fn rejects_sparse_ball() {
        let g = GridGeometry::unit(2, 64).unwrap();
        let fam = BallFamily::new(vec![Ball::new(vec![0.5, 0.5], 0.2)]);
        assert!(matches!(multiscale_covers(&GridSet::empty(&g), &fam, 0.3), Err(Error::Premise(_))));
    }
}
