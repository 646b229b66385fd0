use serde::{Deserialize, Serialize};

use crate::coverings::near_set;
use crate::error::{Error, Result};
use crate::geometry::{rasterize_region, Body};
use crate::grid::{boundary_faces, classify_cells, level_set, perimeter, variation_coarea, Domain, GridSet};
use crate::maximal::{superlevel_family, Operator};

/// `var_Ω M1_E / Per(E, Ω)`.
///
/// A constant maximal function over a set without perimeter in `Ω` gives 0.
pub fn variation_ratio(set: &GridSet, domain: &Domain, operator: &Operator) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("E is empty".into()));
    }
    let field = operator.apply(set, domain)?;
    let var = variation_coarea(&field, domain)?;
    let per = perimeter(set, domain)?;
    match (var > 0.0, per > 0.0) {
        (_, true) => Ok(var / per),
        (false, false) => Ok(0.0),
        (true, false) => Err(Error::ZeroPerimeter),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleRegionEstimate {
    pub density: f64,
    /// Area of `∂Q` away from the discrete closure of `E`.
    pub exposed_boundary: f64,
    /// Perimeter of `E` inside `Q`.
    pub inner_perimeter: f64,
    /// `exposed_boundary / (λ^{−(d−1)/d} · inner_perimeter)`.
    pub ratio: f64,
}

/// Single cube (or ball) estimate `|∂Q ∖ cl E| ≲ λ^{−(d−1)/d} Per(E, Q)`.
///
/// `∂Q` is the free-space boundary of the raster of `Q`; a face is exposed
/// when its midpoint has no `E`-cell center within max-norm distance `h`.
/// The density of `E` in the raster must match `λ` to within half the
/// boundary-face count of `Q` over its cell count.
pub fn single_cube_estimate(set: &GridSet, region: &Body, lambda: f64) -> Result<SingleRegionEstimate> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    let g = set.geometry();
    let d = g.dim();
    let q = rasterize_region(region, g)?;
    let faces = boundary_faces(&q, &Domain::FreeSpace)?;
    let density = set.intersection(&q)?.count() as f64 / q.count() as f64;
    let tol = 0.5 * faces.len() as f64 / q.count() as f64;
    if (density - lambda).abs() > tol {
        return Err(Error::Premise(format!("density {density} differs from λ = {lambda} by more than {tol}")));
    }
    let exposed = faces.iter().filter(|f| !near_set(set, &f.midpoint(g)[..d])).count() as f64 * g.face_area();
    let inner = perimeter(set, &Domain::Within(q))?;
    let scale = lambda.powf(-(d as f64 - 1.0) / d as f64);
    let ratio = match (exposed > 0.0, inner > 0.0) {
        (false, _) => 0.0,
        (true, true) => exposed / (scale * inner),
        (true, false) => return Err(Error::ZeroPerimeter),
    };
    Ok(SingleRegionEstimate { density, exposed_boundary: exposed, inner_perimeter: inner, ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LscRow {
    pub fraction: f64,
    pub members: usize,
    pub measure: f64,
    pub perimeter: f64,
    /// `|A_k Δ {M1_E > λ}|` relative to the level-set measure.
    pub relative_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LscReport {
    pub lambda: f64,
    pub family_len: usize,
    pub level_measure: f64,
    pub level_perimeter: f64,
    pub rows: Vec<LscRow>,
    pub measure_monotone: bool,
    /// The last prefix reproduces the level set.
    pub final_equal: bool,
    /// Rows within 5% relative difference of the level set.
    pub tail_min_perimeter: f64,
    /// `2h · Per(level set)`.
    pub tolerance: f64,
    pub inequality_holds: bool,
}

const TAIL_DIFFERENCE: f64 = 0.05;

/// Approximation of `{M1_E > λ}` by `A_k = ∪𝔅_k ∪ int E` over growing
/// prefixes of the superlevel family, with the lower-semicontinuity bound
/// `Per({M1_E > λ}) ≤ min_tail Per(A_k) + 2h·Per({M1_E > λ})`.
///
/// `steps` are strictly increasing prefix fractions in `(0, 1]`.
pub fn lower_semicontinuity_check(
    set: &GridSet,
    domain: &Domain,
    operator: &Operator,
    lambda: f64,
    steps: &[f64],
) -> Result<LscReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    if steps.is_empty() || steps.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) || steps.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidArgument("steps must increase within (0, 1]".into()));
    }
    let g = set.geometry();
    let field = operator.apply(set, domain)?;
    let level = level_set(&field, lambda)?;
    let level_perimeter = perimeter(&level, domain)?;
    let family = superlevel_family(set, domain, lambda, operator)?;
    let interior = classify_cells(set, domain)?.interior();
    let rows = steps
        .iter()
        .map(|&fraction| {
            let members = (fraction * family.len() as f64).ceil() as usize;
            let a = family.prefix_union(g, members).union(&interior)?;
            let diff = a.difference(&level)?.count() + level.difference(&a)?.count();
            Ok(LscRow {
                fraction,
                members,
                measure: a.measure(),
                perimeter: perimeter(&a, domain)?,
                relative_difference: diff as f64 / level.count().max(1) as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last = rows.last().expect("nonempty steps");
    let tail_min_perimeter = rows
        .iter()
        .filter(|r| r.relative_difference <= TAIL_DIFFERENCE)
        .map(|r| r.perimeter)
        .fold(f64::INFINITY, f64::min);
    let tolerance = 2.0 * g.h() * level_perimeter;
    Ok(LscReport {
        lambda,
        family_len: family.len(),
        level_measure: level.measure(),
        level_perimeter,
        measure_monotone: rows.windows(2).all(|w| w[0].measure <= w[1].measure),
        final_equal: last.fraction == 1.0 && last.relative_difference == 0.0,
        inequality_holds: tail_min_perimeter.is_infinite() || level_perimeter <= tail_min_perimeter + tolerance,
        tail_min_perimeter,
        tolerance,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;
    use crate::grid::GridGeometry;
    use crate::maximal::{DyadicCube, RadiusSchedule};

    #[test]
    fn dyadic_cube_in_itself_has_zero_ratio() {
        let g = GridGeometry::unit(2, 32).unwrap();
        let q = DyadicCube { level: 3, index: [1, 2, 0] };
        let mut e = GridSet::empty(&g);
        q.cells(&g).into_iter().for_each(|i| e.insert(i));
        let r = variation_ratio(&e, &Domain::Within(e.clone()), &Operator::Dyadic).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn disk_ratio_refines() {
        let mut out = Vec::new();
        for n in [128, 256] {
            let g = GridGeometry::unit(2, n).unwrap();
            let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.04);
            out.push(variation_ratio(&e, &Domain::FreeSpace, &Operator::uncentered_default(&g)).unwrap());
        }
        assert!(out[0].is_finite() && (out[0] / out[1] - 1.0).abs() < 0.2, "{out:?}");
    }

    #[test]
    fn cube_containing_set_exposes_nothing() {
        let g = GridGeometry::unit(2, 64).unwrap();
        let e = GridSet::full(&g);
        let q = Body::Cube { center: vec![0.5, 0.5], half_side: 0.25 };
        let est = single_cube_estimate(&e, &q, 1.0).unwrap();
        assert_eq!(est.exposed_boundary, 0.0);
        assert_eq!(est.ratio, 0.0);
    }

    #[test]
    fn slab_closed_form() {
        // Q = [0.25, 0.75)², E = bottom λ-slab: exposed ≈ (3 − 2λ)s, inner = s
        let g = GridGeometry::unit(2, 256).unwrap();
        let s = 0.5;
        for lambda in [0.25, 0.5] {
            let top = 0.25 + lambda * s;
            let e = GridSet::from_fn(&g, |p| p[1] < top);
            let q = Body::Cube { center: vec![0.5, 0.5], half_side: 0.25 };
            let est = single_cube_estimate(&e, &q, lambda).unwrap();
            let closed = (3.0 - 2.0 * lambda) * s * lambda.sqrt() / s;
            assert!((est.inner_perimeter - s).abs() < 1e-9);
            assert!((est.ratio / closed - 1.0).abs() < 0.03, "{est:?} vs {closed}");
        }
        let e = GridSet::from_fn(&g, |p| p[1] < 0.3);
        let q = Body::Ball(Ball::new(vec![0.5, 0.5], 0.25));
        assert!(matches!(single_cube_estimate(&e, &q, 0.5), Err(Error::Premise(_))));
    }

    #[test]
    fn lsc_disk() {
        let g = GridGeometry::unit(2, 64).unwrap();
        let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.03);
        let op = Operator::Uncentered { schedule: RadiusSchedule::Geometric { r_min: g.h(), r_max: 0.5, ratio: 1.1 } };
        let rep = lower_semicontinuity_check(&e, &Domain::FreeSpace, &op, 0.3, &[0.01, 0.1, 1.0]).unwrap();
        assert!(rep.measure_monotone && rep.final_equal && rep.inequality_holds, "{rep:?}");
        assert_eq!(rep.rows[2].perimeter, rep.level_perimeter);
    }
}
