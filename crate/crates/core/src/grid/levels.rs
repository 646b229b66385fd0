//! Superlevel sets and the coarea route to the variation of a field.

use super::faces::visit_faces;
use super::{Domain, GridSet, ScalarField};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// The strict superlevel set `{f > λ}` for `λ ∈ [0, 1)`.
pub fn level_set(field: &ScalarField, lambda: f64) -> Result<GridSet> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidLevel(lambda));
    }
    let mask = field.values().iter().map(|&v| v > lambda).collect();
    GridSet::from_mask(field.geometry(), mask)
}

/// All distinct cell values, strictly increasing.
pub fn attained_levels(field: &ScalarField) -> Vec<f64> {
    let mut v = field.values().to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Levels `v_0 = 0 < v_1 < … < v_m` (attained values plus zero) paired with
/// the perimeter of `{f > v_i}` in `Ω`.
///
/// A face with values `a < b` lies on the boundary of `{f > v}` exactly for
/// `a ≤ v < b`, so every face is entered once into a difference array over
/// level indices.
pub fn level_perimeters(field: &ScalarField, domain: &Domain) -> Result<Vec<(f64, f64)>> {
    domain.check_geometry(field.geometry())?;
    let mut levels = attained_levels(field);
    if levels.first().is_none_or(|&v| v > 0.0) {
        levels.insert(0, 0.0);
    }
    let index = |v: f64| levels.binary_search_by(|x| x.total_cmp(&v)).expect("attained level");
    let values = field.values();
    let mut diff = vec![0i64; levels.len() + 1];
    visit_faces(field.geometry(), domain, |_, a, b| {
        let fa = values[a];
        let fb = b.map_or(0.0, |b| values[b]);
        if fa != fb {
            let (lo, hi) = if fa < fb { (fa, fb) } else { (fb, fa) };
            diff[index(lo)] += 1;
            diff[index(hi)] -= 1;
        }
    });
    let area = field.geometry().face_area();
    let mut running = 0i64;
    Ok(levels
        .iter()
        .zip(&diff)
        .map(|(&v, &dc)| {
            running += dc;
            (v, running as f64 * area)
        })
        .collect())
}

/// Variation of `f` in `Ω` by the coarea formula over attained levels:
/// `Σ_i Per({f > v_i}, Ω) (v_{i+1} − v_i)`.
pub fn variation_coarea(field: &ScalarField, domain: &Domain) -> Result<f64> {
    let per = level_perimeters(field, domain)?;
    let terms: Vec<f64> = per.windows(2).map(|w| w[0].1 * (w[1].0 - w[0].0)).collect();
    Ok(pairwise_sum(&terms))
}
