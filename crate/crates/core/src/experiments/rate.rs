use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{level_perimeters, level_set, perimeter, variation_coarea, Domain, GridGeometry, GridSet, ScalarField};
use crate::maximal::{Operator, RadiusSchedule};
use crate::numeric::{linear_fit, quantile};

const BOOTSTRAP_RESAMPLES: usize = 100;
const BOOTSTRAP_SEED: u64 = 0x6c65_7665_6c73;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub lambda: f64,
    pub perimeter: f64,
    pub measure: f64,
    /// The level set is empty; the row is left out of the fit.
    pub empty: bool,
    /// `Per_λ · λ^{(d−1)/d} / Per(E)`.
    pub c_dy: f64,
    /// `c_dy / (1 − ln λ)`.
    pub c_un: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% residual-bootstrap interval of the slope.
    pub half_width: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub operator: String,
    pub resolution: Vec<usize>,
    pub h: f64,
    pub perimeter_e: f64,
    pub rows: Vec<RateRow>,
    /// Fit of `ln Per_λ` against `ln λ` over the small-λ half of the grid;
    /// `None` with fewer than three usable rows.
    pub fit: Option<SlopeFit>,
    pub sup_c_dy: f64,
    pub sup_c_un: f64,
    /// `var_Ω M1_E / Per(E, Ω)`, the coarea integral over attained levels.
    pub variation_ratio: f64,
}

fn validate_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty λ grid".into()));
    }
    if let Some(&bad) = lambdas.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::InvalidLevel(bad));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("λ grid must be strictly increasing".into()));
    }
    Ok(())
}

fn fit_slope(x: &[f64], y: &[f64]) -> Option<SlopeFit> {
    if x.len() < 3 {
        return None;
    }
    let (a, b) = linear_fit(x, y)?;
    let fitted: Vec<f64> = x.iter().map(|xi| a + b * xi).collect();
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let slopes: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .filter_map(|_| {
            let ys: Vec<f64> = fitted.iter().map(|f| f + resid[rng.gen_range(0..resid.len())]).collect();
            linear_fit(x, &ys).map(|(_, s)| s)
        })
        .collect();
    let half_width = 0.5 * (quantile(&slopes, 0.975) - quantile(&slopes, 0.025));
    Some(SlopeFit { slope: b, intercept: a, half_width, points: x.len() })
}

/// Level-set rate report of an already computed maximal function.
pub(crate) fn rate_from_field(
    set: &GridSet,
    domain: &Domain,
    field: &ScalarField,
    operator: &str,
    lambdas: &[f64],
) -> Result<RateReport> {
    validate_grid(lambdas)?;
    let g = set.geometry();
    let per_e = perimeter(set, domain)?;
    if per_e == 0.0 {
        return Err(Error::ZeroPerimeter);
    }
    let exponent = (g.dim() as f64 - 1.0) / g.dim() as f64;
    let table = level_perimeters(field, domain)?;
    let mut sorted: Vec<f64> = field.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows: Vec<RateRow> = lambdas
        .iter()
        .map(|&lambda| {
            // largest tabulated level ≤ λ; {f > λ} = {f > v} for it
            let k = table.partition_point(|(v, _)| *v <= lambda);
            let per = if k == 0 { 0.0 } else { table[k - 1].1 };
            let above = sorted.len() - sorted.partition_point(|v| *v <= lambda);
            let c_dy = per * lambda.powf(exponent) / per_e;
            RateRow {
                lambda,
                perimeter: per,
                measure: above as f64 * g.cell_volume(),
                empty: above == 0,
                c_dy,
                c_un: c_dy / (1.0 - lambda.ln()),
            }
        })
        .collect();
    let half = lambdas.len().div_ceil(2);
    let (x, y): (Vec<f64>, Vec<f64>) = rows[..half]
        .iter()
        .filter(|r| r.perimeter > 0.0)
        .map(|r| (r.lambda.ln(), r.perimeter.ln()))
        .unzip();
    let sup = |f: fn(&RateRow) -> f64| rows.iter().filter(|r| !r.empty).map(f).fold(0.0, f64::max);
    Ok(RateReport {
        operator: operator.to_string(),
        resolution: g.shape().to_vec(),
        h: g.h(),
        perimeter_e: per_e,
        fit: fit_slope(&x, &y),
        sup_c_dy: sup(|r| r.c_dy),
        sup_c_un: sup(|r| r.c_un),
        variation_ratio: variation_coarea(field, domain)? / per_e,
        rows,
    })
}

/// Perimeter of `{M1_E > λ}` in `Ω` over a strictly increasing λ grid in
/// `(0, 1)`, normalized constants and the fitted log-log slope.
pub fn levelset_rate(set: &GridSet, domain: &Domain, operator: &Operator, lambdas: &[f64]) -> Result<RateReport> {
    validate_grid(lambdas)?;
    let field = operator.apply(set, domain)?;
    rate_from_field(set, domain, &field, operator.name(), lambdas)
}

/// Number of lattice points `origin + (k + ½)h`, `k ∈ ℤ^d`, strictly inside `B(c, r)`.
fn lattice_count(g: &GridGeometry, c: &[f64], r: f64) -> u64 {
    fn rec(g: &GridGeometry, c: &[f64], axis: usize, r2: f64) -> u64 {
        let h = g.h();
        let o = g.origin()[axis];
        let rho = r2.max(0.0).sqrt();
        let lo = ((c[axis] - rho - o) / h - 0.5).floor() as i64;
        let hi = ((c[axis] + rho - o) / h - 0.5).ceil() as i64;
        let mut total = 0;
        for k in lo..=hi {
            let x = o + (k as f64 + 0.5) * h;
            let rest = r2 - (x - c[axis]).powi(2);
            if rest <= 0.0 {
                continue;
            }
            total += if axis == 0 { 1 } else { rec(g, c, axis - 1, rest) };
        }
        total
    }
    rec(g, c, g.dim() - 1, r * r)
}

/// Extent along `+e_1` from `center` of the superlevel set `{M1_E > λ}` of a
/// rotationally symmetric `E`, from a dense search over ball centers on the
/// symmetry axis (step `h/2`) and the given radii.
///
/// Densities are lattice counts as in the grid operator. The extent is
/// clipped to the last cell center of the box on that axis.
pub fn axial_level_radius(set: &GridSet, center: &[f64], lambda: f64, radii: &[f64]) -> Result<f64> {
    let g = set.geometry();
    let d = g.dim();
    if center.len() != d {
        return Err(Error::GeometryMismatch);
    }
    let pts: Vec<[f64; 3]> = set.cells().map(|i| g.center(i)).collect();
    let reach = pts
        .iter()
        .map(|p| (0..d).map(|k| (p[k] - center[k]).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let last = g.origin()[0] + (g.shape()[0] as f64 - 0.5) * g.h() - center[0];
    let step = 0.5 * g.h();
    let mut best = f64::NEG_INFINITY;
    for &r in radii {
        let steps = ((reach + r).min(last) / step).ceil() as usize;
        for s in 0..=steps {
            let t = s as f64 * step;
            let mut c = center.to_vec();
            c[0] += t;
            let inside = pts.iter().filter(|p| (0..d).map(|k| (p[k] - c[k]).powi(2)).sum::<f64>() < r * r).count();
            if inside == 0 {
                continue;
            }
            if inside as f64 > lambda * lattice_count(g, &c, r) as f64 {
                best = best.max(t + r);
            }
        }
    }
    Ok(best.min(last))
}

/// Extent along `+e_1` of a grid set on the cell row nearest the axis through `center`.
fn grid_extent(set: &GridSet, center: &[f64]) -> f64 {
    let g = set.geometry();
    let d = g.dim();
    let row: Vec<usize> = (1..d)
        .map(|k| (((center[k] - g.origin()[k]) / g.h()).floor().max(0.0) as usize).min(g.shape()[k] - 1))
        .collect();
    set.cells()
        .filter(|&i| {
            let c = g.coords(i);
            (1..d).all(|k| c[k] == row[k - 1])
        })
        .map(|i| g.center(i)[0] - center[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusCheck {
    pub lambda: f64,
    pub grid_radius: f64,
    pub oracle_radius: f64,
    pub cells_off: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub d: usize,
    pub resolution: usize,
    /// Side of the cubic box.
    pub width: f64,
    pub radius_e: f64,
    pub expected_slope: f64,
    pub tolerance: f64,
    pub rate: RateReport,
    pub radius_checks: Vec<RadiusCheck>,
    /// Bootstrap half-width wider than the tolerance.
    pub resolution_flagged: bool,
    pub slope_ok: bool,
    pub radii_ok: bool,
}

impl OptimalityReport {
    pub fn passes(&self) -> bool {
        self.slope_ok && self.radii_ok && !self.resolution_flagged
    }
}

/// Levels for the radius cross-check: powers of ten in the grid range, or
/// its endpoints and geometric midpoint when there are fewer than three.
fn check_levels(lambdas: &[f64]) -> Vec<f64> {
    let (lo, hi) = (lambdas[0], lambdas[lambdas.len() - 1]);
    let eps = 1e-9;
    let decades: Vec<f64> = (((lo.log10() - eps).ceil() as i32)..=((hi.log10() + eps).floor() as i32))
        .map(|k| 10f64.powi(k))
        .filter(|l| *l >= lo * (1.0 - eps) && *l <= hi * (1.0 + eps))
        .collect();
    if decades.len() >= 3 {
        decades
    } else {
        vec![lo, (lo * hi).sqrt(), hi]
    }
}

/// Level-set rate of the ball of radius 0.05 in free space under the
/// uncentered operator.
///
/// For `d ≥ 2` the box is wide enough to hold the level set at the smallest
/// λ, `2.1 · 2ρ · λ_min^{−1/d}`; for `d = 1` it is the unit box. Radii are
/// geometric from one cell to half the box (ratio 1.05, 1.1 in 3D).
pub fn optimality_experiment(d: usize, resolution: usize, lambdas: &[f64]) -> Result<OptimalityReport> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!("dimension {d} not in 1..=3")));
    }
    validate_grid(lambdas)?;
    let rho = 0.05;
    let width = if d == 1 { 1.0 } else { 2.1 * 2.0 * rho * lambdas[0].powf(-1.0 / d as f64) };
    let g = GridGeometry::cube(d, resolution, width / resolution as f64)?;
    let center = vec![0.5 * width; d];
    let e = GridSet::from_fn(&g, |p| p.iter().zip(&center).map(|(x, c)| (x - c).powi(2)).sum::<f64>() < rho * rho);
    if e.is_empty() {
        return Err(Error::InvalidArgument("resolution too coarse for the ball".into()));
    }
    let schedule = RadiusSchedule::Geometric {
        r_min: g.h(),
        r_max: 0.5 * width,
        ratio: if d == 3 { 1.1 } else { 1.05 },
    };
    let radii = schedule.validate(&g)?;
    let op = Operator::Uncentered { schedule };
    let field = op.apply(&e, &Domain::FreeSpace)?;
    let rate = rate_from_field(&e, &Domain::FreeSpace, &field, op.name(), lambdas)?;
    let expected_slope = -(d as f64 - 1.0) / d as f64;
    let tolerance = if d == 3 { 0.15 } else { 0.1 };
    let radius_checks = check_levels(lambdas)
        .into_iter()
        .map(|lambda| {
            let grid_radius = grid_extent(&level_set(&field, lambda)?, &center);
            let oracle_radius = axial_level_radius(&e, &center, lambda, &radii)?;
            Ok(RadiusCheck { lambda, grid_radius, oracle_radius, cells_off: (grid_radius - oracle_radius).abs() / g.h() })
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope_ok, resolution_flagged) = match &rate.fit {
        Some(f) => ((f.slope - expected_slope).abs() <= tolerance, f.half_width > tolerance),
        None => (false, true),
    };
    Ok(OptimalityReport {
        d,
        resolution,
        width,
        radius_e: rho,
        expected_slope,
        tolerance,
        radii_ok: radius_checks.iter().all(|c| c.cells_off <= 2.0),
        radius_checks,
        resolution_flagged,
        slope_ok,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::logspace;

    #[test]
    fn saturation_gives_flat_slope() {
        let g = GridGeometry::unit(2, 64).unwrap();
        let e = GridSet::from_fn(&g, |p| p.iter().all(|x| (0.05..0.95).contains(x)));
        let op = Operator::Uncentered { schedule: RadiusSchedule::Geometric { r_min: g.h(), r_max: 0.7, ratio: 1.1 } };
        let rep = levelset_rate(&e, &Domain::FreeSpace, &op, &logspace(1e-3, 0.3, 10)).unwrap();
        let fit = rep.fit.unwrap();
        assert!(fit.slope.abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn rows_nest_and_flag_empty() {
        let g = GridGeometry::unit(2, 32).unwrap();
        let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.04);
        let rep = levelset_rate(&e, &Domain::FreeSpace, &Operator::Dyadic, &[0.1, 0.5, 0.99]).unwrap();
        assert!(rep.rows.windows(2).all(|w| w[0].measure >= w[1].measure));
        let flat = ScalarField::constant(&g, 0.2).unwrap();
        let rep = rate_from_field(&e, &Domain::FreeSpace, &flat, "flat", &[0.1, 0.5]).unwrap();
        assert!(!rep.rows[0].empty && rep.rows[1].empty && rep.rows[1].perimeter == 0.0);
        assert!(levelset_rate(&e, &Domain::FreeSpace, &Operator::Dyadic, &[0.5, 0.1]).is_err());
        assert!(levelset_rate(&e, &Domain::FreeSpace, &Operator::Dyadic, &[0.0, 0.1]).is_err());
    }

    #[test]
    fn lattice_count_matches_enumeration() {
        let g = GridGeometry::unit(2, 16).unwrap();
        let c = [0.43, 0.61];
        let r = 0.27;
        let mut n = 0;
        for i in -20i64..40 {
            for j in -20i64..40 {
                let x = (i as f64 + 0.5) / 16.0 - c[0];
                let y = (j as f64 + 0.5) / 16.0 - c[1];
                if x * x + y * y < r * r {
                    n += 1;
                }
            }
        }
        assert_eq!(lattice_count(&g, &c, r), n);
    }

    #[test]
    fn one_dimensional_rate_is_flat() {
        let rep = optimality_experiment(1, 512, &logspace(1e-2, 0.3, 12)).unwrap();
        assert!(rep.slope_ok, "{:?}", rep.rate.fit);
        assert!(rep.radii_ok, "{:?}", rep.radius_checks);
    }

    #[test]
    fn two_dimensional_rate_small() {
        let rep = optimality_experiment(2, 128, &logspace(1e-2, 0.3, 12)).unwrap();
        assert!(rep.slope_ok, "{:?}", rep.rate.fit);
        assert!(rep.radii_ok, "{:?}", rep.radius_checks);
    }

    #[test]
    fn check_levels_use_decades() {
        assert_eq!(check_levels(&logspace(1e-3, 0.3, 25)), vec![1e-3, 1e-2, 1e-1]);
        assert_eq!(check_levels(&[0.2, 0.3]).len(), 3);
    }
}
