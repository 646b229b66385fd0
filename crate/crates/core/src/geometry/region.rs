use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{distance, random_unit, Ball};
use crate::error::{Error, Result};
use crate::grid::{perimeter, Domain, GridGeometry, GridSet};

/// A bounded region with an exact membership test.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, p: &[f64]) -> bool;
    /// Axis-aligned bounding box `(lo, hi)`.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>);
}

/// Open ball or open axis-aligned cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Ball(Ball),
    Cube { center: Vec<f64>, half_side: f64 },
}

impl Body {
    pub fn diameter(&self) -> f64 {
        match self {
            Body::Ball(b) => b.diameter(),
            Body::Cube { center, half_side } => 2.0 * half_side * (center.len() as f64).sqrt(),
        }
    }

    /// Signed distance to the complement: positive inside, negative outside
    /// (for the cube the outside value is only a lower bound in magnitude).
    pub fn depth(&self, p: &[f64]) -> f64 {
        match self {
            Body::Ball(b) => b.radius - distance(&b.center, p),
            Body::Cube { center, half_side } => center
                .iter()
                .zip(p)
                .map(|(c, x)| half_side - (x - c).abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn scale(&self) -> f64 {
        match self {
            Body::Ball(b) => b.radius,
            Body::Cube { half_side, .. } => *half_side,
        }
    }

    fn center(&self) -> &[f64] {
        match self {
            Body::Ball(b) => &b.center,
            Body::Cube { center, .. } => center,
        }
    }
}

impl Region for Body {
    fn dim(&self) -> usize {
        self.center().len()
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.depth(p) > 0.0
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let s = self.scale();
        (self.center().iter().map(|c| c - s).collect(), self.center().iter().map(|c| c + s).collect())
    }
}

impl Region for Ball {
    fn dim(&self) -> usize {
        Ball::dim(self)
    }

    fn contains(&self, p: &[f64]) -> bool {
        Ball::contains(self, p)
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        Body::Ball(self.clone()).bounds()
    }
}

/// `A = X ∩ C ∩ {y : dist(y, X^∁) > L·diam C}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensRegion {
    pub x: Body,
    pub c: Ball,
    pub l: f64,
}

impl LensRegion {
    /// Checks `L ∈ (0, 1/4]`, `C` centered on `∂X` and `diam C ≤ 2·diam X`.
    pub fn new(x: Body, c: Ball, l: f64) -> Result<Self> {
        c.validate()?;
        if x.dim() != c.dim() {
            return Err(Error::InvalidGeometry("X and C differ in dimension".into()));
        }
        if !(l > 0.0 && l <= 0.25) {
            return Err(Error::InvalidArgument(format!("L must lie in (0, 1/4], got {l}")));
        }
        if x.depth(&c.center).abs() > 1e-9 * x.scale() {
            return Err(Error::InvalidGeometry("C is not centered on the boundary of X".into()));
        }
        if c.diameter() > 2.0 * x.diameter() * (1.0 + 1e-12) {
            return Err(Error::InvalidGeometry("diam C exceeds 2·diam X".into()));
        }
        Ok(Self { x, c, l })
    }
}

impl Region for LensRegion {
    fn dim(&self) -> usize {
        self.c.dim()
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.c.contains(p) && self.x.depth(p) > self.l * self.c.diameter()
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let (a0, a1) = self.x.bounds();
        let (b0, b1) = Region::bounds(&self.c);
        (
            a0.iter().zip(&b0).map(|(a, b)| a.max(*b)).collect(),
            a1.iter().zip(&b1).map(|(a, b)| a.min(*b)).collect(),
        )
    }
}

/// Cells whose centers lie in the region.
pub fn rasterize_region(region: &dyn Region, geometry: &GridGeometry) -> Result<GridSet> {
    if region.dim() != geometry.dim() {
        return Err(Error::GeometryMismatch);
    }
    Ok(GridSet::from_fn(geometry, |p| region.contains(p)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricSample {
    pub measure_a: f64,
    pub measure_inside: f64,
    pub measure_outside: f64,
    pub perimeter: f64,
    /// `min{|E∩A|, |A∖E|}^{d−1} / Per(E, A)^d`; infinite for a violation.
    pub ratio: f64,
    /// Both parts have positive measure but `∂E ∩ A` is empty.
    pub violation: bool,
}

/// Relative isoperimetric ratio of `E` inside the rasterized region.
pub fn isoperimetric_ratio(region: &dyn Region, set: &GridSet) -> Result<IsoperimetricSample> {
    let g = set.geometry();
    let a = rasterize_region(region, g)?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("region contains no cell".into()));
    }
    let inside = set.intersection(&a)?.measure();
    let outside = a.measure() - inside;
    let per = perimeter(set, &Domain::Within(a.clone()))?;
    let small = inside.min(outside);
    let d = g.dim() as i32;
    let (ratio, violation) = match (small > 0.0, per > 0.0) {
        (false, _) => (0.0, false),
        (true, true) => (small.powi(d - 1) / per.powi(d), false),
        (true, false) => (f64::INFINITY, true),
    };
    Ok(IsoperimetricSample {
        measure_a: a.measure(),
        measure_inside: inside,
        measure_outside: outside,
        perimeter: per,
        ratio,
        violation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReachOutcome {
    PremiseNotMet { covered_fraction: f64 },
    Witness { index: usize, covered_fraction: f64 },
    Violation { covered_fraction: f64 },
}

/// If `∪F` covers at least `λ|B|` (cell counts), find `F ∈ 𝔉` meeting `(1−λ/d)B`.
pub fn reach_inside_check(
    geometry: &GridGeometry,
    b: &Ball,
    family: &[Ball],
    lambda: f64,
) -> Result<ReachOutcome> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    b.validate()?;
    for f in family {
        f.validate()?;
    }
    let ball_cells = rasterize_region(b, geometry)?;
    if ball_cells.is_empty() {
        return Err(Error::InvalidArgument("ball contains no cell".into()));
    }
    let covered = ball_cells
        .cells()
        .filter(|&i| {
            let c = geometry.center(i);
            family.iter().any(|f| f.contains(&c[..geometry.dim()]))
        })
        .count();
    let covered_fraction = covered as f64 / ball_cells.count() as f64;
    if covered_fraction < lambda {
        return Ok(ReachOutcome::PremiseNotMet { covered_fraction });
    }
    let inner = b.scaled(1.0 - lambda / geometry.dim() as f64);
    Ok(match family.iter().position(|f| f.intersects(&inner)) {
        Some(index) => ReachOutcome::Witness { index, covered_fraction },
        None => ReachOutcome::Violation { covered_fraction },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachCampaign {
    pub d: usize,
    pub trials: usize,
    pub premise_met: usize,
    pub witnesses: usize,
    pub violations: usize,
}

/// Randomized [`reach_inside_check`] campaign on a `n^d` unit grid with
/// `B = B(½, 0.4)`.
///
/// Half of the trials use families kept outside `(1−λ/d)B`, the only
/// configurations that could produce a violation.
pub fn reach_campaign(d: usize, n: usize, trials: usize, seed: u64) -> Result<ReachCampaign> {
    let g = GridGeometry::unit(d, n)?;
    let b = Ball::new(vec![0.5; d], 0.4);
    let outcomes: Vec<Result<ReachOutcome>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let lambda = rng.gen_range(0.05..=1.0);
            let inner = b.radius * (1.0 - lambda / d as f64);
            let outside = rng.gen_bool(0.5);
            let k = rng.gen_range(1..=6);
            let family: Vec<Ball> = (0..k)
                .map(|_| {
                    let r = rng.gen_range(0.05..0.6);
                    let dir = random_unit(&mut rng, d);
                    let t = if outside {
                        inner + r + rng.gen_range(0.0..0.05)
                    } else {
                        rng.gen_range(0.0..0.8)
                    };
                    Ball::new(dir.iter().zip(&b.center).map(|(u, c)| c + u * t).collect(), r)
                })
                .collect();
            reach_inside_check(&g, &b, &family, lambda)
        })
        .collect();
    let mut out = ReachCampaign { d, trials, premise_met: 0, witnesses: 0, violations: 0 };
    for o in outcomes {
        match o? {
            ReachOutcome::PremiseNotMet { .. } => {}
            ReachOutcome::Witness { .. } => {
                out.premise_met += 1;
                out.witnesses += 1;
            }
            ReachOutcome::Violation { .. } => {
                out.premise_met += 1;
                out.violations += 1;
            }
        }
    }
    Ok(out)
}
