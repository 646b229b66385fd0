//! Shape corpus, level-set rates and the end-to-end verification harness.
//!
//! Shape parameters live in unit coordinates `u = (p − origin) / L` with `L`
//! the longest box side, so a spec describes the same continuous set at
//! every resolution.

mod golden;
mod rate;
mod ratio;
mod suite;

pub use golden::{
    compute_envelopes, corpus_constants, finite_family_campaign, golden_dir, isoperimetric_campaign,
    single_cube_campaign, CorpusRow, EnvelopeCheck, Envelopes, ENVELOPE_FILE, ENVELOPE_SLACK,
};
pub use rate::{
    axial_level_radius, levelset_rate, optimality_experiment, OptimalityReport, RadiusCheck, RateReport, RateRow,
    SlopeFit,
};
pub use ratio::{
    lower_semicontinuity_check, single_cube_estimate, variation_ratio, LscReport, LscRow, SingleRegionEstimate,
};
pub use suite::{lemma_names, lemma_suite, Expectation, LemmaRecord, Timing, VerificationReport, SCHEMA_VERSION};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridGeometry, GridSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Cube { center: Vec<f64>, half_side: f64 },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    /// `count` balls with radii uniform in `[r_min, r_max]`, fully inside the unit box.
    UnionRandomBalls { count: usize, r_min: f64, r_max: f64 },
    /// Blocks of side `2^{−level}` kept independently with probability `p`.
    RandomDyadic { level: u32, p: f64 },
    /// `{u : normal·u < offset}`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
}

impl Shape {
    /// Parse the short form used on the command line:
    /// `ball:R`, `cube:H`, `annulus:RI,RO`, `balls:K`, `dyadic:LEVEL,P`,
    /// `half:OFFSET`. Centered shapes sit at the middle of the unit box;
    /// the half space has normal `e_1`.
    pub fn parse(text: &str, d: usize) -> Result<Shape> {
        let bad = || Error::InvalidArgument(format!("cannot parse shape {text:?}"));
        let (kind, args) = text.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args.split(',').map(|a| a.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        let center = vec![0.5; d];
        let shape = match (kind, nums.as_slice()) {
            ("ball", &[radius]) => Shape::Ball { center, radius },
            ("cube", &[half_side]) => Shape::Cube { center, half_side },
            ("annulus", &[inner, outer]) => Shape::Annulus { center, inner, outer },
            ("balls", &[count]) if count >= 0.0 && count.fract() == 0.0 => {
                Shape::UnionRandomBalls { count: count as usize, r_min: 0.04, r_max: 0.12 }
            }
            ("dyadic", &[level, p]) if level >= 0.0 && level.fract() == 0.0 => {
                Shape::RandomDyadic { level: level as u32, p }
            }
            ("half", &[offset]) => {
                let mut normal = vec![0.0; d];
                normal[0] = 1.0;
                Shape::HalfSpace { normal, offset }
            }
            _ => return Err(bad()),
        };
        Ok(shape)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub shape: Shape,
    pub seed: u64,
    /// Cells along the box faces that must stay outside the set.
    pub margin_cells: usize,
}

impl ShapeSpec {
    pub fn new(shape: Shape) -> Self {
        ShapeSpec { shape, seed: 0, margin_cells: 2 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_margin(mut self, margin_cells: usize) -> Self {
        self.margin_cells = margin_cells;
        self
    }

    fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        let check_center = |c: &[f64]| c.len() == d && c.iter().all(|x| (0.0..=1.0).contains(x));
        match &self.shape {
            Shape::Ball { center, radius } if !check_center(center) || !(*radius > 0.0) => bad("bad ball"),
            Shape::Cube { center, half_side } if !check_center(center) || !(*half_side > 0.0) => bad("bad cube"),
            Shape::Annulus { center, inner, outer } if !check_center(center) || !(*inner >= 0.0 && outer > inner) => {
                bad("bad annulus")
            }
            Shape::UnionRandomBalls { r_min, r_max, .. } if !(*r_min > 0.0 && r_max >= r_min && *r_max < 0.5) => {
                bad("bad random-ball radii")
            }
            Shape::RandomDyadic { level, p } if !(0.0..=1.0).contains(p) || *level as usize * d > 24 => {
                bad("bad random dyadic parameters")
            }
            Shape::HalfSpace { normal, .. } if normal.len() != d || normal.iter().all(|x| *x == 0.0) => {
                bad("bad half-space normal")
            }
            _ => Ok(()),
        }
    }
}

/// Rasterize a shape spec.
///
/// Ball, cube and annulus must keep the margin empty and fail otherwise;
/// random shapes and half spaces are clipped to the box minus the margin.
pub fn generate_shape(spec: &ShapeSpec, geometry: &GridGeometry) -> Result<GridSet> {
    let d = geometry.dim();
    spec.validate(d)?;
    let extent = geometry.extent();
    let scale = extent[..d].iter().cloned().fold(0.0, f64::max);
    let origin = geometry.origin().to_vec();
    let unit = move |p: &[f64]| -> [f64; 3] {
        let mut u = [0.0; 3];
        for k in 0..p.len() {
            u[k] = (p[k] - origin[k]) / scale;
        }
        u
    };
    let d2 = |u: &[f64; 3], c: &[f64]| -> f64 { c.iter().enumerate().map(|(k, ck)| (u[k] - ck).powi(2)).sum() };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (set, clip) = match &spec.shape {
        Shape::Ball { center, radius } => {
            (GridSet::from_fn(geometry, |p| d2(&unit(p), center) < radius * radius), false)
        }
        Shape::Cube { center, half_side } => (
            GridSet::from_fn(geometry, |p| {
                let u = unit(p);
                center.iter().enumerate().all(|(k, c)| (u[k] - c).abs() < *half_side)
            }),
            false,
        ),
        Shape::Annulus { center, inner, outer } => (
            GridSet::from_fn(geometry, |p| {
                let r2 = d2(&unit(p), center);
                r2 >= inner * inner && r2 < outer * outer
            }),
            false,
        ),
        Shape::UnionRandomBalls { count, r_min, r_max } => {
            let balls: Vec<(Vec<f64>, f64)> = (0..*count)
                .map(|_| {
                    let r = if r_max > r_min { rng.gen_range(*r_min..*r_max) } else { *r_min };
                    ((0..d).map(|_| rng.gen_range(r..1.0 - r)).collect(), r)
                })
                .collect();
            (GridSet::from_fn(geometry, |p| balls.iter().any(|(c, r)| d2(&unit(p), c) < r * r)), true)
        }
        Shape::RandomDyadic { level, p } => {
            let side = 1usize << level;
            let blocks: Vec<bool> = (0..side.pow(d as u32)).map(|_| rng.gen_bool(*p)).collect();
            (
                GridSet::from_fn(geometry, |x| {
                    let u = unit(x);
                    let mut idx = 0;
                    for k in (0..d).rev() {
                        let b = ((u[k] * side as f64).floor().max(0.0) as usize).min(side - 1);
                        idx = idx * side + b;
                    }
                    blocks[idx]
                }),
                true,
            )
        }
        Shape::HalfSpace { normal, offset } => (
            GridSet::from_fn(geometry, |p| {
                let u = unit(p);
                normal.iter().enumerate().map(|(k, n)| n * u[k]).sum::<f64>() < *offset
            }),
            true,
        ),
    };
    if clip {
        let mut set = set;
        let cells: Vec<usize> = set.cells().collect();
        let shape = geometry.shape();
        let m = spec.margin_cells;
        for i in cells {
            let c = geometry.coords(i);
            if (0..d).any(|k| c[k] < m || c[k] + m >= shape[k]) {
                set.remove(i);
            }
        }
        return Ok(set);
    }
    set.check_margin(spec.margin_cells)?;
    Ok(set)
}

/// Twenty seeded shapes: 4 balls, 3 cubes, 3 annuli, 5 random ball unions,
/// 3 random dyadic sets and 2 half spaces, all with a 2-cell margin.
pub fn standard_corpus(d: usize, seed: u64) -> Vec<ShapeSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| 0.5 + rng.gen_range(-0.08..0.08)).collect() };
    let mut out = Vec::with_capacity(20);
    for _ in 0..4 {
        let c = center(&mut rng);
        out.push(Shape::Ball { center: c, radius: rng.gen_range(0.1..0.3) });
    }
    for _ in 0..3 {
        let c = center(&mut rng);
        out.push(Shape::Cube { center: c, half_side: rng.gen_range(0.1..0.3) });
    }
    for _ in 0..3 {
        let c = center(&mut rng);
        let outer = rng.gen_range(0.2..0.35);
        out.push(Shape::Annulus { center: c, inner: outer * rng.gen_range(0.3..0.7), outer });
    }
    for _ in 0..5 {
        out.push(Shape::UnionRandomBalls { count: rng.gen_range(2..=12), r_min: 0.04, r_max: 0.15 });
    }
    for _ in 0..3 {
        out.push(Shape::RandomDyadic { level: rng.gen_range(2..=4), p: rng.gen_range(0.2..0.6) });
    }
    for _ in 0..2 {
        let normal = crate::geometry::random_unit(&mut rng, d);
        let offset = normal.iter().map(|n| 0.5 * n).sum::<f64>() + rng.gen_range(-0.1..0.1);
        out.push(Shape::HalfSpace { normal, offset });
    }
    out.into_iter()
        .enumerate()
        .map(|(i, shape)| ShapeSpec { shape, seed: seed.wrapping_add(i as u64), margin_cells: 2 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_measure_refines() {
        for n in [128, 256] {
            let g = GridGeometry::unit(2, n).unwrap();
            let e = generate_shape(&ShapeSpec::new(Shape::parse("ball:0.25", 2).unwrap()), &g).unwrap();
            assert!((e.measure() / (PI * 0.0625) - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn trivial_shapes() {
        let g = GridGeometry::unit(2, 64).unwrap();
        let none = ShapeSpec::new(Shape::UnionRandomBalls { count: 0, r_min: 0.1, r_max: 0.2 });
        assert!(generate_shape(&none, &g).unwrap().is_empty());
        let full = ShapeSpec::new(Shape::RandomDyadic { level: 3, p: 1.0 }).with_margin(3);
        assert_eq!(generate_shape(&full, &g).unwrap().count(), 58 * 58);
    }

    #[test]
    fn margin_violation() {
        let g = GridGeometry::unit(2, 64).unwrap();
        let big = ShapeSpec::new(Shape::Ball { center: vec![0.5, 0.5], radius: 0.49 }).with_margin(2);
        assert!(matches!(generate_shape(&big, &g), Err(Error::MarginViolation { .. })));
    }

    #[test]
    fn deterministic_and_resolution_independent() {
        let spec = ShapeSpec::new(Shape::RandomDyadic { level: 3, p: 0.5 }).with_seed(9).with_margin(0);
        let a = generate_shape(&spec, &GridGeometry::unit(2, 32).unwrap()).unwrap();
        let b = generate_shape(&spec, &GridGeometry::unit(2, 64).unwrap()).unwrap();
        assert_eq!(a, generate_shape(&spec, &GridGeometry::unit(2, 32).unwrap()).unwrap());
        assert_eq!(a.measure(), b.measure());
    }

    #[test]
    fn corpus_generates() {
        let corpus = standard_corpus(2, 1);
        assert_eq!(corpus.len(), 20);
        let g = GridGeometry::unit(2, 128).unwrap();
        for spec in &corpus {
            assert!(!generate_shape(spec, &g).unwrap().is_empty(), "{spec:?}");
        }
    }

    #[test]
    fn parse_errors() {
        assert!(Shape::parse("ball", 2).is_err());
        assert!(Shape::parse("blob:1", 2).is_err());
        assert!(Shape::parse("annulus:0.1", 2).is_err());
    }
}
