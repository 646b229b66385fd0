use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rate::rate_from_field;
use super::ratio::{single_cube_estimate, SingleRegionEstimate};
use super::{generate_shape, standard_corpus, Shape, ShapeSpec};
use crate::coverings::{finite_family_boundary_ratio, random_dense_family, union_perimeter_campaign};
use crate::error::{Error, Result};
use crate::geometry::{isoperimetric_ratio, Ball, Body, LensRegion, Region};
use crate::grid::io::write_atomic;
use crate::grid::{Domain, GridGeometry, GridSet};
use crate::maximal::Operator;
use crate::numeric::logspace;

pub const ENVELOPE_FILE: &str = "envelopes.json";
/// Relative slack allowed over a recorded envelope.
pub const ENVELOPE_SLACK: f64 = 0.2;

/// `MAXVAR_GOLDEN_DIR` if set, else the `golden/` directory of this crate.
pub fn golden_dir() -> PathBuf {
    std::env::var_os("MAXVAR_GOLDEN_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("golden"))
}

/// Recorded empirical constants, keyed by quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    pub schema_version: u32,
    pub seed: u64,
    pub resolution: usize,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub name: String,
    pub measured: f64,
    pub envelope: f64,
    /// `envelope · (1 + ENVELOPE_SLACK)`.
    pub limit: f64,
    pub passes: bool,
}

impl Envelopes {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(ENVELOPE_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(&dir.join(ENVELOPE_FILE), text.as_bytes())
    }

    pub fn check(&self, name: &str, measured: f64) -> Result<EnvelopeCheck> {
        let envelope = *self
            .values
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("no envelope named {name:?}")))?;
        let limit = envelope * (1.0 + ENVELOPE_SLACK);
        Ok(EnvelopeCheck { name: name.to_string(), measured, envelope, limit, passes: measured <= limit })
    }
}

/// λ grid for the corpus constants.
pub(crate) fn corpus_lambdas() -> Vec<f64> {
    logspace(0.01, 0.9, 16)
}

/// Per-shape constants of the standard corpus at `n²`, both operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub index: usize,
    pub operator: String,
    pub variation_ratio: f64,
    pub sup_c_dy: f64,
    pub sup_c_un: f64,
}

/// Corpus rows and maxima keyed `variation_ratio.<op>`, `c_dy.<op>`, `c_un.<op>`.
pub fn corpus_constants(n: usize, seed: u64) -> Result<(Vec<CorpusRow>, BTreeMap<String, f64>)> {
    let g = GridGeometry::unit(2, n)?;
    let corpus = standard_corpus(2, seed);
    let lambdas = corpus_lambdas();
    let rows: Vec<CorpusRow> = corpus
        .par_iter()
        .enumerate()
        .map(|(index, spec)| {
            let e = generate_shape(spec, &g)?;
            [Operator::Dyadic, Operator::uncentered_default(&g)]
                .iter()
                .map(|op| {
                    let field = op.apply(&e, &Domain::FreeSpace)?;
                    let rep = rate_from_field(&e, &Domain::FreeSpace, &field, op.name(), &lambdas)?;
                    Ok(CorpusRow {
                        index,
                        operator: op.name().to_string(),
                        variation_ratio: rep.variation_ratio,
                        sup_c_dy: rep.sup_c_dy,
                        sup_c_un: rep.sup_c_un,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut max = BTreeMap::new();
    for r in &rows {
        for (key, v) in [("variation_ratio", r.variation_ratio), ("c_dy", r.sup_c_dy), ("c_un", r.sup_c_un)] {
            let e = max.entry(format!("{key}.{}", r.operator)).or_insert(0.0f64);
            *e = e.max(v);
        }
    }
    Ok((rows, max))
}

/// Random `(E, Q, λ)` with `Q` a cube or ball, `E` a half space or ball
/// meeting `Q`, and `λ` the measured density of `E` in `Q`.
pub fn single_cube_campaign(n: usize, trials: usize, seed: u64) -> Result<Vec<SingleRegionEstimate>> {
    let g = GridGeometry::unit(2, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    while out.len() < trials {
        let qc = vec![rng.gen_range(0.35..0.65), rng.gen_range(0.35..0.65)];
        let size = rng.gen_range(0.1..0.25);
        let q = if rng.gen_bool(0.5) {
            Body::Cube { center: qc.clone(), half_side: size }
        } else {
            Body::Ball(Ball::new(qc.clone(), size))
        };
        let shape = if rng.gen_bool(0.5) {
            let normal = crate::geometry::random_unit(&mut rng, 2);
            let offset = normal[0] * qc[0] + normal[1] * qc[1] + rng.gen_range(-0.8..0.8) * size;
            Shape::HalfSpace { normal, offset }
        } else {
            let c = vec![qc[0] + rng.gen_range(-1.5..1.5) * size, qc[1] + rng.gen_range(-1.5..1.5) * size];
            Shape::Ball { center: c, radius: rng.gen_range(0.3..1.5) * size }
        };
        let spec = ShapeSpec { shape, seed: 0, margin_cells: 0 };
        let Ok(e) = generate_shape(&spec, &g) else { continue };
        let q_cells = crate::geometry::rasterize_region(&q, &g)?;
        let density = e.intersection(&q_cells)?.count() as f64 / q_cells.count() as f64;
        if density < 0.02 {
            continue;
        }
        out.push(single_cube_estimate(&e, &q, density)?);
    }
    Ok(out)
}

/// Largest isoperimetric ratio over `trials` random ball unions in a region.
pub fn isoperimetric_campaign(region: &dyn Region, n: usize, trials: usize, seed: u64) -> Result<f64> {
    let g = GridGeometry::unit(region.dim(), n)?;
    let (lo, hi) = region.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let k = rng.gen_range(1..=5);
        let balls: Vec<Ball> = (0..k)
            .map(|_| {
                let c = lo.iter().zip(&hi).map(|(a, b)| rng.gen_range(*a..*b)).collect();
                let span = hi[0] - lo[0];
                Ball::new(c, rng.gen_range(0.05..0.4) * span)
            })
            .collect();
        let e = GridSet::from_fn(&g, |p| balls.iter().any(|b| b.contains(p)));
        let s = isoperimetric_ratio(region, &e)?;
        if s.ratio.is_finite() {
            worst = worst.max(s.ratio);
        }
    }
    Ok(worst)
}

pub(crate) fn lens() -> Result<LensRegion> {
    LensRegion::new(Body::Ball(Ball::new(vec![0.5, 0.5], 0.3)), Ball::new(vec![0.8, 0.5], 0.15), 0.1)
}

/// Largest finite-family constant over random dense families in corpus shapes.
pub fn finite_family_campaign(n: usize, lambda: f64, seed: u64) -> Result<f64> {
    let g = GridGeometry::unit(2, n)?;
    let mut worst = 0.0f64;
    for (i, spec) in standard_corpus(2, seed).iter().enumerate().step_by(2) {
        let e = generate_shape(spec, &g)?;
        let fam = random_dense_family(&e, lambda, 15, seed.wrapping_add(i as u64))?;
        if fam.is_empty() {
            continue;
        }
        worst = worst.max(finite_family_boundary_ratio(&e, &fam, lambda)?.constant);
    }
    Ok(worst)
}

/// Recompute every envelope. Corpus quantities at `n²`, the rest at fixed
/// desk-scale resolutions.
pub fn compute_envelopes(seed: u64, n: usize) -> Result<Envelopes> {
    let (_, mut values) = corpus_constants(n, seed)?;
    let cube = single_cube_campaign(128, 50, seed)?;
    values.insert("single_cube".into(), cube.iter().map(|c| c.ratio).fold(0.0, f64::max));
    let ball = Ball::new(vec![0.5, 0.5], 0.3);
    let square = Body::Cube { center: vec![0.5, 0.5], half_side: 0.3 };
    values.insert("isoperimetric.ball".into(), isoperimetric_campaign(&ball, 128, 20, seed)?);
    values.insert("isoperimetric.cube".into(), isoperimetric_campaign(&square, 128, 20, seed)?);
    values.insert("isoperimetric.lens".into(), isoperimetric_campaign(&lens()?, 256, 20, seed)?);
    for lambda in [0.05, 0.1, 0.2] {
        let recs = union_perimeter_campaign(2, 512, lambda, 100, seed)?;
        values.insert(format!("union_perimeter.{lambda}"), recs.iter().map(|r| r.constant).fold(0.0, f64::max));
    }
    for lambda in [0.1, 0.3] {
        values.insert(format!("finite_family.{lambda}"), finite_family_campaign(128, lambda, seed)?);
    }
    Ok(Envelopes { schema_version: 1, seed, resolution: n, values })
}
