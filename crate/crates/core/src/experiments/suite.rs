use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::golden::{isoperimetric_campaign, lens};
use super::ratio::{lower_semicontinuity_check, single_cube_estimate};
use super::{generate_shape, standard_corpus};
use crate::coverings::{
    boxing_cover, finite_family_boundary_ratio, large_ball_campaign, multiscale_covers, random_dense_family,
    surface_boxing_cover, union_perimeter_campaign, vitali_subfamily, BallFamily,
};
use crate::error::Result;
use crate::geometry::{
    min_angle_probe, reach_campaign, shrink_campaign, volume_ratio_check, Ball, Body,
};
use crate::grid::{boundary_union_check, Domain, GridGeometry, GridSet};
use crate::maximal::{mf_geq_f_check, Operator, RadiusSchedule};
use crate::numeric::median;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRecord {
    pub lemma: String,
    pub expected: Expectation,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub witness: Option<String>,
}

impl LemmaRecord {
    pub fn as_expected(&self) -> bool {
        self.passed == (self.expected == Expectation::Pass)
    }
}

/// Wall-clock data, kept apart so the rest of a report is bit-stable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: u64,
    pub runtimes_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub seed: u64,
    pub records: Vec<LemmaRecord>,
    pub timing: Timing,
}

impl VerificationReport {
    /// Every record matched its expectation.
    pub fn all_as_expected(&self) -> bool {
        self.records.iter().all(LemmaRecord::as_expected)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report without its timing section.
    pub fn stable_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    /// One row per lemma; measured values as `key=value` pairs.
    pub fn to_csv(&self) -> Result<String> {
        let fmt = |e: csv::Error| crate::Error::Format(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lemma", "expected", "passed", "as_expected", "measured", "witness"]).map_err(fmt)?;
        for r in &self.records {
            let measured = r.measured.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
            w.write_record([
                r.lemma.as_str(),
                if r.expected == Expectation::Pass { "pass" } else { "fail" },
                &r.passed.to_string(),
                &r.as_expected().to_string(),
                &measured,
                r.witness.as_deref().unwrap_or(""),
            ])
            .map_err(fmt)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::Error::Format(e.to_string()))
    }
}

struct Outcome {
    passed: bool,
    measured: BTreeMap<String, f64>,
    witness: Option<String>,
}

fn outcome(passed: bool, measured: &[(&str, f64)]) -> Outcome {
    Outcome { passed, measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(), witness: None }
}

type Check = fn(u64) -> Result<Outcome>;

fn random_set(rng: &mut ChaCha8Rng, g: &GridGeometry) -> GridSet {
    let p = rng.gen_range(0.2..0.8);
    let mask = (0..g.len()).map(|_| rng.gen_bool(p)).collect();
    GridSet::from_mask(g, mask).expect("matching length")
}

fn check_boundary_union(seed: u64) -> Result<Outcome> {
    let g = GridGeometry::unit(2, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..100 {
        let a = random_set(&mut rng, &g);
        let b = random_set(&mut rng, &g);
        violations += boundary_union_check(&a, &b)?.len();
    }
    Ok(outcome(violations == 0, &[("pairs", 100.0), ("violations", violations as f64)]))
}

fn check_mf_geq_f(seed: u64) -> Result<Outcome> {
    let g = GridGeometry::unit(2, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops = [Operator::Dyadic, Operator::uncentered_default(&g)];
    let mut violations = 0;
    for _ in 0..20 {
        let e = random_set(&mut rng, &g);
        for op in &ops {
            let field = op.apply(&e, &Domain::FreeSpace)?;
            violations += mf_geq_f_check(&e, &Domain::FreeSpace, &field, op)?.len();
        }
    }
    Ok(outcome(violations == 0, &[("cases", 40.0), ("violations", violations as f64)]))
}

fn check_isoperimetric(seed: u64) -> Result<Outcome> {
    let ball = isoperimetric_campaign(&Ball::new(vec![0.5, 0.5], 0.3), 128, 20, seed)?;
    let cube = isoperimetric_campaign(&Body::Cube { center: vec![0.5, 0.5], half_side: 0.3 }, 128, 20, seed)?;
    let lens = isoperimetric_campaign(&lens()?, 256, 20, seed)?;
    let ok = [ball, cube, lens].iter().all(|v| v.is_finite());
    Ok(outcome(ok, &[("ball", ball), ("cube", cube), ("lens", lens)]))
}

fn check_vitali(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balls: Vec<Ball> = (0..500)
        .map(|_| Ball::new(vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)], rng.gen_range(0.002..0.05)))
        .collect();
    let fam = BallFamily::new(balls);
    let thin = vitali_subfamily(&fam);
    let uncovered = fam
        .iter()
        .filter(|b| {
            !thin.iter().any(|t| crate::geometry::distance(&b.center, &t.center) + b.radius <= 5.0 * t.radius)
        })
        .count();
    let ok = thin.is_disjoint() && uncovered == 0;
    Ok(outcome(ok, &[("balls", 500.0), ("kept", thin.len() as f64), ("uncovered", uncovered as f64)]))
}

fn check_boxing(_seed: u64) -> Result<Outcome> {
    let g = GridGeometry::unit(2, 128)?;
    let e = GridSet::from_fn(&g, |p| (p[0] - 0.45).powi(2) + (p[1] - 0.5).powi(2) < 0.01);
    let fam = BallFamily::new(vec![Ball::new(vec![0.5, 0.5], 0.4)]);
    let cover = boxing_cover(&e, &fam)?;
    let worst = cover.details.iter().map(|b| (b.density - 0.5).abs() / b.tolerance).fold(0.0, f64::max);
    let ok = cover.residual == 0 && cover.details.iter().all(|b| b.within_tolerance());
    Ok(outcome(ok, &[("balls", cover.details.len() as f64), ("worst_relative_error", worst)]))
}

fn check_surface_boxing(_seed: u64) -> Result<Outcome> {
    let g = GridGeometry::unit(2, 128)?;
    let x = Body::Ball(Ball::new(vec![0.5, 0.5], 0.3));
    let inner = 0.3 / 2f64.sqrt();
    let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < inner * inner);
    let cover = surface_boxing_cover(&x, &e, 0.4)?;
    let min = cover.min_ratio.unwrap_or(0.0);
    let ok = cover.skipped.is_empty() && min > 0.0 && cover.balls.iter().all(|b| b.ball.diameter() <= 2.0 * x.diameter());
    Ok(outcome(ok, &[("balls", cover.balls.len() as f64), ("min_ratio", min)]))
}

fn check_single_cube(_seed: u64) -> Result<Outcome> {
    let g = GridGeometry::unit(2, 256)?;
    let lambda = 0.3;
    let e = GridSet::from_fn(&g, |p| p[1] < 0.25 + lambda * 0.5);
    let est = single_cube_estimate(&e, &Body::Cube { center: vec![0.5, 0.5], half_side: 0.25 }, lambda)?;
    let closed = (3.0 - 2.0 * lambda) * lambda.sqrt();
    let rel = (est.ratio / closed - 1.0).abs();
    Ok(outcome(rel < 0.05, &[("ratio", est.ratio), ("closed_form", closed)]))
}

fn check_shrink(seed: u64) -> Result<Outcome> {
    let mut m = Vec::new();
    let mut total = 0;
    for d in 1..=4 {
        let c = shrink_campaign(d, 500, seed.wrapping_add(d as u64))?;
        total += c.counterexamples;
        m.push((d, c.min_relative_gap));
    }
    let mut o = outcome(total == 0, &[("trials", 2000.0), ("counterexamples", total as f64)]);
    for (d, gap) in m {
        o.measured.insert(format!("min_relative_gap_d{d}"), gap);
    }
    Ok(o)
}

fn check_reach(seed: u64) -> Result<Outcome> {
    let c = reach_campaign(2, 48, 2000, seed)?;
    Ok(outcome(
        c.violations == 0,
        &[("trials", c.trials as f64), ("premise_met", c.premise_met as f64), ("violations", c.violations as f64)],
    ))
}

fn check_volume_ratio(_seed: u64) -> Result<Outcome> {
    let r = volume_ratio_check(25)?;
    Ok(outcome(r.passes, &[("d_max", 25.0), ("min_slack", r.min_slack)]))
}

fn check_min_angle(seed: u64) -> Result<Outcome> {
    let a2 = min_angle_probe(2, 3.0, 2000, seed)?;
    let a3 = min_angle_probe(3, 3.0, 2000, seed)?;
    Ok(outcome(
        a2.passes && a3.passes,
        &[("n", 3.0), ("max_angle_d2", a2.max_angle), ("max_angle_d3", a3.max_angle), ("critical_n", a2.critical_n)],
    ))
}

fn check_min_angle_adversarial(seed: u64) -> Result<Outcome> {
    let a = min_angle_probe(2, 1.01, 200, seed)?;
    let mut o = outcome(a.passes, &[("n", 1.01), ("adversarial_angle", a.adversarial_angle), ("limit", std::f64::consts::FRAC_PI_2)]);
    if !a.passes {
        o.witness = Some(format!(
            "|x| = sqrt(N²−1), y ⊥ x: angle {:.6} ≥ π/2; passes only from N ≈ {:.4}",
            a.adversarial_angle, a.critical_n
        ));
    }
    Ok(o)
}

fn check_large_ball(seed: u64) -> Result<Outcome> {
    let mut o = outcome(true, &[]);
    for k in [2.0, 4.0, 8.0] {
        let recs = large_ball_campaign(2, 512, k, 20, seed)?;
        let ratios: Vec<f64> = recs.iter().map(|r| r.ratio).collect();
        let worst = ratios.iter().cloned().fold(0.0, f64::max);
        o.passed &= worst <= 1.3;
        o.measured.insert(format!("max_ratio_k{k}"), worst);
        o.measured.insert(format!("median_normalized_k{k}"), median(&recs.iter().map(|r| r.normalized).collect::<Vec<_>>()));
    }
    Ok(o)
}

fn check_union_perimeter(seed: u64) -> Result<Outcome> {
    let mut o = outcome(true, &[]);
    for lambda in [0.05, 0.1, 0.2] {
        let recs = union_perimeter_campaign(2, 256, lambda, 20, seed)?;
        let worst = recs.iter().map(|r| r.constant).fold(0.0, f64::max);
        o.passed &= worst <= 1.0;
        o.measured.insert(format!("max_constant_{lambda}"), worst);
    }
    Ok(o)
}

fn corpus_shape(seed: u64, index: usize, n: usize) -> Result<GridSet> {
    let spec = &standard_corpus(2, seed)[index];
    generate_shape(spec, &GridGeometry::unit(2, n)?)
}

fn check_multiscale(seed: u64) -> Result<Outcome> {
    // a union of random balls from the corpus
    let e = corpus_shape(seed, 10, 128)?;
    let fam = random_dense_family(&e, 0.3, 15, seed)?;
    let cover = multiscale_covers(&e, &fam, 0.3)?;
    let r = &cover.report;
    let c4 = r.balls.iter().map(|b| b.c4).fold(f64::INFINITY, f64::min);
    let mut o = outcome(
        r.passes(),
        &[
            ("input_balls", fam.len() as f64),
            ("cover_balls", r.balls.len() as f64),
            ("scales", r.scales.len() as f64),
            ("violations", r.violations.len() as f64),
            ("min_c4", if c4.is_finite() { c4 } else { 0.0 }),
            ("cross_scale_overlaps", r.cross_scale_overlaps as f64),
        ],
    );
    if let Some(v) = r.violations.first() {
        o.witness = Some(format!("property {} at scale {} near {:?}", v.property, v.scale, v.point));
    }
    Ok(o)
}

fn check_finite_family(seed: u64) -> Result<Outcome> {
    let e = corpus_shape(seed, 10, 128)?;
    let mut o = outcome(true, &[]);
    for lambda in [0.1, 0.3] {
        let fam = random_dense_family(&e, lambda, 15, seed)?;
        let rec = finite_family_boundary_ratio(&e, &fam, lambda)?;
        o.passed &= rec.constant.is_finite();
        o.measured.insert(format!("constant_{lambda}"), rec.constant);
    }
    Ok(o)
}

fn check_lower_semicontinuity(_seed: u64) -> Result<Outcome> {
    let g = GridGeometry::unit(2, 64)?;
    let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.03);
    let op = Operator::Uncentered { schedule: RadiusSchedule::Geometric { r_min: g.h(), r_max: 0.5, ratio: 1.1 } };
    let r = lower_semicontinuity_check(&e, &Domain::FreeSpace, &op, 0.3, &[0.01, 0.1, 1.0])?;
    Ok(outcome(
        r.measure_monotone && r.final_equal && r.inequality_holds,
        &[("level_perimeter", r.level_perimeter), ("tail_min_perimeter", r.tail_min_perimeter)],
    ))
}

const CHECKS: &[(&str, Expectation, Check)] = &[
    ("boundary_union", Expectation::Pass, check_boundary_union),
    ("mf_geq_f", Expectation::Pass, check_mf_geq_f),
    ("isoperimetric", Expectation::Pass, check_isoperimetric),
    ("vitali", Expectation::Pass, check_vitali),
    ("boxing", Expectation::Pass, check_boxing),
    ("surface_boxing", Expectation::Pass, check_surface_boxing),
    ("single_cube", Expectation::Pass, check_single_cube),
    ("shrink_disjoint", Expectation::Pass, check_shrink),
    ("reach_inside", Expectation::Pass, check_reach),
    ("volume_ratio", Expectation::Pass, check_volume_ratio),
    ("min_angle", Expectation::Pass, check_min_angle),
    ("min_angle_adversarial", Expectation::Fail, check_min_angle_adversarial),
    ("large_ball_boundary", Expectation::Pass, check_large_ball),
    ("union_perimeter", Expectation::Pass, check_union_perimeter),
    ("multiscale_covers", Expectation::Pass, check_multiscale),
    ("finite_family", Expectation::Pass, check_finite_family),
    ("lower_semicontinuity", Expectation::Pass, check_lower_semicontinuity),
];

/// Names of the suite entries in execution order.
pub fn lemma_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Run the first `budget` lemma checks at their desk-scale defaults.
///
/// Errors inside a check become failed records carrying the error text.
pub fn lemma_suite(seed: u64, budget: usize) -> VerificationReport {
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut timing = Timing { started_unix, runtimes_ms: BTreeMap::new() };
    let mut records = Vec::new();
    for &(name, expected, check) in CHECKS.iter().take(budget) {
        let t = Instant::now();
        let o = check(seed).unwrap_or_else(|e| Outcome { passed: false, measured: BTreeMap::new(), witness: Some(e.to_string()) });
        timing.runtimes_ms.insert(name.to_string(), t.elapsed().as_secs_f64() * 1e3);
        records.push(LemmaRecord { lemma: name.to_string(), expected, passed: o.passed, measured: o.measured, witness: o.witness });
    }
    VerificationReport { schema_version: SCHEMA_VERSION, seed, records, timing }
}
