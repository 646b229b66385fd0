//! Continuous ball geometry: volumes, intersections and the ball lemmas.

mod angle;
mod region;

pub use angle::{critical_angle_n, min_angle_probe, worst_case_angle, AngleReport};
pub use region::{
    isoperimetric_ratio, rasterize_region, reach_campaign, reach_inside_check, Body, IsoperimetricSample,
    LensRegion, ReachCampaign, ReachOutcome, Region,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Open Euclidean ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()).unwrap_or(0.0) * self.radius.powi(self.dim() as i32)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        dist2(&self.center, p) < self.radius * self.radius
    }

    /// Concentric ball with radius scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Ball {
        Ball::new(self.center.clone(), self.radius * factor)
    }

    pub fn intersects(&self, other: &Ball) -> bool {
        distance(&self.center, &other.center) < self.radius + other.radius
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!("ball radius {}", self.radius)));
        }
        if self.center.is_empty() || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("ball center".into()));
        }
        Ok(())
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Volume `σ_d` of the unit ball, from `σ_d = σ_{d−2}·2π/d`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let (mut v, start) = if d.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    Ok(v)
}

/// Per-dimension outcome of the unit-ball volume ratio bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRatioRow {
    pub d: usize,
    /// `σ_d/σ_{d−1}`.
    pub ratio: f64,
    pub sqrt_d: f64,
    pub ratio_passes: bool,
    /// The inequality actually used downstream: `(d+1)·σ_d/σ_{d−1} ≤ 4·d^{3/2}`.
    pub epsilon_lhs: f64,
    pub epsilon_rhs: f64,
    pub epsilon_passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRatioReport {
    pub rows: Vec<VolumeRatioRow>,
    /// Smallest `√d − ratio` over `d ≥ 3`.
    pub min_slack: f64,
    /// All `d ≥ 3` satisfy the ratio bound and all `d` the ε bound.
    pub passes: bool,
}

/// Evaluate `σ_d/σ_{d−1} ≤ √d` for `1 ≤ d ≤ d_max`.
///
/// The ratio bound fails at `d = 1` (`2 > 1`); for `d ∈ {1, 2}` the report
/// also carries the ε bound it feeds, which holds for every `d` (with
/// equality at `d = 1`).
pub fn volume_ratio_check(d_max: usize) -> Result<VolumeRatioReport> {
    if d_max < 3 {
        return Err(Error::InvalidArgument("d_max must be at least 3".into()));
    }
    let mut rows = Vec::with_capacity(d_max);
    let mut prev = 1.0;
    for d in 1..=d_max {
        let cur = unit_ball_volume(d)?;
        let ratio = cur / prev;
        prev = cur;
        let df = d as f64;
        let epsilon_lhs = (df + 1.0) * ratio;
        let epsilon_rhs = 4.0 * df.powf(1.5);
        rows.push(VolumeRatioRow {
            d,
            ratio,
            sqrt_d: df.sqrt(),
            ratio_passes: ratio <= df.sqrt(),
            epsilon_lhs,
            epsilon_rhs,
            epsilon_passes: epsilon_lhs <= epsilon_rhs * (1.0 + 1e-12),
        });
    }
    let min_slack = rows.iter().filter(|r| r.d >= 3).map(|r| r.sqrt_d - r.ratio).fold(f64::INFINITY, f64::min);
    let passes = rows.iter().all(|r| r.epsilon_passes && (r.d < 3 || r.ratio_passes));
    Ok(VolumeRatioReport { rows, min_slack, passes })
}

/// Volume of the cap of height `t ∈ [0, 2r]` cut from a `d`-ball of radius `r`.
pub fn cap_volume(d: usize, r: f64, t: f64) -> f64 {
    let t = t.clamp(0.0, 2.0 * r);
    match d {
        1 => t,
        2 => {
            let c = (r - t) / r;
            r * r * c.clamp(-1.0, 1.0).acos() - (r - t) * (2.0 * r * t - t * t).max(0.0).sqrt()
        }
        3 => std::f64::consts::PI * t * t * (3.0 * r - t) / 3.0,
        _ => {
            let full = unit_ball_volume(d).unwrap_or(0.0) * r.powi(d as i32);
            if t > r {
                return full - cap_volume(d, r, 2.0 * r - t);
            }
            let x = ((2.0 * r * t - t * t) / (r * r)).clamp(0.0, 1.0);
            0.5 * full * beta_reg((d as f64 + 1.0) / 2.0, 0.5, x)
        }
    }
}

/// `|B ∩ C|` from spherical caps.
pub fn ball_intersection_volume(b: &Ball, c: &Ball) -> Result<f64> {
    b.validate()?;
    c.validate()?;
    if b.dim() != c.dim() {
        return Err(Error::InvalidGeometry("balls of different dimension".into()));
    }
    let d = b.dim();
    let dd = distance(&b.center, &c.center);
    let (r1, r2) = (b.radius, c.radius);
    if dd >= r1 + r2 {
        return Ok(0.0);
    }
    if dd <= (r1 - r2).abs() {
        return Ok(b.volume().min(c.volume()));
    }
    let a = (dd * dd + r1 * r1 - r2 * r2) / (2.0 * dd);
    Ok(cap_volume(d, r1, r1 - a) + cap_volume(d, r2, r2 - (dd - a)))
}

/// Largest λ for which the shrink lemma is stated.
pub fn shrink_lambda_max(d: usize) -> f64 {
    let df = d as f64;
    2f64.powf(-(df + 1.0) / 2.0) * df.powf(-1.5)
}

/// Shrink factor `ε = 2 d^{3/(d+1)} λ^{2/(d+1)}`.
pub fn shrink_epsilon(d: usize, lambda: f64) -> f64 {
    let df = d as f64;
    2.0 * df.powf(3.0 / (df + 1.0)) * lambda.powf(2.0 / (df + 1.0))
}

const GAP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ShrinkOutcome {
    PremiseNotMet { reason: String },
    Disjoint { epsilon: f64, gap: f64 },
    Counterexample { epsilon: f64, gap: f64 },
}

impl ShrinkOutcome {
    pub fn is_counterexample(&self) -> bool {
        matches!(self, Self::Counterexample { .. })
    }
}

/// Test whether `(1−ε)B` misses `C` given `diam C ≥ diam B` and `|B∩C| ≤ λ|B|`.
///
/// `gap` is `|x_B − x_C| − (1−ε)r_B − r_C`; disjoint means `gap ≥ 0` up to
/// rounding (`−1e-12·(r_B + r_C)`). In `d = 1` the bound is attained with
/// equality at `|B∩C| = λ|B|`.
pub fn shrink_disjoint_check(b: &Ball, c: &Ball, lambda: f64) -> Result<ShrinkOutcome> {
    let d = b.dim();
    if !(lambda > 0.0 && lambda <= shrink_lambda_max(d) * (1.0 + 1e-12)) {
        return Err(Error::InvalidLevel(lambda));
    }
    let inter = ball_intersection_volume(b, c)?;
    if c.radius < b.radius {
        return Ok(ShrinkOutcome::PremiseNotMet { reason: "diam C < diam B".into() });
    }
    if inter > lambda * b.volume() {
        return Ok(ShrinkOutcome::PremiseNotMet { reason: "|B∩C| > λ|B|".into() });
    }
    let epsilon = shrink_epsilon(d, lambda);
    let gap = distance(&b.center, &c.center) - (1.0 - epsilon).max(0.0) * b.radius - c.radius;
    Ok(if gap >= -GAP_TOL * (b.radius + c.radius) {
        ShrinkOutcome::Disjoint { epsilon, gap }
    } else {
        ShrinkOutcome::Counterexample { epsilon, gap }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkCampaign {
    pub d: usize,
    pub trials: usize,
    pub counterexamples: usize,
    /// Smallest gap relative to `r_B` over all trials.
    pub min_relative_gap: f64,
}

/// Randomized shrink-lemma campaign with configurations placed exactly at
/// the premise threshold `|B∩C| = λ|B|` (the hardest case) or beyond it.
pub fn shrink_campaign(d: usize, trials: usize, seed: u64) -> Result<ShrinkCampaign> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let lmax = shrink_lambda_max(d);
    let results: Vec<Result<(f64, bool)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let lambda = lmax * 10f64.powf(-rng.gen_range(0.0..6.0));
            let rc = 10f64.powf(rng.gen_range(0.0..1.5));
            let b = Ball::new(vec![0.0; d], 1.0);
            let dir = random_unit(&mut rng, d);
            let target = lambda * b.volume();
            let place = |t: f64| Ball::new(dir.iter().map(|u| u * t).collect(), rc);
            // |B∩C| is decreasing in the center distance on [rc−1, rc+1]
            let (mut lo, mut hi) = (rc - 1.0, rc + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if ball_intersection_volume(&b, &place(mid))? > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = if rng.gen_bool(0.5) { hi } else { hi + rng.gen_range(0.0..0.1) };
            match shrink_disjoint_check(&b, &place(t), lambda)? {
                ShrinkOutcome::Disjoint { gap, .. } => Ok((gap, false)),
                ShrinkOutcome::Counterexample { gap, .. } => Ok((gap, true)),
                ShrinkOutcome::PremiseNotMet { reason } => Err(Error::Premise(reason)),
            }
        })
        .collect();
    let gaps = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ShrinkCampaign {
        d,
        trials,
        counterexamples: gaps.iter().filter(|g| g.1).count(),
        min_relative_gap: gaps.iter().map(|g| g.0).fold(f64::INFINITY, f64::min),
    })
}

/// Uniform direction on the unit sphere.
pub(crate) fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in the unit ball.
pub(crate) fn random_in_ball<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn unit_volumes_match_gamma() {
        for d in 1..=30 {
            let df = d as f64;
            let gamma = PI.powf(df / 2.0) / statrs::function::gamma::gamma(df / 2.0 + 1.0);
            let v = unit_ball_volume(d).unwrap();
            assert!(((v - gamma) / gamma).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn volume_ratio_rows() {
        let rep = volume_ratio_check(25).unwrap();
        assert!(!rep.rows[0].ratio_passes);
        assert_eq!(rep.rows[0].ratio, 2.0);
        assert_eq!(rep.rows[0].epsilon_lhs, rep.rows[0].epsilon_rhs);
        assert!((rep.rows[2].ratio - 4.0 / 3.0).abs() < 1e-14);
        assert!(rep.rows[24].ratio <= 5.0);
        assert!(rep.passes && rep.min_slack > 0.0);
        assert!(volume_ratio_check(2).is_err());
    }

    #[test]
    fn caps_agree_with_beta_formula() {
        for d in 1..=3 {
            let full = unit_ball_volume(d).unwrap() * 1.7f64.powi(d as i32);
            for k in 0..=20 {
                let t = 3.4 * k as f64 / 20.0;
                let x = ((2.0 * 1.7 * t - t * t) / (1.7 * 1.7)).clamp(0.0, 1.0);
                let half = 0.5 * full * beta_reg((d as f64 + 1.0) / 2.0, 0.5, x);
                let beta = if t <= 1.7 { half } else { full - half };
                let closed = cap_volume(d, 1.7, t);
                assert!((closed - beta).abs() < 1e-12 * full, "d={d} t={t}");
            }
        }
    }

    #[test]
    fn intersection_examples() {
        let b = Ball::new(vec![0.0, 0.0], 1.0);
        let far = Ball::new(vec![2.0, 0.0], 1.0);
        assert_eq!(ball_intersection_volume(&b, &far).unwrap(), 0.0);
        let big = Ball::new(vec![0.1, 0.0], 3.0);
        assert_eq!(ball_intersection_volume(&b, &big).unwrap(), PI);
        let c = Ball::new(vec![1.0, 0.0], 1.0);
        let v = ball_intersection_volume(&b, &c).unwrap();
        assert!((v - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-14);
        assert!(ball_intersection_volume(&b, &Ball::new(vec![0.0, 0.0], 0.0)).is_err());
    }

    #[test]
    fn intersection_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=4 {
            let b = Ball::new(vec![0.0; d], 1.0);
            let mut center = vec![0.0; d];
            center[0] = 0.9;
            let c = Ball::new(center, 0.7);
            let samples = 1_000_000;
            let hits = (0..samples)
                .filter(|_| {
                    let p = random_in_ball(&mut rng, d);
                    c.contains(&p)
                })
                .count();
            let p = hits as f64 / samples as f64;
            let mc = p * b.volume();
            let sigma = (p * (1.0 - p) / samples as f64).sqrt() * b.volume();
            let exact = ball_intersection_volume(&b, &c).unwrap();
            assert!((mc - exact).abs() < 3.0 * sigma + 1e-12, "d={d} mc={mc} exact={exact}");
        }
    }

    #[test]
    fn intersection_is_symmetric_and_monotone() {
        let b = Ball::new(vec![0.0, 0.0, 0.0], 1.0);
        let mut last = f64::INFINITY;
        for k in 0..30 {
            let c = Ball::new(vec![0.1 * k as f64, 0.0, 0.0], 1.5);
            let v = ball_intersection_volume(&b, &c).unwrap();
            assert!((v - ball_intersection_volume(&c, &b).unwrap()).abs() < 1e-12);
            assert!(v <= last + 1e-12);
            last = v;
        }
    }

    #[test]
    fn shrink_examples() {
        let b = Ball::new(vec![0.0, 0.0], 1.0);
        let tangent = Ball::new(vec![2.0, 0.0], 1.0);
        let l = shrink_lambda_max(2);
        assert!(matches!(shrink_disjoint_check(&b, &tangent, l).unwrap(), ShrinkOutcome::Disjoint { .. }));
        assert!(matches!(shrink_disjoint_check(&b, &b, l).unwrap(), ShrinkOutcome::PremiseNotMet { .. }));
        assert!(shrink_disjoint_check(&b, &tangent, 2.0 * l).is_err());
    }

    #[test]
    fn shrink_campaign_small() {
        for d in 1..=4 {
            let c = shrink_campaign(d, 500, 5).unwrap();
            assert_eq!(c.counterexamples, 0, "d={d} {c:?}");
        }
    }
}
