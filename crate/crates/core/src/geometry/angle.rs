use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{random_in_ball, random_unit};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    pub d: usize,
    pub n: f64,
    pub trials: usize,
    /// Largest angle over the samples and the adversarial configuration.
    pub max_angle: f64,
    pub passes: bool,
    /// Angle of the adversarial configuration alone.
    pub adversarial_angle: f64,
    /// Smallest `N` (to bisection accuracy) at which the adversarial configuration passes.
    pub critical_n: f64,
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Angle between `y₁−x₁` and `y₂−x₂` in the worst configuration for `C` the
/// unit ball: `ang(x₁,x₂) = π/4`, `|x_i| = √(N²−1)` and `y_i ⊥ x_i` on the
/// unit sphere, turned away from each other. Equals `π/4 + 2·asin(1/N)`.
pub fn worst_case_angle(n: f64) -> f64 {
    let s = (n * n - 1.0).max(0.0).sqrt() * (1.0 + 1e-12);
    let point = |phi: f64, r: f64| vec![r * phi.cos(), r * phi.sin()];
    let (p1, p2) = (-PI / 8.0, PI / 8.0);
    let x1 = point(p1, s);
    let x2 = point(p2, s);
    let mut worst: f64 = 0.0;
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            let y1 = point(p1 + s1 * PI / 2.0, 1.0);
            let y2 = point(p2 + s2 * PI / 2.0, 1.0);
            worst = worst.max(angle(&sub(&y1, &x1), &sub(&y2, &x2)));
        }
    }
    worst
}

/// Bisection for the smallest `N` with `worst_case_angle(N) ≤ π/2`.
pub fn critical_angle_n() -> f64 {
    let (mut lo, mut hi) = (1.0 + 1e-9, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if worst_case_angle(mid) <= PI / 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Random falsification of the angle lemma with `C` the unit ball in `R^d`.
///
/// Each trial draws `x₁`, `x₂` with `ang(x₁,x₂) ≤ π/4` and norms near the
/// critical shell, and `y_i ∈ C` with `|y_i − x_i| ≥ N`.
pub fn min_angle_probe(d: usize, n: f64, trials: usize, seed: u64) -> Result<AngleReport> {
    if d < 2 {
        return Err(Error::InvalidArgument("angle probe needs d ≥ 2".into()));
    }
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("N must exceed 1, got {n}")));
    }
    let sampled = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let u1 = random_unit(&mut rng, d);
            let u2 = rotate_towards(&u1, &random_unit(&mut rng, d), rng.gen_range(0.0..=PI / 4.0));
            let pick = |u: &[f64], rng: &mut ChaCha8Rng| {
                let base = (n * n - 1.0).sqrt();
                let s = base * rng.gen_range(1.0..1.3) + rng.gen_range(0.0..1.0);
                let x: Vec<f64> = u.iter().map(|c| c * s).collect();
                for _ in 0..64 {
                    let y = random_in_ball(rng, d);
                    if super::distance(&x, &y) >= n {
                        return Some((x, y));
                    }
                }
                let y: Vec<f64> = u.iter().map(|c| -c).collect();
                (super::distance(&x, &y) >= n).then_some((x, y))
            };
            match (pick(&u1, &mut rng), pick(&u2, &mut rng)) {
                (Some((x1, y1)), Some((x2, y2))) => angle(&sub(&y1, &x1), &sub(&y2, &x2)),
                _ => 0.0,
            }
        })
        .reduce(|| 0.0, f64::max);
    let adversarial_angle = worst_case_angle(n);
    let max_angle = sampled.max(adversarial_angle);
    Ok(AngleReport {
        d,
        n,
        trials,
        max_angle,
        passes: max_angle <= PI / 2.0,
        adversarial_angle,
        critical_n: critical_angle_n(),
    })
}

/// Unit vector at angle `theta` from `u` in the plane spanned by `u` and `v`.
fn rotate_towards(u: &[f64], v: &[f64], theta: f64) -> Vec<f64> {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let mut w: Vec<f64> = v.iter().zip(u).map(|(b, a)| b - dot * a).collect();
    let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nw < 1e-9 {
        w = vec![0.0; u.len()];
        let k = if u[0].abs() < 0.9 { 0 } else { 1 };
        w[k] = 1.0;
        return rotate_towards(u, &w, theta);
    }
    u.iter().zip(&w).map(|(a, b)| a * theta.cos() + b / nw * theta.sin()).collect()
}
