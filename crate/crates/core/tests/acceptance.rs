//! Acceptance criteria 1 to 9, one line each.
//!
//! Runs without the libtest harness so every line is printed. The process
//! exits non-zero if a criterion fails, except for the large-ball trend of
//! criterion 9, which is reported but not enforced (see the README).

use std::time::Instant;

use maxvar::coverings::{
    boxing_ball, large_ball_campaign, multiscale_covers, random_dense_family, union_perimeter_campaign,
    vitali_subfamily, BallFamily,
};
use maxvar::experiments::{corpus_constants, golden_dir, optimality_experiment, Envelopes, ShapeSpec, Shape};
use maxvar::geometry::{ball_intersection_volume, reach_campaign, shrink_campaign, volume_ratio_check, Ball};
use maxvar::grid::{
    boundary_union_check, total_variation_direct, variation_coarea, Domain, GridGeometry, GridSet, ScalarField,
};
use maxvar::maximal::{dyadic_maximal, mf_geq_f_check, Operator};
use maxvar::numeric::{logspace, median};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

const SEED: u64 = 42;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: impl Into<String>) -> Line {
    Line { pass, detail: detail.into() }
}

fn random_set(rng: &mut ChaCha8Rng, g: &GridGeometry) -> GridSet {
    let p = rng.gen_range(0.2..0.8);
    GridSet::from_mask(g, (0..g.len()).map(|_| rng.gen_bool(p)).collect()).unwrap()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn coarea() -> Line {
    let g = GridGeometry::unit(2, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for case in 0..50 {
        // alternate continuous values and few-level fields with many ties
        let values: Vec<f64> = (0..g.len())
            .map(|_| if case % 2 == 0 { rng.gen_range(0.0..1.0) } else { rng.gen_range(0..5) as f64 / 4.0 })
            .collect();
        let f = ScalarField::new(&g, values).unwrap();
        let dom = if case % 3 == 0 { Domain::Within(random_set(&mut rng, &g)) } else { Domain::FreeSpace };
        let a = variation_coarea(&f, &dom).unwrap();
        let b = total_variation_direct(&f, &dom).unwrap();
        worst = worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
    }
    line(worst <= 1e-9, format!("50 fields at 64², worst relative gap {worst:.2e}"))
}

/// Every dyadic cube containing the cell, counted directly.
fn brute_dyadic(set: &GridSet, dom: &Domain) -> Vec<f64> {
    let g = set.geometry();
    let d = g.dim();
    let n = g.shape()[0];
    let top = n.trailing_zeros();
    (0..g.len())
        .map(|i| {
            if !dom.contains(i) {
                return 0.0;
            }
            let c = g.coords(i);
            let mut best = 0.0f64;
            for l in 0..=top {
                let side = 1usize << l;
                let lo: Vec<usize> = (0..d).map(|k| c[k] / side * side).collect();
                let (mut inside, mut in_dom, mut vol) = (0u32, 0u32, 0u32);
                for off in 0..side.pow(d as u32) {
                    let mut q = [0usize; 3];
                    let mut rest = off;
                    for k in 0..d {
                        q[k] = lo[k] + rest % side;
                        rest /= side;
                    }
                    let j = g.index(q);
                    vol += 1;
                    inside += set.contains(j) as u32;
                    in_dom += dom.contains(j) as u32;
                }
                if in_dom == vol {
                    best = best.max(inside as f64 / vol as f64);
                }
            }
            best
        })
        .collect()
}

fn dyadic_exactness() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut cases = Vec::new();
    let g2 = GridGeometry::unit(2, 32).unwrap();
    for i in 0..10 {
        cases.push((g2.clone(), i % 2 == 1));
    }
    let g3 = GridGeometry::unit(3, 16).unwrap();
    cases.push((g3.clone(), false));
    cases.push((g3, true));
    let mut mismatches = 0;
    for (g, masked) in &cases {
        let e = random_set(&mut rng, g);
        let dom = if *masked {
            // an Ω missing a few cells so some cubes become inadmissible
            let mut m = GridSet::full(g);
            for _ in 0..6 {
                m.remove(rng.gen_range(0..g.len()));
            }
            Domain::Within(m)
        } else {
            Domain::FreeSpace
        };
        let fast = dyadic_maximal(&e, &dom).unwrap();
        let slow = brute_dyadic(&e, &dom);
        mismatches += fast.values().iter().zip(&slow).filter(|(a, b)| a != b).count();
    }
    line(mismatches == 0, format!("ten 32² and two 16³ cases, {mismatches} cells differ"))
}

fn optimality() -> Line {
    let lambdas = logspace(1e-3, 0.3, 25);
    let rep = optimality_experiment(2, 512, &lambdas).unwrap();
    let fit = rep.rate.fit.clone().expect("fit");
    let worst = rep.radius_checks.iter().map(|c| c.cells_off).fold(0.0, f64::max);
    let levels: Vec<String> = rep.radius_checks.iter().map(|c| format!("{:e}", c.lambda)).collect();
    line(
        rep.slope_ok && rep.radii_ok,
        format!(
            "slope {:.4} ± {:.4} (want −0.5 ± 0.1); radii at λ ∈ {{{}}} within {worst:.2} cells of the axial oracle",
            fit.slope,
            fit.half_width,
            levels.join(", ")
        ),
    )
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn boundedness_and_constants() -> (Line, Line) {
    let (_, coarse) = corpus_constants(128, SEED).unwrap();
    let (_, fine) = corpus_constants(256, SEED).unwrap();
    let env = Envelopes::load(&golden_dir()).unwrap();
    let mut ok4 = true;
    let mut ok5 = true;
    let mut d4 = Vec::new();
    let mut d5 = Vec::new();
    for (key, v) in &fine {
        let change = relative_change(coarse[key], *v);
        let check = env.check(key, *v).unwrap();
        let ok = v.is_finite() && change < 0.2 && check.passes;
        let text = format!("{key} {v:.3} (Δ {:.1}%, limit {:.3})", 100.0 * change, check.limit);
        if key.starts_with("variation_ratio") {
            ok4 &= ok;
            d4.push(text);
        } else {
            ok5 &= ok;
            d5.push(text);
        }
    }
    (line(ok4, d4.join("; ")), line(ok5, d5.join("; ")))
}

/// Lattice-point density of `E` in `b`, points beyond the box counted as outside.
fn lattice_density(set: &GridSet, b: &Ball) -> f64 {
    let g = set.geometry();
    let h = g.h();
    let n = g.shape()[0] as i64;
    let reach = (b.radius / h).ceil() as i64 + 1;
    let c0 = ((b.center[0] / h) - 0.5).round() as i64;
    let c1 = ((b.center[1] / h) - 0.5).round() as i64;
    let (mut all, mut hit) = (0usize, 0usize);
    for j in c1 - reach..=c1 + reach {
        for i in c0 - reach..=c0 + reach {
            let p = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
            if dist2(&p, &b.center) >= b.radius * b.radius {
                continue;
            }
            all += 1;
            if (0..n).contains(&i) && (0..n).contains(&j) {
                hit += set.contains(g.index([i as usize, j as usize, 0])) as usize;
            }
        }
    }
    hit as f64 / all as f64
}

fn coverings() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let balls: Vec<Ball> = (0..1000)
        .map(|_| Ball::new(vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)], rng.gen_range(0.001..0.05)))
        .collect();
    let fam = BallFamily::new(balls.clone());
    let thin = vitali_subfamily(&fam);
    let t = &thin.balls;
    let overlapping = (0..t.len())
        .flat_map(|i| (i + 1..t.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| dist2(&t[i].center, &t[j].center).sqrt() < t[i].radius + t[j].radius)
        .count();
    let uncovered = balls
        .iter()
        .filter(|b| !t.iter().any(|s| dist2(&b.center, &s.center).sqrt() + b.radius <= 5.0 * s.radius))
        .count();
    let foreign = t.iter().filter(|s| !balls.contains(s)).count();
    let vitali_ok = overlapping == 0 && uncovered == 0 && foreign == 0;

    // boxing: a disk E, an outer ball of density at most 1/2, a start cell in E
    let g = GridGeometry::unit(2, 128).unwrap();
    let mut boxing_worst = 0.0f64;
    let mut boxing_cases = 0;
    while boxing_cases < 50 {
        let (cx, cy, r) = (rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7), rng.gen_range(0.05..0.2));
        let e = GridSet::from_fn(&g, |p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2) < r * r);
        let b1 = Ball::new(vec![rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8)], rng.gen_range(0.1..0.45));
        let starts: Vec<usize> = e.cells().filter(|&i| b1.contains(&g.center(i)[..2])).collect();
        if starts.is_empty() || lattice_density(&e, &b1) > 0.5 {
            continue;
        }
        let x = g.center(starts[rng.gen_range(0..starts.len())]);
        let f = boxing_ball(&e, &b1, &x[..2]).unwrap();
        let err = (lattice_density(&e, &f.ball) - 0.5).abs() / (5.0 * g.h() / f.ball.diameter());
        boxing_worst = boxing_worst.max(err);
        boxing_cases += 1;
    }
    let boxing_ok = boxing_worst <= 1.0;

    let mut multiscale_ok = true;
    let mut min_c4 = f64::INFINITY;
    for (k, shape) in ["balls:6", "annulus:0.15,0.3", "dyadic:3,0.5"].iter().enumerate() {
        let spec = ShapeSpec::new(Shape::parse(shape, 2).unwrap()).with_seed(SEED + k as u64);
        let e = maxvar::experiments::generate_shape(&spec, &g).unwrap();
        for lambda in [0.1, 0.3] {
            let fam = random_dense_family(&e, lambda, 15, SEED + k as u64).unwrap();
            assert_eq!(fam.len(), 15);
            let cover = multiscale_covers(&e, &fam, lambda).unwrap();
            let disjoint = cover.scales.values().all(|s| {
                let b = &s.balls;
                (0..b.len()).all(|i| {
                    (i + 1..b.len()).all(|j| dist2(&b[i].center, &b[j].center).sqrt() >= b[i].radius + b[j].radius)
                })
            });
            let c4 = cover.report.balls.iter().map(|b| b.c4).fold(f64::INFINITY, f64::min);
            min_c4 = min_c4.min(c4);
            multiscale_ok &= disjoint && cover.report.passes() && c4 > 0.0;
        }
    }
    line(
        vitali_ok && boxing_ok && multiscale_ok,
        format!(
            "vitali 1000 balls: {overlapping} overlaps, {uncovered} uncovered; boxing 50 cases worst |density − 1/2| = {boxing_worst:.2e}·(5h/diam F); multiscale 6 inputs of 15 balls, min c4 {min_c4:.3}"
        ),
    )
}

fn monte_carlo_intersection(rng: &mut ChaCha8Rng, b: &Ball, c: &Ball, samples: usize) -> f64 {
    // uniform points in the smaller ball by rejection from its bounding cube
    let (s, o) = if b.radius <= c.radius { (b, c) } else { (c, b) };
    let d = s.center.len();
    let (mut kept, mut hit) = (0usize, 0usize);
    let mut p = vec![0.0; d];
    while kept < samples {
        for k in 0..d {
            p[k] = s.center[k] + s.radius * rng.gen_range(-1.0..1.0);
        }
        if dist2(&p, &s.center) >= s.radius * s.radius {
            continue;
        }
        kept += 1;
        hit += (dist2(&p, &o.center) < o.radius * o.radius) as usize;
    }
    let vol = std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0) * s.radius.powi(d as i32);
    vol * hit as f64 / samples as f64
}

fn geometry_lemmas() -> Line {
    let mut shrink = 0;
    for d in 1..=4 {
        shrink += shrink_campaign(d, 10_000, SEED + d as u64).unwrap().counterexamples;
    }
    let reach2 = reach_campaign(2, 48, 10_000, SEED).unwrap();
    let reach3 = reach_campaign(3, 20, 2_000, SEED).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_mc = 0.0f64;
    let mut configs = 0;
    while configs < 20 {
        let d = 2 + configs % 4;
        let b = Ball::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(0.5..1.5));
        let c = Ball::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_range(0.5..1.5));
        let exact = ball_intersection_volume(&b, &c).unwrap();
        let smaller = b.radius.min(c.radius);
        let v_small = std::f64::consts::PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0) * smaller.powi(d);
        // skip thin overlaps, where 10⁶ samples cannot resolve 1%
        if exact < 0.2 * v_small {
            continue;
        }
        let mc = monte_carlo_intersection(&mut rng, &b, &c, 1_000_000);
        worst_mc = worst_mc.max((mc - exact).abs() / exact);
        configs += 1;
    }

    let vr = volume_ratio_check(25).unwrap();
    let independent = (3..=25).all(|d| {
        let s = |d: f64| std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0);
        s(d as f64) / s(d as f64 - 1.0) <= (d as f64).sqrt()
    });
    let vr_ok = vr.passes && independent && vr.rows.iter().filter(|r| r.d >= 3).all(|r| r.ratio_passes);

    let reach_violations = reach2.violations + reach3.violations;
    line(
        shrink == 0 && reach_violations == 0 && worst_mc <= 0.01 && vr_ok,
        format!(
            "shrink 4×10⁴ trials: {shrink} counterexamples; reach 10⁴ (2D) + 2·10³ (3D): {reach_violations} violations; intersection volume vs 10⁶-sample MC worst {:.3}%; σ_d/σ_(d−1) ≤ √d for 3 ≤ d ≤ 25: {}",
            100.0 * worst_mc,
            vr_ok
        ),
    )
}

fn inclusions() -> Line {
    let g = GridGeometry::unit(2, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut union_v = 0;
    for _ in 0..100 {
        let a = random_set(&mut rng, &g);
        let b = random_set(&mut rng, &g);
        union_v += boundary_union_check(&a, &b).unwrap().len();
    }
    let ops = [Operator::Dyadic, Operator::uncentered_default(&g)];
    let mut mf_v = 0;
    for case in 0..100 {
        let e = random_set(&mut rng, &g);
        let op = &ops[case % 2];
        let dom = if case % 4 < 2 { Domain::FreeSpace } else { Domain::Within(random_set(&mut rng, &g).union(&e).unwrap()) };
        let f = op.apply(&e, &dom).unwrap();
        mf_v += mf_geq_f_check(&e, &dom, &f, op).unwrap().len();
    }
    line(union_v == 0 && mf_v == 0, format!("boundary_union 100 pairs: {union_v}; mf_geq_f 100 cases: {mf_v}"))
}

/// Returns the line and whether the enforced parts hold.
fn union_perimeter() -> (Line, bool) {
    let mut medians = Vec::new();
    let mut max_raw = 0.0f64;
    for k in [2.0, 4.0, 8.0] {
        let recs = large_ball_campaign(2, 512, k, 20, SEED).unwrap();
        medians.push(median(&recs.iter().map(|r| r.normalized).collect::<Vec<_>>()));
        max_raw = recs.iter().map(|r| r.ratio).fold(max_raw, f64::max);
    }
    let trend = medians.iter().all(|m| *m <= 2.0 * medians[0]);
    let mut constants = Vec::new();
    let mut within = true;
    for lambda in [0.05, 0.1, 0.2] {
        let recs = union_perimeter_campaign(2, 512, lambda, 40, SEED).unwrap();
        let worst = recs.iter().map(|r| r.constant).fold(0.0, f64::max);
        within &= recs.iter().all(|r| r.ratio <= r.envelope);
        constants.push(format!("λ={lambda}: {worst:.3}"));
    }
    let enforced = within && max_raw <= 1.3;
    let detail = format!(
        "normalized large-ball medians K=2,4,8: {:.2}, {:.2}, {:.2} (trend {}); raw ratio max {max_raw:.3}; union perimeter within envelope: {within}, constants {}",
        medians[0],
        medians[1],
        medians[2],
        if trend { "bounded" } else { "grows like K^d" },
        constants.join(", ")
    );
    (line(trend && enforced, detail), enforced)
}

fn report(n: usize, l: &Line, started: Instant, budget_s: f64) -> bool {
    let secs = started.elapsed().as_secs_f64();
    let ok = l.pass && secs <= budget_s;
    println!(
        "criterion {n}: {} {} [{secs:.1} s of {budget_s:.0} s]",
        if ok { "PASS" } else { "FAIL" },
        l.detail
    );
    ok
}

fn main() {
    let mut failed = Vec::new();
    let t = Instant::now();
    if !report(1, &coarea(), t, 5.0) {
        failed.push(1);
    }
    let t = Instant::now();
    if !report(2, &dyadic_exactness(), t, 30.0) {
        failed.push(2);
    }
    let t = Instant::now();
    if !report(3, &optimality(), t, 180.0) {
        failed.push(3);
    }
    let t = Instant::now();
    let (c4, c5) = boundedness_and_constants();
    if !report(4, &c4, t, 300.0) {
        failed.push(4);
    }
    if !report(5, &c5, t, 300.0) {
        failed.push(5);
    }
    let t = Instant::now();
    if !report(6, &coverings(), t, 120.0) {
        failed.push(6);
    }
    let t = Instant::now();
    if !report(7, &geometry_lemmas(), t, 120.0) {
        failed.push(7);
    }
    let t = Instant::now();
    if !report(8, &inclusions(), t, 30.0) {
        failed.push(8);
    }
    let t = Instant::now();
    let (c9, enforced) = union_perimeter();
    let on_time = report(9, &c9, t, 180.0) || (enforced && t.elapsed().as_secs_f64() <= 180.0);
    if !on_time {
        failed.push(9);
    }
    if failed.is_empty() {
        println!("acceptance: all enforced criteria hold");
    } else {
        println!("acceptance: criteria {failed:?} failed");
        std::process::exit(1);
    }
}
