//! Exact squared Euclidean distance transform (Felzenszwalb–Huttenlocher).
//!
//! Distances are measured between cell centers in cell units.

use rayon::prelude::*;

use crate::grid::{GridGeometry, GridSet, MAX_DIM};

/// One-dimensional lower envelope pass over `f` in place.
fn pass_1d(f: &mut [f64], v: &mut [usize], z: &mut [f64], out: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    let mut first = None;
    for q in 0..n {
        if f[q].is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(q0) = first else { return };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in q0 + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            // z[0] is -inf, so this stops at k == 0 at the latest
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        out[q] = dq * dq + f[p];
    }
    f.copy_from_slice(&out[..n]);
}

/// Squared distance (cell units) from every cell center to the nearest
/// cell of `features`; infinite when there is none.
pub fn squared_distance(features: &GridSet) -> Vec<f64> {
    let g = features.geometry();
    let mut dist: Vec<f64> = features
        .mask()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let shape = g.shape().to_vec();
    let strides = g.strides();
    for axis in 0..g.dim() {
        let n = shape[axis];
        let stride = strides[axis];
        // lines along `axis` start at cells whose `axis` coordinate is zero
        let starts: Vec<usize> = (0..g.len()).filter(|&i| g.coords(i)[axis] == 0).collect();
        let lines: Vec<(usize, Vec<f64>)> = starts
            .par_iter()
            .map(|&s| {
                let mut f: Vec<f64> = (0..n).map(|j| dist[s + j * stride]).collect();
                let mut v = vec![0usize; n];
                let mut z = vec![0.0; n + 1];
                let mut out = vec![0.0; n];
                pass_1d(&mut f, &mut v, &mut z, &mut out);
                (s, f)
            })
            .collect();
        for (s, f) in lines {
            for (j, val) in f.into_iter().enumerate() {
                dist[s + j * stride] = val;
            }
        }
    }
    dist
}

/// Squared distance (cell units) from each cell center to the nearest cell
/// center outside `inside`, counting the ring of cells just outside the box.
pub fn squared_distance_to_complement(inside: &GridSet) -> Vec<f64> {
    let g = inside.geometry();
    let mut dist = squared_distance(&inside.complement());
    let shape = g.shape();
    for (idx, d) in dist.iter_mut().enumerate() {
        let c = g.coords(idx);
        let mut best = f64::INFINITY;
        for k in 0..g.dim() {
            let m = (c[k] + 1).min(shape[k] - c[k]) as f64;
            best = best.min(m * m);
        }
        *d = d.min(best);
    }
    dist
}

/// Squared distance (world units) from a world point to the nearest center
/// of a cell in `set`, by brute force. Used as a reference in tests.
pub fn brute_squared_distance(set: &GridSet, p: &[f64]) -> f64 {
    let g: &GridGeometry = set.geometry();
    set.cells()
        .map(|i| {
            let c = g.center(i);
            (0..g.dim().min(MAX_DIM)).map(|k| (c[k] - p[k]).powi(2)).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (d, n) in [(1, 40), (2, 24), (3, 10)] {
            let g = GridGeometry::cube(d, n, 1.0).unwrap();
            for _ in 0..5 {
                let mask = (0..g.len()).map(|_| rng.gen_bool(0.05)).collect();
                let s = GridSet::from_mask(&g, mask).unwrap();
                let fast = squared_distance(&s);
                for i in 0..g.len() {
                    let c = g.center(i);
                    let brute = brute_squared_distance(&s, &c[..d]);
                    assert_eq!(fast[i], brute, "d={d} cell {i}");
                }
            }
        }
    }

    #[test]
    fn complement_distance_sees_box_edge() {
        let g = GridGeometry::cube(2, 9, 1.0).unwrap();
        let full = GridSet::full(&g);
        let d = squared_distance_to_complement(&full);
        assert_eq!(d[g.index([4, 4, 0])], 25.0);
        assert_eq!(d[g.index([0, 4, 0])], 1.0);
    }
}
