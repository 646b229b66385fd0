//! Local uncentered maximal function over balls centered on the cell-center
//! lattice.
//!
//! For a radius `r` the density field `D_r(c) = #(E ∩ B(c,r)) / #B(c,r)` is
//! computed from per-row prefix sums of `E`, one span per row of the ball.
//! The maximal function at `x` is then `max_r max_{|c-x|<r} D_r(c)`: a max
//! dilation of `D_r` by the same ball, evaluated with one sparse table per
//! row of `D_r`.

use rayon::prelude::*;

use super::RadiusSchedule;
use crate::edt::squared_distance_to_complement;
use crate::error::Result;
use crate::grid::{Domain, GridGeometry, GridSet, ScalarField};

/// Lattice points of the open ball of radius `rc` (cell units) around the
/// origin, stored as spans `[-w, w]` along axis 0 for each `(dy, dz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallRows {
    pub rows: Vec<([isize; 2], usize)>,
    pub count: usize,
}

impl BallRows {
    pub fn contains(&self, p: [isize; 3]) -> bool {
        self.rows
            .iter()
            .any(|&(o, w)| o == [p[1], p[2]] && p[0].unsigned_abs() <= w)
    }
}

/// Half-width of the span at squared row offset `q`, or `None` if the row
/// misses the ball.
fn span(q: f64, rc2: f64) -> Option<usize> {
    if q >= rc2 {
        return None;
    }
    let mut k = (rc2 - q).sqrt().floor() as i64;
    while k > 0 && (k * k) as f64 + q >= rc2 {
        k -= 1;
    }
    while ((k + 1) * (k + 1)) as f64 + q < rc2 {
        k += 1;
    }
    Some(k as usize)
}

pub fn ball_offsets(d: usize, rc: f64) -> BallRows {
    let rc2 = rc * rc;
    let reach = rc.ceil() as isize;
    let ry = if d > 1 { reach } else { 0 };
    let rz = if d > 2 { reach } else { 0 };
    let mut rows = Vec::new();
    for dz in -rz..=rz {
        for dy in -ry..=ry {
            if let Some(w) = span((dy * dy + dz * dz) as f64, rc2) {
                rows.push(([dy, dz], w));
            }
        }
    }
    let count = rows.iter().map(|(_, w)| 2 * w + 1).sum();
    BallRows { rows, count }
}

/// Row layout helpers: a grid seen as `n_rows` rows of length `n0`.
struct Rows {
    n0: usize,
    n1: usize,
    n2: usize,
}

impl Rows {
    fn new(g: &GridGeometry) -> Self {
        let s = g.shape();
        Self { n0: s[0], n1: s.get(1).copied().unwrap_or(1), n2: s.get(2).copied().unwrap_or(1) }
    }

    fn count(&self) -> usize {
        self.n1 * self.n2
    }

    /// Row index of `row + offset`, if inside the box.
    fn shifted(&self, row: usize, off: [isize; 2]) -> Option<usize> {
        let y = (row % self.n1) as isize + off[0];
        let z = (row / self.n1) as isize + off[1];
        (y >= 0 && z >= 0 && (y as usize) < self.n1 && (z as usize) < self.n2)
            .then(|| y as usize + self.n1 * z as usize)
    }
}

/// `D_r` at every cell center; `-1` where `B(c, r) ⊄ Ω`.
pub fn density_field(set: &GridSet, domain: &Domain, radius: f64) -> Result<Vec<f64>> {
    let g = set.geometry();
    domain.check_geometry(g)?;
    let admissible = admissibility(domain);
    Ok(density_with(set, admissible.as_deref(), radius))
}

/// Squared distance to `Ω`'s complement, or `None` in free space.
pub(crate) fn admissibility(domain: &Domain) -> Option<Vec<f64>> {
    match domain {
        Domain::FreeSpace => None,
        Domain::Within(omega) => Some(squared_distance_to_complement(omega)),
    }
}

struct Prefix {
    sums: Vec<u32>,
    nonzero: Vec<bool>,
}

fn row_prefix(set: &GridSet, rows: &Rows) -> Prefix {
    let n0 = rows.n0;
    let mask = set.mask();
    let mut sums = vec![0u32; rows.count() * (n0 + 1)];
    let mut nonzero = vec![false; rows.count()];
    for r in 0..rows.count() {
        let base = r * (n0 + 1);
        for x in 0..n0 {
            sums[base + x + 1] = sums[base + x] + mask[r * n0 + x] as u32;
        }
        nonzero[r] = sums[base + n0] > 0;
    }
    Prefix { sums, nonzero }
}

pub(crate) fn density_with(set: &GridSet, admissible: Option<&[f64]>, radius: f64) -> Vec<f64> {
    let g = set.geometry();
    let rows = Rows::new(g);
    let prefix = row_prefix(set, &rows);
    let rc = radius / g.h();
    let ball = ball_offsets(g.dim(), rc);
    density_rows(g, &rows, &prefix, &ball, admissible, rc * rc)
}

fn density_rows(
    g: &GridGeometry,
    rows: &Rows,
    prefix: &Prefix,
    ball: &BallRows,
    admissible: Option<&[f64]>,
    rc2: f64,
) -> Vec<f64> {
    let n0 = rows.n0;
    let total = ball.count as f64;
    let mut out = vec![0.0; g.len()];
    out.par_chunks_mut(n0).enumerate().for_each(|(row, dst)| {
        let mut acc = vec![0u32; n0];
        for &(off, w) in &ball.rows {
            let Some(src) = rows.shifted(row, off) else { continue };
            if !prefix.nonzero[src] {
                continue;
            }
            let p = &prefix.sums[src * (n0 + 1)..(src + 1) * (n0 + 1)];
            for (x, a) in acc.iter_mut().enumerate() {
                let lo = x.saturating_sub(w);
                let hi = (x + w + 1).min(n0);
                *a += p[hi] - p[lo];
            }
        }
        for (x, v) in dst.iter_mut().enumerate() {
            let ok = admissible.is_none_or(|a| a[row * n0 + x] >= rc2);
            *v = if ok { acc[x] as f64 / total } else { -1.0 };
        }
    });
    out
}

/// Sparse table over one row for O(1) range maxima.
struct SparseRow {
    levels: Vec<Vec<f64>>,
    max: f64,
}

impl SparseRow {
    fn build(row: &[f64]) -> Self {
        let n = row.len();
        let mut levels = vec![row.to_vec()];
        let mut span = 1;
        while 2 * span <= n {
            let prev = levels.last().expect("level 0");
            let next: Vec<f64> = (0..=n - 2 * span).map(|i| prev[i].max(prev[i + span])).collect();
            levels.push(next);
            span *= 2;
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { levels, max }
    }

    fn range_max(&self, lo: usize, hi_inclusive: usize) -> f64 {
        let len = hi_inclusive - lo + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let t = &self.levels[k];
        t[lo].max(t[hi_inclusive + 1 - (1 << k)])
    }
}

/// Raise `out` to the max dilation of `density` by the ball.
fn dilate_into(out: &mut [f64], density: &[f64], rows: &Rows, ball: &BallRows) {
    let n0 = rows.n0;
    let tables: Vec<Option<SparseRow>> = density
        .par_chunks(n0)
        .map(|r| r.iter().any(|&v| v > 0.0).then(|| SparseRow::build(r)))
        .collect();
    out.par_chunks_mut(n0).enumerate().for_each(|(row, dst)| {
        let floor = dst.iter().copied().fold(f64::INFINITY, f64::min);
        for &(off, w) in &ball.rows {
            let Some(src) = rows.shifted(row, off) else { continue };
            let Some(t) = &tables[src] else { continue };
            if t.max <= floor {
                continue;
            }
            for (x, v) in dst.iter_mut().enumerate() {
                let lo = x.saturating_sub(w);
                let hi = (x + w).min(n0 - 1);
                let m = t.range_max(lo, hi);
                if m > *v {
                    *v = m;
                }
            }
        }
    });
}

/// Local uncentered maximal function of the indicator of `set`.
///
/// `M(x) = max { #(E∩B)/#B : B = B(c,r), r in the schedule, c on the lattice,
/// |c − x| < r, B ⊆ Ω }`, and `0` where no such ball exists.
pub fn uncentered_maximal(
    set: &GridSet,
    domain: &Domain,
    schedule: &RadiusSchedule,
) -> Result<ScalarField> {
    let g = set.geometry();
    domain.check_geometry(g)?;
    let radii = schedule.validate(g)?;
    let mut out = vec![0.0; g.len()];
    if set.is_empty() {
        return ScalarField::new(g, out);
    }
    let rows = Rows::new(g);
    let prefix = row_prefix(set, &rows);
    let admissible = admissibility(domain);
    for r in radii {
        let rc = r / g.h();
        let ball = ball_offsets(g.dim(), rc);
        let density = density_rows(g, &rows, &prefix, &ball, admissible.as_deref(), rc * rc);
        dilate_into(&mut out, &density, &rows, &ball);
    }
    ScalarField::new(g, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct evaluation of the definition: every lattice center, every radius.
    pub(crate) fn brute(set: &GridSet, domain: &Domain, radii: &[f64]) -> Vec<f64> {
        let g = set.geometry();
        let d = g.dim();
        let mut out = vec![0.0f64; g.len()];
        for &r in radii {
            let rc2 = (r / g.h()).powi(2);
            for c in 0..g.len() {
                let cc = g.coords(c);
                let (mut inside, mut hits, mut total) = (true, 0usize, 0usize);
                let mut members = Vec::new();
                let reach = (r / g.h()).ceil() as isize + 1;
                let rz = if d > 2 { reach } else { 0 };
                let ry = if d > 1 { reach } else { 0 };
                for dz in -rz..=rz {
                    for dy in -ry..=ry {
                        for dx in -reach..=reach {
                            if ((dx * dx + dy * dy + dz * dz) as f64) >= rc2 {
                                continue;
                            }
                            total += 1;
                            match g.offset(cc, [dx, dy, dz]) {
                                Some(i) => {
                                    inside &= domain.contains(i);
                                    hits += set.contains(i) as usize;
                                    members.push(i);
                                }
                                None => inside &= domain.is_free_space(),
                            }
                        }
                    }
                }
                if !inside {
                    continue;
                }
                let v = hits as f64 / total as f64;
                for i in members {
                    out[i] = out[i].max(v);
                }
            }
        }
        out
    }

    #[test]
    fn offsets_are_strict() {
        let b = ball_offsets(2, 1.0);
        assert_eq!(b.count, 1);
        let b = ball_offsets(2, 2.0);
        // |p|^2 < 4: 9 points minus none on the circle except (±2,0),(0,±2) excluded
        assert_eq!(b.count, 9);
        assert!(!b.contains([2, 0, 0]) && b.contains([1, 1, 0]));
        assert_eq!(ball_offsets(3, 1.5).count, 19);
        assert_eq!(ball_offsets(1, 2.5).count, 5);
    }

    #[test]
    fn matches_brute_force_free_and_masked() {
        let g = GridGeometry::unit(2, 20).unwrap();
        let e = GridSet::from_fn(&g, |p| (p[0] - 0.4).powi(2) + (p[1] - 0.55).powi(2) < 0.03 || p[0] > 0.85);
        let omega = GridSet::from_fn(&g, |p| p[1] > 0.1 && p[0] + p[1] < 1.6);
        let sched = RadiusSchedule::Geometric { r_min: g.h(), r_max: 0.4, ratio: 1.3 };
        let radii = sched.radii();
        for dom in [Domain::FreeSpace, Domain::Within(omega)] {
            let fast = uncentered_maximal(&e, &dom, &sched).unwrap();
            let slow = brute(&e, &dom, &radii);
            assert_eq!(fast.values(), &slow[..]);
        }
    }

    #[test]
    fn matches_brute_force_3d_and_1d() {
        let g = GridGeometry::unit(3, 10).unwrap();
        let e = GridSet::from_fn(&g, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.4).powi(2) + (p[2] - 0.5).powi(2) < 0.04);
        let sched = RadiusSchedule::Geometric { r_min: g.h(), r_max: 0.5, ratio: 1.4 };
        let fast = uncentered_maximal(&e, &Domain::FreeSpace, &sched).unwrap();
        assert_eq!(fast.values(), &brute(&e, &Domain::FreeSpace, &sched.radii())[..]);

        let g = GridGeometry::unit(1, 40).unwrap();
        let e = GridSet::from_fn(&g, |p| (0.3..0.4).contains(&p[0]));
        let sched = RadiusSchedule::Arithmetic { r_min: g.h(), r_max: 0.5, step: g.h() };
        let fast = uncentered_maximal(&e, &Domain::FreeSpace, &sched).unwrap();
        assert_eq!(fast.values(), &brute(&e, &Domain::FreeSpace, &sched.radii())[..]);
    }

    #[test]
    fn empty_and_full() {
        let g = GridGeometry::unit(2, 16).unwrap();
        let sched = RadiusSchedule::default_for(&g);
        let m = uncentered_maximal(&GridSet::empty(&g), &Domain::FreeSpace, &sched).unwrap();
        assert!(m.values().iter().all(|&v| v == 0.0));
        let full = GridSet::full(&g);
        let m = uncentered_maximal(&full, &Domain::Within(full.clone()), &sched).unwrap();
        assert!(m.values().iter().all(|&v| v == 1.0));
    }
}
