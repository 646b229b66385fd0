use serde::{Deserialize, Serialize};

use super::dyadic::{DyadicCube, Pyramid};
use super::uncentered::{admissibility, ball_offsets, density_with};
use super::Operator;
use crate::error::{Error, Result};
use crate::geometry::Ball;
use crate::grid::{Domain, GridGeometry, GridSet, ScalarField};

/// A ball centered at a cell center, radius in world units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeBall {
    pub cell: usize,
    pub radius: f64,
    pub density: f64,
}

impl LatticeBall {
    pub fn to_ball(&self, geometry: &GridGeometry) -> Ball {
        let c = geometry.center(self.cell);
        Ball::new(c[..geometry.dim()].to_vec(), self.radius)
    }

    /// Cells of the box whose centers lie strictly inside the ball.
    pub fn cells(&self, geometry: &GridGeometry) -> Vec<usize> {
        let rc = self.radius / geometry.h();
        let coords = geometry.coords(self.cell);
        let ball = ball_offsets(geometry.dim(), rc);
        let mut out = Vec::with_capacity(ball.count);
        for &([dy, dz], w) in &ball.rows {
            let w = w as isize;
            for dx in -w..=w {
                if let Some(i) = geometry.offset(coords, [dx, dy, dz]) {
                    out.push(i);
                }
            }
        }
        out
    }
}

/// Balls or maximal dyadic cubes of density above a level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "members", rename_all = "snake_case")]
pub enum SuperlevelFamily {
    Balls(Vec<LatticeBall>),
    Cubes(Vec<DyadicCube>),
}

impl SuperlevelFamily {
    pub fn len(&self) -> usize {
        match self {
            Self::Balls(b) => b.len(),
            Self::Cubes(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Union of the cells of the first `k` members.
    pub fn prefix_union(&self, geometry: &GridGeometry, k: usize) -> GridSet {
        let mut set = GridSet::empty(geometry);
        match self {
            Self::Balls(b) => b.iter().take(k).for_each(|ball| {
                ball.cells(geometry).into_iter().for_each(|i| set.insert(i))
            }),
            Self::Cubes(c) => c.iter().take(k).for_each(|cube| {
                cube.cells(geometry).into_iter().for_each(|i| set.insert(i))
            }),
        }
        set
    }

    pub fn union(&self, geometry: &GridGeometry) -> GridSet {
        self.prefix_union(geometry, self.len())
    }
}

/// All admissible balls (resp. maximal admissible dyadic cubes) with
/// density strictly above `λ`.
///
/// Concentric balls are represented by the largest one, which leaves the
/// union unchanged; the union equals `{M1_E > λ}` cell for cell. Balls are
/// ordered by center cell, cubes by level (coarsest first) then index.
pub fn superlevel_family(
    set: &GridSet,
    domain: &Domain,
    lambda: f64,
    op: &Operator,
) -> Result<SuperlevelFamily> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidLevel(lambda));
    }
    let g = set.geometry();
    domain.check_geometry(g)?;
    match op {
        Operator::Uncentered { schedule } => {
            let radii = schedule.validate(g)?;
            let admissible = admissibility(domain);
            let mut best: Vec<Option<(f64, f64)>> = vec![None; g.len()];
            for r in radii {
                let density = density_with(set, admissible.as_deref(), r);
                for (b, &v) in best.iter_mut().zip(&density) {
                    if v > lambda {
                        *b = Some((r, v));
                    }
                }
            }
            let balls = best
                .into_iter()
                .enumerate()
                .filter_map(|(cell, b)| b.map(|(radius, density)| LatticeBall { cell, radius, density }))
                .collect();
            Ok(SuperlevelFamily::Balls(balls))
        }
        Operator::Dyadic => {
            let pyr = Pyramid::build(set, domain)?;
            let d = g.dim();
            let mut cubes = Vec::new();
            let mut covered_above: Vec<bool> = Vec::new();
            let mut above_shape = [1usize; 3];
            for (level, lvl) in pyr.levels.iter().enumerate().rev() {
                let mut covered = vec![false; lvl.set.len()];
                for i2 in 0..lvl.shape[2] {
                    for i1 in 0..lvl.shape[1] {
                        for i0 in 0..lvl.shape[0] {
                            let i = i0 + lvl.shape[0] * (i1 + lvl.shape[1] * i2);
                            let parent_covered = !covered_above.is_empty() && {
                                let p = [i0 / 2, if d > 1 { i1 / 2 } else { 0 }, if d > 2 { i2 / 2 } else { 0 }];
                                covered_above[p[0] + above_shape[0] * (p[1] + above_shape[1] * p[2])]
                            };
                            if parent_covered {
                                covered[i] = true;
                                continue;
                            }
                            let cube = DyadicCube { level: level as u32, index: [i0, i1, i2] };
                            if pyr.density(&cube).is_some_and(|v| v > lambda) {
                                covered[i] = true;
                                cubes.push(cube);
                            }
                        }
                    }
                }
                covered_above = covered;
                above_shape = lvl.shape;
            }
            Ok(SuperlevelFamily::Cubes(cubes))
        }
    }
}

/// Cells where the discrete version of `Mf ≥ f` fails.
///
/// Dyadic: every cell of `E ∩ Ω` is itself an admissible cube, so `f` must
/// be 1 there. Uncentered: `f` must be 1 on the erosion of `E` by the
/// smallest schedule ball (restricted to centers whose ball fits in `Ω`).
pub fn mf_geq_f_check(
    set: &GridSet,
    domain: &Domain,
    field: &ScalarField,
    op: &Operator,
) -> Result<Vec<usize>> {
    let g = set.geometry();
    g.ensure_same(field.geometry())?;
    domain.check_geometry(g)?;
    let domain_of_check = match op {
        Operator::Dyadic => set.cells().filter(|&i| domain.contains(i)).collect::<Vec<_>>(),
        Operator::Uncentered { schedule } => {
            let r = schedule.validate(g)?[0];
            erosion(set, domain, r).cells().collect()
        }
    };
    Ok(domain_of_check.into_iter().filter(|&i| field.get(i) < 1.0).collect())
}

/// Centers `x` with `B(x, r) ⊆ E` and `B(x, r) ⊆ Ω`.
pub(crate) fn erosion(set: &GridSet, domain: &Domain, radius: f64) -> GridSet {
    let g = set.geometry();
    let ball = ball_offsets(g.dim(), radius / g.h());
    let mask = (0..g.len())
        .map(|x| {
            let c = g.coords(x);
            set.contains(x)
                && ball.rows.iter().all(|&([dy, dz], w)| {
                    let w = w as isize;
                    (-w..=w).all(|dx| {
                        g.offset(c, [dx, dy, dz])
                            .is_some_and(|i| set.contains(i) && domain.contains(i))
                    })
                })
        })
        .collect();
    GridSet::from_mask(g, mask).expect("same geometry")
}
