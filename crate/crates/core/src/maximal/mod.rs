//! Local dyadic and local uncentered maximal functions of indicator sets.
//!
//! Both operators return a [`ScalarField`] whose superlevel sets are exactly
//! the unions of admissible cubes or balls of density above the level, see
//! [`superlevel_family`].

mod dyadic;
mod family;
mod uncentered;

pub use dyadic::{dyadic_maximal, DyadicCube};
pub use family::{mf_geq_f_check, superlevel_family, LatticeBall, SuperlevelFamily};
pub use uncentered::{ball_offsets, density_field, uncentered_maximal, BallRows};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridGeometry, GridSet, ScalarField};

/// Discretization of the supremum over radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusSchedule {
    Arithmetic { r_min: f64, r_max: f64, step: f64 },
    Geometric { r_min: f64, r_max: f64, ratio: f64 },
    Explicit { radii: Vec<f64> },
}

impl RadiusSchedule {
    /// Geometric with ratio 1.05 from one cell to half the box diagonal.
    pub fn default_for(geometry: &GridGeometry) -> Self {
        Self::Geometric { r_min: geometry.h(), r_max: 0.5 * geometry.diameter(), ratio: 1.05 }
    }

    pub fn radii(&self) -> Vec<f64> {
        match *self {
            Self::Arithmetic { r_min, r_max, step } if step > 0.0 && r_min > 0.0 => {
                let n = ((r_max - r_min) / step + 1e-9).floor().max(0.0) as usize;
                (0..=n).map(|i| r_min + step * i as f64).collect()
            }
            Self::Geometric { r_min, r_max, ratio } if ratio > 1.0 && r_min > 0.0 => {
                let mut out = Vec::new();
                let mut r = r_min;
                while r <= r_max * (1.0 + 1e-12) {
                    out.push(r);
                    r *= ratio;
                }
                out
            }
            Self::Explicit { ref radii } => radii.clone(),
            _ => Vec::new(),
        }
    }

    /// Checks non-emptiness, strict increase, `r_min ≥ h` and `r_max ≤` box diameter.
    pub fn validate(&self, geometry: &GridGeometry) -> Result<Vec<f64>> {
        let radii = self.radii();
        let bad = |m: &str| Err(Error::InvalidSchedule(m.to_string()));
        if radii.is_empty() {
            return bad("no radii");
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return bad("radii not strictly increasing");
        }
        let tol = 1e-9 * geometry.h();
        if radii[0] < geometry.h() - tol {
            return bad("smallest radius below one cell");
        }
        if *radii.last().expect("nonempty") > geometry.diameter() + tol {
            return bad("largest radius exceeds the box diameter");
        }
        Ok(radii)
    }

    pub fn r_min(&self) -> Option<f64> {
        self.radii().first().copied()
    }
}

/// Which maximal operator to apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operator {
    Dyadic,
    Uncentered { schedule: RadiusSchedule },
}

impl Operator {
    pub fn uncentered_default(geometry: &GridGeometry) -> Self {
        Operator::Uncentered { schedule: RadiusSchedule::default_for(geometry) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Operator::Dyadic => "dyadic",
            Operator::Uncentered { .. } => "uncentered",
        }
    }

    /// Apply the operator to the indicator of `set`.
    pub fn apply(&self, set: &GridSet, domain: &Domain) -> Result<ScalarField> {
        match self {
            Operator::Dyadic => dyadic_maximal(set, domain),
            Operator::Uncentered { schedule } => uncentered_maximal(set, domain, schedule),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let g = GridGeometry::unit(2, 64).unwrap();
        let r = RadiusSchedule::Arithmetic { r_min: 1.0 / 64.0, r_max: 4.0 / 64.0, step: 1.0 / 64.0 };
        assert_eq!(r.validate(&g).unwrap().len(), 4);
        let geo = RadiusSchedule::default_for(&g).validate(&g).unwrap();
        assert!((geo[1] / geo[0] - 1.05).abs() < 1e-12);
        assert!(*geo.last().unwrap() <= 0.5 * g.diameter());
        assert!(RadiusSchedule::Explicit { radii: vec![] }.validate(&g).is_err());
        assert!(RadiusSchedule::Explicit { radii: vec![0.001] }.validate(&g).is_err());
        assert!(RadiusSchedule::Explicit { radii: vec![0.1, 0.05] }.validate(&g).is_err());
        assert!(RadiusSchedule::Explicit { radii: vec![3.0] }.validate(&g).is_err());
    }
}
