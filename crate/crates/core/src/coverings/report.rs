use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Per-scale summary of a multi-scale cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRecord {
    pub n: i32,
    pub balls: usize,
    /// Property 1: balls of this scale are pairwise disjoint.
    pub disjoint: bool,
    /// Property 2: boundary points checked and left uncovered at this scale.
    pub coverage_checked: usize,
    pub coverage_violations: usize,
    /// Property 3: balls farther than `2·diam C` from the boundary set.
    pub proximity_violations: usize,
    /// Property 4: smallest measured constant over the scale.
    pub c4_min: Option<f64>,
}

/// One ball of the final cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverBallRecord {
    pub scale: i32,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Index of the input ball it was built from.
    pub parent: usize,
    /// Property-4 constant of this ball.
    pub c4: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub property: u8,
    pub scale: i32,
    pub point: Vec<f64>,
    pub ball: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub seed: Option<u64>,
    pub resolution: Vec<usize>,
    pub h: f64,
    pub schedule: Option<String>,
    pub lambda: f64,
    pub scales: Vec<ScaleRecord>,
    pub balls: Vec<CoverBallRecord>,
    pub violations: Vec<Violation>,
    /// Pairs of intersecting balls from different scales.
    pub cross_scale_overlaps: usize,
    /// Candidate centers where the surface bisection found no crossing.
    pub skipped_points: usize,
}

impl CoverReport {
    /// Properties 1 to 3 hold and every property-4 constant is positive.
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
            && self.scales.iter().all(|s| s.disjoint)
            && self.balls.iter().all(|b| b.c4 > 0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One CSV row per ball.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scale", "parent", "radius", "c4", "center"])
            .map_err(|e| crate::Error::Format(e.to_string()))?;
        for b in &self.balls {
            let center = b.center.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
            w.write_record([
                b.scale.to_string(),
                b.parent.to_string(),
                b.radius.to_string(),
                b.c4.to_string(),
                center,
            ])
            .map_err(|e| crate::Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::Error::Format(e.to_string()))
    }
}
