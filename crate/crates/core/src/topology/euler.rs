use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::area::AreaField;
use crate::curvature::CurvatureField;
use crate::numerics::stable_sum;
use crate::{Error, Result};

/// Euler characteristic and genus from integrated Gaussian curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyEstimate {
    pub euler: f64,
    /// `(2 − χ) / 2`.
    pub genus_real: f64,
    /// `genus_real` rounded to the nearest integer, ties to even.
    pub genus: i64,
    /// `K_i A_i / 2π`, zero for flagged points.
    pub contributions: Vec<f64>,
    /// Number of points excluded from the sum.
    pub flagged: usize,
}

impl TopologyEstimate {
    pub fn from_contributions(contributions: Vec<f64>, flagged: usize) -> Self {
        let euler = stable_sum(&contributions);
        let genus_real = (2.0 - euler) / 2.0;
        TopologyEstimate {
            euler,
            genus_real,
            genus: round_half_even(genus_real),
            contributions,
            flagged,
        }
    }
}

/// Round to the nearest integer with exact halves going to the even neighbor.
pub fn round_half_even(x: f64) -> i64 {
    let r = x.round_ties_even();
    if r.is_finite() {
        r as i64
    } else if r > 0.0 {
        i64::MAX
    } else {
        i64::MIN
    }
}

/// `χ = (1/2π) Σ K_i A_i` over the points for which `clean(i)` holds.
pub fn euler_from_parts(
    gaussian: &[f64],
    areas: &[f64],
    clean: impl Fn(usize) -> bool,
) -> Result<TopologyEstimate> {
    let mut flagged = 0;
    let contributions: Vec<f64> = gaussian
        .iter()
        .zip(areas)
        .enumerate()
        .map(|(i, (k, a))| {
            if clean(i) {
                k * a / (2.0 * PI)
            } else {
                flagged += 1;
                0.0
            }
        })
        .collect();
    if flagged == contributions.len() {
        return Err(Error::AllPointsFlagged);
    }
    Ok(TopologyEstimate::from_contributions(contributions, flagged))
}

/// Discrete Gauss-Bonnet estimate. Points flagged by the curvature solver or
/// with a degenerate chart contribute zero.
pub fn euler_estimate(curv: &CurvatureField, areas: &AreaField) -> Result<TopologyEstimate> {
    euler_from_parts(&curv.gaussian, &areas.areas, |i| {
        curv.flags[i].is_clean() && !areas.degenerate[i]
    })
}
