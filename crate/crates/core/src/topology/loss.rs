use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::numerics::Real;

/// `w(x) = (sin(πx − π/2) + 1)²`: zero at even integers, 4 at odd ones.
pub fn integrity_well(x: f64) -> f64 {
    let s = (PI * x - FRAC_PI_2).sin() + 1.0;
    s * s
}

/// `w′(x) = 2 (sin(πx − π/2) + 1) π cos(πx − π/2)`.
pub fn integrity_well_grad(x: f64) -> f64 {
    let arg = PI * x - FRAC_PI_2;
    2.0 * (arg.sin() + 1.0) * PI * arg.cos()
}

/// [`integrity_well`] over any [`Real`], for dual-number checks.
pub fn integrity_well_real<S: Real>(x: S) -> S {
    let s = (x * PI - FRAC_PI_2).sin() + 1.0;
    s * s
}

/// Weights of the two loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub w_match: f64,
    pub w_well: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            w_match: 1.0,
            w_well: 1.0,
        }
    }
}

/// `w_match·|χ − χ_gt| + w_well·w(χ)`; without `χ_gt` only the well term.
pub fn loss(chi: f64, chi_gt: Option<f64>, weights: LossWeights) -> f64 {
    let well = weights.w_well * integrity_well(chi);
    match chi_gt {
        Some(gt) => weights.w_match * (chi - gt).abs() + well,
        None => well,
    }
}

/// `dL/dχ`, with subgradient 0 for the absolute value at equality.
pub fn loss_grad(chi: f64, chi_gt: Option<f64>, weights: LossWeights) -> f64 {
    let well = weights.w_well * integrity_well_grad(chi);
    match chi_gt {
        Some(gt) => {
            let d = chi - gt;
            let sign = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            weights.w_match * sign + well
        }
        None => well,
    }
}
