use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gradient::{angles_from_frames, euler_and_gradient, frames_from_angles, grad_euler_wrt_positions};
use super::{loss, loss_grad, LossWeights, TopologyEstimate};
use crate::area::{area_field, project_to_tangent, AreaConfig, AreaField};
use crate::curvature::{curvature_field, Centering, CurvatureMethod, Solver};
use crate::frames::{Frames, Neighborhood};
use crate::numerics::vec3::Vec3;
use crate::{Error, Result};

/// Gradient-descent settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeConfig {
    /// Maximum number of descent steps.
    pub steps: usize,
    pub lr: f64,
    /// Target Euler characteristic; unsupervised when absent.
    pub chi_gt: Option<f64>,
    pub weights: LossWeights,
    /// Rebuild the area field from the current normals every this many steps.
    pub refresh_every: usize,
    /// Stop once the largest gradient entry falls below this.
    pub grad_tol: f64,
    /// Also descend on point positions (neighbor lists stay fixed).
    pub optimize_positions: bool,
    pub solver: Solver,
    pub centering: Centering,
    pub area: AreaConfig,
    /// Recorded with the run; the descent itself is deterministic.
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            steps: 200,
            lr: 1e-3,
            chi_gt: None,
            weights: LossWeights::default(),
            refresh_every: 10,
            grad_tol: 1e-8,
            optimize_positions: false,
            solver: Solver::Sylvester,
            centering: Centering::default(),
            area: AreaConfig::default(),
            seed: 0,
        }
    }
}

impl OptimizeConfig {
    pub fn method(&self) -> CurvatureMethod {
        CurvatureMethod {
            solver: self.solver,
            centering: self.centering,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidSpec(format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.refresh_every == 0 {
            return Err(Error::InvalidSpec("refresh_every must be at least 1".into()));
        }
        if self.weights.w_match < 0.0 || self.weights.w_well < 0.0 {
            return Err(Error::InvalidSpec("loss weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// One recorded descent step, measured before the update is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub euler: f64,
    pub loss: f64,
    /// Largest absolute entry of the loss gradient.
    pub grad_max: f64,
    /// Seconds since the start of the run.
    pub time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub rows: Vec<TraceRow>,
}

impl OptimizationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with columns `step,euler,loss,grad_max,time_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,euler,loss,grad_max,time_s\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.step, r.euler, r.loss, r.grad_max, r.time_s));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub frames: Frames,
    /// Positions after descent; unchanged unless positions were optimized.
    pub positions: Vec<Vec3>,
    pub initial: TopologyEstimate,
    pub estimate: TopologyEstimate,
    pub trace: OptimizationTrace,
}

fn estimate_for(neigh: &Neighborhood, frames: &Frames, config: &OptimizeConfig, excluded: &[bool]) -> Result<(TopologyEstimate, AreaField)> {
    let chart = project_to_tangent(neigh, frames);
    let areas = area_field(&chart, config.area);
    let mut curv = curvature_field(&chart, config.method());
    curv.flag_inputs(excluded.iter().copied());
    Ok((super::euler_estimate(&curv, &areas)?, areas))
}

/// Plain gradient descent of the loss over every normal's `(φ, θ)`.
///
/// `initial` supplies the starting normals; frames during descent are always
/// completed from the angles. Areas are frozen between refreshes. The final
/// estimate is taken with areas rebuilt from the final normals.
pub fn self_optimize(
    positions: &[Vec3],
    neigh: &Neighborhood,
    initial: &Frames,
    config: &OptimizeConfig,
) -> Result<OptimizeOutcome> {
    config.validate()?;
    let excluded: Vec<bool> = initial.quality.iter().map(|q| !q.is_clean()).collect();
    let (initial_estimate, _) = estimate_for(neigh, initial, config, &excluded)?;
    if config.steps == 0 {
        return Ok(OptimizeOutcome {
            frames: initial.clone(),
            positions: positions.to_vec(),
            estimate: initial_estimate.clone(),
            initial: initial_estimate,
            trace: OptimizationTrace::default(),
        });
    }

    let start = Instant::now();
    let mut angles = angles_from_frames(initial);
    let mut positions = positions.to_vec();
    let mut neigh = neigh.clone();
    let mut trace = OptimizationTrace::default();
    let mut areas = None;
    for step in 0..config.steps {
        if step % config.refresh_every == 0 || areas.is_none() {
            let chart = project_to_tangent(&neigh, &frames_from_angles(&angles));
            areas = Some(area_field(&chart, config.area));
        }
        let areas_now = areas.as_ref().unwrap();
        let eg = euler_and_gradient(&neigh, &angles, areas_now, config.method(), Some(&excluded))?;
        let chi = eg.estimate.euler;
        let value = loss(chi, config.chi_gt, config.weights);
        let slope = loss_grad(chi, config.chi_gt, config.weights);
        let mut grad_max = eg
            .grad
            .iter()
            .fold(0.0f64, |m, g| m.max((slope * g[0]).abs()).max((slope * g[1]).abs()));
        let position_grad = if config.optimize_positions {
            let g = grad_euler_wrt_positions(&neigh, &angles, areas_now, config.method(), Some(&excluded))?;
            for d in &g {
                for v in d {
                    grad_max = grad_max.max((slope * v).abs());
                }
            }
            Some(g)
        } else {
            None
        };
        trace.rows.push(TraceRow {
            step,
            euler: chi,
            loss: value,
            grad_max,
            time_s: start.elapsed().as_secs_f64(),
        });
        if !value.is_finite() || !chi.is_finite() || chi.abs() > 1e6 {
            return Err(Error::Diverged {
                step,
                euler: chi,
                loss: value,
                trace: Box::new(trace),
            });
        }
        if grad_max < config.grad_tol {
            break;
        }
        for (a, g) in angles.iter_mut().zip(&eg.grad) {
            a[0] -= config.lr * slope * g[0];
            a[1] -= config.lr * slope * g[1];
        }
        if let Some(g) = position_grad {
            for (p, d) in positions.iter_mut().zip(&g) {
                for c in 0..3 {
                    p[c] -= config.lr * slope * d[c];
                }
            }
            neigh = neigh.with_positions(&positions);
        }
    }
    let frames = frames_from_angles(&angles);
    let (estimate, _) = estimate_for(&neigh, &frames, config, &excluded)?;
    Ok(OptimizeOutcome {
        frames,
        positions,
        initial: initial_estimate,
        estimate,
        trace,
    })
}
