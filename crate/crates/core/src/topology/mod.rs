//! Gauss-Bonnet integration, the integrity-well loss and gradient descent
//! over per-point normal angles.

mod euler;
mod gradient;
mod loss;
mod optimize;

pub use euler::{euler_estimate, euler_from_parts, round_half_even, TopologyEstimate};
pub use gradient::{
    angles_from_frames, euler_and_gradient, frames_from_angles, grad_euler_wrt_angles,
    grad_euler_wrt_positions, local_gaussian, EulerGradient,
};
pub use loss::{integrity_well, integrity_well_grad, integrity_well_real, loss, loss_grad, LossWeights};
pub use optimize::{self_optimize, OptimizationTrace, OptimizeConfig, OptimizeOutcome, TraceRow};
