use std::f64::consts::PI;

use super::Frame;
use crate::numerics::vec3::Vec3;
use crate::numerics::Real;

/// Frame from spherical angles: `n = (sinθ cosφ, sinθ sinφ, cosθ)`,
/// `t = ∂n/∂θ` and `t′ = n × t = (-sinφ, cosφ, 0)`.
///
/// `∂n/∂θ` has unit length for every `(φ, θ)`, including the poles, so no
/// fallback basis is needed.
pub fn frame_from_angles<S: Real>(phi: S, theta: S) -> Frame<S> {
    let (sp, cp) = (phi.sin(), phi.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    Frame {
        n: [st * cp, st * sp, ct],
        t: [ct * cp, ct * sp, -st],
        t_prime: [-sp, cp, S::zero()],
    }
}

/// Inverse chart: `θ ∈ [0, π]`, `φ ∈ (-π, π]`, and `φ = 0` on the poles.
pub fn angles_from_normal(n: Vec3) -> (f64, f64) {
    let rho = n[0].hypot(n[1]);
    let theta = rho.atan2(n[2]);
    if rho == 0.0 {
        return (0.0, theta);
    }
    let mut phi = n[1].atan2(n[0]);
    if phi <= -PI {
        phi = PI;
    }
    (phi, theta)
}
