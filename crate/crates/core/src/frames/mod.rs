//! k-nearest neighborhoods, PCA moving frames and normal orientation.

mod angles;
mod knn;
mod orient;
mod pca;

pub use angles::{angles_from_normal, frame_from_angles};
pub use knn::{brute_force_knn, build_knn, KdTree, Neighborhood, MIN_K};
pub use orient::{orient_normals, OrientMethod};
pub use pca::{pca_frame, pca_frame_weighted, pca_frames, FrameQuality, Frames, PcaWeighting};

use crate::numerics::vec3::Vec3;
use crate::numerics::Real;

/// Default neighborhood size.
pub const DEFAULT_K: usize = 20;

/// Orthonormal frame `(t, t′, n)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<S = f64> {
    pub t: [S; 3],
    pub t_prime: [S; 3],
    pub n: [S; 3],
}

impl Frame<f64> {
    /// Frame with the given unit normal. `t` is the normalized projection of
    /// the coordinate axis least aligned with `n`; `t′ = n × t`.
    pub fn from_normal(n: Vec3) -> Self {
        use crate::numerics::vec3::{cross, dot, normalize};
        let axis = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
            [1.0, 0.0, 0.0]
        } else if n[1].abs() <= n[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let d = dot(axis, n);
        let t = normalize([axis[0] - d * n[0], axis[1] - d * n[1], axis[2] - d * n[2]]);
        Frame {
            t,
            t_prime: cross(n, t),
            n,
        }
    }

    /// Same frame with the normal reversed; `t′` is reversed too so that
    /// `t × t′ = n` is preserved.
    pub fn flipped(&self) -> Self {
        let neg = |v: Vec3| [-v[0], -v[1], -v[2]];
        Frame {
            t: self.t,
            t_prime: neg(self.t_prime),
            n: neg(self.n),
        }
    }

    pub fn lift<S: Real>(&self) -> Frame<S> {
        use crate::numerics::vec3::lift;
        Frame {
            t: lift(self.t),
            t_prime: lift(self.t_prime),
            n: lift(self.n),
        }
    }

    /// Largest deviation from orthonormality.
    pub fn orthonormality_error(&self) -> f64 {
        use crate::numerics::vec3::dot;
        let v = [self.t, self.t_prime, self.n];
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(v[i], v[j]) - target).abs());
            }
        }
        worst
    }
}
