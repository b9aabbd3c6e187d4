//! Curvature and topology estimation for point clouds.
//!
//! The pipeline runs in five stages:
//!
//! 1. k-nearest neighborhoods and PCA moving frames ([`frames`]),
//! 2. tangent-plane charts and Monte-Carlo Voronoi area elements ([`area`]),
//! 3. a self-adjoint Weingarten map per point ([`curvature`]),
//! 4. discrete Gauss-Bonnet integration into an Euler characteristic and genus ([`topology`]),
//! 5. optional gradient-descent refinement of the normals against the
//!    integrity-well loss ([`topology::self_optimize`]).
//!
//! Everything is deterministic for a fixed seed, independent of the number of
//! worker threads.

pub mod area;
pub mod cloud_io;
pub mod curvature;
mod error;
pub mod frames;
pub mod numerics;
pub mod pipeline;
pub mod synthetic;
pub mod topology;

pub use error::{Error, Result};
