use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Frame, Neighborhood};
use crate::numerics::vec3::{cross, normalize};
use crate::numerics::{eigen_sym3, Sym3};
use crate::{Error, Result};

/// Normalized eigenvalue below which a covariance direction counts as empty.
const RANK_TOL: f64 = 1e-10;
const TRACE_MIN: f64 = 1e-20;

/// Neighbor weights in the covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaWeighting {
    /// Every neighbor counts equally.
    Uniform,
    /// `exp(-2 d² / h²)` with `h` the distance to the farthest neighbor.
    #[default]
    Gaussian,
}

impl std::str::FromStr for PcaWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(PcaWeighting::Uniform),
            "gaussian" => Ok(PcaWeighting::Gaussian),
            other => Err(Error::InvalidSpec(format!("unknown PCA weighting `{other}`"))),
        }
    }
}

/// Per-point diagnostics of the PCA fit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameQuality {
    /// Neighbors are (numerically) collinear; the normal is an arbitrary
    /// direction orthogonal to the line.
    pub collinear: bool,
    /// All neighbors coincide; the frame is a placeholder.
    pub degenerate: bool,
}

impl FrameQuality {
    pub fn is_clean(&self) -> bool {
        !self.collinear && !self.degenerate
    }
}

/// Frames for every point of a cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames {
    pub frames: Vec<Frame>,
    pub quality: Vec<FrameQuality>,
}

impl Frames {
    /// Frames whose normals are given; tangents follow the completion rule
    /// of [`Frame::from_normal`].
    pub fn from_normals(normals: &[[f64; 3]]) -> Self {
        Frames {
            frames: normals.iter().map(|&n| Frame::from_normal(n)).collect(),
            quality: vec![FrameQuality::default(); normals.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn normals(&self) -> Vec<[f64; 3]> {
        self.frames.iter().map(|f| f.n).collect()
    }
}

fn weighted_covariance(offsets: &[[f64; 3]]) -> Sym3 {
    let d2: Vec<f64> = offsets.iter().map(|o| o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).collect();
    let h2 = d2.iter().fold(0.0f64, |m, &v| m.max(v));
    if !(h2 > 0.0) {
        return Sym3::default();
    }
    let w: Vec<f64> = d2.iter().map(|&v| (-2.0 * v / h2).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut mean = [0.0; 3];
    for (o, wi) in offsets.iter().zip(&w) {
        for a in 0..3 {
            mean[a] += wi * o[a] / total;
        }
    }
    let mut c = Sym3::default();
    for (o, wi) in offsets.iter().zip(&w) {
        let d = [o[0] - mean[0], o[1] - mean[1], o[2] - mean[2]];
        c.xx += wi * d[0] * d[0];
        c.xy += wi * d[0] * d[1];
        c.xz += wi * d[0] * d[2];
        c.yy += wi * d[1] * d[1];
        c.yz += wi * d[1] * d[2];
        c.zz += wi * d[2] * d[2];
    }
    c.scale(1.0 / total)
}

/// PCA frame of point `i` from the uniformly weighted covariance; see
/// [`pca_frame_weighted`].
pub fn pca_frame(neigh: &Neighborhood, i: usize) -> Result<(Frame, FrameQuality)> {
    pca_frame_weighted(neigh, i, PcaWeighting::Uniform)
}

/// PCA frame of point `i` from the trace-normalized covariance of its
/// neighbor offsets, centered on their (weighted) mean.
///
/// `t` is the dominant eigenvector, `n` the weakest and `t′ = n × t`.
pub fn pca_frame_weighted(neigh: &Neighborhood, i: usize, weighting: PcaWeighting) -> Result<(Frame, FrameQuality)> {
    let cov = match weighting {
        PcaWeighting::Uniform => Sym3::covariance(neigh.offsets(i)),
        PcaWeighting::Gaussian => weighted_covariance(neigh.offsets(i)),
    };
    let tr = cov.trace();
    if !tr.is_finite() {
        return Err(Error::NonFinite);
    }
    if tr < TRACE_MIN {
        return Err(Error::DegenerateNeighborhood(i));
    }
    let eig = eigen_sym3(&cov.scale(1.0 / tr))?;
    let collinear = eig.values[1] < RANK_TOL;
    let t = normalize(eig.vectors[0]);
    let n = if collinear {
        Frame::from_normal(t).t
    } else {
        // Re-orthogonalize against t to keep the frame exact.
        let raw = eig.vectors[2];
        let d = crate::numerics::vec3::dot(raw, t);
        normalize([raw[0] - d * t[0], raw[1] - d * t[1], raw[2] - d * t[2]])
    };
    let t_prime = cross(n, t);
    Ok((
        Frame { t, t_prime, n },
        FrameQuality {
            collinear,
            degenerate: false,
        },
    ))
}

/// PCA frames for all points. Coincident neighborhoods do not abort: they get
/// the frame of the `z` axis and a `degenerate` flag.
pub fn pca_frames(neigh: &Neighborhood, weighting: PcaWeighting) -> Result<Frames> {
    let results: Vec<Result<(Frame, FrameQuality)>> = (0..neigh.len())
        .into_par_iter()
        .map(|i| pca_frame_weighted(neigh, i, weighting))
        .collect();
    let mut frames = Vec::with_capacity(results.len());
    let mut quality = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok((f, q)) => {
                frames.push(f);
                quality.push(q);
            }
            Err(Error::DegenerateNeighborhood(_)) => {
                frames.push(Frame::from_normal([0.0, 0.0, 1.0]));
                quality.push(FrameQuality {
                    collinear: false,
                    degenerate: true,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Frames { frames, quality })
}
