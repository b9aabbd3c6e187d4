//! End-to-end estimation: neighborhoods, frames, charts, areas, curvature
//! and topology.

use serde::{Deserialize, Serialize};

use crate::area::{area_field, project_to_tangent, AreaConfig, AreaField, TangentChart};
use crate::cloud_io::PointCloud;
use crate::curvature::{curvature_field, Centering, CurvatureField, CurvatureMethod, Solver};
use crate::frames::{build_knn, orient_normals, pca_frames, Frames, Neighborhood, OrientMethod, PcaWeighting, DEFAULT_K};
use crate::synthetic::{GT_GAUSSIAN, GT_MEAN};
use crate::topology::{euler_estimate, TopologyEstimate};
use crate::{Error, Result};

/// Where per-point normals come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalSource {
    /// PCA of each neighborhood, signs fixed by the orientation method.
    #[default]
    Pca,
    /// The cloud's own normals, used as given.
    Input,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub k: usize,
    pub area: AreaConfig,
    pub solver: Solver,
    pub centering: Centering,
    pub orient: OrientMethod,
    pub normals: NormalSource,
    pub pca_weighting: PcaWeighting,
}

impl PipelineConfig {
    pub fn method(&self) -> CurvatureMethod {
        CurvatureMethod {
            solver: self.solver,
            centering: self.centering,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: DEFAULT_K,
            area: AreaConfig::default(),
            solver: Solver::Sylvester,
            centering: Centering::default(),
            orient: OrientMethod::MstPropagation,
            normals: NormalSource::Pca,
            pca_weighting: PcaWeighting::default(),
        }
    }
}

/// Every intermediate of one run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub neighborhood: Neighborhood,
    pub frames: Frames,
    pub chart: TangentChart,
    pub areas: AreaField,
    pub curvature: CurvatureField,
    pub topology: TopologyEstimate,
}

/// Neighborhoods and oriented frames.
pub fn estimate_frames(cloud: &PointCloud, config: &PipelineConfig) -> Result<(Neighborhood, Frames)> {
    let neigh = build_knn(cloud, config.k)?;
    let frames = match config.normals {
        NormalSource::Input => {
            Frames::from_normals(cloud.normals().ok_or(Error::MissingInputNormals)?)
        }
        NormalSource::Pca => {
            let raw = pca_frames(&neigh, config.pca_weighting)?;
            orient_normals(cloud, &raw, &neigh, config.orient)?
        }
    };
    Ok((neigh, frames))
}

/// Curvature and topology from given neighborhoods and frames.
pub fn analyze_with_frames(neighborhood: Neighborhood, frames: Frames, config: &PipelineConfig) -> Result<Analysis> {
    let chart = project_to_tangent(&neighborhood, &frames);
    let areas = area_field(&chart, config.area);
    let mut curvature = curvature_field(&chart, config.method());
    curvature.flag_inputs(frames.quality.iter().map(|q| !q.is_clean()));
    let topology = euler_estimate(&curvature, &areas)?;
    Ok(Analysis {
        neighborhood,
        frames,
        chart,
        areas,
        curvature,
        topology,
    })
}

/// Full estimate for a cloud.
pub fn analyze(cloud: &PointCloud, config: &PipelineConfig) -> Result<Analysis> {
    let (neigh, frames) = estimate_frames(cloud, config)?;
    analyze_with_frames(neigh, frames, config)
}

/// Absolute curvature errors against the cloud's ground-truth channels,
/// over points the solver did not flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureErrors {
    pub max_abs_k: f64,
    pub mean_abs_k: f64,
    /// Absent when the solver produces no mean curvature.
    pub max_abs_h: Option<f64>,
    pub mean_abs_h: Option<f64>,
    pub evaluated: usize,
}

/// Compare estimates with `gt_gaussian` / `gt_mean`.
///
/// Ground-truth mean curvature follows the `W = −∇n` convention while the
/// estimator maps position offsets to normal offsets (`+∇n`), so mean
/// curvature is compared against the negated channel.
pub fn curvature_errors(cloud: &PointCloud, curvature: &CurvatureField) -> Option<CurvatureErrors> {
    let gt_k = cloud.channel(GT_GAUSSIAN)?;
    let gt_h = cloud.channel(GT_MEAN);
    let clean: Vec<usize> = (0..curvature.len()).filter(|&i| curvature.flags[i].is_clean()).collect();
    if clean.is_empty() {
        return None;
    }
    let stats = |err: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = clean.iter().map(|&i| err(i)).collect();
        let max = v.iter().fold(0.0f64, |m, x| m.max(*x));
        (max, crate::numerics::stable_sum(&v) / v.len() as f64)
    };
    let (max_abs_k, mean_abs_k) = stats(&|i| (curvature.gaussian[i] - gt_k[i]).abs());
    let (max_abs_h, mean_abs_h) = match (&curvature.mean, gt_h) {
        (Some(h), Some(gt)) => {
            let (a, b) = stats(&|i| (h[i] + gt[i]).abs());
            (Some(a), Some(b))
        }
        _ => (None, None),
    };
    Some(CurvatureErrors {
        max_abs_k,
        mean_abs_k,
        max_abs_h,
        mean_abs_h,
        evaluated: clean.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::vec3::dot;
    use crate::synthetic::{sample_ellipsoid, sample_torus, EllipsoidSpec, SurfaceSampling, TorusSpec};

    #[test]
    fn plane_patch_has_zero_curvature() {
        let mut pts = Vec::new();
        for a in 0..30 {
            for b in 0..30 {
                pts.push([a as f64 * 0.1 + 0.013 * (b % 3) as f64, b as f64 * 0.1, 0.0]);
            }
        }
        let cloud = PointCloud::new(pts).unwrap();
        for solver in [Solver::Sylvester, Solver::SymmetrizedPinv] {
            let config = PipelineConfig {
                solver,
                ..PipelineConfig::default()
            };
            let out = analyze(&cloud, &config).unwrap();
            let c = &out.curvature;
            for i in 0..cloud.len() {
                assert!(c.gaussian[i].abs() < 1e-10);
                assert!(c.mean.as_ref().unwrap()[i].abs() < 1e-10);
                assert!(c.frobenius.as_ref().unwrap()[i].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sphere_with_exact_normals() {
        let (cloud, gt) = sample_ellipsoid(&EllipsoidSpec::sphere(2_000, 3)).unwrap();
        let cloud = gt.annotate(&cloud).unwrap();
        let config = PipelineConfig {
            normals: NormalSource::Input,
            ..PipelineConfig::default()
        };
        let out = analyze(&cloud, &config).unwrap();
        let err = curvature_errors(&cloud, &out.curvature).unwrap();
        assert!(err.mean_abs_k < 0.05, "{err:?}");
        assert!(err.mean_abs_h.unwrap() < 0.05, "{err:?}");
        let c = &out.curvature;
        let mean = c.mean.as_ref().unwrap();
        for i in 0..cloud.len() {
            assert_eq!(c.gaussian[i], out.curvature.gaussian[i]);
            if c.flags[i].is_clean() {
                assert!(mean[i] * mean[i] >= c.gaussian[i] - 1e-12);
            }
        }
        let det = analyze(
            &cloud,
            &PipelineConfig {
                solver: Solver::CommutingDet,
                ..config
            },
        )
        .unwrap();
        assert!(det.curvature.mean.is_none());
        assert!(curvature_errors(&cloud, &det.curvature).unwrap().mean_abs_h.is_none());
    }

    #[test]
    fn torus_gaussian_sign_census() {
        let (cloud, gt) = sample_torus(&TorusSpec {
            major: 5.0,
            minor: 1.0,
            n: 10_000,
            scheme: SurfaceSampling::UniformArea,
            seed: 5,
        })
        .unwrap();
        let out = analyze(&cloud, &PipelineConfig::default()).unwrap();
        let agree = (0..cloud.len())
            .filter(|&i| out.curvature.gaussian[i].signum() == gt.gaussian[i].signum())
            .count();
        assert!(agree as f64 >= 0.95 * cloud.len() as f64, "{agree}");
        // MST orientation on a torus is outward.
        let outward = (0..cloud.len()).filter(|&i| dot(out.frames.frames[i].n, gt.exact_normals[i]) > 0.0).count();
        assert_eq!(outward, cloud.len());
    }
}
