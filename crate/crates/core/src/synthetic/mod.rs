//! Analytic test surfaces with exact curvature, normals and area elements,
//! plus closed triangle meshes of known genus.
//!
//! Curvature sign convention: the shape operator is `W(v) = -∇_v n` with
//! outward normals. Gaussian curvature is unaffected by the choice; the mean
//! curvature of the unit sphere is `-1`.

mod ellipsoid;
pub mod meshes;
mod param;
mod torus;

pub use ellipsoid::{sample_ellipsoid, Ellipsoid, EllipsoidSpec};
pub use param::{lattice_params, uniform_area_sample_param, ParametricSurface, SurfaceSampling};
pub use torus::{sample_torus, Torus, TorusSpec};

use crate::cloud_io::PointCloud;
use crate::numerics::vec3::Vec3;
use crate::Result;

/// Channel names used when ground truth is attached to a cloud.
pub const GT_GAUSSIAN: &str = "gt_gaussian";
pub const GT_MEAN: &str = "gt_mean";

/// Exact per-sample quantities for an analytic surface.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub gaussian: Vec<f64>,
    pub mean: Vec<f64>,
    pub exact_normals: Vec<Vec3>,
    /// Quadrature weight of each sample, summing to approximately `total_area`.
    pub area_elements: Vec<f64>,
    pub total_area: f64,
    pub euler: i64,
}

impl GroundTruth {
    /// Copy of `cloud` carrying exact normals and the `gt_*` channels.
    pub fn annotate(&self, cloud: &PointCloud) -> Result<PointCloud> {
        cloud
            .clone()
            .with_normals(self.exact_normals.clone())?
            .with_channel(GT_GAUSSIAN, self.gaussian.clone())?
            .with_channel(GT_MEAN, self.mean.clone())
    }

    /// `(1/2π) Σ K_i A_i` using the exact curvature and quadrature weights.
    pub fn oracle_euler(&self) -> f64 {
        let terms: Vec<f64> = self
            .gaussian
            .iter()
            .zip(&self.area_elements)
            .map(|(k, a)| k * a)
            .collect();
        crate::numerics::stable_sum(&terms) / (2.0 * std::f64::consts::PI)
    }
}

fn sample_surface<S: ParametricSurface>(
    surface: &S,
    n: usize,
    scheme: SurfaceSampling,
    seed: u64,
) -> Result<(PointCloud, GroundTruth)> {
    let total_area = surface.total_area();
    let (params, weights): (Vec<[f64; 2]>, Vec<f64>) = match scheme {
        SurfaceSampling::UniformArea => {
            let p = uniform_area_sample_param(surface, n, seed);
            let w = vec![total_area / n as f64; p.len()];
            (p, w)
        }
        SurfaceSampling::Parametric => {
            let p = lattice_params(surface, n, seed);
            let cell = surface.domain_area() / n as f64;
            let w = p.iter().map(|&[u, v]| surface.area_element(u, v) * cell).collect();
            (p, w)
        }
    };
    let positions: Vec<Vec3> = params.iter().map(|&[u, v]| surface.point(u, v)).collect();
    let cloud = PointCloud::new(positions)?;
    let gt = GroundTruth {
        gaussian: params.iter().map(|&[u, v]| surface.gaussian(u, v)).collect(),
        mean: params.iter().map(|&[u, v]| surface.mean(u, v)).collect(),
        exact_normals: params.iter().map(|&[u, v]| surface.normal(u, v)).collect(),
        area_elements: weights,
        total_area,
        euler: surface.euler(),
    };
    Ok((cloud, gt))
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn rejection_sphere_matches_marsaglia_octants() {
        let sphere = Ellipsoid::new(1.0, 1.0, 1.0).unwrap();
        let n = 40_000;
        let octant = |p: Vec3| (p[0] > 0.0) as usize | ((p[1] > 0.0) as usize) << 1 | ((p[2] > 0.0) as usize) << 2;
        let mut ours = [0f64; 8];
        for [u, v] in uniform_area_sample_param(&sphere, n, 12) {
            ours[octant(sphere.point(u, v))] += 1.0;
        }
        let mut direct = [0f64; 8];
        let mut rng = crate::numerics::rng_for(99, 0);
        for _ in 0..n {
            let g: Vec3 = [0; 3].map(|_| StandardNormal.sample(&mut rng));
            direct[octant(g)] += 1.0;
        }
        // Difference of two binomials with p = 1/8.
        let sd = (2.0 * n as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
        for k in 0..8 {
            assert!((ours[k] - direct[k]).abs() < 3.0 * sd, "octant {k}: {} vs {}", ours[k], direct[k]);
        }
    }

    #[test]
    fn empty_request_gives_empty_params() {
        let t = Torus::new(2.0, 1.0).unwrap();
        assert!(uniform_area_sample_param(&t, 0, 1).is_empty());
    }

    #[test]
    fn annotate_attaches_channels() {
        let spec = TorusSpec { major: 5.0, minor: 1.0, n: 100, scheme: SurfaceSampling::UniformArea, seed: 1 };
        let (cloud, gt) = sample_torus(&spec).unwrap();
        let c = gt.annotate(&cloud).unwrap();
        assert_eq!(c.channel(GT_GAUSSIAN).unwrap(), gt.gaussian.as_slice());
        assert!(c.normals().is_some());
    }
}
