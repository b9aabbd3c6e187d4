use std::f64::consts::PI;

use super::{sample_surface, GroundTruth, ParametricSurface, SurfaceSampling};
use crate::cloud_io::PointCloud;
use crate::numerics::vec3::Vec3;
use crate::{Error, Result};

/// Torus of major radius `R` and tube radius `r`, with `u` the tube angle
/// and `v` the angle around the symmetry axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    pub major: f64,
    pub minor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TorusSpec {
    pub major: f64,
    pub minor: f64,
    pub n: usize,
    pub scheme: SurfaceSampling,
    pub seed: u64,
}

impl Torus {
    pub fn new(major: f64, minor: f64) -> Result<Self> {
        if !(major > minor && minor > 0.0) || !major.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "torus needs R > r > 0, got R = {major}, r = {minor}"
            )));
        }
        Ok(Torus { major, minor })
    }

    /// Tube angle of a point on (or near) the surface.
    pub fn tube_angle(&self, p: Vec3) -> f64 {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt() - self.major;
        p[2].atan2(rho)
    }
}

impl ParametricSurface for Torus {
    fn domain(&self) -> ([f64; 2], [f64; 2]) {
        ([0.0, 2.0 * PI], [0.0, 2.0 * PI])
    }

    fn point(&self, u: f64, v: f64) -> Vec3 {
        let w = self.major + self.minor * u.cos();
        [w * v.cos(), w * v.sin(), self.minor * u.sin()]
    }

    fn area_element(&self, u: f64, _v: f64) -> f64 {
        self.minor * (self.major + self.minor * u.cos())
    }

    fn area_element_bound(&self) -> f64 {
        self.minor * (self.major + self.minor)
    }

    fn normal(&self, u: f64, v: f64) -> Vec3 {
        [u.cos() * v.cos(), u.cos() * v.sin(), u.sin()]
    }

    fn gaussian(&self, u: f64, _v: f64) -> f64 {
        u.cos() / (self.minor * (self.major + self.minor * u.cos()))
    }

    fn mean(&self, u: f64, _v: f64) -> f64 {
        -0.5 * (1.0 / self.minor + u.cos() / (self.major + self.minor * u.cos()))
    }

    fn total_area(&self) -> f64 {
        4.0 * PI * PI * self.major * self.minor
    }

    fn euler(&self) -> i64 {
        0
    }
}

pub fn sample_torus(spec: &TorusSpec) -> Result<(PointCloud, GroundTruth)> {
    let surface = Torus::new(spec.major, spec.minor)?;
    sample_surface(&surface, spec.n, spec.scheme, spec.seed)
}
