use std::f64::consts::PI;

use super::{sample_surface, GroundTruth, ParametricSurface, SurfaceSampling};
use crate::cloud_io::PointCloud;
use crate::numerics::vec3::{normalize, Vec3};
use crate::{Error, Result};

/// `x²/a² + y²/b² + z²/c² = 1`, charted by polar angle `θ ∈ [0, π]` and
/// azimuth `φ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EllipsoidSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: usize,
    pub scheme: SurfaceSampling,
    pub seed: u64,
}

impl EllipsoidSpec {
    /// Unit sphere with uniform-area sampling.
    pub fn sphere(n: usize, seed: u64) -> Self {
        EllipsoidSpec {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            n,
            scheme: SurfaceSampling::UniformArea,
            seed,
        }
    }
}

impl Ellipsoid {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) || !(a * b * c).is_finite() {
            return Err(Error::InvalidSpec(format!(
                "ellipsoid semi-axes must be positive, got ({a}, {b}, {c})"
            )));
        }
        Ok(Ellipsoid { a, b, c })
    }

    fn s(&self, p: Vec3) -> f64 {
        p[0].powi(2) / self.a.powi(4) + p[1].powi(2) / self.b.powi(4) + p[2].powi(2) / self.c.powi(4)
    }

    pub fn gaussian_at(&self, p: Vec3) -> f64 {
        let abc2 = (self.a * self.b * self.c).powi(2);
        1.0 / (abc2 * self.s(p).powi(2))
    }

    pub fn mean_at(&self, p: Vec3) -> f64 {
        let abc2 = (self.a * self.b * self.c).powi(2);
        let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        (r2 - self.a * self.a - self.b * self.b - self.c * self.c)
            / (2.0 * abc2 * self.s(p).powi(3).sqrt())
    }

    /// Normalized gradient of the implicit function.
    pub fn normal_at(&self, p: Vec3) -> Vec3 {
        normalize([
            p[0] / (self.a * self.a),
            p[1] / (self.b * self.b),
            p[2] / (self.c * self.c),
        ])
    }

    pub fn implicit(&self, p: Vec3) -> f64 {
        (p[0] / self.a).powi(2) + (p[1] / self.b).powi(2) + (p[2] / self.c).powi(2) - 1.0
    }
}

impl ParametricSurface for Ellipsoid {
    fn domain(&self) -> ([f64; 2], [f64; 2]) {
        ([0.0, PI], [0.0, 2.0 * PI])
    }

    fn point(&self, theta: f64, phi: f64) -> Vec3 {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        [self.a * st * cp, self.b * st * sp, self.c * ct]
    }

    fn area_element(&self, theta: f64, phi: f64) -> f64 {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let (a, b, c) = (self.a, self.b, self.c);
        st * ((b * c * st * cp).powi(2) + (a * c * st * sp).powi(2) + (a * b * ct).powi(2)).sqrt()
    }

    fn area_element_bound(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        (b * c).max(a * c).max(a * b)
    }

    fn normal(&self, u: f64, v: f64) -> Vec3 {
        self.normal_at(self.point(u, v))
    }

    fn gaussian(&self, u: f64, v: f64) -> f64 {
        self.gaussian_at(self.point(u, v))
    }

    fn mean(&self, u: f64, v: f64) -> f64 {
        self.mean_at(self.point(u, v))
    }

    /// Exact for spheres; otherwise Simpson in `θ` times the periodic
    /// trapezoid rule in `φ`, over one octant.
    fn total_area(&self) -> f64 {
        if self.a == self.b && self.b == self.c {
            return 4.0 * PI * self.a * self.a;
        }
        const NT: usize = 2048;
        const NP: usize = 1024;
        let ht = 0.5 * PI / NT as f64;
        let hp = 0.5 * PI / NP as f64;
        let mut total = 0.0;
        for i in 0..=NT {
            let w = if i == 0 || i == NT {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let theta = i as f64 * ht;
            // Midpoint nodes in φ: the octant integrand is smooth and even
            // about both ends, so this converges like the periodic rule.
            let row: f64 = (0..NP)
                .map(|j| self.area_element(theta, (j as f64 + 0.5) * hp))
                .sum();
            total += w * row;
        }
        8.0 * total * ht / 3.0 * hp
    }

    fn euler(&self) -> i64 {
        2
    }
}

pub fn sample_ellipsoid(spec: &EllipsoidSpec) -> Result<(PointCloud, GroundTruth)> {
    let surface = Ellipsoid::new(spec.a, spec.b, spec.c)?;
    sample_surface(&surface, spec.n, spec.scheme, spec.seed)
}
