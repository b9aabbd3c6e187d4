use rand::Rng;

use crate::numerics::vec3::Vec3;
use crate::numerics::{rng_for, split_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSampling {
    /// Uniform density per unit surface area (rejection sampling).
    UniformArea,
    /// Shifted lattice, uniform in the parameter domain; area weights vary.
    Parametric,
}

/// A surface given by a chart over a rectangle `[u0,u1] × [v0,v1]`.
pub trait ParametricSurface {
    fn domain(&self) -> ([f64; 2], [f64; 2]);
    fn point(&self, u: f64, v: f64) -> Vec3;
    /// `|∂x/∂u × ∂x/∂v|`.
    fn area_element(&self, u: f64, v: f64) -> f64;
    /// An upper bound on [`area_element`](Self::area_element) over the domain.
    fn area_element_bound(&self) -> f64;
    fn normal(&self, u: f64, v: f64) -> Vec3;
    fn gaussian(&self, u: f64, v: f64) -> f64;
    fn mean(&self, u: f64, v: f64) -> f64;
    fn total_area(&self) -> f64;
    fn euler(&self) -> i64;

    fn domain_area(&self) -> f64 {
        let ([u0, u1], [v0, v1]) = self.domain();
        (u1 - u0) * (v1 - v0)
    }
}

/// Parameter pairs whose image is uniformly distributed per unit area:
/// proposals uniform in `(u, v)` are accepted with probability
/// `area_element / bound`. Sample `i` uses its own random stream.
pub fn uniform_area_sample_param<S: ParametricSurface + ?Sized>(
    surface: &S,
    n: usize,
    seed: u64,
) -> Vec<[f64; 2]> {
    let ([u0, u1], [v0, v1]) = surface.domain();
    let bound = surface.area_element_bound();
    let seed = split_seed(seed, "uniform_area");
    (0..n)
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            loop {
                let u = rng.random_range(u0..u1);
                let v = rng.random_range(v0..v1);
                if rng.random::<f64>() * bound < surface.area_element(u, v) {
                    break [u, v];
                }
            }
        })
        .collect()
}

/// Randomly shifted golden-ratio lattice in the parameter rectangle: the
/// first coordinate takes `n` equispaced values, the second follows the
/// golden-ratio sequence.
pub fn lattice_params<S: ParametricSurface + ?Sized>(
    surface: &S,
    n: usize,
    seed: u64,
) -> Vec<[f64; 2]> {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    let ([u0, u1], [v0, v1]) = surface.domain();
    let mut rng = rng_for(split_seed(seed, "lattice"), 0);
    let (su, sv): (f64, f64) = (rng.random(), rng.random());
    (0..n)
        .map(|i| {
            let a = ((i as f64 + 0.5) / n as f64 + su).fract();
            let b = (i as f64 * GOLDEN + sv).fract();
            [u0 + a * (u1 - u0), v0 + b * (v1 - v0)]
        })
        .collect()
}
