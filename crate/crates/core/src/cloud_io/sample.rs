use rand::Rng;

use super::{PointCloud, TriMesh};
use crate::numerics::rng_for;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Faces drawn with probability proportional to area.
    UniformArea,
    /// Faces drawn uniformly, ignoring area.
    Random,
}

/// Draw `n` points on the mesh surface. Within a face the point is uniform
/// in barycentric coordinates. Deterministic per seed.
pub fn sample_mesh(
    mesh: &TriMesh,
    n: usize,
    scheme: SamplingScheme,
    seed: u64,
) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidSpec("sample count must be at least 1".into()));
    }
    let mut rng = rng_for(seed, 0);
    let cdf: Vec<f64> = match scheme {
        SamplingScheme::UniformArea => {
            let mut acc = 0.0;
            (0..mesh.faces.len())
                .map(|f| {
                    acc += mesh.face_area(f);
                    acc
                })
                .collect()
        }
        SamplingScheme::Random => Vec::new(),
    };
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let face = match scheme {
            SamplingScheme::UniformArea => {
                let total = *cdf.last().expect("mesh has faces");
                let target = rng.random::<f64>() * total;
                cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
            }
            SamplingScheme::Random => rng.random_range(0..mesh.faces.len()),
        };
        let [a, b, c] = mesh.faces[face].map(|i| mesh.vertices[i]);
        let r1: f64 = rng.random::<f64>().sqrt();
        let r2: f64 = rng.random();
        let (wa, wb, wc) = (1.0 - r1, r1 * (1.0 - r2), r1 * r2);
        points.push([
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
            wa * a[2] + wb * b[2] + wc * c[2],
        ]);
    }
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::vec3::{cross, dot, norm, sub};

    fn two_triangles() -> TriMesh {
        // Areas 1 and 3.
        let v = vec![
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [10.0, 0.0, 0.0],
            [16.0, 0.0, 0.0],
            [10.0, 1.0, 0.0],
        ];
        TriMesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap()
    }

    #[test]
    fn area_weighted_face_counts() {
        let mesh = two_triangles();
        assert!((mesh.face_area(0) - 1.0).abs() < 1e-15);
        assert!((mesh.face_area(1) - 3.0).abs() < 1e-15);
        let cloud = sample_mesh(&mesh, 4000, SamplingScheme::UniformArea, 1).unwrap();
        let second = cloud.positions().iter().filter(|p| p[0] >= 10.0).count();
        // Binomial(4000, 0.75): mean 3000, sd 27.4; ±150 is beyond 5 sd.
        assert!((2850..=3150).contains(&second), "{second}");
        let cloud = sample_mesh(&mesh, 4000, SamplingScheme::Random, 1).unwrap();
        let second = cloud.positions().iter().filter(|p| p[0] >= 10.0).count();
        assert!((1850..=2150).contains(&second), "{second}");
    }

    #[test]
    fn single_point_lies_on_a_face() {
        let mesh = two_triangles();
        let cloud = sample_mesh(&mesh, 1, SamplingScheme::UniformArea, 9).unwrap();
        let p = cloud.positions()[0];
        let on_face = mesh.faces.iter().any(|f| {
            let [a, b, c] = f.map(|i| mesh.vertices[i]);
            let total = norm(cross(sub(b, a), sub(c, a)));
            let parts = norm(cross(sub(b, p), sub(c, p)))
                + norm(cross(sub(c, p), sub(a, p)))
                + norm(cross(sub(a, p), sub(b, p)));
            let n = cross(sub(b, a), sub(c, a));
            (parts - total).abs() < 1e-12 && dot(sub(p, a), n).abs() < 1e-12
        });
        assert!(on_face);
    }

    #[test]
    fn same_seed_same_cloud() {
        let mesh = two_triangles();
        let a = sample_mesh(&mesh, 100, SamplingScheme::UniformArea, 3).unwrap();
        let b = sample_mesh(&mesh, 100, SamplingScheme::UniformArea, 3).unwrap();
        assert_eq!(a, b);
        assert!(sample_mesh(&mesh, 0, SamplingScheme::Random, 3).is_err());
    }
}
