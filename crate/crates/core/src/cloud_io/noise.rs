use rand_distr::{Distribution, Normal};

use super::PointCloud;
use crate::numerics::rng_for;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
}

/// Positional noise with standard deviation `sigma_fraction` × bounding-box
/// diagonal, per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma_fraction: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma_fraction: f64, seed: u64) -> Self {
        NoiseSpec {
            kind: NoiseKind::Gaussian,
            sigma_fraction,
            seed,
        }
    }
}

/// Displace positions by i.i.d. noise. Normals and channels are untouched.
pub fn add_noise(cloud: &PointCloud, spec: &NoiseSpec) -> Result<PointCloud> {
    if !(spec.sigma_fraction >= 0.0) || !spec.sigma_fraction.is_finite() {
        return Err(Error::InvalidSpec("sigma_fraction must be ≥ 0".into()));
    }
    let mut out = cloud.clone();
    if spec.sigma_fraction == 0.0 {
        return Ok(out);
    }
    let sigma = spec.sigma_fraction * cloud.bbox_diagonal();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let mut rng = rng_for(spec.seed, 0);
    match spec.kind {
        NoiseKind::Gaussian => {
            for p in out.positions_mut() {
                for c in p.iter_mut() {
                    *c += normal.sample(&mut rng);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::split_seed;
    use rand::Rng;

    #[test]
    fn zero_sigma_is_identity() {
        let c = PointCloud::new(vec![[0.0; 3], [1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(add_noise(&c, &NoiseSpec::gaussian(0.0, 1)).unwrap(), c);
        assert!(add_noise(&c, &NoiseSpec::gaussian(-1.0, 1)).is_err());
    }

    #[test]
    fn empirical_std_matches() {
        // Unit-diagonal cloud: two far corners pin the bbox, the rest are at the center.
        let s = 1.0 / 3f64.sqrt();
        let mut pts = vec![[0.0; 3], [s, s, s]];
        pts.extend(std::iter::repeat_n([s / 2.0; 3], 100_000));
        let c = PointCloud::new(pts).unwrap();
        assert!((c.bbox_diagonal() - 1.0).abs() < 1e-12);
        let noisy = add_noise(&c, &NoiseSpec::gaussian(0.025, 42)).unwrap();
        let d: Vec<f64> = noisy.positions()[2..]
            .iter()
            .flat_map(|p| p.iter().map(|v| v - s / 2.0))
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        let std = var.sqrt();
        assert!((0.024..=0.026).contains(&std), "{std}");
    }

    #[test]
    fn seeded_reproducibility() {
        let mut rng = crate::numerics::rng_for(split_seed(1, "pts"), 0);
        let pts: Vec<[f64; 3]> = (0..50).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let c = PointCloud::new(pts).unwrap();
        let a = add_noise(&c, &NoiseSpec::gaussian(0.01, 5)).unwrap();
        let b = add_noise(&c, &NoiseSpec::gaussian(0.01, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
