use std::collections::BTreeMap;

use crate::numerics::vec3::{norm, Vec3};
use crate::{Error, Result};

/// Positions with optional unit normals and named per-point scalar channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    positions: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
    channels: BTreeMap<String, Vec<f64>>,
}

const NORMAL_TOL: f64 = 1e-6;

impl PointCloud {
    pub fn new(positions: Vec<Vec3>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(PointCloud {
            positions,
            normals: None,
            channels: BTreeMap::new(),
        })
    }

    /// Attach normals. Each must be unit length within 1e-6.
    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self> {
        self.set_normals(normals)?;
        Ok(self)
    }

    pub fn set_normals(&mut self, normals: Vec<Vec3>) -> Result<()> {
        if normals.len() != self.len() {
            return Err(Error::InvalidSpec(format!(
                "{} normals for {} points",
                normals.len(),
                self.len()
            )));
        }
        if let Some(i) = normals
            .iter()
            .position(|n| (norm(*n) - 1.0).abs() > NORMAL_TOL || !norm(*n).is_finite())
        {
            return Err(Error::InvalidSpec(format!("normal {i} is not unit length")));
        }
        self.normals = Some(normals);
        Ok(())
    }

    pub fn clear_normals(&mut self) {
        self.normals = None;
    }

    pub fn set_channel(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.len() {
            return Err(Error::InvalidSpec(format!(
                "channel `{name}` has {} values for {} points",
                values.len(),
                self.len()
            )));
        }
        self.channels.insert(name, values);
        Ok(())
    }

    pub fn with_channel(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.set_channel(name, values)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [Vec3] {
        &mut self.positions
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.get(name).map(Vec::as_slice)
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(String::as_str)
    }

    pub fn channels(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.channels
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.positions {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounds();
        norm([hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]])
    }

    pub fn centroid(&self) -> Vec3 {
        let mut c = [0.0; 3];
        for p in &self.positions {
            for a in 0..3 {
                c[a] += p[a];
            }
        }
        let n = self.len() as f64;
        [c[0] / n, c[1] / n, c[2] / n]
    }

    /// A new cloud with points reordered so that `out[i] = self[order[i]]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let pick = |v: &Vec<Vec3>| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        PointCloud {
            positions: pick(&self.positions),
            normals: self.normals.as_ref().map(pick),
            channels: self
                .channels
                .iter()
                .map(|(k, v)| (k.clone(), order.iter().map(|&i| v[i]).collect()))
                .collect(),
        }
    }
}
