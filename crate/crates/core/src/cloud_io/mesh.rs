use std::collections::HashSet;

use crate::numerics::vec3::{cross, norm, sub, Vec3};
use crate::{Error, Result};

const DEGENERATE_AREA: f64 = 1e-14;

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Faces discarded on construction because their area was ≤ 1e-14.
    pub dropped_degenerate: usize,
}

impl TriMesh {
    /// Build from polygons, fan-triangulating anything with more than three
    /// corners. Indices must be in range.
    pub fn from_polygons(vertices: Vec<Vec3>, polygons: &[Vec<usize>]) -> Result<Self> {
        let mut faces = Vec::with_capacity(polygons.len());
        for (p, poly) in polygons.iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::parse(p + 1, "face with fewer than 3 vertices"));
            }
            if let Some(&bad) = poly.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::parse(
                    p + 1,
                    format!("vertex index {bad} out of range ({} vertices)", vertices.len()),
                ));
            }
            for k in 1..poly.len() - 1 {
                faces.push([poly[0], poly[k], poly[k + 1]]);
            }
        }
        Self::new(vertices, faces)
    }

    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::InvalidSpec(format!("face {f:?} out of range")));
        }
        let before = faces.len();
        let faces: Vec<[usize; 3]> = faces
            .into_iter()
            .filter(|f| triangle_area(&vertices, f) > DEGENERATE_AREA)
            .collect();
        let dropped_degenerate = before - faces.len();
        if dropped_degenerate > 0 {
            log::warn!("dropped {dropped_degenerate} degenerate faces");
        }
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        Ok(TriMesh {
            vertices,
            faces,
            dropped_degenerate,
        })
    }

    pub fn face_area(&self, f: usize) -> f64 {
        triangle_area(&self.vertices, &self.faces[f])
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Unit normal of face `f` following its winding.
    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        let n = cross(sub(b, a), sub(c, a));
        let l = norm(n);
        [n[0] / l, n[1] / l, n[2] / l]
    }
}

fn triangle_area(v: &[Vec3], f: &[usize; 3]) -> f64 {
    let [a, b, c] = f.map(|i| v[i]);
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

/// `V - E + F`, counting unique undirected edges and only the vertices that
/// some face references.
pub fn mesh_euler(mesh: &TriMesh) -> i64 {
    let mut edges = HashSet::with_capacity(mesh.faces.len() * 2);
    let mut used = vec![false; mesh.vertices.len()];
    for f in &mesh.faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
            used[a] = true;
        }
    }
    let v = used.iter().filter(|&&u| u).count() as i64;
    v - edges.len() as i64 + mesh.faces.len() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_index_is_a_parse_error() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let err = TriMesh::from_polygons(v, &[vec![0, 1, 3]]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn degenerate_faces_are_dropped() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0]];
        let m = TriMesh::new(v, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(m.faces.len(), 1);
        assert_eq!(m.dropped_degenerate, 1);
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let m = TriMesh::from_polygons(v, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
        assert!((m.area() - 1.0).abs() < 1e-15);
    }
}
