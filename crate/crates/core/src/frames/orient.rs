use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{Frames, Neighborhood};
use crate::cloud_io::PointCloud;
use crate::numerics::vec3::{dist2, dot, sub};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientMethod {
    /// Propagate signs along a Euclidean minimum spanning tree of the kNN graph.
    #[default]
    MstPropagation,
    /// Match the hemisphere of the cloud's own normals.
    FromInput,
    /// Point away from the cloud centroid.
    OutwardCentroid,
}

impl std::str::FromStr for OrientMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mst" | "mst_propagation" => Ok(OrientMethod::MstPropagation),
            "input" | "from_input" => Ok(OrientMethod::FromInput),
            "centroid" | "outward_centroid" => Ok(OrientMethod::OutwardCentroid),
            other => Err(Error::InvalidSpec(format!("unknown orientation method `{other}`"))),
        }
    }
}

/// Choose normal signs; the tangent pair is reflected with the normal so
/// every frame stays right-handed.
pub fn orient_normals(
    cloud: &PointCloud,
    frames: &Frames,
    neigh: &Neighborhood,
    method: OrientMethod,
) -> Result<Frames> {
    let flip = match method {
        OrientMethod::FromInput => {
            let input = cloud.normals().ok_or(Error::MissingInputNormals)?;
            frames
                .frames
                .iter()
                .zip(input)
                .map(|(f, &m)| dot(f.n, m) < 0.0)
                .collect()
        }
        OrientMethod::OutwardCentroid => {
            let c = cloud.centroid();
            frames
                .frames
                .iter()
                .zip(cloud.positions())
                .map(|(f, &p)| dot(f.n, sub(p, c)) < 0.0)
                .collect()
        }
        OrientMethod::MstPropagation => mst_flips(cloud, frames, neigh),
    };
    let mut out = frames.clone();
    for (f, flip) in out.frames.iter_mut().zip(flip) {
        if flip {
            *f = f.flipped();
        }
    }
    Ok(out)
}

/// Prim's algorithm on the symmetrized kNN graph, one tree per connected
/// component. Each root is the point of largest `x` in its component and is
/// oriented toward `+x`; children copy their parent's hemisphere.
fn mst_flips(cloud: &PointCloud, frames: &Frames, neigh: &Neighborhood) -> Vec<bool> {
    let pts = cloud.positions();
    let n = pts.len();
    let reverse = neigh.reverse();
    let adjacent = |i: usize| neigh.neighbors(i).iter().chain(&reverse[i]).copied();

    // Components, visited in index order so roots are deterministic.
    let mut component = vec![usize::MAX; n];
    let mut roots = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = roots.len();
        let mut root = start;
        let mut stack = vec![start];
        component[start] = id;
        while let Some(i) = stack.pop() {
            if (pts[i][0], Reverse(i)) > (pts[root][0], Reverse(root)) {
                root = i;
            }
            for j in adjacent(i) {
                if component[j] == usize::MAX {
                    component[j] = id;
                    stack.push(j);
                }
            }
        }
        roots.push(root);
    }

    let normal = |i: usize| frames.frames[i].n;
    let mut flip = vec![false; n];
    let mut done = vec![false; n];
    for root in roots {
        flip[root] = normal(root)[0] < 0.0;
        let mut heap = BinaryHeap::new();
        let push = |heap: &mut BinaryHeap<_>, from: usize, done: &[bool]| {
            for j in adjacent(from) {
                if !done[j] {
                    heap.push(Reverse((OrdF64(dist2(pts[from], pts[j])), j, from)));
                }
            }
        };
        done[root] = true;
        push(&mut heap, root, &done);
        while let Some(Reverse((_, j, parent))) = heap.pop() {
            if done[j] {
                continue;
            }
            done[j] = true;
            let parent_dot = dot(normal(parent), normal(j));
            flip[j] = flip[parent] != (parent_dot < 0.0);
            push(&mut heap, j, &done);
        }
    }
    flip
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
