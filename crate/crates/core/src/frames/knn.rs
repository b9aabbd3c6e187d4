use rayon::prelude::*;

use crate::cloud_io::PointCloud;
use crate::numerics::vec3::{dist2, sub, Vec3};
use crate::{Error, Result};

/// Smallest supported neighborhood size.
pub const MIN_K: usize = 5;
const LEAF_SIZE: usize = 12;

/// Per-point k nearest neighbors (self excluded) and their offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    k: usize,
    indices: Vec<usize>,
    offsets: Vec<Vec3>,
}

impl Neighborhood {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.indices.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Neighbors of `i`, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    /// `p_j - p_i` for each neighbor, in the order of [`neighbors`](Self::neighbors).
    pub fn offsets(&self, i: usize) -> &[Vec3] {
        &self.offsets[i * self.k..(i + 1) * self.k]
    }

    /// Same neighbor lists with offsets recomputed from new positions.
    pub fn with_positions(&self, positions: &[Vec3]) -> Neighborhood {
        let offsets = (0..self.len())
            .flat_map(|i| self.neighbors(i).iter().map(move |&j| sub(positions[j], positions[i])))
            .collect();
        Neighborhood {
            k: self.k,
            indices: self.indices.clone(),
            offsets,
        }
    }

    /// For each point, the points whose neighborhoods contain it.
    pub fn reverse(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.len()];
        for i in 0..self.len() {
            for &j in self.neighbors(i) {
                rev[j].push(i);
            }
        }
        rev
    }
}

/// Static kd-tree over a point set, splitting on the widest axis.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: &'a [Vec3],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    kind: NodeKind,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

/// Candidate list ordered by `(distance², index)`.
struct Best {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl Best {
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    fn offer(&mut self, d: f64, idx: usize) {
        if self.items.len() == self.k {
            let (wd, wi) = self.items[self.k - 1];
            if (d, idx) >= (wd, wi) {
                return;
            }
            self.items.pop();
        }
        let pos = self
            .items
            .partition_point(|&(od, oi)| (od, oi) < (d, idx));
        self.items.insert(pos, (d, idx));
    }
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for a in 0..3 {
                lo[a] = lo[a].min(self.points[i][a]);
                hi[a] = hi[a].max(self.points[i][a]);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            kind: NodeKind::Leaf { start, end },
        });
        if end - start > LEAF_SIZE {
            let axis = (0..3)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap();
            let mid = (start + end) / 2;
            let points = self.points;
            self.order[start..end].select_nth_unstable_by(mid - start, |&x, &y| {
                points[x][axis].total_cmp(&points[y][axis]).then(x.cmp(&y))
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id].kind = NodeKind::Inner { left, right };
        }
        id
    }

    fn box_dist2(node: &Node, q: Vec3) -> f64 {
        let mut d = 0.0;
        for a in 0..3 {
            let e = (node.lo[a] - q[a]).max(0.0).max(q[a] - node.hi[a]);
            d += e * e;
        }
        d
    }

    /// The `k` nearest points to `q` by `(distance, index)`, skipping `exclude`.
    pub fn nearest(&self, q: Vec3, k: usize, exclude: Option<usize>) -> Vec<(f64, usize)> {
        let mut best = Best {
            k,
            items: Vec::with_capacity(k + 1),
        };
        if !self.nodes.is_empty() && k > 0 {
            self.search(0, q, exclude, &mut best);
        }
        best.items
    }

    fn search(&self, id: usize, q: Vec3, exclude: Option<usize>, best: &mut Best) {
        let node = &self.nodes[id];
        match node.kind {
            NodeKind::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) != exclude {
                        best.offer(dist2(self.points[i], q), i);
                    }
                }
            }
            NodeKind::Inner { left, right } => {
                let dl = Self::box_dist2(&self.nodes[left], q);
                let dr = Self::box_dist2(&self.nodes[right], q);
                let order = if dl <= dr {
                    [(left, dl), (right, dr)]
                } else {
                    [(right, dr), (left, dl)]
                };
                for (child, d) in order {
                    // Equal distance must still be visited for the index tie rule.
                    if d <= best.worst() {
                        self.search(child, q, exclude, best);
                    }
                }
            }
        }
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < MIN_K {
        return Err(Error::KTooSmall { k, min: MIN_K });
    }
    if k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    Ok(())
}

fn assemble(points: &[Vec3], k: usize, lists: Vec<Vec<(f64, usize)>>) -> Neighborhood {
    let mut indices = Vec::with_capacity(points.len() * k);
    let mut offsets = Vec::with_capacity(points.len() * k);
    for (i, list) in lists.into_iter().enumerate() {
        for (_, j) in list {
            indices.push(j);
            offsets.push(sub(points[j], points[i]));
        }
    }
    Neighborhood { k, indices, offsets }
}

/// Exact Euclidean kNN; equal distances go to the lower index.
pub fn build_knn(cloud: &PointCloud, k: usize) -> Result<Neighborhood> {
    let points = cloud.positions();
    check_k(k, points.len())?;
    let tree = KdTree::new(points);
    let lists: Vec<_> = (0..points.len())
        .into_par_iter()
        .map(|i| tree.nearest(points[i], k, Some(i)))
        .collect();
    Ok(assemble(points, k, lists))
}

/// `O(N²)` reference implementation with the same tie rule.
pub fn brute_force_knn(cloud: &PointCloud, k: usize) -> Result<Neighborhood> {
    let points = cloud.positions();
    check_k(k, points.len())?;
    let lists = (0..points.len())
        .map(|i| {
            let mut all: Vec<(f64, usize)> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| (dist2(points[i], points[j]), j))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            all.truncate(k);
            all
        })
        .collect();
    Ok(assemble(points, k, lists))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng_for;
    use rand::Rng;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = rng_for(seed, 0);
        PointCloud::new((0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()).unwrap()
    }

    #[test]
    fn square_corners_tree() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let tree = KdTree::new(&pts);
        let near = tree.nearest(pts[0], 2, Some(0));
        assert_eq!(near.iter().map(|x| x.1).collect::<Vec<_>>(), vec![1, 3]);
        let near = tree.nearest(pts[2], 2, Some(2));
        assert_eq!(near.iter().map(|x| x.1).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        // Six points equidistant from the origin point 0.
        let mut pts = vec![[0.0; 3]];
        for a in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[a] = s;
                pts.push(p);
            }
        }
        pts.push([3.0, 3.0, 3.0]);
        let c = PointCloud::new(pts).unwrap();
        let nb = build_knn(&c, 5).unwrap();
        assert_eq!(nb.neighbors(0), &[1, 2, 3, 4, 5]);
    }

    #[test]
    fn k_bounds() {
        let c = random_cloud(10, 1);
        assert!(matches!(build_knn(&c, 4), Err(Error::KTooSmall { .. })));
        assert!(matches!(build_knn(&c, 10), Err(Error::KTooLarge { .. })));
    }

    #[test]
    fn matches_brute_force() {
        let c = random_cloud(2_000, 2);
        assert_eq!(build_knn(&c, 20).unwrap(), brute_force_knn(&c, 20).unwrap());
        // Quantized coordinates produce many exact ties.
        let mut rng = rng_for(3, 0);
        let grid = PointCloud::new(
            (0..1_500)
                .map(|_| [0; 3].map(|_| rng.random_range(0..8) as f64))
                .collect(),
        )
        .unwrap();
        assert_eq!(build_knn(&grid, 12).unwrap(), brute_force_knn(&grid, 12).unwrap());
    }

    #[test]
    fn offsets_are_exact_differences() {
        let c = random_cloud(200, 4);
        let nb = build_knn(&c, 8).unwrap();
        for i in 0..c.len() {
            for (&j, off) in nb.neighbors(i).iter().zip(nb.offsets(i)) {
                assert_eq!(*off, sub(c.positions()[j], c.positions()[i]));
                assert_ne!(i, j);
            }
        }
    }
}
