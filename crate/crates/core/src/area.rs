//! Tangent-plane charts and Monte-Carlo tangent Voronoi area elements.
//!
//! Each neighborhood is projected onto the tangent plane of its center. The
//! area element of the center is the fraction of a regular grid over the
//! scaled bounding square that is strictly closer to the origin than to any
//! projected neighbor, times the square's area.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::frames::{Frames, Neighborhood};
use crate::numerics::stable_sum;
use crate::numerics::vec3::{dot, sub};
use crate::{Error, Result};

pub const DEFAULT_GRID_RESOLUTION: usize = 64;
pub const DEFAULT_BBOX_SCALE: f64 = 1.1;

/// Projected neighbor offsets `dp̃` and normal differences `dñ` per point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentChart {
    k: usize,
    dp: Vec<[f64; 2]>,
    dn: Vec<[f64; 2]>,
}

impl TangentChart {
    /// Chart from explicit rows; `dp` and `dn` hold `k` rows per point.
    pub fn from_rows(k: usize, dp: Vec<[f64; 2]>, dn: Vec<[f64; 2]>) -> Self {
        assert!(k > 0 && dp.len() % k == 0 && dp.len() == dn.len());
        TangentChart { k, dp, dn }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.dp.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.dp.is_empty()
    }

    pub fn dp(&self, i: usize) -> &[[f64; 2]] {
        &self.dp[i * self.k..(i + 1) * self.k]
    }

    pub fn dn(&self, i: usize) -> &[[f64; 2]] {
        &self.dn[i * self.k..(i + 1) * self.k]
    }
}

/// `dp̃_ij = [dp_ij·t_i, dp_ij·t′_i]`, `dñ_ij = [(n_j − n_i)·t_i, (n_j − n_i)·t′_i]`.
pub fn project_to_tangent(neigh: &Neighborhood, frames: &Frames) -> TangentChart {
    let k = neigh.k();
    let mut dp = Vec::with_capacity(neigh.len() * k);
    let mut dn = Vec::with_capacity(neigh.len() * k);
    for i in 0..neigh.len() {
        let fi = &frames.frames[i];
        for (&j, &off) in neigh.neighbors(i).iter().zip(neigh.offsets(i)) {
            dp.push([dot(off, fi.t), dot(off, fi.t_prime)]);
            let dnormal = sub(frames.frames[j].n, fi.n);
            dn.push([dot(dnormal, fi.t), dot(dnormal, fi.t_prime)]);
        }
    }
    TangentChart { k, dp, dn }
}

/// Sampling parameters for the area estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaConfig {
    pub grid_resolution: usize,
    pub bbox_scale: f64,
}

impl Default for AreaConfig {
    fn default() -> Self {
        AreaConfig {
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            bbox_scale: DEFAULT_BBOX_SCALE,
        }
    }
}

/// Grid over the scaled bounding square of the points and the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub lo: [f64; 2],
    pub side: f64,
    pub resolution: usize,
}

impl SampleGrid {
    pub fn new(points: &[[f64; 2]], config: AreaConfig) -> Self {
        let mut lo = [0.0f64; 2];
        let mut hi = [0.0f64; 2];
        for p in points {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let side = (hi[0] - lo[0]).max(hi[1] - lo[1]) * config.bbox_scale;
        let center = [(lo[0] + hi[0]) * 0.5, (lo[1] + hi[1]) * 0.5];
        SampleGrid {
            lo: [center[0] - side * 0.5, center[1] - side * 0.5],
            side,
            resolution: config.grid_resolution,
        }
    }

    /// Cell-centered node coordinate along one axis.
    pub fn node(&self, axis: usize, m: usize) -> f64 {
        self.lo[axis] + (m as f64 + 0.5) * self.side / self.resolution as f64
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn node_count(&self) -> usize {
        self.resolution * self.resolution
    }
}

/// Whether `v` is strictly closer to the origin than to every point.
pub fn in_origin_cell(v: [f64; 2], points: &[[f64; 2]]) -> bool {
    let r0 = v[0] * v[0] + v[1] * v[1];
    points.iter().all(|q| {
        let (dx, dy) = (v[0] - q[0], v[1] - q[1]);
        r0 < dx * dx + dy * dy
    })
}

/// Number of grid nodes inside the origin's Voronoi cell.
///
/// The cell is convex, so each grid row meets it in one interval. The
/// interval is bracketed from the half-plane form of the constraints and its
/// ends are then settled with [`in_origin_cell`], so the count equals that of
/// testing every node directly.
pub fn count_cell_nodes(points: &[[f64; 2]], grid: &SampleGrid) -> usize {
    let res = grid.resolution;
    let step = grid.side / res as f64;
    let mut total = 0usize;
    for row in 0..res {
        let y = grid.node(1, row);
        let inside = |m: usize| in_origin_cell([grid.node(0, m), y], points);
        let mut x_lo = f64::NEG_INFINITY;
        let mut x_hi = f64::INFINITY;
        let mut near_tie = false;
        let mut empty = false;
        for q in points {
            let q2 = q[0] * q[0] + q[1] * q[1];
            let rhs = q2 - 2.0 * y * q[1];
            if q[0] > 0.0 {
                x_hi = x_hi.min(rhs / (2.0 * q[0]));
            } else if q[0] < 0.0 {
                x_lo = x_lo.max(rhs / (2.0 * q[0]));
            } else if rhs <= 1e-12 * q2 {
                empty = true;
                near_tie |= rhs.abs() <= 1e-12 * q2;
            }
        }
        if empty {
            if near_tie {
                total += (0..res).filter(|&m| inside(m)).count();
            }
            continue;
        }
        // Nodes m with a < m < b lie inside the bracket.
        let a = ((x_lo - grid.lo[0]) / step - 0.5).clamp(-2.0, res as f64 + 1.0);
        let b = ((x_hi - grid.lo[0]) / step - 0.5).clamp(-2.0, res as f64 + 1.0);
        let mut first = (a.floor() as i64 + 1).max(0);
        let mut last = (b.ceil() as i64 - 1).min(res as i64 - 1);
        let inside_i = |m: i64| m >= 0 && m < res as i64 && inside(m as usize);
        if first > last {
            match [first - 1, first, last, last + 1].into_iter().find(|&m| inside_i(m)) {
                Some(m) => {
                    first = m;
                    last = m;
                }
                None => continue,
            }
        }
        while first <= last && !inside_i(first) {
            first += 1;
        }
        while last >= first && !inside_i(last) {
            last -= 1;
        }
        if first > last {
            continue;
        }
        while inside_i(first - 1) {
            first -= 1;
        }
        while inside_i(last + 1) {
            last += 1;
        }
        total += (last - first + 1) as usize;
    }
    total
}

/// Area of the origin's tangent Voronoi cell among `points`, or `None` when
/// the bounding square has zero side.
pub fn cell_area(points: &[[f64; 2]], config: AreaConfig) -> Option<f64> {
    let grid = SampleGrid::new(points, config);
    if !(grid.side > 0.0) || !grid.side.is_finite() || grid.resolution == 0 {
        return None;
    }
    let inside = count_cell_nodes(points, &grid);
    Some(inside as f64 / grid.node_count() as f64 * grid.area())
}

/// Area element of point `i` at the given grid resolution.
pub fn voronoi_cell_area(chart: &TangentChart, i: usize, grid_resolution: usize) -> Result<f64> {
    let config = AreaConfig {
        grid_resolution,
        ..AreaConfig::default()
    };
    cell_area(chart.dp(i), config).ok_or(Error::DegenerateChart(i))
}

/// Per-point area elements.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaField {
    pub areas: Vec<f64>,
    /// Points whose chart had zero extent; their area is 0.
    pub degenerate: Vec<bool>,
    pub config: AreaConfig,
}

impl AreaField {
    pub fn total(&self) -> f64 {
        stable_sum(&self.areas)
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }
}

/// Area elements for every point of a chart.
pub fn area_field(chart: &TangentChart, config: AreaConfig) -> AreaField {
    let results: Vec<Option<f64>> = (0..chart.len())
        .into_par_iter()
        .map(|i| cell_area(chart.dp(i), config))
        .collect();
    AreaField {
        degenerate: results.iter().map(Option::is_none).collect(),
        areas: results.into_iter().map(|a| a.unwrap_or(0.0)).collect(),
        config,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud_io::PointCloud;
    use crate::frames::{build_knn, Frame};
    use crate::numerics::rng_for;
    use crate::synthetic::{sample_ellipsoid, EllipsoidSpec};
    use rand::Rng;

    fn brute_count(points: &[[f64; 2]], grid: &SampleGrid) -> usize {
        let mut n = 0;
        for r in 0..grid.resolution {
            for m in 0..grid.resolution {
                n += usize::from(in_origin_cell([grid.node(0, m), grid.node(1, r)], points));
            }
        }
        n
    }

    /// Area of the origin's Voronoi cell clipped to a square, by successive
    /// half-plane clipping of the square polygon.
    fn polygon_cell_area(points: &[[f64; 2]], grid: &SampleGrid) -> f64 {
        let (x0, y0, s) = (grid.lo[0], grid.lo[1], grid.side);
        let mut poly = vec![[x0, y0], [x0 + s, y0], [x0 + s, y0 + s], [x0, y0 + s]];
        for q in points {
            // Keep 2 v·q < |q|².
            let f = |v: [f64; 2]| q[0] * q[0] + q[1] * q[1] - 2.0 * (v[0] * q[0] + v[1] * q[1]);
            let mut out = Vec::new();
            for idx in 0..poly.len() {
                let a = poly[idx];
                let b = poly[(idx + 1) % poly.len()];
                let (fa, fb) = (f(a), f(b));
                if fa >= 0.0 {
                    out.push(a);
                }
                if (fa >= 0.0) != (fb >= 0.0) {
                    let t = fa / (fa - fb);
                    out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
            }
            poly = out;
        }
        let mut twice = 0.0;
        for idx in 0..poly.len() {
            let a = poly[idx];
            let b = poly[(idx + 1) % poly.len()];
            twice += a[0] * b[1] - a[1] * b[0];
        }
        twice.abs() * 0.5
    }

    const DIAMOND: [[f64; 2]; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];

    fn config(res: usize) -> AreaConfig {
        AreaConfig {
            grid_resolution: res,
            bbox_scale: 1.1,
        }
    }

    #[test]
    fn diamond_matches_polygon_oracle() {
        let grid = SampleGrid::new(&DIAMOND, config(64));
        assert!((grid.lo[0] + 1.1).abs() < 1e-15 && (grid.side - 2.2).abs() < 1e-15);
        let exact = polygon_cell_area(&DIAMOND, &grid);
        assert!((exact - 1.0).abs() < 1e-12);
        let est = cell_area(&DIAMOND, config(64)).unwrap();
        // The count ratio is accurate to 2/R; the area error is that times A_bbx.
        assert!((est - exact).abs() <= 2.0 / 64.0 * grid.area(), "{est}");
    }

    #[test]
    fn half_plane_matches_rectangle() {
        let pts = [[1.0, 0.0], [0.0, 3.0], [0.0, -3.0], [-4.0, 0.0]];
        let grid = SampleGrid::new(&pts, config(64));
        let exact = polygon_cell_area(&pts, &grid);
        assert!((exact - 7.5).abs() < 1e-12);
        let est = cell_area(&pts, config(64)).unwrap();
        assert!((est - exact).abs() <= 2.0 / 64.0 * grid.area(), "{est} vs {exact}");
    }

    #[test]
    fn first_order_convergence() {
        let err = |res: usize| {
            let grid = SampleGrid::new(&DIAMOND, config(res));
            let exact = polygon_cell_area(&DIAMOND, &grid);
            (cell_area(&DIAMOND, config(res)).unwrap() - exact).abs()
        };
        // Averaged over resolutions to smooth out lattice resonances.
        let coarse: f64 = (30..40).map(err).sum();
        let fine: f64 = (60..80).step_by(2).map(err).sum();
        assert!(fine < 0.75 * coarse, "{coarse} -> {fine}");
    }

    #[test]
    fn row_scan_equals_brute_force() {
        let mut rng = rng_for(21, 0);
        for trial in 0..2_000 {
            let k = rng.random_range(3..25);
            let spread = if trial % 3 == 0 { 1e-3 } else { 1.0 };
            let mut pts: Vec<[f64; 2]> = (0..k)
                .map(|_| [rng.random_range(-spread..spread), rng.random_range(-spread..spread)])
                .collect();
            if trial % 7 == 0 {
                // One-sided neighborhood.
                for p in &mut pts {
                    p[0] = p[0].abs() + 0.1 * spread;
                }
            }
            if trial % 11 == 0 {
                // Lattice with exact ties on grid nodes.
                pts = vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]];
            }
            let res = rng.random_range(1..70);
            let grid = SampleGrid::new(&pts, config(res));
            assert_eq!(count_cell_nodes(&pts, &grid), brute_count(&pts, &grid), "trial {trial}");
        }
    }

    #[test]
    fn ties_are_excluded() {
        // Node at x = 0.5 is equidistant from the origin and (1, 0).
        let grid = SampleGrid {
            lo: [0.0, 0.0],
            side: 1.0,
            resolution: 1,
        };
        assert_eq!(count_cell_nodes(&[[1.0, 0.0]], &grid), 0);
    }

    #[test]
    fn degenerate_chart() {
        let chart = TangentChart::from_rows(3, vec![[0.0, 0.0]; 3], vec![[0.0, 0.0]; 3]);
        assert!(matches!(voronoi_cell_area(&chart, 0, 64), Err(Error::DegenerateChart(0))));
        let field = area_field(&chart, AreaConfig::default());
        assert_eq!(field.areas, vec![0.0]);
        assert!(field.degenerate[0]);
    }

    #[test]
    fn rotation_changes_area_little() {
        let mut rng = rng_for(8, 0);
        for _ in 0..200 {
            let pts: Vec<[f64; 2]> = (0..20)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let base = cell_area(&pts, AreaConfig::default()).unwrap();
            let bbx = SampleGrid::new(&pts, AreaConfig::default()).area();
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (c, s) = (a.cos(), a.sin());
            let rot: Vec<_> = pts.iter().map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect();
            let turned = cell_area(&rot, AreaConfig::default()).unwrap();
            let bbx = bbx.max(SampleGrid::new(&rot, AreaConfig::default()).area());
            assert!((turned - base).abs() <= 5.0 / 64.0 * bbx, "{base} {turned}");
        }
    }

    #[test]
    fn planar_isometry_and_constant_normals() {
        let mut rng = rng_for(9, 0);
        let pts: Vec<_> = (0..80)
            .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), 0.0])
            .collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let nb = build_knn(&cloud, 8).unwrap();
        let frames = Frames::from_normals(&vec![[0.0, 0.0, 1.0]; 80]);
        let chart = project_to_tangent(&nb, &frames);
        for i in 0..80 {
            let dp = chart.dp(i);
            let nbrs = nb.neighbors(i);
            for a in 0..dp.len() {
                for b in 0..dp.len() {
                    let d2 = (dp[a][0] - dp[b][0]).powi(2) + (dp[a][1] - dp[b][1]).powi(2);
                    let e = crate::numerics::vec3::dist2(pts[nbrs[a]], pts[nbrs[b]]);
                    assert!((d2.sqrt() - e.sqrt()).abs() < 1e-12);
                }
            }
            assert!(chart.dn(i).iter().all(|d| *d == [0.0, 0.0]));
        }
    }

    #[test]
    fn lattice_interior_cells() {
        let h = 0.1;
        let mut pts = Vec::new();
        for a in 0..20 {
            for b in 0..20 {
                pts.push([a as f64 * h, b as f64 * h, 0.0]);
            }
        }
        let cloud = PointCloud::new(pts).unwrap();
        let nb = build_knn(&cloud, 8).unwrap();
        let frames = Frames::from_normals(&vec![[0.0, 0.0, 1.0]; 400]);
        let field = area_field(&project_to_tangent(&nb, &frames), AreaConfig::default());
        for a in 2..18 {
            for b in 2..18 {
                let area = field.areas[a * 20 + b];
                let bbx = (2.2 * h) * (2.2 * h);
                assert!((area - h * h).abs() <= 2.0 / 64.0 * bbx, "{area}");
            }
        }
    }

    #[test]
    fn exact_sphere_charts() {
        let (cloud, gt) = sample_ellipsoid(&EllipsoidSpec::sphere(10_000, 5)).unwrap();
        let nb = build_knn(&cloud, 20).unwrap();
        let frames = Frames::from_normals(&gt.exact_normals);
        let chart = project_to_tangent(&nb, &frames);
        for i in 0..cloud.len() {
            let (p, n) = (chart.dp(i)[0], chart.dn(i)[0]);
            let (lp, ln) = (p[0].hypot(p[1]), n[0].hypot(n[1]));
            assert!((ln - lp).abs() / lp < 0.05);
        }
        let total = area_field(&chart, AreaConfig::default()).total();
        let target = 4.0 * std::f64::consts::PI;
        assert!((total - target).abs() / target < 0.03, "{total}");
    }

    #[test]
    fn from_normal_frames_are_orthonormal() {
        let mut rng = rng_for(10, 0);
        for _ in 0..1000 {
            let v = crate::numerics::vec3::normalize([
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]);
            assert!(Frame::from_normal(v).orthonormality_error() < 1e-12);
        }
    }
}
