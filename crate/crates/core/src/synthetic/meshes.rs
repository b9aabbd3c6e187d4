//! Closed orientable triangle meshes of known genus.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::cloud_io::TriMesh;
use crate::numerics::vec3::{normalize, Vec3};

pub fn tetrahedron() -> TriMesh {
    let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let f = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
    TriMesh::new(v, f).expect("valid tetrahedron")
}

/// Subdivided icosahedron projected onto the sphere of `radius`.
pub fn icosphere(radius: f64, subdivisions: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&p| normalize(p))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts
        .into_iter()
        .map(|p| [p[0] * radius, p[1] * radius, p[2] * radius])
        .collect();
    TriMesh::new(verts, faces).expect("valid icosphere")
}

/// Torus triangulated on an `nu × nv` parameter grid (`u` around the tube).
pub fn torus_grid(major: f64, minor: f64, nu: usize, nv: usize) -> TriMesh {
    let mut verts = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        let v = 2.0 * PI * j as f64 / nv as f64;
        for i in 0..nu {
            let u = 2.0 * PI * i as f64 / nu as f64;
            let w = major + minor * u.cos();
            verts.push([w * v.cos(), w * v.sin(), minor * u.sin()]);
        }
    }
    let id = |i: usize, j: usize| (j % nv) * nu + (i % nu);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, c, b]);
            faces.push([a, d, c]);
        }
    }
    TriMesh::new(verts, faces).expect("valid torus grid")
}

/// Exact signed distance to a torus in the `z = 0` plane centered at `cx`.
fn torus_sdf(p: Vec3, cx: f64, major: f64, minor: f64) -> f64 {
    let q = ((p[0] - cx).hypot(p[1]) - major).hypot(p[2]);
    q - minor
}

fn smooth_min(a: f64, b: f64, k: f64) -> f64 {
    let h = (0.5 + 0.5 * (b - a) / k).clamp(0.0, 1.0);
    b + (a - b) * h - k * h * (1.0 - h)
}

/// Genus-2 surface: two tori side by side, joined by a smooth union.
pub fn double_torus(spacing: f64) -> TriMesh {
    let (major, minor, cx) = (1.0, 0.35, 1.1);
    let sdf = |p: Vec3| {
        smooth_min(
            torus_sdf(p, -cx, major, minor),
            torus_sdf(p, cx, major, minor),
            0.15,
        )
    };
    let pad = 0.2;
    let hi = [cx + major + minor + pad, major + minor + pad, minor + pad];
    implicit_mesh(sdf, [-hi[0], -hi[1], -hi[2]], hi, spacing)
}

// Kuhn subdivision of the unit cube into six tetrahedra sharing the 0–7
// diagonal; corners indexed by bits (x, y, z).
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 3, 2, 7],
    [0, 2, 6, 7],
    [0, 6, 4, 7],
    [0, 4, 5, 7],
    [0, 5, 1, 7],
];

/// Marching tetrahedra on a regular grid over `[lo, hi]`. The zero level set
/// of `f` must lie strictly inside the box. Grid values that are exactly
/// zero are nudged positive so the output is a closed 2-manifold.
pub fn implicit_mesh(f: impl Fn(Vec3) -> f64, lo: Vec3, hi: Vec3, spacing: f64) -> TriMesh {
    let dims = [0, 1, 2].map(|a| ((hi[a] - lo[a]) / spacing).ceil() as usize + 1);
    let node = |i: usize, j: usize, k: usize| (k * dims[1] + j) * dims[0] + i;
    let pos = |id: usize| {
        let i = id % dims[0];
        let j = (id / dims[0]) % dims[1];
        let k = id / (dims[0] * dims[1]);
        [
            lo[0] + i as f64 * spacing,
            lo[1] + j as f64 * spacing,
            lo[2] + k as f64 * spacing,
        ]
    };
    let values: Vec<f64> = (0..dims[0] * dims[1] * dims[2])
        .map(|id| {
            let v = f(pos(id));
            if v == 0.0 {
                1e-12
            } else {
                v
            }
        })
        .collect();

    let mut verts: Vec<Vec3> = Vec::new();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut cut = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
        let key = (a.min(b), a.max(b));
        *edge_vertex.entry(key).or_insert_with(|| {
            let (fa, fb) = (values[key.0], values[key.1]);
            let t = (fa / (fa - fb)).clamp(1e-3, 1.0 - 1e-3);
            let (pa, pb) = (pos(key.0), pos(key.1));
            verts.push([0, 1, 2].map(|c| pa[c] + t * (pb[c] - pa[c])));
            verts.len() - 1
        })
    };

    for k in 0..dims[2] - 1 {
        for j in 0..dims[1] - 1 {
            for i in 0..dims[0] - 1 {
                let corner = |b: usize| node(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
                for tet in KUHN {
                    let ids = tet.map(corner);
                    let inside: Vec<usize> = (0..4).filter(|&q| values[ids[q]] < 0.0).collect();
                    let outside: Vec<usize> = (0..4).filter(|&q| values[ids[q]] >= 0.0).collect();
                    match inside.len() {
                        1 | 3 => {
                            let (apex, others) = if inside.len() == 1 {
                                (inside[0], outside)
                            } else {
                                (outside[0], inside)
                            };
                            let tri = others.iter().map(|&o| cut(ids[apex], ids[o], &mut verts)).collect::<Vec<_>>();
                            faces.push([tri[0], tri[1], tri[2]]);
                        }
                        2 => {
                            let (a, b) = (inside[0], inside[1]);
                            let (c, d) = (outside[0], outside[1]);
                            let ac = cut(ids[a], ids[c], &mut verts);
                            let ad = cut(ids[a], ids[d], &mut verts);
                            let bc = cut(ids[b], ids[c], &mut verts);
                            let bd = cut(ids[b], ids[d], &mut verts);
                            faces.push([ac, ad, bd]);
                            faces.push([ac, bd, bc]);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    orient_outward(&verts, &mut faces, &f);
    TriMesh::new(verts, faces).expect("closed implicit mesh")
}

/// Flip each face so its normal points toward increasing `f`.
fn orient_outward(verts: &[Vec3], faces: &mut [[usize; 3]], f: &impl Fn(Vec3) -> f64) {
    use crate::numerics::vec3::{cross, dot, sub};
    for face in faces.iter_mut() {
        let [a, b, c] = face.map(|i| verts[i]);
        let n = cross(sub(b, a), sub(c, a));
        let centroid = [0, 1, 2].map(|k| (a[k] + b[k] + c[k]) / 3.0);
        let eps = 1e-4;
        let grad = [0, 1, 2].map(|k| {
            let mut p = centroid;
            let mut m = centroid;
            p[k] += eps;
            m[k] -= eps;
            f(p) - f(m)
        });
        if dot(n, grad) < 0.0 {
            face.swap(1, 2);
        }
    }
}
