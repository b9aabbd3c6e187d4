//! Closed-form symmetric eigen-decompositions.

use super::vec3::{cross, dot, normalize, Vec3};
use super::{Real, Sym2, Sym3};
use crate::{Error, Result};

/// Eigenvalues sorted descending, with matching orthonormal eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair2<S = f64> {
    pub values: [S; 2],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [[S; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair3 {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

/// Analytic eigen-decomposition of a symmetric 2×2 matrix.
///
/// The discriminant is evaluated as `hypot((a11 - a22)/2, a12)`, which stays
/// accurate when the eigenvalues nearly coincide. The eigenvector rotation
/// is `atan2(2·a12, a11 - a22) / 2`; at an exactly scalar matrix it is 0 and
/// its tangents are defined as 0.
pub fn eigen_sym2<S: Real>(m: &Sym2<S>) -> Result<EigenPair2<S>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mean = (m.a11 + m.a22) * 0.5;
    let half_diff = (m.a11 - m.a22) * 0.5;
    let radius_sq = half_diff * half_diff + m.a12 * m.a12;
    let (radius, angle) = if radius_sq.value() == 0.0 {
        (S::zero(), S::zero())
    } else {
        (radius_sq.sqrt(), m.a12.atan2(half_diff) * 0.5)
    };
    let (c, s) = (angle.cos(), angle.sin());
    Ok(EigenPair2 {
        values: [mean + radius, mean - radius],
        vectors: [[c, s], [-s, c]],
    })
}

impl<S: Real> EigenPair2<S> {
    /// `Q · diag(λ) · Qᵀ`.
    pub fn reconstruct(&self) -> Sym2<S> {
        let [l0, l1] = self.values;
        let [v0, v1] = self.vectors;
        Sym2::new(
            v0[0] * v0[0] * l0 + v1[0] * v1[0] * l1,
            v0[0] * v0[1] * l0 + v1[0] * v1[1] * l1,
            v0[1] * v0[1] * l0 + v1[1] * v1[1] * l1,
        )
    }
}

/// Eigen-decomposition of a symmetric 3×3 matrix.
///
/// Eigenvalues come from the trigonometric closed form. The eigenvector of
/// the best-separated eigenvalue is taken from a cross product of rows of
/// `A - λI`; the remaining pair is resolved by a 2×2 solve in its orthogonal
/// complement. If the reconstruction residual still exceeds the tolerance a
/// cyclic Jacobi sweep is used instead.
pub fn eigen_sym3(m: &Sym3) -> Result<EigenPair3> {
    if !m.entries().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let tol = 1e-10 * m.max_abs().max(1.0);
    let closed = closed_form3(m);
    if let Some(pair) = closed {
        if pair.residual(m) <= tol {
            return Ok(pair);
        }
    }
    Ok(jacobi3(m))
}

impl EigenPair3 {
    pub fn reconstruct(&self) -> Sym3 {
        Sym3::from_eigen(self.values, self.vectors)
    }

    pub fn residual(&self, m: &Sym3) -> f64 {
        let r = self.reconstruct();
        r.entries()
            .iter()
            .zip(m.entries())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

fn closed_form3(m: &Sym3) -> Option<EigenPair3> {
    let off = m.xy * m.xy + m.xz * m.xz + m.yz * m.yz;
    if off == 0.0 {
        let mut pairs = [
            (m.xx, [1.0, 0.0, 0.0]),
            (m.yy, [0.0, 1.0, 0.0]),
            (m.zz, [0.0, 0.0, 1.0]),
        ];
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        return Some(EigenPair3 {
            values: [pairs[0].0, pairs[1].0, pairs[2].0],
            vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
        });
    }

    let q = m.trace() / 3.0;
    let p2 = (m.xx - q).powi(2) + (m.yy - q).powi(2) + (m.zz - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return None;
    }
    let b = Sym3::new(
        (m.xx - q) / p,
        m.xy / p,
        m.xz / p,
        (m.yy - q) / p,
        m.yz / p,
        (m.zz - q) / p,
    );
    let det_b = b.xx * (b.yy * b.zz - b.yz * b.yz) - b.xy * (b.xy * b.zz - b.yz * b.xz)
        + b.xz * (b.xy * b.yz - b.yy * b.xz);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l0 = q + 2.0 * p * phi.cos();
    let l2 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l1 = 3.0 * q - l0 - l2;

    // Isolate whichever end of the spectrum is better separated.
    let top_isolated = l0 - l1 >= l1 - l2;
    let lambda = if top_isolated { l0 } else { l2 };
    let v = null_vector(m, lambda)?;
    let (u, w) = complement_basis(v);
    let au = m.mul_vec(u);
    let aw = m.mul_vec(w);
    let sub = Sym2::new(dot(u, au), dot(u, aw), dot(w, aw));
    let e = eigen_sym2(&sub).ok()?;
    let combine = |c: [f64; 2]| normalize([
        c[0] * u[0] + c[1] * w[0],
        c[0] * u[1] + c[1] * w[1],
        c[0] * u[2] + c[1] * w[2],
    ]);
    let a = combine(e.vectors[0]);
    let b = combine(e.vectors[1]);
    if top_isolated {
        Some(EigenPair3 {
            values: [l0, e.values[0], e.values[1]],
            vectors: [v, a, b],
        })
    } else {
        Some(EigenPair3 {
            values: [e.values[0], e.values[1], l2],
            vectors: [a, b, v],
        })
    }
}

/// Unit vector spanning the (approximate) null space of `m - λI`.
fn null_vector(m: &Sym3, lambda: f64) -> Option<Vec3> {
    let a = m.to_array();
    let rows = [
        [a[0][0] - lambda, a[0][1], a[0][2]],
        [a[1][0], a[1][1] - lambda, a[1][2]],
        [a[2][0], a[2][1], a[2][2] - lambda],
    ];
    let candidates = [
        cross(rows[0], rows[1]),
        cross(rows[0], rows[2]),
        cross(rows[1], rows[2]),
    ];
    let best = candidates
        .into_iter()
        .max_by(|x, y| dot(*x, *x).total_cmp(&dot(*y, *y)))?;
    let len2 = dot(best, best);
    if len2 > 0.0 && len2.is_finite() {
        Some(normalize(best))
    } else {
        None
    }
}

/// Two unit vectors completing `v` to an orthonormal basis.
fn complement_basis(v: Vec3) -> (Vec3, Vec3) {
    let helper = if v[0].abs() <= v[1].abs() && v[0].abs() <= v[2].abs() {
        [1.0, 0.0, 0.0]
    } else if v[1].abs() <= v[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let u = normalize(cross(v, helper));
    let w = cross(v, u);
    (u, w)
}

fn jacobi3(m: &Sym3) -> EigenPair3 {
    let mut a = m.to_array();
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut pairs: Vec<(f64, Vec3)> = (0..3)
        .map(|k| (a[k][k], [v[0][k], v[1][k], v[2][k]]))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    EigenPair3 {
        values: [pairs[0].0, pairs[1].0, pairs[2].0],
        vectors: [pairs[0].1, pairs[1].1, pairs[2].1],
    }
}
