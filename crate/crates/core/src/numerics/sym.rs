use super::Real;

/// Symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2<S = f64> {
    pub a11: S,
    pub a12: S,
    pub a22: S,
}

impl<S: Real> Sym2<S> {
    pub fn new(a11: S, a12: S, a22: S) -> Self {
        Sym2 { a11, a12, a22 }
    }

    pub fn zero() -> Self {
        Sym2::new(S::zero(), S::zero(), S::zero())
    }

    pub fn identity() -> Self {
        Sym2::new(S::one(), S::zero(), S::one())
    }

    /// Symmetric part of a general 2×2 matrix given row-major.
    pub fn symmetrize(m: [[S; 2]; 2]) -> Self {
        Sym2::new(m[0][0], (m[0][1] + m[1][0]) * 0.5, m[1][1])
    }

    pub fn det(&self) -> S {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> S {
        self.a11 + self.a22
    }

    /// Frobenius norm `sqrt(Σ w_pq²)`.
    pub fn frobenius(&self) -> S {
        self.frobenius_sq().sqrt()
    }

    /// `Tr(WᵀW)`, the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> S {
        self.a11 * self.a11 + self.a12 * self.a12 * 2.0 + self.a22 * self.a22
    }

    pub fn max_abs(&self) -> f64 {
        self.a11
            .value()
            .abs()
            .max(self.a12.value().abs())
            .max(self.a22.value().abs())
    }

    pub fn scale(&self, s: S) -> Self {
        Sym2::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Sym2::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Sym2::new(self.a11 - o.a11, self.a12 - o.a12, self.a22 - o.a22)
    }

    /// Full row-major form.
    pub fn to_array(&self) -> [[S; 2]; 2] {
        [[self.a11, self.a12], [self.a12, self.a22]]
    }

    /// `self · other + other · self`, which is symmetric for symmetric inputs.
    pub fn anticommutator(&self, other: &Self) -> Self {
        let a = self;
        let b = other;
        Sym2::new(
            (a.a11 * b.a11 + a.a12 * b.a12) * 2.0,
            a.a11 * b.a12 + a.a12 * b.a22 + b.a11 * a.a12 + b.a12 * a.a22,
            (a.a12 * b.a12 + a.a22 * b.a22) * 2.0,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }

    pub fn map_value(&self) -> Sym2<f64> {
        Sym2::new(self.a11.value(), self.a12.value(), self.a22.value())
    }
}

impl Sym2<f64> {
    pub fn lift<S: Real>(&self) -> Sym2<S> {
        Sym2::new(
            S::from_f64(self.a11),
            S::from_f64(self.a12),
            S::from_f64(self.a22),
        )
    }
}

/// Symmetric 3×3 matrix stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym3 {
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl Sym3 {
    pub fn new(xx: f64, xy: f64, xz: f64, yy: f64, yz: f64, zz: f64) -> Self {
        Sym3 {
            xx,
            xy,
            xz,
            yy,
            yz,
            zz,
        }
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Sym3::new(a, 0.0, 0.0, b, 0.0, c)
    }

    /// Mean-centered covariance of a set of points (divided by the count).
    pub fn covariance<'a>(points: impl IntoIterator<Item = &'a [f64; 3]> + Clone) -> Self {
        let mut n = 0usize;
        let mut mean = [0.0; 3];
        for p in points.clone() {
            n += 1;
            for a in 0..3 {
                mean[a] += p[a];
            }
        }
        if n == 0 {
            return Sym3::default();
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut c = Sym3::default();
        for p in points {
            let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
            c.xx += d[0] * d[0];
            c.xy += d[0] * d[1];
            c.xz += d[0] * d[2];
            c.yy += d[1] * d[1];
            c.yz += d[1] * d[2];
            c.zz += d[2] * d[2];
        }
        c.scale(1.0 / n as f64)
    }

    /// Rebuild `Q · diag(λ) · Qᵀ` from eigenvector columns.
    pub fn from_eigen(values: [f64; 3], vectors: [[f64; 3]; 3]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (k, &lambda) in values.iter().enumerate() {
            let v = vectors[k];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += lambda * v[i] * v[j];
                }
            }
        }
        Sym3::new(m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2])
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym3::new(
            self.xx * s,
            self.xy * s,
            self.xz * s,
            self.yy * s,
            self.yz * s,
            self.zz * s,
        )
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn entries(&self) -> [f64; 6] {
        [self.xx, self.xy, self.xz, self.yy, self.yz, self.zz]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = self.to_array();
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}
