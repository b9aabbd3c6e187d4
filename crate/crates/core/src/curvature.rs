//! Self-adjoint Weingarten map estimation and curvature fields.
//!
//! With `A = dp̃ᵀdp̃` and `B = dp̃ᵀdñ`, the symmetric map `W` satisfying
//! `dp̃·W ≈ dñ` solves the Sylvester equation `WA + AW = B + Bᵀ`. All
//! kernels are generic over [`Real`] so the same code is differentiated by
//! dual numbers during self-optimization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::TangentChart;
use crate::numerics::{eigen_sym2, Real, Sym2, EPS_EIG};
use crate::{Error, Result};

/// Determinant floor for the eigen-free Gaussian curvature path (applied
/// after trace normalization).
pub const EPS_DET: f64 = 1e-14;
/// Isotropic perturbation added to `A`, relative to its trace, on retry.
pub const PERTURB_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Eigen-decomposition solve of `WA + AW = X`.
    #[default]
    Sylvester,
    /// Least-squares map followed by symmetrization.
    #[serde(alias = "pinv")]
    SymmetrizedPinv,
    /// `K = det(X) / (4 det A)`; Gaussian curvature only.
    #[serde(alias = "det")]
    CommutingDet,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Sylvester => "sylvester",
            Solver::SymmetrizedPinv => "pinv",
            Solver::CommutingDet => "det",
        }
    }

    pub fn has_weingarten(self) -> bool {
        self != Solver::CommutingDet
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sylvester" => Ok(Solver::Sylvester),
            "pinv" | "symmetrized_pinv" => Ok(Solver::SymmetrizedPinv),
            "det" | "commuting_det" => Ok(Solver::CommutingDet),
            other => Err(Error::InvalidSpec(format!("unknown solver `{other}`"))),
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Origin of the position offsets in the per-point least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Offsets from the center point, as projected.
    Origin,
    /// Offsets from the neighbors' mean, which fits an intercept alongside
    /// `W` and absorbs a common shift of the normal differences.
    #[default]
    NeighborMean,
}

impl std::str::FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "origin" => Ok(Centering::Origin),
            "mean" | "neighbor_mean" => Ok(Centering::NeighborMean),
            other => Err(Error::InvalidSpec(format!("unknown centering `{other}`"))),
        }
    }
}

/// Solver together with the fit's offset origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CurvatureMethod {
    pub solver: Solver,
    pub centering: Centering,
}

impl From<Solver> for CurvatureMethod {
    fn from(solver: Solver) -> Self {
        CurvatureMethod {
            solver,
            centering: Centering::default(),
        }
    }
}

/// Position rows shifted to the chosen origin.
pub fn center_rows<S: Real>(dp: &[[S; 2]], centering: Centering) -> Vec<[S; 2]> {
    match centering {
        Centering::Origin => dp.to_vec(),
        Centering::NeighborMean => {
            let mut m = [S::zero(); 2];
            for p in dp {
                m[0] += p[0];
                m[1] += p[1];
            }
            let inv = 1.0 / dp.len().max(1) as f64;
            let m = [m[0] * inv, m[1] * inv];
            dp.iter().map(|p| [p[0] - m[0], p[1] - m[1]]).collect()
        }
    }
}

/// Solve `WA + AW = X` for symmetric `W`:
/// `A = QΛQᵀ`, `C = QᵀXQ`, `e_pq = c_pq / (λ_p + λ_q)`, `W = QEQᵀ`.
pub fn solve_sylvester<S: Real>(a: &Sym2<S>, x: &Sym2<S>) -> Result<Sym2<S>> {
    let eig = eigen_sym2(a)?;
    let [l0, l1] = eig.values;
    let min_sum = (l1 + l1).value().min((l0 + l1).value());
    if !(min_sum > EPS_EIG) {
        return Err(Error::NearSingular(min_sum));
    }
    let [q0, q1] = eig.vectors;
    // C = Qᵀ X Q with Q's columns q0, q1.
    let xq = |q: [S; 2]| [x.a11 * q[0] + x.a12 * q[1], x.a12 * q[0] + x.a22 * q[1]];
    let dot = |u: [S; 2], v: [S; 2]| u[0] * v[0] + u[1] * v[1];
    let (xq0, xq1) = (xq(q0), xq(q1));
    let e00 = dot(q0, xq0) / (l0 + l0);
    let e01 = dot(q0, xq1) / (l0 + l1);
    let e11 = dot(q1, xq1) / (l1 + l1);
    Ok(Sym2::new(
        q0[0] * q0[0] * e00 + (q0[0] * q1[0]) * e01 * 2.0 + q1[0] * q1[0] * e11,
        q0[0] * q0[1] * e00 + (q0[0] * q1[1] + q1[0] * q0[1]) * e01 + q1[0] * q1[1] * e11,
        q0[1] * q0[1] * e00 + (q0[1] * q1[1]) * e01 * 2.0 + q1[1] * q1[1] * e11,
    ))
}

/// Normal-equation products of one neighborhood: `A = dp̃ᵀdp̃`, `B = dp̃ᵀdñ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSystem<S = f64> {
    pub a: Sym2<S>,
    /// Row-major `B[p][q] = Σ_j dp̃_jp · dñ_jq`.
    pub b: [[S; 2]; 2],
}

impl<S: Real> LocalSystem<S> {
    pub fn from_rows(dp: &[[S; 2]], dn: &[[S; 2]]) -> Self {
        let mut sys = LocalSystem {
            a: Sym2::zero(),
            b: [[S::zero(); 2]; 2],
        };
        for (p, n) in dp.iter().zip(dn) {
            sys.add_row(*p, *n);
        }
        sys
    }

    /// System of the rows after moving the position origin.
    pub fn from_rows_centered(dp: &[[S; 2]], dn: &[[S; 2]], centering: Centering) -> Self {
        Self::from_rows(&center_rows(dp, centering), dn)
    }

    pub fn add_row(&mut self, p: [S; 2], n: [S; 2]) {
        self.a.a11 += p[0] * p[0];
        self.a.a12 += p[0] * p[1];
        self.a.a22 += p[1] * p[1];
        for r in 0..2 {
            for c in 0..2 {
                self.b[r][c] += p[r] * n[c];
            }
        }
    }

    /// `X = B + Bᵀ`.
    pub fn x(&self) -> Sym2<S> {
        let b = &self.b;
        Sym2::new(b[0][0] * 2.0, b[0][1] + b[1][0], b[1][1] * 2.0)
    }

    /// The system after scaling `dp̃` by `s`.
    fn scaled(&self, s: S) -> Self {
        let s2 = s * s;
        LocalSystem {
            a: self.a.scale(s2),
            b: self.b.map(|row| row.map(|v| v * s)),
        }
    }

    fn perturbed(&self) -> Self {
        let eps = self.a.trace() * PERTURB_REL;
        LocalSystem {
            a: Sym2::new(self.a.a11 + eps, self.a.a12, self.a.a22 + eps),
            b: self.b,
        }
    }
}

/// Symmetrized least-squares estimate with its non-symmetric precursor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinvSolution<S = f64> {
    /// `(W₀ + W₀ᵀ) / 2`.
    pub w: Sym2<S>,
    /// `W₀ = (dp̃ᵀdp̃)⁻¹ dp̃ᵀdñ`, row-major.
    pub w0: [[S; 2]; 2],
}

fn pinv_system<S: Real>(sys: &LocalSystem<S>) -> Result<PinvSolution<S>> {
    let a = &sys.a;
    let det = a.det();
    if !(det.value() > EPS_EIG * EPS_EIG) {
        return Err(Error::NearSingular(det.value()));
    }
    let inv = [[a.a22 / det, -a.a12 / det], [-a.a12 / det, a.a11 / det]];
    let b = &sys.b;
    let mut w0 = [[S::zero(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            w0[r][c] = inv[r][0] * b[0][c] + inv[r][1] * b[1][c];
        }
    }
    Ok(PinvSolution {
        w: Sym2::symmetrize(w0),
        w0,
    })
}

/// Least-squares `W₀` from `dp̃·W₀ ≈ dñ`, then its symmetric part.
pub fn solve_symmetrized_pinv<S: Real>(dp: &[[S; 2]], dn: &[[S; 2]]) -> Result<PinvSolution<S>> {
    pinv_system(&LocalSystem::from_rows(dp, dn))
}

fn det_system<S: Real>(sys: &LocalSystem<S>) -> Result<S> {
    let det_a = sys.a.det();
    if !(det_a.value() > EPS_DET) {
        return Err(Error::NearSingular(det_a.value()));
    }
    Ok(sys.x().det() / (det_a * 4.0))
}

/// `K = det(dp̃ᵀdñ + dñᵀdp̃) / (4 det(dp̃ᵀdp̃))`, without any eigen-decomposition.
///
/// The rows are trace-normalized first; a near-singular `A` is retried once
/// with an isotropic perturbation.
pub fn gaussian_commuting_det<S: Real>(dp: &[[S; 2]], dn: &[[S; 2]]) -> Result<S> {
    solve_local(&LocalSystem::from_rows(dp, dn), Solver::CommutingDet).map(|s| s.gaussian)
}

/// Result of one per-point solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSolution<S = f64> {
    pub gaussian: S,
    pub w: Option<Sym2<S>>,
    pub w0: Option<[[S; 2]; 2]>,
    /// The first attempt was near-singular and the perturbed retry was used.
    pub perturbed: bool,
}

/// Solve one neighborhood with trace pre-scaling and the single perturbed
/// retry.
pub fn solve_local<S: Real>(sys: &LocalSystem<S>, solver: Solver) -> Result<LocalSolution<S>> {
    let tr = sys.a.trace();
    if !(tr.value() > 0.0) || !tr.value().is_finite() {
        return Err(Error::NearSingular(tr.value()));
    }
    let s = S::one() / tr.sqrt();
    let scaled = sys.scaled(s);
    let attempt = |sys: &LocalSystem<S>| -> Result<LocalSolution<S>> {
        match solver {
            Solver::Sylvester => {
                let w = solve_sylvester(&sys.a, &sys.x())?.scale(s);
                Ok(LocalSolution {
                    gaussian: w.det(),
                    w: Some(w),
                    w0: None,
                    perturbed: false,
                })
            }
            Solver::SymmetrizedPinv => {
                let sol = pinv_system(sys)?;
                let w = sol.w.scale(s);
                Ok(LocalSolution {
                    gaussian: w.det(),
                    w: Some(w),
                    w0: Some(sol.w0.map(|row| row.map(|v| v * s))),
                    perturbed: false,
                })
            }
            Solver::CommutingDet => Ok(LocalSolution {
                gaussian: det_system(sys)? * (s * s),
                w: None,
                w0: None,
                perturbed: false,
            }),
        }
    };
    match attempt(&scaled) {
        Err(Error::NearSingular(_)) => {
            let mut sol = attempt(&scaled.perturbed())?;
            sol.perturbed = true;
            Ok(sol)
        }
        other => other,
    }
}

/// Quality bits of a per-point estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFlags {
    /// Solved only after perturbing a near-singular `A`.
    pub perturbed: bool,
    /// No usable solution.
    pub failed: bool,
    /// The frame or chart of the point was degenerate.
    pub degenerate_input: bool,
}

impl PointFlags {
    pub fn is_clean(&self) -> bool {
        !self.perturbed && !self.failed && !self.degenerate_input
    }
}

/// Per-point Weingarten maps.
#[derive(Debug, Clone, PartialEq)]
pub struct WeingartenField {
    pub solver: Solver,
    /// Zero where the point is flagged as failed.
    pub w: Vec<Sym2>,
    /// Pre-symmetrization estimates, kept for the least-squares solver.
    pub w0: Option<Vec<[[f64; 2]; 2]>>,
    pub flags: Vec<PointFlags>,
}

/// Gaussian, mean and total curvature per point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub solver: Solver,
    pub gaussian: Vec<f64>,
    /// Absent for [`Solver::CommutingDet`].
    pub mean: Option<Vec<f64>>,
    /// Frobenius norm `√Σ w_pq²`.
    pub frobenius: Option<Vec<f64>>,
    /// `Tr(WᵀW)`.
    pub frobenius_sq: Option<Vec<f64>>,
    pub flags: Vec<PointFlags>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.gaussian.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussian.is_empty()
    }

    pub fn clean_count(&self) -> usize {
        self.flags.iter().filter(|f| f.is_clean()).count()
    }

    /// Mark points whose inputs were degenerate.
    pub fn flag_inputs(&mut self, degenerate: impl IntoIterator<Item = bool>) {
        for (f, d) in self.flags.iter_mut().zip(degenerate) {
            f.degenerate_input |= d;
        }
    }

    pub fn from_weingarten(field: &WeingartenField) -> Self {
        CurvatureField {
            solver: field.solver,
            gaussian: field.w.iter().map(Sym2::det).collect(),
            mean: Some(field.w.iter().map(|w| w.trace() * 0.5).collect()),
            frobenius: Some(field.w.iter().map(Sym2::frobenius).collect()),
            frobenius_sq: Some(field.w.iter().map(Sym2::frobenius_sq).collect()),
            flags: field.flags.clone(),
        }
    }
}

fn solve_all(chart: &TangentChart, method: CurvatureMethod) -> Vec<(LocalSolution, PointFlags)> {
    let solver = method.solver;
    (0..chart.len())
        .into_par_iter()
        .map(|i| {
            let sys = LocalSystem::from_rows_centered(chart.dp(i), chart.dn(i), method.centering);
            match solve_local(&sys, solver) {
                Ok(sol) if sol.gaussian.is_finite() => {
                    let flags = PointFlags {
                        perturbed: sol.perturbed,
                        ..PointFlags::default()
                    };
                    (sol, flags)
                }
                _ => (
                    LocalSolution {
                        gaussian: 0.0,
                        w: solver.has_weingarten().then(Sym2::zero),
                        w0: (solver == Solver::SymmetrizedPinv).then_some([[0.0; 2]; 2]),
                        perturbed: false,
                    },
                    PointFlags {
                        failed: true,
                        ..PointFlags::default()
                    },
                ),
            }
        })
        .collect()
}

/// Weingarten maps for every chart point. Fails only for
/// [`Solver::CommutingDet`], which never forms `W`.
pub fn weingarten_field(chart: &TangentChart, method: impl Into<CurvatureMethod>) -> Result<WeingartenField> {
    let method = method.into();
    let solver = method.solver;
    if !solver.has_weingarten() {
        return Err(Error::InvalidSpec(
            "the determinant solver does not produce a Weingarten map".into(),
        ));
    }
    let results = solve_all(chart, method);
    Ok(WeingartenField {
        solver,
        w: results.iter().map(|(s, _)| s.w.unwrap_or_default()).collect(),
        w0: (solver == Solver::SymmetrizedPinv)
            .then(|| results.iter().map(|(s, _)| s.w0.unwrap_or_default()).collect()),
        flags: results.iter().map(|(_, f)| *f).collect(),
    })
}

/// Curvature of every chart point. Per-point failures are flagged, never
/// fatal. A bare [`Solver`] uses the default centering.
pub fn curvature_field(chart: &TangentChart, method: impl Into<CurvatureMethod>) -> CurvatureField {
    let method = method.into();
    let solver = method.solver;
    match weingarten_field(chart, method) {
        Ok(field) => CurvatureField::from_weingarten(&field),
        Err(_) => {
            let results = solve_all(chart, method);
            CurvatureField {
                solver,
                gaussian: results.iter().map(|(s, _)| s.gaussian).collect(),
                mean: None,
                frobenius: None,
                frobenius_sq: None,
                flags: results.iter().map(|(_, f)| *f).collect(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dual_lift, rng_for, Dual2};
    use rand::Rng;

    fn close(a: &Sym2, b: &Sym2, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn sylvester_identity_a() {
        let w = solve_sylvester(&Sym2::identity(), &Sym2::new(2.0, 0.0, 4.0)).unwrap();
        assert!(close(&w, &Sym2::new(1.0, 0.0, 2.0), 1e-15));
    }

    #[test]
    fn sylvester_diagonal_a() {
        let a = Sym2::new(1.0, 0.0, 3.0);
        let x = Sym2::new(2.0, 4.0, 6.0);
        let w = solve_sylvester(&a, &x).unwrap();
        assert!(close(&w, &Sym2::new(1.0, 1.0, 1.0), 1e-14), "{w:?}");
        assert!(close(&w.anticommutator(&a), &x, 1e-14));
    }

    #[test]
    fn sylvester_zero_a() {
        assert!(matches!(
            solve_sylvester(&Sym2::<f64>::zero(), &Sym2::identity()),
            Err(Error::NearSingular(_))
        ));
    }

    fn random_rows(rng: &mut impl Rng, k: usize) -> Vec<[f64; 2]> {
        (0..k)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect()
    }

    fn apply(rows: &[[f64; 2]], s: &Sym2) -> Vec<[f64; 2]> {
        // dñ = dp̃ · Sᵀ
        rows.iter()
            .map(|p| [s.a11 * p[0] + s.a12 * p[1], s.a12 * p[0] + s.a22 * p[1]])
            .collect()
    }

    #[test]
    fn pinv_exact_fits() {
        let mut rng = rng_for(1, 0);
        let dp = random_rows(&mut rng, 20);
        let sol = solve_symmetrized_pinv(&dp, &dp).unwrap();
        assert!(close(&sol.w, &Sym2::identity(), 1e-12));
        let zero = vec![[0.0; 2]; 20];
        assert!(close(&solve_symmetrized_pinv(&dp, &zero).unwrap().w, &Sym2::zero(), 0.0));
    }

    #[test]
    fn recover_symmetric_map() {
        let mut rng = rng_for(2, 0);
        for _ in 0..500 {
            let dp = random_rows(&mut rng, 20);
            let s = Sym2::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let dn = apply(&dp, &s);
            let sys = LocalSystem::from_rows(&dp, &dn);
            for solver in [Solver::Sylvester, Solver::SymmetrizedPinv] {
                let w = solve_local(&sys, solver).unwrap().w.unwrap();
                assert!(close(&w, &s, 1e-10), "{solver}: {w:?} vs {s:?}");
            }
            let k = solve_local(&sys, Solver::CommutingDet).unwrap().gaussian;
            assert!(k.is_finite());
        }
    }

    #[test]
    fn non_symmetric_w0_is_kept() {
        let mut rng = rng_for(3, 0);
        let dp = random_rows(&mut rng, 20);
        let m = [[1.0, 2.0], [0.0, 1.0]];
        let dn: Vec<_> = dp
            .iter()
            .map(|p| [p[0] * m[0][0] + p[1] * m[1][0], p[0] * m[0][1] + p[1] * m[1][1]])
            .collect();
        let sol = solve_symmetrized_pinv(&dp, &dn).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!((sol.w0[r][c] - m[r][c]).abs() < 1e-12);
            }
        }
        assert!(close(&sol.w, &Sym2::new(1.0, 1.0, 1.0), 1e-12));
    }

    #[test]
    fn commuting_det_cases() {
        let mut rng = rng_for(4, 0);
        let dp = random_rows(&mut rng, 20);
        assert!((gaussian_commuting_det(&dp, &dp).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<_> = dp.iter().map(|p| [-p[0], -p[1]]).collect();
        assert!((gaussian_commuting_det(&dp, &neg).unwrap() - 1.0).abs() < 1e-12);
        // Orthogonal design: dp̃ᵀdp̃ = 2·I.
        let ortho = vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let dn = apply(&ortho, &Sym2::new(2.0, 0.0, 0.5));
        assert!((gaussian_commuting_det(&ortho, &dn).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn centering_absorbs_common_shift() {
        let mut rng = rng_for(8, 0);
        let dp = random_rows(&mut rng, 20);
        let s = Sym2::new(0.7, -0.2, 1.3);
        let shifted: Vec<_> = apply(&dp, &s).iter().map(|n| [n[0] + 0.3, n[1] - 0.1]).collect();
        let centered = LocalSystem::from_rows_centered(&dp, &shifted, Centering::NeighborMean);
        let w = solve_local(&centered, Solver::Sylvester).unwrap().w.unwrap();
        assert!(close(&w, &s, 1e-10));
        let raw = LocalSystem::from_rows_centered(&dp, &shifted, Centering::Origin);
        assert!(!close(&solve_local(&raw, Solver::Sylvester).unwrap().w.unwrap(), &s, 1e-3));
        // Without a shift both origins recover the map.
        let exact = apply(&dp, &s);
        for c in [Centering::Origin, Centering::NeighborMean] {
            let sys = LocalSystem::from_rows_centered(&dp, &exact, c);
            assert!(close(&solve_local(&sys, Solver::SymmetrizedPinv).unwrap().w.unwrap(), &s, 1e-10));
        }
    }

    #[test]
    fn collinear_rows_are_perturbed() {
        let dp: Vec<_> = (1..8).map(|i| [i as f64, 0.0]).collect();
        let sys = LocalSystem::from_rows(&dp, &dp);
        let sol = solve_local(&sys, Solver::Sylvester).unwrap();
        assert!(sol.perturbed);
        let zero = vec![[0.0; 2]; 5];
        assert!(solve_local(&LocalSystem::from_rows(&zero, &zero), Solver::Sylvester).is_err());
    }

    #[test]
    fn invariants_on_random_systems() {
        let mut rng = rng_for(5, 0);
        for _ in 0..1000 {
            let dp = random_rows(&mut rng, 12);
            let dn = random_rows(&mut rng, 12);
            let sys = LocalSystem::from_rows(&dp, &dn);
            let flipped: Vec<_> = dn.iter().map(|n| [-n[0], -n[1]]).collect();
            let sys_flip = LocalSystem::from_rows(&dp, &flipped);
            for solver in [Solver::Sylvester, Solver::SymmetrizedPinv] {
                let w = solve_local(&sys, solver).unwrap().w.unwrap();
                let h = w.trace() * 0.5;
                assert!(h * h >= w.det() - 1e-12);
                let wf = solve_local(&sys_flip, solver).unwrap().w.unwrap();
                assert!((wf.det() - w.det()).abs() <= 1e-12 * w.det().abs().max(1.0));
                assert!((wf.trace() + w.trace()).abs() <= 1e-12 * w.trace().abs().max(1.0));
            }
            if solver_residual(&sys) > 1e-9 * sys.x().max_abs().max(1.0) {
                panic!("residual");
            }
            let k = solve_local(&sys, Solver::CommutingDet).unwrap().gaussian;
            let kf = solve_local(&sys_flip, Solver::CommutingDet).unwrap().gaussian;
            assert_eq!(k.to_bits(), kf.to_bits());
        }
    }

    fn solver_residual(sys: &LocalSystem) -> f64 {
        let w = solve_sylvester(&sys.a, &sys.x()).unwrap();
        w.anticommutator(&sys.a).sub(&sys.x()).max_abs()
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = rng_for(6, 0);
        for _ in 0..300 {
            let dp = random_rows(&mut rng, 15);
            let dn = random_rows(&mut rng, 15);
            let ang: f64 = rng.random_range(0.0..6.3);
            let (c, s) = (ang.cos(), ang.sin());
            let rot = |v: &[[f64; 2]]| -> Vec<[f64; 2]> {
                v.iter().map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect()
            };
            let base = LocalSystem::from_rows(&dp, &dn);
            let turned = LocalSystem::from_rows(&rot(&dp), &rot(&dn));
            for solver in [Solver::Sylvester, Solver::SymmetrizedPinv] {
                let a = solve_local(&base, solver).unwrap().w.unwrap();
                let b = solve_local(&turned, solver).unwrap().w.unwrap();
                assert!((a.det() - b.det()).abs() < 1e-10 * a.det().abs().max(1.0));
                assert!((a.trace() - b.trace()).abs() < 1e-10 * a.trace().abs().max(1.0));
            }
        }
    }

    #[test]
    fn dual_matches_finite_difference() {
        let mut rng = rng_for(7, 0);
        let dp = random_rows(&mut rng, 10);
        let dn = random_rows(&mut rng, 10);
        for solver in [Solver::Sylvester, Solver::SymmetrizedPinv, Solver::CommutingDet] {
            let eval = |t: f64| {
                let mut d = dn.clone();
                d[3][0] += t;
                solve_local(&LocalSystem::from_rows(&dp, &d), solver).unwrap().gaussian
            };
            let lifted: Vec<[Dual2; 2]> = dn
                .iter()
                .enumerate()
                .map(|(j, n)| {
                    if j == 3 {
                        [dual_lift(n[0], 0), Dual2::constant(n[1])]
                    } else {
                        [Dual2::constant(n[0]), Dual2::constant(n[1])]
                    }
                })
                .collect();
            let dpl: Vec<[Dual2; 2]> =
                dp.iter().map(|p| [Dual2::constant(p[0]), Dual2::constant(p[1])]).collect();
            let k = solve_local(&LocalSystem::from_rows(&dpl, &lifted), solver).unwrap().gaussian;
            let h = 1e-6;
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            assert!((k.tangents[0] - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{solver}");
            assert_eq!(k.value, eval(0.0));
        }
    }
}
