use std::f64::consts::PI;

use rayon::prelude::*;

use super::TopologyEstimate;
use crate::area::AreaField;
use crate::curvature::{center_rows, solve_local, CurvatureMethod, LocalSolution, LocalSystem, PointFlags, Solver};
use crate::frames::{angles_from_normal, frame_from_angles, Frame, FrameQuality, Frames, Neighborhood};
use crate::numerics::vec3::{dot, lift, sub, Vec3};
use crate::numerics::{dual_lift, stable_sum, Dual, Dual2, Real};
use crate::{Error, Result};

/// `(φ, θ)` of every frame normal.
pub fn angles_from_frames(frames: &Frames) -> Vec<[f64; 2]> {
    frames
        .frames
        .iter()
        .map(|f| {
            let (phi, theta) = angles_from_normal(f.n);
            [phi, theta]
        })
        .collect()
}

/// Frames completed from spherical angles by [`frame_from_angles`].
pub fn frames_from_angles(angles: &[[f64; 2]]) -> Frames {
    Frames {
        frames: angles.iter().map(|a| frame_from_angles(a[0], a[1])).collect(),
        quality: vec![FrameQuality::default(); angles.len()],
    }
}

/// Gaussian curvature of one neighborhood from its offsets, center frame and
/// neighbor normals.
pub fn local_gaussian<S: Real>(
    offsets: &[[S; 3]],
    frame: &Frame<S>,
    neighbor_normals: &[[S; 3]],
    method: CurvatureMethod,
) -> Result<LocalSolution<S>> {
    let (dp, dn): (Vec<[S; 2]>, Vec<[S; 2]>) = offsets
        .iter()
        .zip(neighbor_normals)
        .map(|(off, nj)| chart_row(*off, frame, *nj))
        .unzip();
    solve_local(&LocalSystem::from_rows_centered(&dp, &dn, method.centering), method.solver)
}

/// Chart rows of point `j` with the position rows moved to the fit origin,
/// and the resulting system.
fn centered_rows(
    neigh: &Neighborhood,
    frames: &[Frame],
    j: usize,
    method: CurvatureMethod,
) -> (Vec<[f64; 2]>, Vec<[f64; 2]>, LocalSystem) {
    let (dp, dn): (Vec<[f64; 2]>, Vec<[f64; 2]>) = neigh
        .neighbors(j)
        .iter()
        .zip(neigh.offsets(j))
        .map(|(&i, &off)| chart_row(off, &frames[j], frames[i].n))
        .unzip();
    let dp = center_rows(&dp, method.centering);
    let sys = LocalSystem::from_rows(&dp, &dn);
    (dp, dn, sys)
}

fn chart_row<S: Real>(off: [S; 3], frame: &Frame<S>, nj: [S; 3]) -> ([S; 2], [S; 2]) {
    let dn = sub(nj, frame.n);
    (
        [dot(off, frame.t), dot(off, frame.t_prime)],
        [dot(dn, frame.t), dot(dn, frame.t_prime)],
    )
}

fn lift_system<const N: usize>(sys: &LocalSystem) -> LocalSystem<Dual<N>> {
    LocalSystem {
        a: sys.a.lift(),
        b: sys.b.map(|row| row.map(Dual::constant)),
    }
}

fn without_row(sys: &LocalSystem, p: [f64; 2], n: [f64; 2]) -> LocalSystem {
    let mut out = *sys;
    out.a.a11 = out.a.a11 - p[0] * p[0];
    out.a.a12 = out.a.a12 - p[0] * p[1];
    out.a.a22 = out.a.a22 - p[1] * p[1];
    for r in 0..2 {
        for c in 0..2 {
            out.b[r][c] = out.b[r][c] - p[r] * n[c];
        }
    }
    out
}

/// Euler estimate at the current angles together with `∂χ/∂(φ_i, θ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerGradient {
    pub estimate: TopologyEstimate,
    pub gaussian: Vec<f64>,
    pub flags: Vec<PointFlags>,
    pub grad: Vec<[f64; 2]>,
}

struct PointTerms<const N: usize> {
    gaussian: f64,
    flags: PointFlags,
    clean: bool,
    own: [f64; N],
    /// Derivative with respect to the parameters of each neighbor, in
    /// neighbor order.
    neighbors: Vec<[f64; N]>,
}

fn flags_of(result: &Result<LocalSolution>) -> (f64, PointFlags) {
    match result {
        Ok(sol) if sol.gaussian.is_finite() => (
            sol.gaussian,
            PointFlags {
                perturbed: sol.perturbed,
                ..PointFlags::default()
            },
        ),
        _ => (
            0.0,
            PointFlags {
                failed: true,
                ..PointFlags::default()
            },
        ),
    }
}

fn assemble<const N: usize>(
    neigh: &Neighborhood,
    terms: Vec<PointTerms<N>>,
    weights: &[f64],
) -> Result<(TopologyEstimate, Vec<f64>, Vec<PointFlags>, Vec<[f64; N]>)> {
    let n = terms.len();
    let mut flagged = 0;
    let contributions: Vec<f64> = terms
        .iter()
        .zip(weights)
        .map(|(t, w)| {
            if t.clean {
                t.gaussian * w
            } else {
                flagged += 1;
                0.0
            }
        })
        .collect();
    if flagged == n {
        return Err(Error::AllPointsFlagged);
    }
    // For every parameter i, gather the terms of the evaluation points whose
    // stencil contains i, in increasing evaluation index, then sum stably.
    let mut incoming: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for j in 0..n {
        for (r, &i) in neigh.neighbors(j).iter().enumerate() {
            incoming[i].push((j, r));
        }
    }
    let grad: Vec<[f64; N]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = [0.0; N];
            let mut parts = Vec::with_capacity(incoming[i].len() + 1);
            for (lane, o) in out.iter_mut().enumerate() {
                parts.clear();
                parts.push(terms[i].own[lane] * weights[i]);
                for &(j, r) in &incoming[i] {
                    parts.push(terms[j].neighbors[r][lane] * weights[j]);
                }
                *o = stable_sum(&parts);
            }
            out
        })
        .collect();
    let gaussian = terms.iter().map(|t| t.gaussian).collect();
    let flags = terms.iter().map(|t| t.flags).collect();
    Ok((
        TopologyEstimate::from_contributions(contributions, flagged),
        gaussian,
        flags,
        grad,
    ))
}

fn weights_and_mask(areas: &AreaField, excluded: Option<&[bool]>) -> (Vec<f64>, Vec<bool>) {
    let weights = areas.areas.iter().map(|a| a / (2.0 * PI)).collect();
    let mask = (0..areas.len())
        .map(|i| !areas.degenerate[i] && !excluded.is_some_and(|e| e[i]))
        .collect();
    (weights, mask)
}

/// χ and its gradient with respect to every normal angle pair.
///
/// Areas are held fixed. Each evaluation point `j` is differentiated once
/// with both lanes on its own angles (the whole chart depends on them) and
/// once per neighbor `i`, where only the row of `i` carries lanes.
/// `excluded` marks points to leave out of the sum entirely.
pub fn euler_and_gradient(
    neigh: &Neighborhood,
    angles: &[[f64; 2]],
    areas: &AreaField,
    method: impl Into<CurvatureMethod>,
    excluded: Option<&[bool]>,
) -> Result<EulerGradient> {
    let method = method.into();
    let solver = method.solver;
    let frames: Vec<Frame> = angles.iter().map(|a| frame_from_angles(a[0], a[1])).collect();
    let (weights, mask) = weights_and_mask(areas, excluded);
    let terms: Vec<PointTerms<2>> = (0..angles.len())
        .into_par_iter()
        .map(|j| {
            let fj = &frames[j];
            let nbrs = neigh.neighbors(j);
            let offs = neigh.offsets(j);
            let (dp, dn, sys) = centered_rows(neigh, &frames, j, method);
            let (gaussian, flags) = flags_of(&solve_local(&sys, solver));
            let clean = mask[j] && flags.is_clean();
            let mut terms = PointTerms {
                gaussian,
                flags,
                clean,
                own: [0.0; 2],
                neighbors: vec![[0.0; 2]; nbrs.len()],
            };
            if !clean {
                return terms;
            }
            let fd: Frame<Dual2> =
                frame_from_angles(dual_lift(angles[j][0], 0), dual_lift(angles[j][1], 1));
            let offs_d: Vec<[Dual2; 3]> = offs.iter().map(|&o| lift(o)).collect();
            let normals_d: Vec<[Dual2; 3]> = nbrs.iter().map(|&i| lift(frames[i].n)).collect();
            if let Ok(sol) = local_gaussian(&offs_d, &fd, &normals_d, method) {
                terms.own = sol.gaussian.tangents;
            }
            let fjd: Frame<Dual2> = fj.lift();
            for (r, &i) in nbrs.iter().enumerate() {
                // Only the normal-difference entry of row r depends on n_i.
                let mut sys_d: LocalSystem<Dual2> = lift_system(&without_row(&sys, dp[r], dn[r]));
                let ni: Frame<Dual2> =
                    frame_from_angles(dual_lift(angles[i][0], 0), dual_lift(angles[i][1], 1));
                let (_, nd) = chart_row(lift(offs[r]), &fjd, ni.n);
                sys_d.add_row(dp[r].map(Dual::constant), nd);
                if let Ok(sol) = solve_local(&sys_d, solver) {
                    terms.neighbors[r] = sol.gaussian.tangents;
                }
            }
            terms
        })
        .collect();
    let (estimate, gaussian, flags, grad) = assemble(neigh, terms, &weights)?;
    Ok(EulerGradient {
        estimate,
        gaussian,
        flags,
        grad,
    })
}

/// `∂χ/∂(φ_i, θ_i)` for every point; see [`euler_and_gradient`].
pub fn grad_euler_wrt_angles(
    neigh: &Neighborhood,
    angles: &[[f64; 2]],
    areas: &AreaField,
    solver: Solver,
) -> Result<Vec<[f64; 2]>> {
    euler_and_gradient(neigh, angles, areas, CurvatureMethod::from(solver), None).map(|g| g.grad)
}

/// `∂χ/∂p_i` with neighbor lists, normals and areas held fixed.
pub fn grad_euler_wrt_positions(
    neigh: &Neighborhood,
    angles: &[[f64; 2]],
    areas: &AreaField,
    method: impl Into<CurvatureMethod>,
    excluded: Option<&[bool]>,
) -> Result<Vec<Vec3>> {
    let method = method.into();
    let frames: Vec<Frame> = angles.iter().map(|a| frame_from_angles(a[0], a[1])).collect();
    let (weights, mask) = weights_and_mask(areas, excluded);
    let terms: Vec<PointTerms<3>> = (0..angles.len())
        .into_par_iter()
        .map(|j| {
            let fjd: Frame<Dual<3>> = frames[j].lift();
            let nbrs = neigh.neighbors(j);
            let offs = neigh.offsets(j);
            let (_, _, sys) = centered_rows(neigh, &frames, j, method);
            let (gaussian, flags) = flags_of(&solve_local(&sys, method.solver));
            let clean = mask[j] && flags.is_clean();
            let mut terms = PointTerms {
                gaussian,
                flags,
                clean,
                own: [0.0; 3],
                neighbors: vec![[0.0; 3]; nbrs.len()],
            };
            if !clean {
                return terms;
            }
            let normals_d: Vec<[Dual<3>; 3]> = nbrs.iter().map(|&i| lift(frames[i].n)).collect();
            // Offsets p_i − p_j with lanes on the point that moves: every
            // row for the center (sign −1), a single row for a neighbor.
            let eval = |moving: Option<usize>| -> [f64; 3] {
                let offs_d: Vec<[Dual<3>; 3]> = offs
                    .iter()
                    .enumerate()
                    .map(|(r, o)| {
                        let sign = match moving {
                            None => -1.0,
                            Some(m) if m == r => 1.0,
                            Some(_) => 0.0,
                        };
                        [0, 1, 2].map(|a| {
                            let mut d = Dual::<3>::constant(o[a]);
                            d.tangents[a] = sign;
                            d
                        })
                    })
                    .collect();
                local_gaussian(&offs_d, &fjd, &normals_d, method)
                    .map(|s| s.gaussian.tangents)
                    .unwrap_or([0.0; 3])
            };
            terms.own = eval(None);
            for r in 0..nbrs.len() {
                terms.neighbors[r] = eval(Some(r));
            }
            terms
        })
        .collect();
    Ok(assemble(neigh, terms, &weights)?.3)
}
