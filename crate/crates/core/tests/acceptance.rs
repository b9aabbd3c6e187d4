//! End-to-end acceptance checks, one `PASS`/`FAIL` line per criterion with
//! the measured numbers. Runs without the test harness so the lines are
//! always shown; positional arguments select checks by name substring:
//!
//! `cargo test --release -p gbtopo --test acceptance -- c04 c11`

use std::f64::consts::PI;
use std::time::Instant;

use gbtopo::cloud_io::{
    add_noise, mesh_euler, report_to_string, sample_mesh, NoiseSpec, PointCloud, ReportFormat, ReportRow,
    SamplingScheme,
};
use gbtopo::curvature::{solve_local, solve_sylvester, Centering, LocalSystem, Solver};
use gbtopo::frames::{build_knn, Frame, Frames};
use gbtopo::numerics::vec3::{normalize, Vec3};
use gbtopo::numerics::{rng_for, split_seed, Sym2};
use gbtopo::pipeline::{analyze, curvature_errors, estimate_frames, NormalSource, PipelineConfig};
use gbtopo::synthetic::meshes::{double_torus, icosphere, torus_grid};
use gbtopo::synthetic::{sample_ellipsoid, sample_torus, EllipsoidSpec, SurfaceSampling, TorusSpec};
use gbtopo::topology::{
    angles_from_frames, euler_and_gradient, euler_from_parts, frames_from_angles, integrity_well, self_optimize,
    OptimizeConfig,
};
use gbtopo::area::{area_field, project_to_tangent, AreaConfig};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

const SEEDS: u64 = 10;

fn report(id: u32, name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!(
        "criterion {id:>2} {:<4} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn sphere(n: usize, seed: u64) -> (PointCloud, gbtopo::synthetic::GroundTruth) {
    sample_ellipsoid(&EllipsoidSpec::sphere(n, seed)).unwrap()
}

fn torus(major: f64, minor: f64, n: usize, seed: u64) -> (PointCloud, gbtopo::synthetic::GroundTruth) {
    sample_torus(&TorusSpec {
        major,
        minor,
        n,
        scheme: SurfaceSampling::UniformArea,
        seed,
    })
    .unwrap()
}

fn euler_of(cloud: &PointCloud, config: &PipelineConfig) -> (f64, i64) {
    let t = analyze(cloud, config).unwrap().topology;
    (t.euler, t.genus)
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>().join(" ")
}

/// Rotate each normal by a random tangent angle; per-axis sigma is chosen so
/// the RMS tilt equals `rms_deg`.
fn tilt_normals(normals: &[Vec3], rms_deg: f64, seed: u64) -> Vec<Vec3> {
    let g = Normal::new(0.0, rms_deg.to_radians() / 2f64.sqrt()).unwrap();
    let mut rng = rng_for(seed, 0);
    normals
        .iter()
        .map(|&n| {
            let f = Frame::from_normal(n);
            let (a, b): (f64, f64) = (g.sample(&mut rng), g.sample(&mut rng));
            let angle = a.hypot(b);
            if angle == 0.0 {
                return n;
            }
            let (s, c) = angle.sin_cos();
            normalize([0, 1, 2].map(|k| n[k] * c + (f.t[k] * a + f.t_prime[k] * b) / angle * s))
        })
        .collect()
}

fn c01_sylvester_residual() -> bool {
    let start = Instant::now();
    let mut rng = rng_for(101, 0);
    let trials = 100_000;
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..trials {
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let cond = 10f64.powf(rng.random_range(0.0..6.0));
        let (l1, l2) = (scale, scale / cond);
        let phi: f64 = rng.random_range(0.0..PI);
        let (s, c) = phi.sin_cos();
        let a = Sym2::new(l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c);
        let xs = 10f64.powf(rng.random_range(-3.0..3.0));
        let mut draw = || -> f64 { xs * Distribution::<f64>::sample(&StandardNormal, &mut rng) };
        let x = Sym2::new(draw(), draw(), draw());
        let w = match solve_sylvester(&a, &x) {
            Ok(w) => w,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        // W is stored symmetric, so symmetry holds by construction.
        let wm = w.to_array();
        let am = a.to_array();
        let xm = x.to_array();
        let mut resid = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let r: f64 = (0..2).map(|m| wm[i][m] * am[m][j] + am[i][m] * wm[m][j]).sum::<f64>() - xm[i][j];
                resid = resid.max(r.abs());
            }
        }
        let rel = resid / x.max_abs().max(1.0);
        worst = worst.max(rel);
        if rel > 1e-9 {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures == 0 && secs < 5.0;
    report(
        1,
        "Sylvester residual",
        pass,
        format!("{trials} systems, {failures} failures, worst scaled residual {worst:.2e}, {secs:.2}s"),
    );
    pass
}

fn c02_synthesize_and_recover() -> bool {
    let mut rng = rng_for(202, 0);
    let k = 20;
    let mut worst = [0.0f64; 2];
    for _ in 0..10_000 {
        let s = Sym2::new(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        );
        let sm = s.to_array();
        let dp: Vec<[f64; 2]> = (0..k)
            .map(|_| [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)])
            .collect();
        let dn: Vec<[f64; 2]> = dp
            .iter()
            .map(|p| [sm[0][0] * p[0] + sm[0][1] * p[1], sm[1][0] * p[0] + sm[1][1] * p[1]])
            .collect();
        let sys = LocalSystem::from_rows_centered(&dp, &dn, Centering::Origin);
        for (slot, solver) in [Solver::Sylvester, Solver::SymmetrizedPinv].into_iter().enumerate() {
            let w = solve_local(&sys, solver).unwrap().w.unwrap();
            worst[slot] = worst[slot].max(w.sub(&s).max_abs());
        }
    }
    let pass = worst.iter().all(|&e| e <= 1e-8);
    report(
        2,
        "synthesize and recover",
        pass,
        format!("max entry error sylvester {:.2e}, pinv {:.2e}", worst[0], worst[1]),
    );
    pass
}

fn c03_sphere_topology() -> bool {
    let start = Instant::now();
    let config = PipelineConfig::default();
    let runs: Vec<(f64, i64)> = (0..SEEDS).map(|s| euler_of(&sphere(2_000, s).0, &config)).collect();
    let secs = start.elapsed().as_secs_f64();
    let eulers: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let pass = runs.iter().all(|&(e, g)| (1.9..=2.1).contains(&e) && g == 0) && secs < 10.0;
    report(3, "sphere 2k", pass, format!("euler [{}], {secs:.2}s", fmt_list(&eulers)));
    pass
}

fn c04_torus_topology() -> bool {
    let config = PipelineConfig::default();
    let thin: Vec<(f64, i64)> = (0..SEEDS).map(|s| euler_of(&torus(5.0, 1.0, 10_000, s).0, &config)).collect();
    let fat: Vec<(f64, i64)> = (0..SEEDS).map(|s| euler_of(&torus(5.0, 3.0, 70_000, s).0, &config)).collect();
    let ok = |runs: &[(f64, i64)], tol: f64| runs.iter().all(|&(e, g)| e.abs() <= tol && g == 1);
    let pass = ok(&thin, 0.2) && ok(&fat, 0.05);
    let list = |runs: &[(f64, i64)]| fmt_list(&runs.iter().map(|r| r.0).collect::<Vec<_>>());
    report(
        4,
        "torus 10k / 70k",
        pass,
        format!("R5 r1 [{}]; R5 r3 [{}]", list(&thin), list(&fat)),
    );
    pass
}

/// Noise of 2.5% of the bounding-box diagonal is several times the point
/// spacing at 70k, so the neighborhood is widened to average it out.
const NOISY_K: usize = 300;

fn c05_noise_robustness() -> bool {
    let config = PipelineConfig {
        k: NOISY_K,
        ..PipelineConfig::default()
    };
    let mut eulers = Vec::new();
    let mut good = 0;
    for s in 0..SEEDS {
        let (cloud, _) = torus(5.0, 3.0, 70_000, s);
        let noisy = add_noise(&cloud, &NoiseSpec::gaussian(0.025, split_seed(s, "noise"))).unwrap();
        let (e, g) = euler_of(&noisy, &config);
        if e.abs() <= 0.5 && g == 1 {
            good += 1;
        }
        eulers.push(e);
    }
    let pass = good >= 8;
    report(
        5,
        "noisy torus 70k",
        pass,
        format!("{good}/{SEEDS} within 0.5 with genus 1 (k = {NOISY_K}), euler [{}]", fmt_list(&eulers)),
    );
    pass
}

fn c06_oracle_gauss_bonnet() -> bool {
    let config = PipelineConfig {
        normals: NormalSource::Input,
        ..PipelineConfig::default()
    };
    let run = |cloud: PointCloud, gt: gbtopo::synthetic::GroundTruth| {
        let cloud = gt.annotate(&cloud).unwrap();
        let a = analyze(&cloud, &config).unwrap();
        let curv = &a.curvature;
        euler_from_parts(&curv.gaussian, &gt.area_elements, |i| curv.flags[i].is_clean())
            .unwrap()
            .euler
    };
    let n = 50_000;
    let (c, gt) = sample_ellipsoid(&EllipsoidSpec {
        scheme: SurfaceSampling::Parametric,
        ..EllipsoidSpec::sphere(n, 6)
    })
    .unwrap();
    let s = run(c, gt);
    let (c, gt) = sample_torus(&TorusSpec {
        major: 5.0,
        minor: 1.0,
        n,
        scheme: SurfaceSampling::Parametric,
        seed: 6,
    })
    .unwrap();
    let t = run(c, gt);
    // 0.5% of the target; the torus target is 0, so the sphere's absolute
    // tolerance (0.01) is used there.
    let pass = (s - 2.0).abs() <= 0.005 * 2.0 && t.abs() <= 0.01;
    report(6, "oracle Gauss-Bonnet 50k", pass, format!("sphere {s:+.5}, torus {t:+.5}"));
    pass
}

/// Neighbors for the density sweep. With a fixed k the neighborhood shrinks
/// with spacing and the relative error of PCA normals stays put (it decays
/// with k, not with density), so k grows as `N^(2/3)` from 20 at 2k.
fn sweep_k(n: usize) -> usize {
    (20.0 * (n as f64 / 2_000.0).powf(2.0 / 3.0)).round() as usize
}

fn c07_curvature_accuracy_trend() -> bool {
    let densities = [2_000, 10_000, 50_000];
    let mut errs = Vec::new();
    for n in densities {
        let config = PipelineConfig {
            k: sweep_k(n),
            solver: Solver::Sylvester,
            ..PipelineConfig::default()
        };
        let seeds = 3;
        let mut sum = 0.0;
        for s in 0..seeds {
            let (cloud, gt) = sphere(n, 70 + s);
            let cloud = gt.annotate(&cloud).unwrap();
            let a = analyze(&cloud, &config).unwrap();
            sum += curvature_errors(&cloud, &a.curvature).unwrap().mean_abs_k;
        }
        errs.push(sum / seeds as f64);
    }
    let pass = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 0.02;
    let parts: Vec<String> = densities
        .iter()
        .zip(&errs)
        .map(|(n, e)| format!("{}k (k={}) {e:.5}", n / 1000, sweep_k(*n)))
        .collect();
    report(7, "sphere |K - K_true| trend", pass, format!("mean abs error {}", parts.join(", ")));
    pass
}

fn c08_integrity_well() -> bool {
    let mut worst = 0.0f64;
    for n in -10..=10 {
        let want = if n % 2 == 0 { 0.0 } else { 4.0 };
        worst = worst.max((integrity_well(n as f64) - want).abs());
        worst = worst.max((integrity_well(n as f64 + 0.5) - 1.0).abs());
    }
    let pass = worst <= 1e-12;
    report(8, "integrity well", pass, format!("max deviation {worst:.2e}"));
    pass
}

fn c09_gradient_gate() -> bool {
    let start = Instant::now();
    let config = PipelineConfig::default();
    let sphere_cloud = sphere(2_000, 9).0;
    let torus_cloud = torus(3.0, 1.0, 2_000, 9).0;
    let noisy = add_noise(&sphere(2_000, 19).0, &NoiseSpec::gaussian(0.003, 5)).unwrap();
    let mut rng = rng_for(909, 0);
    let (mut checked, mut failed) = (0, 0);
    let mut worst_rel = 0.0f64;
    for (cloud, count) in [(&sphere_cloud, 67), (&torus_cloud, 67), (&noisy, 66)] {
        let (neigh, frames) = estimate_frames(cloud, &config).unwrap();
        let angles = angles_from_frames(&frames);
        let areas = area_field(&project_to_tangent(&neigh, &frames_from_angles(&angles)), AreaConfig::default());
        let excluded: Vec<bool> = frames.quality.iter().map(|q| !q.is_clean()).collect();
        let method = config.method();
        let chi = |a: &[[f64; 2]]| {
            euler_and_gradient(&neigh, a, &areas, method, Some(&excluded))
                .unwrap()
                .estimate
                .euler
        };
        let g = euler_and_gradient(&neigh, &angles, &areas, method, Some(&excluded)).unwrap();
        for _ in 0..count {
            let i = rng.random_range(0..angles.len());
            for lane in 0..2 {
                let h = 1e-5;
                let mut plus = angles.clone();
                plus[i][lane] += h;
                let mut minus = angles.clone();
                minus[i][lane] -= h;
                let fd = (chi(&plus) - chi(&minus)) / (2.0 * h);
                let an = g.grad[i][lane];
                let ok = if fd.abs() < 1e-6 {
                    (an - fd).abs() <= 1e-10
                } else {
                    let rel = (an - fd).abs() / fd.abs();
                    worst_rel = worst_rel.max(rel);
                    rel <= 1e-4
                };
                checked += 1;
                if !ok {
                    failed += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failed == 0 && secs < 60.0;
    report(
        9,
        "gradient vs finite differences",
        pass,
        format!("{checked} partials over 200 points, {failed} failed, worst relative {worst_rel:.2e}, {secs:.1}s"),
    );
    pass
}

/// Step size for the optimization check. The library default (1e-3) moves
/// the estimate only about a fifth of the way to 0 within 200 steps.
const SELF_OPT_LR: f64 = 1e-2;

fn c10_self_optimization() -> bool {
    let mut improved = 0;
    let mut near_zero = 0;
    let mut lines = Vec::new();
    for s in 0..SEEDS {
        let (cloud, gt) = torus(5.0, 1.0, 10_000, s);
        let neigh = build_knn(&cloud, PipelineConfig::default().k).unwrap();
        let start = Frames::from_normals(&tilt_normals(&gt.exact_normals, 15.0, split_seed(s, "tilt")));
        let config = OptimizeConfig {
            steps: 200,
            lr: SELF_OPT_LR,
            chi_gt: None,
            seed: s,
            ..OptimizeConfig::default()
        };
        let out = self_optimize(cloud.positions(), &neigh, &start, &config).unwrap();
        let (a, b) = (out.initial.euler, out.estimate.euler);
        improved += (b.abs() < a.abs()) as usize;
        near_zero += (b.abs() < 0.5) as usize;
        lines.push(format!("{a:+.3}->{b:+.3}"));
    }
    let pass = improved >= 9 && near_zero >= 7;
    report(
        10,
        "self-optimization",
        pass,
        format!(
            "improved {improved}/{SEEDS}, final |euler| < 0.5 in {near_zero}/{SEEDS} (lr {SELF_OPT_LR}): {}",
            lines.join(" ")
        ),
    );
    pass
}

fn c11_mesh_pipeline() -> bool {
    let config = PipelineConfig::default();
    let meshes = [
        (0, icosphere(1.0, 4)),
        (1, torus_grid(2.0, 0.7, 48, 96)),
        (2, double_torus(0.05)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, mesh) in &meshes {
        let chi = mesh_euler(mesh);
        let mut hits = 0;
        for s in 0..SEEDS {
            let cloud = sample_mesh(mesh, 10_000, SamplingScheme::UniformArea, s).unwrap();
            hits += (euler_of(&cloud, &config).1 == *g) as usize;
        }
        pass &= chi == 2 - 2 * g && hits >= 8;
        parts.push(format!("genus {g}: mesh euler {chi}, {hits}/{SEEDS} clouds"));
    }
    report(11, "mesh pipeline", pass, parts.join("; "));
    pass
}

fn c12_determinism() -> bool {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let (cloud, gt) = sphere(2_000, 3);
            let cloud = gt.annotate(&cloud).unwrap();
            let a = analyze(&cloud, &PipelineConfig::default()).unwrap();
            let e = curvature_errors(&cloud, &a.curvature).unwrap();
            let row = ReportRow {
                model: "sphere".into(),
                method: "sylvester".into(),
                density: cloud.len(),
                noise: 0.0,
                max_abs_err: Some(e.max_abs_k),
                mean_abs_err: Some(e.mean_abs_k),
                euler_estimate: Some(a.topology.euler),
                genus: Some(a.topology.genus),
                wall_time_s: 0.0,
                max_abs_err_h: e.max_abs_h,
                mean_abs_err_h: e.mean_abs_h,
                repeats: 1,
                euler_std: None,
                status: "ok".into(),
            };
            let contributions: Vec<u64> = a.topology.contributions.iter().map(|c| c.to_bits()).collect();
            (report_to_string(&[row], ReportFormat::Json).unwrap(), contributions)
        })
    };
    let one = run(1);
    let eight = run(8);
    let pass = one == eight;
    report(
        12,
        "determinism",
        pass,
        format!("reports with 1 and 8 threads {}", if pass { "byte-identical" } else { "differ" }),
    );
    pass
}

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-') && a.parse::<u64>().is_err())
        .collect();
    let checks: [(&str, fn() -> bool); 12] = [
        ("c01_sylvester_residual", c01_sylvester_residual),
        ("c02_synthesize_and_recover", c02_synthesize_and_recover),
        ("c03_sphere_topology", c03_sphere_topology),
        ("c04_torus_topology", c04_torus_topology),
        ("c05_noise_robustness", c05_noise_robustness),
        ("c06_oracle_gauss_bonnet", c06_oracle_gauss_bonnet),
        ("c07_curvature_accuracy_trend", c07_curvature_accuracy_trend),
        ("c08_integrity_well", c08_integrity_well),
        ("c09_gradient_gate", c09_gradient_gate),
        ("c10_self_optimization", c10_self_optimization),
        ("c11_mesh_pipeline", c11_mesh_pipeline),
        ("c12_determinism", c12_determinism),
    ];
    let (mut passed, mut failed) = (0, 0);
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let ok = std::panic::catch_unwind(check).unwrap_or_else(|_| {
            println!("{name}: FAIL (panicked)");
            false
        });
        if ok {
            passed += 1;
        } else {
            failed += 1;
        }
    }
    println!("acceptance: {passed} passed, {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
