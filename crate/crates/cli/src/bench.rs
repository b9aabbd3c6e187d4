//! Benchmark manifests: a JSON list of models crossed with densities, noise
//! levels and solvers, each combination repeated with fresh seeds.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use gbtopo::cloud_io::{load_cloud, load_mesh, sample_mesh, write_report, PointCloud, ReportRow, SamplingScheme};
use gbtopo::curvature::Solver;
use gbtopo::numerics::split_seed;
use gbtopo::pipeline::{analyze, curvature_errors, PipelineConfig};
use gbtopo::synthetic::SurfaceSampling;
use gbtopo::topology::round_half_even;
use serde::Deserialize;

use crate::commands::{apply_noise, cloud_format, mesh_format, report_format, SynthSpec};
use crate::config::RunConfig;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Overrides the run seed when present.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Pipeline settings for every row; rows may override `k`.
    #[serde(default)]
    pub pipeline: Option<PipelineConfig>,
    pub rows: Vec<ManifestRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSource {
    Ellipsoid { a: f64, b: f64, c: f64 },
    Torus {
        #[serde(rename = "R")]
        major: f64,
        #[serde(rename = "r")]
        minor: f64,
    },
    Mesh { path: PathBuf },
    Cloud { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRow {
    /// Report label; defaults to a description of the model.
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelSource,
    /// Sample count; ignored for `cloud` models.
    #[serde(default = "default_n")]
    pub n: OneOrMany<usize>,
    #[serde(default = "default_noise")]
    pub noise: OneOrMany<f64>,
    #[serde(default = "default_solver")]
    pub solver: OneOrMany<Solver>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    UniformArea,
    Parametric,
    Random,
}

fn default_n() -> OneOrMany<usize> {
    OneOrMany::One(10_000)
}

fn default_noise() -> OneOrMany<f64> {
    OneOrMany::One(0.0)
}

fn default_solver() -> OneOrMany<Solver> {
    OneOrMany::One(Solver::Sylvester)
}

fn default_repeats() -> usize {
    1
}

impl ManifestRow {
    fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match &self.model {
            ModelSource::Ellipsoid { a, b, c } => SynthSpec::Ellipsoid { a: *a, b: *b, c: *c }.label(),
            ModelSource::Torus { major, minor } => SynthSpec::Torus { major: *major, minor: *minor }.label(),
            ModelSource::Mesh { path } | ModelSource::Cloud { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        }
    }
}

/// One (row, n, noise, solver) combination.
struct Job<'a> {
    row: &'a ManifestRow,
    n: usize,
    noise: f64,
    solver: Solver,
    seed: u64,
}

struct Sample {
    euler: f64,
    errors: Option<gbtopo::pipeline::CurvatureErrors>,
    density: usize,
    seconds: f64,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_model(job: &Job<'_>, base: &Path, seed: u64) -> anyhow::Result<PointCloud> {
    let surface_scheme = match job.row.scheme {
        Some(Scheme::Parametric) => SurfaceSampling::Parametric,
        _ => SurfaceSampling::UniformArea,
    };
    let cloud = match &job.row.model {
        ModelSource::Ellipsoid { a, b, c } => {
            SynthSpec::Ellipsoid { a: *a, b: *b, c: *c }.sample(job.n, surface_scheme, split_seed(seed, "synth"))?
        }
        ModelSource::Torus { major, minor } => {
            SynthSpec::Torus { major: *major, minor: *minor }.sample(job.n, surface_scheme, split_seed(seed, "synth"))?
        }
        ModelSource::Mesh { path } => {
            let path = resolve(base, path);
            let mesh = load_mesh(&path, mesh_format(&path)?)?;
            let scheme = match job.row.scheme {
                Some(Scheme::Random) => SamplingScheme::Random,
                _ => SamplingScheme::UniformArea,
            };
            sample_mesh(&mesh, job.n, scheme, split_seed(seed, "sample"))?
        }
        ModelSource::Cloud { path } => {
            let path = resolve(base, path);
            load_cloud(&path, cloud_format(&path)?)?
        }
    };
    Ok(apply_noise(cloud, job.noise, seed)?)
}

fn run_once(job: &Job<'_>, base: &Path, pipeline: &PipelineConfig, seed: u64) -> anyhow::Result<Sample> {
    let cloud = load_model(job, base, seed)?;
    let start = Instant::now();
    let analysis = analyze(&cloud, pipeline)?;
    Ok(Sample {
        euler: analysis.topology.euler,
        errors: curvature_errors(&cloud, &analysis.curvature),
        density: cloud.len(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn mean(xs: &[f64]) -> f64 {
    gbtopo::numerics::stable_sum(xs) / xs.len() as f64
}

/// Sample standard deviation; `None` below two repeats.
fn std_dev(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    Some((gbtopo::numerics::stable_sum(&sq) / (xs.len() - 1) as f64).sqrt())
}

fn mean_opt(samples: &[Sample], f: impl Fn(&Sample) -> Option<f64>) -> Option<f64> {
    let v: Option<Vec<f64>> = samples.iter().map(f).collect();
    v.map(|v| mean(&v))
}

fn run_job(job: &Job<'_>, base: &Path, pipeline: &PipelineConfig, timing: bool) -> ReportRow {
    let mut row = ReportRow {
        model: job.row.label(),
        method: job.solver.name().to_string(),
        density: job.n,
        noise: job.noise,
        max_abs_err: None,
        mean_abs_err: None,
        euler_estimate: None,
        genus: None,
        wall_time_s: 0.0,
        max_abs_err_h: None,
        mean_abs_err_h: None,
        repeats: job.row.repeats,
        euler_std: None,
        status: "ok".into(),
    };
    let mut samples = Vec::with_capacity(job.row.repeats);
    for r in 0..job.row.repeats {
        let seed = split_seed(job.seed, &format!("repeat{r}"));
        match run_once(job, base, pipeline, seed) {
            Ok(s) => samples.push(s),
            Err(e) => {
                log::warn!("{} (repeat {r}): {e:#}", row.model);
                row.status = format!("{e:#}");
                return row;
            }
        }
    }
    let eulers: Vec<f64> = samples.iter().map(|s| s.euler).collect();
    let euler = mean(&eulers);
    row.density = samples[0].density;
    row.euler_estimate = Some(euler);
    row.genus = Some(round_half_even((2.0 - euler) / 2.0));
    row.euler_std = std_dev(&eulers);
    row.max_abs_err = mean_opt(&samples, |s| s.errors.map(|e| e.max_abs_k));
    row.mean_abs_err = mean_opt(&samples, |s| s.errors.map(|e| e.mean_abs_k));
    row.max_abs_err_h = mean_opt(&samples, |s| s.errors.and_then(|e| e.max_abs_h));
    row.mean_abs_err_h = mean_opt(&samples, |s| s.errors.and_then(|e| e.mean_abs_h));
    if timing {
        row.wall_time_s = mean(&samples.iter().map(|s| s.seconds).collect::<Vec<_>>());
    }
    row
}

/// Run every combination in the manifest. Failing combinations are recorded
/// in their row's `status`; the run itself fails only on an unreadable
/// manifest or report path.
pub fn run_manifest(path: &Path, config: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| gbtopo::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let root = manifest.seed.unwrap_or(config.seed);
    let pipeline_base = manifest.pipeline.unwrap_or(config.pipeline);
    let mut rows = Vec::new();
    for (i, row) in manifest.rows.iter().enumerate() {
        if row.repeats == 0 {
            anyhow::bail!("manifest row {i}: repeats must be at least 1");
        }
        for n in row.n.to_vec() {
            for noise in row.noise.to_vec() {
                for solver in row.solver.to_vec() {
                    let job = Job {
                        row,
                        n,
                        noise,
                        solver,
                        seed: split_seed(root, &format!("row{i}/n{n}/noise{noise}")),
                    };
                    let pipeline = PipelineConfig {
                        solver,
                        k: row.k.unwrap_or(pipeline_base.k),
                        ..pipeline_base
                    };
                    eprintln!("{} n={n} noise={noise} solver={solver}", row.label());
                    rows.push(run_job(&job, base, &pipeline, config.timing));
                }
            }
        }
    }
    write_report(&rows, out, report_format(out))?;
    Ok(())
}
