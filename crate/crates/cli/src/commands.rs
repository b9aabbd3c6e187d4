use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use gbtopo::cloud_io::{
    add_noise, export_colormapped_ply, load_cloud, load_mesh, mesh_euler, sample_mesh, save_cloud, write_report,
    CloudFormat, MeshFormat, NoiseSpec, PointCloud, ReportFormat, ReportRow, SamplingScheme,
};
use gbtopo::numerics::split_seed;
use gbtopo::pipeline::{analyze, curvature_errors, Analysis};
use gbtopo::synthetic::{sample_ellipsoid, sample_torus, EllipsoidSpec, SurfaceSampling, TorusSpec};
use gbtopo::topology::self_optimize;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// An analytic surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthSpec {
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    Torus {
        #[serde(rename = "R")]
        major: f64,
        #[serde(rename = "r")]
        minor: f64,
    },
}

impl SynthSpec {
    pub fn label(&self) -> String {
        match self {
            SynthSpec::Ellipsoid { a, b, c } => format!("ellipsoid(a={a},b={b},c={c})"),
            SynthSpec::Torus { major, minor } => format!("torus(R={major},r={minor})"),
        }
    }

    /// Cloud with exact normals and ground-truth channels attached.
    pub fn sample(&self, n: usize, scheme: SurfaceSampling, seed: u64) -> gbtopo::Result<PointCloud> {
        let (cloud, gt) = match *self {
            SynthSpec::Ellipsoid { a, b, c } => sample_ellipsoid(&EllipsoidSpec { a, b, c, n, scheme, seed })?,
            SynthSpec::Torus { major, minor } => sample_torus(&TorusSpec { major, minor, n, scheme, seed })?,
        };
        gt.annotate(&cloud)
    }
}

pub fn cloud_format(path: &Path) -> anyhow::Result<CloudFormat> {
    CloudFormat::from_path(path).ok_or_else(|| anyhow!("{}: unknown cloud format (use .ply or .xyz)", path.display()))
}

pub fn mesh_format(path: &Path) -> anyhow::Result<MeshFormat> {
    MeshFormat::from_path(path).ok_or_else(|| anyhow!("{}: unknown mesh format (use .obj or .ply)", path.display()))
}

pub fn report_format(path: &Path) -> ReportFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
        _ => ReportFormat::Csv,
    }
}

pub fn apply_noise(cloud: PointCloud, fraction: f64, seed: u64) -> gbtopo::Result<PointCloud> {
    if fraction == 0.0 {
        return Ok(cloud);
    }
    add_noise(&cloud, &NoiseSpec::gaussian(fraction, split_seed(seed, "noise")))
}

pub fn synth(spec: &SynthSpec, n: usize, scheme: SurfaceSampling, config: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let format = cloud_format(out)?;
    let cloud = spec.sample(n, scheme, split_seed(config.seed, "synth"))?;
    let cloud = apply_noise(cloud, config.noise, config.seed)?;
    if format == CloudFormat::Xyz {
        log::warn!("XYZ output keeps positions and normals only; ground-truth channels are dropped");
    }
    save_cloud(&cloud, out, format)?;
    eprintln!("wrote {} points to {}", cloud.len(), out.display());
    Ok(())
}

pub fn sample(mesh_path: &Path, n: usize, scheme: SamplingScheme, config: &RunConfig, out: &Path) -> anyhow::Result<()> {
    let format = cloud_format(out)?;
    let mesh = load_mesh(mesh_path, mesh_format(mesh_path)?)?;
    if mesh.dropped_degenerate > 0 {
        log::warn!("dropped {} degenerate faces", mesh.dropped_degenerate);
    }
    let cloud = sample_mesh(&mesh, n, scheme, split_seed(config.seed, "sample"))?;
    let cloud = apply_noise(cloud, config.noise, config.seed)?;
    save_cloud(&cloud, out, format)?;
    eprintln!(
        "mesh euler {}, wrote {} points to {}",
        mesh_euler(&mesh),
        cloud.len(),
        out.display()
    );
    Ok(())
}

pub fn read_input(path: &Path, config: &RunConfig) -> anyhow::Result<PointCloud> {
    let cloud = load_cloud(path, cloud_format(path)?)?;
    Ok(apply_noise(cloud, config.noise, config.seed)?)
}

fn model_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Report row for one analysis of `cloud`.
pub fn report_row(model: String, cloud: &PointCloud, analysis: &Analysis, config: &RunConfig, seconds: f64) -> ReportRow {
    let errors = curvature_errors(cloud, &analysis.curvature);
    ReportRow {
        model,
        method: config.pipeline.solver.name().to_string(),
        density: cloud.len(),
        noise: config.noise,
        max_abs_err: errors.map(|e| e.max_abs_k),
        mean_abs_err: errors.map(|e| e.mean_abs_k),
        euler_estimate: Some(analysis.topology.euler),
        genus: Some(analysis.topology.genus),
        wall_time_s: if config.timing { seconds } else { 0.0 },
        max_abs_err_h: errors.and_then(|e| e.max_abs_h),
        mean_abs_err_h: errors.and_then(|e| e.mean_abs_h),
        repeats: 1,
        euler_std: None,
        status: "ok".into(),
    }
}

fn emit_report(rows: &[ReportRow], path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => write_report(rows, p, report_format(p))?,
        None => print!("{}", gbtopo::cloud_io::report_to_string(rows, ReportFormat::Csv)?),
    }
    Ok(())
}

/// Input cloud with the estimated normals and per-point result channels.
fn annotated(cloud: &PointCloud, analysis: &Analysis) -> anyhow::Result<PointCloud> {
    let c = &analysis.curvature;
    let mask = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .zip(&c.flags)
            .map(|(x, f)| if f.is_clean() { *x } else { f64::NAN })
            .collect()
    };
    let mut out = cloud.clone().with_normals(analysis.frames.normals())?;
    out.set_channel("gaussian", mask(&c.gaussian))?;
    if let Some(h) = &c.mean {
        out.set_channel("mean", mask(h))?;
    }
    if let Some(f) = &c.frobenius {
        out.set_channel("frobenius", mask(f))?;
    }
    out.set_channel("area", analysis.areas.areas.clone())?;
    Ok(out)
}

pub struct CurvatureOutputs<'a> {
    pub report: Option<&'a Path>,
    pub colormap: Option<&'a Path>,
    pub channel: &'a str,
    pub cloud: Option<&'a Path>,
}

pub fn curvature(input: &Path, config: &RunConfig, outputs: &CurvatureOutputs<'_>) -> anyhow::Result<()> {
    let cloud = read_input(input, config)?;
    let start = Instant::now();
    let analysis = analyze(&cloud, &config.pipeline)?;
    let seconds = start.elapsed().as_secs_f64();
    if outputs.colormap.is_some() || outputs.cloud.is_some() {
        let out = annotated(&cloud, &analysis)?;
        if let Some(path) = outputs.colormap {
            if out.channel(outputs.channel).is_none() {
                bail!(
                    "channel `{}` is not available with solver {}",
                    outputs.channel,
                    config.pipeline.solver
                );
            }
            export_colormapped_ply(&out, outputs.channel, path)?;
        }
        if let Some(path) = outputs.cloud {
            save_cloud(&out, path, cloud_format(path)?)?;
        }
    }
    let row = report_row(model_name(input), &cloud, &analysis, config, seconds);
    emit_report(&[row], outputs.report)
}

pub fn topo(input: &Path, config: &RunConfig, report: Option<&Path>, trace: Option<&Path>) -> anyhow::Result<()> {
    let cloud = read_input(input, config)?;
    let start = Instant::now();
    let analysis = analyze(&cloud, &config.pipeline)?;
    let opt = config.optimize_config();
    let outcome = match self_optimize(cloud.positions(), &analysis.neighborhood, &analysis.frames, &opt) {
        Ok(o) => o,
        Err(gbtopo::Error::Diverged { step, euler, loss, trace: rows }) => {
            if let Some(path) = trace {
                write_text(path, &rows.to_csv())?;
            }
            return Err(gbtopo::Error::Diverged { step, euler, loss, trace: rows }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let seconds = start.elapsed().as_secs_f64();
    if let Some(path) = trace {
        write_text(path, &outcome.trace.to_csv())?;
    }
    let mut row = report_row(model_name(input), &cloud, &analysis, config, seconds);
    row.euler_estimate = Some(outcome.estimate.euler);
    row.genus = Some(outcome.estimate.genus);
    eprintln!(
        "initial euler {:.6}, final euler {:.6}, genus {} after {} steps",
        outcome.initial.euler,
        outcome.estimate.euler,
        outcome.estimate.genus,
        outcome.trace.len()
    );
    emit_report(&[row], report)
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
