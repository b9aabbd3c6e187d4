//! `gbtopo`: curvature and topology estimation from the command line.

mod bench;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gbtopo::cloud_io::SamplingScheme;
use gbtopo::curvature::{Centering, Solver};
use gbtopo::frames::{OrientMethod, PcaWeighting};
use gbtopo::pipeline::NormalSource;
use gbtopo::synthetic::SurfaceSampling;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "gbtopo", version, about = "Curvature and topology estimation for point clouds")]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (falls back to GBTOPO_THREADS).
    #[arg(long, global = true, env = "GBTOPO_THREADS")]
    threads: Option<usize>,

    /// Root seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample an analytic surface with exact normals and curvature channels.
    Synth {
        #[command(subcommand)]
        surface: SynthSurface,
    },
    /// Sample a point cloud from a triangle mesh.
    Sample(SampleArgs),
    /// Estimate per-point curvature and the Euler characteristic.
    Curvature(CurvatureArgs),
    /// Estimate topology, optionally refining normals by gradient descent.
    Topo(TopoArgs),
    /// Run a benchmark manifest.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
enum SynthSurface {
    Ellipsoid {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[command(flatten)]
        common: SynthArgs,
    },
    Torus {
        /// Major radius.
        #[arg(long = "R", default_value_t = 5.0)]
        major: f64,
        /// Minor (tube) radius.
        #[arg(long = "r", default_value_t = 1.0)]
        minor: f64,
        #[command(flatten)]
        common: SynthArgs,
    },
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, value_enum, default_value = "uniform-area")]
    scheme: SurfaceSchemeArg,
    /// Positional noise as a fraction of the bounding-box diagonal.
    #[arg(long)]
    noise: Option<f64>,
    /// Output cloud (.ply keeps the ground-truth channels, .xyz only normals).
    #[arg(long, short, default_value = "cloud.ply")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SurfaceSchemeArg {
    UniformArea,
    Parametric,
}

impl From<SurfaceSchemeArg> for SurfaceSampling {
    fn from(s: SurfaceSchemeArg) -> Self {
        match s {
            SurfaceSchemeArg::UniformArea => SurfaceSampling::UniformArea,
            SurfaceSchemeArg::Parametric => SurfaceSampling::Parametric,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum MeshSchemeArg {
    UniformArea,
    Random,
}

impl From<MeshSchemeArg> for SamplingScheme {
    fn from(s: MeshSchemeArg) -> Self {
        match s {
            MeshSchemeArg::UniformArea => SamplingScheme::UniformArea,
            MeshSchemeArg::Random => SamplingScheme::Random,
        }
    }
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Input mesh (.obj or .ply).
    mesh: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, value_enum, default_value = "uniform-area")]
    scheme: MeshSchemeArg,
    #[arg(long, short, default_value = "cloud.ply")]
    out: PathBuf,
}

/// Pipeline flags shared by `curvature` and `topo`.
#[derive(Debug, Args)]
struct PipelineArgs {
    /// Input cloud (.ply or .xyz).
    input: PathBuf,
    /// Neighbors per point.
    #[arg(long)]
    k: Option<usize>,
    /// Samples per side of the area grid.
    #[arg(long)]
    grid_res: Option<usize>,
    #[arg(long)]
    bbox_scale: Option<f64>,
    /// sylvester, pinv or det (det gives K only, H is left empty).
    #[arg(long)]
    solver: Option<Solver>,
    /// Offset origin of the curvature fit: mean or origin.
    #[arg(long)]
    centering: Option<Centering>,
    /// Normal orientation: mst, input or centroid.
    #[arg(long)]
    orient: Option<OrientMethod>,
    /// PCA neighbor weights: gaussian or uniform.
    #[arg(long)]
    pca_weights: Option<PcaWeighting>,
    /// Use the normals stored in the input instead of PCA.
    #[arg(long)]
    input_normals: bool,
    /// Positional noise added before estimation.
    #[arg(long)]
    noise: Option<f64>,
    /// Report file (.csv or .json); printed to stdout as CSV when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct CurvatureArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Colormapped PLY of one channel.
    #[arg(long)]
    colormap: Option<PathBuf>,
    /// Channel for the colormap: gaussian, mean, frobenius or area.
    #[arg(long, default_value = "gaussian")]
    channel: String,
    /// Cloud with estimated normals and curvature channels.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TopoArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Gradient steps; 0 reports the initial estimate only.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Target Euler characteristic (supervised mode).
    #[arg(long, allow_negative_numbers = true)]
    chi_gt: Option<f64>,
    /// Rebuild area elements every this many steps.
    #[arg(long)]
    refresh_every: Option<usize>,
    /// Also move the points.
    #[arg(long)]
    optimize_positions: bool,
    /// Per-step trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON manifest.
    manifest: PathBuf,
    /// Report file (.csv or .json).
    #[arg(long, short, default_value = "bench.csv")]
    out: PathBuf,
    /// Leave wall_time_s at zero.
    #[arg(long)]
    no_timing: bool,
}

impl PipelineArgs {
    fn apply(&self, config: &mut RunConfig) {
        let p = &mut config.pipeline;
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(r) = self.grid_res {
            p.area.grid_resolution = r;
        }
        if let Some(s) = self.bbox_scale {
            p.area.bbox_scale = s;
        }
        if let Some(s) = self.solver {
            p.solver = s;
        }
        if let Some(c) = self.centering {
            p.centering = c;
        }
        if let Some(o) = self.orient {
            p.orient = o;
        }
        if let Some(w) = self.pca_weights {
            p.pca_weighting = w;
        }
        if self.input_normals {
            p.normals = NormalSource::Input;
        }
        if let Some(n) = self.noise {
            config.noise = n;
        }
        if self.timing {
            config.timing = true;
        }
    }
}

fn init_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads {
        config.threads = Some(t);
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    init_threads(config.threads)?;

    match cli.command {
        Command::Synth { surface } => {
            let (spec, common) = match surface {
                SynthSurface::Ellipsoid { a, b, c, common } => (commands::SynthSpec::Ellipsoid { a, b, c }, common),
                SynthSurface::Torus { major, minor, common } => (commands::SynthSpec::Torus { major, minor }, common),
            };
            if let Some(n) = common.noise {
                config.noise = n;
            }
            commands::synth(&spec, common.n, common.scheme.into(), &config, &common.out)
        }
        Command::Sample(args) => commands::sample(&args.mesh, args.n, args.scheme.into(), &config, &args.out),
        Command::Curvature(args) => {
            args.pipeline.apply(&mut config);
            commands::curvature(
                &args.pipeline.input,
                &config,
                &commands::CurvatureOutputs {
                    report: args.pipeline.report.as_deref(),
                    colormap: args.colormap.as_deref(),
                    channel: &args.channel,
                    cloud: args.out.as_deref(),
                },
            )
        }
        Command::Topo(args) => {
            args.pipeline.apply(&mut config);
            let o = &mut config.optimize;
            if let Some(s) = args.steps {
                o.steps = s;
            }
            if let Some(lr) = args.lr {
                o.lr = lr;
            }
            if args.chi_gt.is_some() {
                o.chi_gt = args.chi_gt;
            }
            if let Some(r) = args.refresh_every {
                o.refresh_every = r;
            }
            if args.optimize_positions {
                o.optimize_positions = true;
            }
            commands::topo(
                &args.pipeline.input,
                &config,
                args.pipeline.report.as_deref(),
                args.trace.as_deref(),
            )
        }
        Command::Bench(args) => {
            config.timing = !args.no_timing;
            bench::run_manifest(&args.manifest, &config, &args.out)
        }
    }
}

/// 2 for a missing input file, 1 for any other failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    let missing = err.chain().any(|e| match e.downcast_ref::<gbtopo::Error>() {
        Some(gbtopo::Error::Io { source, .. }) => source.kind() == std::io::ErrorKind::NotFound,
        _ => false,
    });
    if missing {
        2
    } else {
        1
    }
}

/// The error chain joined by `: `. Library errors already print their own
/// cause, so the chain stops there.
fn describe(err: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for e in err.chain() {
        parts.push(e.to_string());
        if e.downcast_ref::<gbtopo::Error>().is_some() {
            break;
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
