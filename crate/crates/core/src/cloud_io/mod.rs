//! Point-cloud and mesh ingestion, mesh sampling, noise injection and result
//! export.

mod cloud;
mod colormap;
mod mesh;
mod noise;
mod obj;
pub mod ply;
mod report;
mod sample;
mod xyz;

use std::path::Path;

pub use cloud::PointCloud;
pub use colormap::{diverging_color, export_colormapped_ply};
pub use mesh::{mesh_euler, TriMesh};
pub use noise::{add_noise, NoiseKind, NoiseSpec};
pub use report::{report_to_string, write_report, ReportFormat, ReportRow, REPORT_COLUMNS};
pub use sample::{sample_mesh, SamplingScheme};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    Ply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl CloudFormat {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match extension(path).as_deref() {
            Some("xyz") | Some("txt") | Some("pts") => Some(CloudFormat::Xyz),
            Some("ply") => Some(CloudFormat::Ply),
            _ => None,
        }
    }
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match extension(path).as_deref() {
            Some("obj") => Some(MeshFormat::Obj),
            Some("ply") => Some(MeshFormat::Ply),
            _ => None,
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        CloudFormat::Xyz => xyz::parse_xyz(&String::from_utf8_lossy(&bytes)),
        CloudFormat::Ply => ply::parse_ply(&bytes).and_then(|data| data.into_cloud()),
    }
}

/// Load a triangle mesh. Polygons are fan-triangulated and faces with area
/// at or below 1e-14 are dropped (counted in [`TriMesh::dropped_degenerate`]).
pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (vertices, polygons) = match format {
        MeshFormat::Obj => obj::parse_obj(&String::from_utf8_lossy(&bytes))?,
        MeshFormat::Ply => {
            let data = ply::parse_ply(&bytes)?;
            (data.positions, data.faces)
        }
    };
    TriMesh::from_polygons(vertices, &polygons)
}

pub fn save_cloud(cloud: &PointCloud, path: impl AsRef<Path>, format: CloudFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        CloudFormat::Xyz => xyz::format_xyz(cloud),
        CloudFormat::Ply => ply::format_cloud_ply(cloud, None),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn save_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, obj::format_obj(mesh)).map_err(|e| Error::io(path, e))
}
