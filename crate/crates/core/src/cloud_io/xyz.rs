use std::fmt::Write;

use super::PointCloud;
use crate::{Error, Result};

/// Whitespace-separated `x y z [nx ny nz]`, one point per line; `#` starts a
/// comment.
pub(crate) fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut with_normals: Option<bool> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(lineno + 1, e.to_string()))?;
        let has_n = match fields.len() {
            3 => false,
            6 => true,
            n => {
                return Err(Error::parse(
                    lineno + 1,
                    format!("expected 3 or 6 fields, found {n}"),
                ))
            }
        };
        if *with_normals.get_or_insert(has_n) != has_n {
            return Err(Error::parse(lineno + 1, "inconsistent column count"));
        }
        positions.push([fields[0], fields[1], fields[2]]);
        if has_n {
            normals.push([fields[3], fields[4], fields[5]]);
        }
    }
    let cloud = PointCloud::new(positions)?;
    if with_normals == Some(true) {
        cloud.with_normals(normals)
    } else {
        Ok(cloud)
    }
}

pub(crate) fn format_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 48);
    for (i, p) in cloud.positions().iter().enumerate() {
        let _ = write!(out, "{} {} {}", p[0], p[1], p[2]);
        if let Some(n) = cloud.normals() {
            let _ = write!(out, " {} {} {}", n[i][0], n[i][1], n[i][2]);
        }
        out.push('\n');
    }
    out
}
