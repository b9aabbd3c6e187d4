use std::fmt::Write;

use super::TriMesh;
use crate::numerics::vec3::Vec3;
use crate::{Error, Result};

/// Minimal Wavefront OBJ: `v` and `f` records; everything else ignored.
/// Face corners may use the `v/vt/vn` forms and negative (relative) indices.
pub(crate) fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<Vec<usize>>)> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let c: Vec<f64> = tokens
                    .take(3)
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e: std::num::ParseFloatError| Error::parse(lineno + 1, e.to_string()))?;
                if c.len() != 3 {
                    return Err(Error::parse(lineno + 1, "vertex needs 3 coordinates"));
                }
                vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in tokens {
                    let idx_str = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str
                        .parse()
                        .map_err(|_| Error::parse(lineno + 1, format!("bad index `{tok}`")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(Error::parse(lineno + 1, "index 0 is invalid"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(Error::parse(
                            lineno + 1,
                            format!("vertex index {idx} out of range"),
                        ));
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(Error::parse(lineno + 1, "face needs at least 3 vertices"));
                }
                faces.push(poly);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

pub(crate) fn format_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}
