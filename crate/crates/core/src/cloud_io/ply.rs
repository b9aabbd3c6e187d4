//! PLY subset: ASCII and binary little-endian, `vertex` and `face` elements.
//! Other elements are skipped with a warning.

use std::fmt::Write;

use super::PointCloud;
use crate::numerics::vec3::{norm, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, ScalarType),
    List(String, ScalarType, ScalarType),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Raw contents of a PLY file.
#[derive(Debug, Clone, Default)]
pub struct PlyData {
    pub positions: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    /// Remaining scalar vertex properties, in header order.
    pub scalars: Vec<(String, Vec<f64>)>,
    pub faces: Vec<Vec<usize>>,
    /// Names of elements that were skipped.
    pub skipped: Vec<String>,
}

impl PlyData {
    pub fn into_cloud(self) -> Result<PointCloud> {
        let mut cloud = PointCloud::new(self.positions)?;
        if let Some(normals) = self.normals {
            let normals = normals
                .into_iter()
                .enumerate()
                .map(|(i, n)| {
                    let l = norm(n);
                    if l > 0.0 && l.is_finite() {
                        Ok([n[0] / l, n[1] / l, n[2] / l])
                    } else {
                        Err(Error::InvalidSpec(format!("vertex {i} has a zero normal")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            cloud.set_normals(normals)?;
        }
        for (name, values) in self.scalars {
            cloud.set_channel(name, values)?;
        }
        Ok(cloud)
    }
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    body_offset: usize,
    lines: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut offset = 0;
    let mut lineno = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(lineno + 1, "unterminated PLY header"))?;
        let line = String::from_utf8_lossy(&bytes[offset..offset + end]);
        let line = line.trim_end_matches('\r').trim();
        offset += end + 1;
        lineno += 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if lineno == 1 {
            if line != "ply" {
                return Err(Error::parse(1, "missing `ply` magic"));
            }
            continue;
        }
        match tokens.as_slice() {
            ["format", "ascii", _] => encoding = Some(Encoding::Ascii),
            ["format", "binary_little_endian", _] => encoding = Some(Encoding::BinaryLe),
            ["format", other, ..] => {
                return Err(Error::parse(lineno, format!("unsupported PLY format `{other}`")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| Error::parse(lineno, "bad element count"))?,
                properties: Vec::new(),
            }),
            ["property", "list", ct, it, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(lineno, "property before element"))?;
                let (ct, it) = ScalarType::parse(ct)
                    .zip(ScalarType::parse(it))
                    .ok_or_else(|| Error::parse(lineno, "unknown list type"))?;
                el.properties.push(Property::List(name.to_string(), ct, it));
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(lineno, "property before element"))?;
                let ty = ScalarType::parse(ty)
                    .ok_or_else(|| Error::parse(lineno, format!("unknown type `{ty}`")))?;
                el.properties.push(Property::Scalar(name.to_string(), ty));
            }
            ["end_header"] => break,
            _ => return Err(Error::parse(lineno, format!("unexpected header line `{line}`"))),
        }
    }
    Ok(Header {
        encoding: encoding.ok_or_else(|| Error::parse(lineno, "missing format line"))?,
        elements,
        body_offset: offset,
        lines: lineno,
    })
}

/// One decoded element record: scalar values, then list values.
struct Record {
    scalars: Vec<f64>,
    lists: Vec<Vec<f64>>,
}

struct Reader<'a> {
    encoding: Encoding,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl Reader<'_> {
    fn record(&mut self, el: &Element) -> Result<Record> {
        match self.encoding {
            Encoding::Ascii => self.ascii_record(el),
            Encoding::BinaryLe => self.binary_record(el),
        }
    }

    fn ascii_record(&mut self, el: &Element) -> Result<Record> {
        let text = loop {
            if self.pos >= self.bytes.len() {
                return Err(Error::parse(self.line + 1, "unexpected end of file"));
            }
            let end = self.bytes[self.pos..]
                .iter()
                .position(|&b| b == b'\n')
                .map_or(self.bytes.len(), |e| self.pos + e);
            let line = String::from_utf8_lossy(&self.bytes[self.pos..end]).into_owned();
            self.pos = end + 1;
            self.line += 1;
            if !line.trim().is_empty() {
                break line;
            }
        };
        let line = self.line;
        let mut tokens = text.split_whitespace();
        let mut next = || -> Result<f64> {
            tokens
                .next()
                .ok_or_else(|| Error::parse(line, "too few values"))?
                .parse::<f64>()
                .map_err(|e| Error::parse(line, e.to_string()))
        };
        let mut rec = Record {
            scalars: Vec::new(),
            lists: Vec::new(),
        };
        for p in &el.properties {
            match p {
                Property::Scalar(..) => rec.scalars.push(next()?),
                Property::List(..) => {
                    let n = next()? as usize;
                    let items = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
                    rec.lists.push(items);
                }
            }
        }
        Ok(rec)
    }

    fn take(&mut self, ty: ScalarType) -> Result<f64> {
        let end = self.pos + ty.size();
        if end > self.bytes.len() {
            return Err(Error::parse(self.line, "unexpected end of binary body"));
        }
        let v = ty.read_le(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(v)
    }

    fn binary_record(&mut self, el: &Element) -> Result<Record> {
        let mut rec = Record {
            scalars: Vec::new(),
            lists: Vec::new(),
        };
        for p in &el.properties {
            match p {
                Property::Scalar(_, ty) => rec.scalars.push(self.take(*ty)?),
                Property::List(_, ct, it) => {
                    let n = self.take(*ct)? as usize;
                    let items = (0..n).map(|_| self.take(*it)).collect::<Result<Vec<_>>>()?;
                    rec.lists.push(items);
                }
            }
        }
        Ok(rec)
    }
}

pub fn parse_ply(bytes: &[u8]) -> Result<PlyData> {
    let header = parse_header(bytes)?;
    let mut reader = Reader {
        encoding: header.encoding,
        bytes,
        pos: header.body_offset,
        line: header.lines,
    };
    let mut data = PlyData::default();
    for el in &header.elements {
        match el.name.as_str() {
            "vertex" => read_vertices(&mut reader, el, &mut data)?,
            "face" => read_faces(&mut reader, el, &mut data)?,
            other => {
                log::warn!("skipping unsupported PLY element `{other}`");
                data.skipped.push(other.to_string());
                for _ in 0..el.count {
                    reader.record(el)?;
                }
            }
        }
    }
    Ok(data)
}

fn read_vertices(reader: &mut Reader<'_>, el: &Element, data: &mut PlyData) -> Result<()> {
    let names: Vec<&str> = el
        .properties
        .iter()
        .filter_map(|p| match p {
            Property::Scalar(n, _) => Some(n.as_str()),
            Property::List(..) => None,
        })
        .collect();
    let find = |n: &str| names.iter().position(|&m| m == n);
    let (xi, yi, zi) = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(Error::parse(reader.line, "vertex element lacks x/y/z")),
    };
    let normal_idx = match (find("nx"), find("ny"), find("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        _ => None,
    };
    let reserved = |i: usize| {
        [xi, yi, zi].contains(&i) || normal_idx.is_some_and(|(a, b, c)| [a, b, c].contains(&i))
    };
    let extra: Vec<usize> = (0..names.len()).filter(|&i| !reserved(i)).collect();
    let mut extras: Vec<Vec<f64>> = vec![Vec::with_capacity(el.count); extra.len()];
    let mut normals = Vec::new();
    for _ in 0..el.count {
        let rec = reader.record(el)?;
        let s = &rec.scalars;
        data.positions.push([s[xi], s[yi], s[zi]]);
        if let Some((a, b, c)) = normal_idx {
            normals.push([s[a], s[b], s[c]]);
        }
        for (col, &i) in extras.iter_mut().zip(&extra) {
            col.push(s[i]);
        }
    }
    if normal_idx.is_some() {
        data.normals = Some(normals);
    }
    data.scalars = extra
        .iter()
        .map(|&i| names[i].to_string())
        .zip(extras)
        .collect();
    Ok(())
}

fn read_faces(reader: &mut Reader<'_>, el: &Element, data: &mut PlyData) -> Result<()> {
    let list_pos = el
        .properties
        .iter()
        .filter(|p| matches!(p, Property::List(..)))
        .position(|p| matches!(p, Property::List(n, ..) if n == "vertex_indices" || n == "vertex_index"))
        .ok_or_else(|| Error::parse(reader.line, "face element lacks vertex_indices"))?;
    for _ in 0..el.count {
        let rec = reader.record(el)?;
        let line = reader.line;
        let face = rec.lists[list_pos]
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::parse(line, format!("bad vertex index {v}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        data.faces.push(face);
    }
    Ok(())
}

/// ASCII PLY of a cloud: positions, normals if present, every scalar
/// channel as a `double` property, and optional per-vertex colors.
pub fn format_cloud_ply(cloud: &PointCloud, colors: Option<&[[u8; 3]]>) -> String {
    let mut out = String::with_capacity(cloud.len() * 64);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.normals().is_some() {
        out.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    for name in cloud.channel_names() {
        let _ = writeln!(out, "property double {name}");
    }
    if colors.is_some() {
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    out.push_str("end_header\n");
    let channels: Vec<&[f64]> = cloud.channels().values().map(Vec::as_slice).collect();
    for (i, p) in cloud.positions().iter().enumerate() {
        let _ = write!(out, "{} {} {}", p[0], p[1], p[2]);
        if let Some(n) = cloud.normals() {
            let _ = write!(out, " {} {} {}", n[i][0], n[i][1], n[i][2]);
        }
        for ch in &channels {
            let _ = write!(out, " {}", ch[i]);
        }
        if let Some(c) = colors {
            let _ = write!(out, " {} {} {}", c[i][0], c[i][1], c[i][2]);
        }
        out.push('\n');
    }
    out
}
