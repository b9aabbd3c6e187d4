use std::path::Path;

use super::{ply, PointCloud};
use crate::{Error, Result};

// Blue / white / red diverging ramp.
const STOPS: [(f64, [f64; 3]); 3] = [
    (0.0, [59.0, 76.0, 192.0]),
    (0.5, [221.0, 221.0, 221.0]),
    (1.0, [180.0, 4.0, 38.0]),
];

/// Color for `t ∈ [0, 1]` on the diverging ramp; values outside are clamped.
pub fn diverging_color(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.5 } else { t.clamp(0.0, 1.0) };
    let k = if t <= STOPS[1].0 { 0 } else { 1 };
    let (t0, c0) = STOPS[k];
    let (t1, c1) = STOPS[k + 1];
    let s = (t - t0) / (t1 - t0);
    [0, 1, 2].map(|i| (c0[i] + s * (c1[i] - c0[i])).round() as u8)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub(crate) fn channel_colors(values: &[f64]) -> Vec<[u8; 3]> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return vec![diverging_color(0.5); values.len()];
    }
    sorted.sort_by(f64::total_cmp);
    let lo = percentile(&sorted, 0.02);
    let hi = percentile(&sorted, 0.98);
    values
        .iter()
        .map(|&v| {
            if hi > lo && v.is_finite() {
                diverging_color((v.clamp(lo, hi) - lo) / (hi - lo))
            } else {
                diverging_color(0.5)
            }
        })
        .collect()
}

/// Write the cloud as ASCII PLY with per-vertex colors for `channel`.
/// Values are clamped to their [2%, 98%] percentile range before mapping.
pub fn export_colormapped_ply(cloud: &PointCloud, channel: &str, path: impl AsRef<Path>) -> Result<()> {
    let values = cloud
        .channel(channel)
        .ok_or_else(|| Error::UnknownChannel(channel.to_string()))?;
    let colors = channel_colors(values);
    let path = path.as_ref();
    std::fs::write(path, ply::format_cloud_ply(cloud, Some(&colors))).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud_io::{load_cloud, CloudFormat};

    #[test]
    fn constant_channel_is_mid_color() {
        let colors = channel_colors(&[3.0; 10]);
        assert!(colors.iter().all(|&c| c == diverging_color(0.5)));
    }

    #[test]
    fn ramp_is_monotone() {
        let xs: Vec<f64> = (0..50).map(f64::from).collect();
        let colors = channel_colors(&xs);
        // Red minus blue increases along the ramp.
        let warmth = |c: [u8; 3]| c[0] as i32 - c[2] as i32;
        for w in colors.windows(2) {
            assert!(warmth(w[1]) >= warmth(w[0]));
        }
        assert_eq!(colors[0], diverging_color(0.0));
        assert_eq!(colors[49], diverging_color(1.0));
    }

    #[test]
    fn unknown_channel_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let xs: Vec<[f64; 3]> = (0..20).map(|i| [i as f64 * 0.1, 0.0, 0.0]).collect();
        let cloud = PointCloud::new(xs.clone())
            .unwrap()
            .with_channel("x", xs.iter().map(|p| p[0]).collect())
            .unwrap();
        assert!(matches!(
            export_colormapped_ply(&cloud, "nope", &path),
            Err(Error::UnknownChannel(_))
        ));
        export_colormapped_ply(&cloud, "x", &path).unwrap();
        let back = load_cloud(&path, CloudFormat::Ply).unwrap();
        assert_eq!(back.len(), 20);
        assert_eq!(back.positions(), cloud.positions());
    }
}
