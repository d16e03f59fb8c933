//! Binary PGM (P5) heatmaps of 2D fields.

use std::path::Path;

use anyhow::{bail, Context, Result};
use chimex::Field;
use serde::{Deserialize, Serialize};

/// Value range mapped onto intensities 0..=255.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRange {
    pub min: f64,
    pub max: f64,
    pub width: usize,
    pub height: usize,
}

/// Encodes a 2D field. Columns follow the first axis and rows the second,
/// with the second axis pointing up. A constant field maps to intensity 0.
pub fn encode_heatmap(field: &Field) -> Result<(Vec<u8>, HeatmapRange)> {
    let grid = field.grid();
    if grid.dimension() != 2 {
        bail!("heatmaps need a 2D field, got dimension {}", grid.dimension());
    }
    if !field.is_finite() {
        bail!("cannot render a field with non-finite samples");
    }
    let (width, height) = (grid.shape()[0], grid.shape()[1]);
    let v = field.values();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;

    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + width * height);
    out.extend_from_slice(header.as_bytes());
    for row in 0..height {
        let j = height - 1 - row;
        for i in 0..width {
            let x = v[i * height + j];
            let level = if span > 0.0 { ((x - min) / span * 255.0).round() } else { 0.0 };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    Ok((out, HeatmapRange { min, max, width, height }))
}

/// Writes `path` and a `{min, max}` JSON sidecar next to it.
pub fn render_heatmap(field: &Field, path: &Path) -> Result<HeatmapRange> {
    let (bytes, range) = encode_heatmap(field)?;
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    let sidecar = path.with_extension("json");
    std::fs::write(&sidecar, serde_json::to_string_pretty(&range)?)
        .with_context(|| format!("writing {}", sidecar.display()))?;
    Ok(range)
}
