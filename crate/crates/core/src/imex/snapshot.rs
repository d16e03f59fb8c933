//! Snapshot files: a little-endian binary field plus a JSON sidecar.
//!
//! Binary layout:
//!
//! ```text
//! b"CHSF" | version u8 = 1 | dimension u8 | bc tag u8 | reserved u8 = 0
//! mode counts: dimension × u64
//! lengths:     dimension × f64
//! sample count u64
//! samples:     count × f64
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{BoundaryCondition, Field, Grid, GridSpec};

const MAGIC: &[u8; 4] = b"CHSF";
const VERSION: u8 = 1;

/// Sidecar metadata stored next to each snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub dt: f64,
    pub step: usize,
    pub model: ModelParams,
    pub seed: Option<u64>,
    pub grid: GridSpec,
}

pub fn encode_snapshot(field: &Field) -> Vec<u8> {
    let g = field.grid();
    let d = g.dimension();
    let mut out = Vec::with_capacity(8 + 16 * d + 8 + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(d as u8);
    out.push(g.bc().tag());
    out.push(0);
    for &n in g.modes() {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for &l in g.lengths() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&(g.len() as u64).to_le_bytes());
    for &v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format("truncated snapshot".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Field> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dimension = r.u8()? as usize;
    let bc = BoundaryCondition::from_tag(r.u8()?)
        .ok_or_else(|| Error::Format("unknown boundary tag".into()))?;
    r.u8()?;
    if !(1..=2).contains(&dimension) {
        return Err(Error::Format(format!("bad dimension {dimension}")));
    }
    let modes = (0..dimension)
        .map(|_| r.u64().map(|n| n as usize))
        .collect::<Result<Vec<_>>>()?;
    let lengths = (0..dimension).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let grid = Grid::from_spec(GridSpec {
        dimension,
        lengths,
        modes,
        bc,
    })
    .map_err(|e| Error::Format(e.to_string()))?;
    let count = r.u64()? as usize;
    if count != grid.len() {
        return Err(Error::Format(format!(
            "sample count {count} does not match grid ({})",
            grid.len()
        )));
    }
    let values = (0..count).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes".into()));
    }
    Field::new(&grid, values)
}

/// Path of the JSON sidecar for a snapshot file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the binary snapshot and, if given, its JSON sidecar.
pub fn write_snapshot(path: &Path, field: &Field, meta: Option<&SnapshotMeta>) -> Result<()> {
    fs::write(path, encode_snapshot(field))?;
    if let Some(meta) = meta {
        fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)?)?;
    }
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Field> {
    decode_snapshot(&fs::read(path)?)
}

pub fn read_sidecar(path: &Path) -> Result<SnapshotMeta> {
    Ok(serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imex::initial::random_smooth;

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        for g in [
            Grid::new(1, &[1.3], &[17], BoundaryCondition::DirichletSine).unwrap(),
            Grid::new(2, &[1.0, 2.0], &[5, 9], BoundaryCondition::NeumannCosine).unwrap(),
        ] {
            let u = random_smooth(&g, 9, 2.0, 3.0);
            let path = dir.path().join("u.bin");
            let meta = SnapshotMeta {
                t: 0.5,
                dt: 1e-3,
                step: 500,
                model: ModelParams::classical(1.0).unwrap(),
                seed: Some(9),
                grid: g.spec().clone(),
            };
            write_snapshot(&path, &u, Some(&meta)).unwrap();
            let back = read_snapshot(&path).unwrap();
            assert_eq!(back.grid().spec(), g.spec());
            let a: Vec<u64> = u.values().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.values().iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
            assert_eq!(read_sidecar(&path).unwrap(), meta);
        }
    }

    #[test]
    fn header_layout() {
        let g = Grid::new(1, &[2.0], &[3], BoundaryCondition::DirichletSine).unwrap();
        let u = Field::new(&g, vec![1.0, -2.0, 0.5]).unwrap();
        let bytes = encode_snapshot(&u);
        assert_eq!(&bytes[..8], b"CHSF\x01\x01\x00\x00");
        assert_eq!(&bytes[8..16], &3u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &2.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &3u64.to_le_bytes());
        assert_eq!(&bytes[32..40], &1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 56);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid::new(1, &[2.0], &[3], BoundaryCondition::DirichletSine).unwrap();
        let bytes = encode_snapshot(&Field::zeros(&g));
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_snapshot(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(decode_snapshot(&extra).is_err());
    }
}
