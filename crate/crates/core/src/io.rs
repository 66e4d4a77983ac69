//! Snapshot files, PGM previews and CSV tables.
//!
//! Snapshot layout: the 5 bytes `ORDF1`, then `nx` and `ny` as little-endian
//! `u32`, then `nx·ny` little-endian `f64` values in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Field, GridSpec};
use crate::metrics::ErrorSeries;

pub const SNAPSHOT_MAGIC: &[u8; 5] = b"ORDF1";
const HEADER_LEN: usize = 5 + 4 + 4;

pub fn encode_snapshot(f: &Field) -> Result<Vec<u8>> {
    let g = f.grid();
    let nx = u32::try_from(g.nx).map_err(|_| Error::Snapshot(format!("nx = {} does not fit in u32", g.nx)))?;
    let ny = u32::try_from(g.ny).map_err(|_| Error::Snapshot(format!("ny = {} does not fit in u32", g.ny)))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&nx.to_le_bytes());
    out.extend_from_slice(&ny.to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Decode a snapshot. The grid steps are not stored; the defaults are used.
pub fn decode_snapshot(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Snapshot(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..5] != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice")) as usize;
    let (nx, ny) = (word(5), word(9));
    let cells = nx
        .checked_mul(ny)
        .filter(|&c| c.checked_mul(8).is_some())
        .ok_or_else(|| Error::Snapshot(format!("dimensions {nx}x{ny} overflow")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != cells * 8 {
        return Err(Error::Snapshot(format!(
            "payload is {} bytes, expected {} for {nx}x{ny}",
            payload.len(),
            cells * 8
        )));
    }
    let grid = GridSpec::with_default_steps(nx, ny).map_err(|e| Error::Snapshot(e.to_string()))?;
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Field::from_values(grid, values)
}

pub fn write_snapshot(f: &Field, path: &Path) -> Result<()> {
    let bytes = encode_snapshot(f)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Read a snapshot; grid steps take their defaults.
pub fn read_snapshot(path: &Path) -> Result<Field> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}

/// Read a snapshot that must have `grid`'s shape, and attach its steps.
pub fn read_snapshot_on(path: &Path, grid: &GridSpec) -> Result<Field> {
    let f = read_snapshot(path)?;
    if !f.grid().same_shape(grid) {
        return Err(Error::Snapshot(format!(
            "{} is {}x{}, expected {}x{}",
            path.display(),
            f.grid().nx,
            f.grid().ny,
            grid.nx,
            grid.ny
        )));
    }
    Field::from_values(*grid, f.into_values())
}

/// 16-bit binary PGM. Cells flagged in `hidden`, or non-finite, render as 0;
/// the rest map affinely from their `[min, max]` onto `[0, 65535]`. A flat
/// field renders mid-gray.
pub fn encode_preview(f: &Field, hidden: Option<&[bool]>) -> Vec<u8> {
    let g = f.grid();
    let shown = |i: usize| f.values()[i].is_finite() && !hidden.is_some_and(|h| h[i]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, &v) in f.values().iter().enumerate() {
        if shown(i) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let mut out = format!("P5\n{} {}\n65535\n", g.nx, g.ny).into_bytes();
    out.reserve(2 * g.len());
    for (i, &v) in f.values().iter().enumerate() {
        let px: u16 = if !shown(i) {
            0
        } else if hi > lo {
            ((v - lo) / (hi - lo) * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            32768
        };
        out.extend_from_slice(&px.to_be_bytes());
    }
    out
}

pub fn write_preview(f: &Field, hidden: Option<&[bool]>, path: &Path) -> Result<()> {
    fs::write(path, encode_preview(f, hidden)).map_err(|e| Error::io(path, e))
}

/// Fixed 17-significant-digit rendering.
pub fn format_sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// CSV with a header row and every value at 17 significant digits.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut buf = Vec::new();
    let io = |e| Error::io(path, e);
    writeln!(buf, "{}", header.join(",")).map_err(io)?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|&v| format_sig17(v)).collect();
        writeln!(buf, "{}", line.join(",")).map_err(io)?;
    }
    fs::write(path, buf).map_err(io)
}

pub fn write_series_csv(path: &Path, s: &ErrorSeries) -> Result<()> {
    let rows: Vec<Vec<f64>> = s
        .iter()
        .map(|r| vec![r.t, r.p, r.z, r.k, r.m, r.k_clean, r.m_clean])
        .collect();
    write_csv(path, &ErrorSeries::COLUMNS, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(nx: usize, ny: usize) -> Field {
        let g = GridSpec::with_default_steps(nx, ny).unwrap();
        Field::from_fn(g, |i, j| (i as f64 * 0.37).sin() - j as f64 * 1e-300 + 1.0 / 3.0)
    }

    #[test]
    fn snapshot_round_trip() {
        let f = field(3, 2);
        let bytes = encode_snapshot(&f).unwrap();
        assert_eq!(bytes.len(), 5 + 8 + 48);
        let back = decode_snapshot(&bytes).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn snapshot_rejects_damage() {
        let mut bytes = encode_snapshot(&field(3, 2)).unwrap();
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_snapshot(&bytes[..7]).is_err());
        bytes[0] = b'X';
        assert!(matches!(decode_snapshot(&bytes), Err(Error::Snapshot(_))));
        let mut huge = Vec::from(&SNAPSHOT_MAGIC[..]);
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_snapshot(&huge).is_err());
    }

    #[test]
    fn preview_mapping() {
        let g = GridSpec::with_default_steps(3, 1).unwrap();
        let f = Field::from_values(g, vec![1.0, 3.0, 2.0]).unwrap();
        let img = encode_preview(&f, None);
        let header = b"P5\n3 1\n65535\n";
        assert_eq!(&img[..header.len()], header);
        let px: Vec<u16> = img[header.len()..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(px, vec![0, 65535, 32768]);

        let flat = encode_preview(&Field::constant(g, 4.0), None);
        assert!(flat[header.len()..].chunks(2).all(|c| c == [0x80, 0x00]));

        let masked = encode_preview(&f, Some(&[false, true, false]));
        let px: Vec<u16> = masked[header.len()..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(px, vec![0, 0, 65535]);
    }

    #[test]
    fn sig17_is_exact() {
        for v in [0.1, 1.0 / 3.0, 2.6e-12, -123456.789, 0.0] {
            assert_eq!(format_sig17(v).parse::<f64>().unwrap(), v);
        }
    }
}
