//! File formats: binary grids with a JSON header, CSV tables and PGM previews.
//!
//! A grid file is the magic `NFGRID1\n`, the header length as a little-endian `u64`, the
//! UTF-8 JSON header and then `f64` samples in little-endian order. Samples run over
//! components fastest, then the first axis, then the next.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geoptics::CoeffTable;
use crate::grid::Grid;
use crate::num::Real;

pub const GRID_MAGIC: &[u8; 8] = b"NFGRID1\n";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub kind: String,
    /// Node counts per axis, first axis fastest.
    pub dims: Vec<usize>,
    pub lo: Vec<f64>,
    pub spacing: Vec<f64>,
    /// Values per node; complex fields store (re, im).
    pub components: usize,
    #[serde(default)]
    pub meta: serde_json::Value,
}

impl GridHeader {
    /// Header for one real field on a space grid.
    pub fn for_grid<T: Real>(kind: &str, grid: &Grid<T>, meta: serde_json::Value) -> Self {
        let d = grid.dim;
        GridHeader {
            kind: kind.into(),
            dims: grid.n[..d].to_vec(),
            lo: grid.lo[..d].iter().map(|v| v.to_f64_lossy()).collect(),
            spacing: vec![grid.dx.to_f64_lossy(); d],
            components: 1,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product::<usize>() * self.components
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn write_grid(path: &Path, header: &GridHeader, data: &[f64]) -> Result<()> {
    if data.len() != header.len() {
        return Err(Error::DimensionMismatch { expected: header.len(), got: data.len() });
    }
    let json = serde_json::to_vec(header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(GRID_MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<(GridHeader, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    if bytes.len() < 16 || &bytes[..8] != GRID_MAGIC {
        return Err(bad("not a grid file"));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = 16usize.checked_add(hlen).filter(|&e| e <= bytes.len()).ok_or_else(|| bad("truncated header"))?;
    let header: GridHeader = serde_json::from_slice(&bytes[16..body])?;
    let rest = &bytes[body..];
    if rest.len() != header.len() * 8 {
        return Err(bad(&format!("expected {} samples, found {} bytes", header.len(), rest.len())));
    }
    let data = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((header, data))
}

/// Writes every stored amplitude `A_{m,p}` of the table as one complex spacetime grid with
/// axes `(x, [y,] t)`; the stored `(m, p)` pairs are listed in the header in file order.
pub fn write_coeff_table<T: Real>(path: &Path, table: &CoeffTable<T>) -> Result<()> {
    let sg = &table.grid;
    let d = sg.space.dim;
    let entries = table.nonzero_entries();
    let mut dims = sg.space.n[..d].to_vec();
    dims.push(sg.nt);
    let mut lo: Vec<f64> = sg.space.lo[..d].iter().map(|v| v.to_f64_lossy()).collect();
    lo.push(sg.t0.to_f64_lossy());
    let mut spacing = vec![sg.space.dx.to_f64_lossy(); d];
    spacing.push(sg.dt.to_f64_lossy());
    let header = GridHeader {
        kind: "coeff_table".into(),
        dims,
        lo,
        spacing,
        components: 2 * entries.len(),
        meta: serde_json::json!({
            "order": table.order,
            "entries": entries,
            "v": { "sign": table.v.sign(), "direction": table.v.direction().iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>() },
            "w": { "sign": table.w.sign(), "direction": table.w.direction().iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>() },
            "a": table.a.to_f64_lossy(),
            "b": table.b.to_f64_lossy(),
            "phi": format!("{:?}", table.phi),
            "chi": format!("{:?}", table.chi),
        }),
    };
    let fields: Vec<_> = entries.iter().map(|&(m, p)| table.field(m, p).expect("listed")).collect();
    let mut data = Vec::with_capacity(header.len());
    for node in 0..sg.len() {
        for f in &fields {
            data.push(f[node].re.to_f64_lossy());
            data.push(f[node].im.to_f64_lossy());
        }
    }
    write_grid(path, &header, &data)
}

/// Plain CSV with a header row; numbers use Rust's shortest round-trip formatting.
pub fn write_csv(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", columns.join(","))?;
    for r in rows {
        if r.len() != columns.len() {
            return Err(Error::DimensionMismatch { expected: columns.len(), got: r.len() });
        }
        let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// 8-bit binary PGM of an `nx` by `ny` field stored with `x` fastest, `y` pointing up.
/// The grey scale spans `[min, max]`; a constant field is mid-grey.
pub fn write_pgm(path: &Path, nx: usize, ny: usize, values: &[f64]) -> Result<()> {
    if values.len() != nx * ny {
        return Err(Error::DimensionMismatch { expected: nx * ny, got: values.len() });
    }
    let (lo, hi) = values.iter().filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{nx} {ny}\n255\n")?;
    let mut row = vec![0u8; nx];
    for j in (0..ny).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            let v = values[j * nx + i];
            *px = if !v.is_finite() {
                0
            } else if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                128
            };
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an 8-bit binary PGM back as `(nx, ny, pixels)` in file order.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || Error::Format(format!("{}: not an 8-bit binary PGM", path.display()));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    if fields[0] != "P5" || num(&fields[3])? != 255 {
        return Err(bad());
    }
    let (nx, ny) = (num(&fields[1])?, num(&fields[2])?);
    let pixels = bytes.get(pos + 1..).ok_or_else(bad)?.to_vec();
    if pixels.len() != nx * ny {
        return Err(bad());
    }
    Ok((nx, ny, pixels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.nfgrid");
        let g = Grid::<f64>::new_2d([-1.0, -0.5], 0.25, [3, 2]);
        let h = GridHeader::for_grid("test", &g, serde_json::json!({"note": "x"}));
        let data = vec![1.0, -2.5, 3.0e-300, f64::MAX, 0.0, -0.0];
        write_grid(&p, &h, &data).unwrap();
        let (h2, d2) = read_grid(&p).unwrap();
        assert_eq!(h, h2);
        assert_eq!(data.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), d2.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn grid_rejects_wrong_length_and_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.nfgrid");
        let g = Grid::<f64>::new_1d(0.0, 1.0, 4);
        let h = GridHeader::for_grid("test", &g, serde_json::Value::Null);
        assert!(write_grid(&p, &h, &[1.0]).is_err());
        std::fs::write(&p, b"hello").unwrap();
        assert!(read_grid(&p).is_err());
    }

    #[test]
    fn pgm_round_trip_scales_to_full_range() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.pgm");
        let vals = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        write_pgm(&p, 3, 2, &vals).unwrap();
        let (nx, ny, px) = read_pgm(&p).unwrap();
        assert_eq!((nx, ny), (3, 2));
        // top row of the image is the last grid row
        assert_eq!(px, vec![153, 204, 255, 0, 51, 102]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["h", "l2"], &[vec![0.5, 1e-3], vec![0.25, 2.5e-4]]).unwrap();
        let s = std::fs::read_to_string(&p).unwrap();
        assert_eq!(s, "h,l2\n0.5,0.001\n0.25,0.00025\n");
        assert!(write_csv(&p, &["h"], &[vec![1.0, 2.0]]).is_err());
    }
}
