//! Grid snapshot dumps: raw little-endian `f64` data plus a text header.
//!
//! The data file holds `u¹ … uᵐ` then `u_t¹ … u_tᵐ`, each `n³` values in
//! row-major order with `x₁` fastest. The sidecar `<path>.hdr` reads
//!
//! ```text
//! n 16
//! dx 0.1
//! origin -0.75 -0.75 -0.75
//! t 0.5
//! m 2
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{GridError, GridSpec, GridState};

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub n: usize,
    pub dx: f64,
    pub origin: [f64; 3],
    pub t: f64,
    pub m: usize,
}

fn header_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".hdr");
    PathBuf::from(p)
}

fn io(e: impl std::fmt::Display) -> GridError {
    GridError::Io(e.to_string())
}

pub fn write_snapshot(state: &GridState, path: &Path) -> Result<(), GridError> {
    let g = &state.grid;
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    for f in state.u.iter().chain(&state.ut) {
        for v in f {
            out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    out.flush().map_err(io)?;
    let header = format!(
        "n {}\ndx {}\norigin {} {} {}\nt {}\nm {}\n",
        g.n, g.dx, g.origin[0], g.origin[1], g.origin[2], state.t, state.m()
    );
    fs::write(header_path(path), header).map_err(io)
}

fn parse_header(text: &str) -> Result<SnapshotHeader, GridError> {
    let mut n = None;
    let mut dx = None;
    let mut origin = None;
    let mut t = None;
    let mut m = None;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let vals: Vec<&str> = parts.collect();
        let num = |i: usize| -> Result<f64, GridError> {
            vals.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| io(format!("bad header line {line:?}")))
        };
        match key {
            "n" => n = Some(num(0)? as usize),
            "dx" => dx = Some(num(0)?),
            "origin" => origin = Some([num(0)?, num(1)?, num(2)?]),
            "t" => t = Some(num(0)?),
            "m" => m = Some(num(0)? as usize),
            other => return Err(io(format!("unknown header key {other:?}"))),
        }
    }
    let missing = |k: &str| io(format!("header missing {k}"));
    Ok(SnapshotHeader {
        n: n.ok_or_else(|| missing("n"))?,
        dx: dx.ok_or_else(|| missing("dx"))?,
        origin: origin.ok_or_else(|| missing("origin"))?,
        t: t.ok_or_else(|| missing("t"))?,
        m: m.ok_or_else(|| missing("m"))?,
    })
}

/// Reads a snapshot back; the grid is taken as non-periodic with halo 2.
pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, GridState), GridError> {
    let header = parse_header(&fs::read_to_string(header_path(path)).map_err(io)?)?;
    let bytes = fs::read(path).map_err(io)?;
    let len = header.n.pow(3);
    let expected = 2 * header.m * len * 8;
    if bytes.len() != expected {
        return Err(GridError::Shape { expected, got: bytes.len() });
    }
    let values: Vec<f64> =
        bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let grid = GridSpec { n: header.n, dx: header.dx, origin: header.origin, halo: 2, periodic: false };
    let mut fields = values.chunks_exact(len).map(<[f64]>::to_vec);
    let u = (&mut fields).take(header.m).collect();
    let ut = fields.collect();
    let state = GridState::new(grid, header.t, u, ut)?;
    Ok((header, state))
}
