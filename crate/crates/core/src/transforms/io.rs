//! Grid I/O.
//!
//! CSV: one header row naming the axes with their bounds, e.g.
//! `a[-6:6],l[-6:6],re,im` (position) or `a[-6:6],xi[l=-6:6],re,im` (Fourier data, the
//! bracket holding the position-space `l` extent), then one row per grid point in
//! row-major order (last axis fastest).
//!
//! Binary (little-endian throughout):
//!
//! | field | type |
//! |-------|------|
//! | magic `DQGRID1\0` | 8 bytes |
//! | space (0 position, 1 Fourier) | u32 |
//! | axis count | u32 |
//! | per axis: role (0 a, 1 v, 2 l), role index, points, min, max | u32, u32, u64, f64, f64 |
//! | value count | u64 |
//! | values as `(re, im)` pairs | f64, f64 |
//!
//! Fourier data stores the position-space `l` axis; the `xi` axis is its reciprocal.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{Axis, AxisRole, GridFunction, GridSpec, Space};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"DQGRID1\0";

fn column_name(ax: &Axis, space: Space) -> String {
    match (ax.role, space) {
        (AxisRole::L, Space::Fourier) => format!("xi[l={}:{}]", ax.min, ax.max),
        _ => format!("{}[{}:{}]", ax.role.name(), ax.min, ax.max),
    }
}

pub fn write_csv<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
    let spec = f.spec();
    let mut header: Vec<String> = spec.axes().iter().map(|a| column_name(a, f.space())).collect();
    header.push("re".into());
    header.push("im".into());
    writeln!(w, "{}", header.join(","))?;
    for (i, z) in f.values().iter().enumerate() {
        let c = spec.coords_of(i, f.space());
        let mut row: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        row.push(z.re.to_string());
        row.push(z.im.to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))
}

fn parse_header(name: &str) -> Result<(String, f64, f64)> {
    let name = name.trim();
    let open = name.find('[').ok_or_else(|| Error::Format(format!("column {name:?} lacks [min:max]")))?;
    let label = &name[..open];
    let inner = name[open + 1..].strip_suffix(']').ok_or_else(|| Error::Format(format!("column {name:?} lacks ]")))?;
    let inner = inner.strip_prefix("l=").unwrap_or(inner);
    let (lo, hi) = inner.split_once(':').ok_or_else(|| Error::Format(format!("column {name:?}: expected min:max")))?;
    Ok((label.to_string(), parse_f64(lo)?, parse_f64(hi)?))
}

pub fn read_csv<R: BufRead>(r: R) -> Result<GridFunction> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[cols.len() - 2].trim() != "re" || cols[cols.len() - 1].trim() != "im" {
        return Err(Error::Format("header must end with re,im".into()));
    }
    let naxes = cols.len() - 2;
    let parsed: Vec<(String, f64, f64)> = cols[..naxes].iter().map(|c| parse_header(c)).collect::<Result<_>>()?;
    let space = match parsed[naxes - 1].0.as_str() {
        "l" => Space::Position,
        "xi" => Space::Fourier,
        other => return Err(Error::Format(format!("last axis must be l or xi, found {other}"))),
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line.split(',').map(parse_f64).collect::<Result<_>>()?;
        if row.len() != cols.len() {
            return Err(Error::Format(format!("row has {} fields, expected {}", row.len(), cols.len())));
        }
        rows.push(row);
    }
    // points per axis from the row-major layout: axis k repeats with period prod(points[k+1..])
    let mut points = vec![0usize; naxes];
    let mut stride = 1usize;
    for k in (0..naxes).rev() {
        let mut cnt = 1usize;
        while cnt * stride < rows.len() && rows[cnt * stride][k] != rows[0][k] {
            cnt += 1;
        }
        points[k] = cnt;
        stride *= cnt;
    }
    if stride != rows.len() {
        return Err(Error::Format(format!("{} rows do not form a rectangular grid", rows.len())));
    }
    let mut axes = Vec::with_capacity(naxes);
    for (k, (label, lo, hi)) in parsed.iter().enumerate() {
        let role = match (k, label.as_str()) {
            (0, "a") => AxisRole::A,
            (k, "l") | (k, "xi") if k == naxes - 1 => AxisRole::L,
            (k, v) if v == format!("v{k}") => AxisRole::V(k - 1),
            _ => return Err(Error::Format(format!("unexpected axis {label:?} at position {k}"))),
        };
        axes.push(Axis::new(role, *lo, *hi, points[k])?);
    }
    let spec = GridSpec::new(axes)?;
    let values: Vec<Complex64> = rows.iter().map(|r| Complex64::new(r[naxes], r[naxes + 1])).collect();
    for (i, r) in rows.iter().enumerate() {
        let c = spec.coords_of(i, space);
        let scale = c.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if c.iter().zip(r).any(|(x, y)| (x - y).abs() > 1e-9 * scale) {
            return Err(Error::Format(format!("row {} coordinates disagree with the header grid", i + 1)));
        }
    }
    GridFunction::new(spec, space, values)
}

pub fn write_binary<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(if f.space() == Space::Position { 0u32 } else { 1u32 }).to_le_bytes())?;
    w.write_all(&(f.spec().axes().len() as u32).to_le_bytes())?;
    for ax in f.spec().axes() {
        let (code, idx) = match ax.role {
            AxisRole::A => (0u32, 0u32),
            AxisRole::V(i) => (1, i as u32),
            AxisRole::L | AxisRole::Xi => (2, 0),
        };
        w.write_all(&code.to_le_bytes())?;
        w.write_all(&idx.to_le_bytes())?;
        w.write_all(&(ax.points as u64).to_le_bytes())?;
        w.write_all(&ax.min.to_le_bytes())?;
        w.write_all(&ax.max.to_le_bytes())?;
    }
    w.write_all(&(f.values().len() as u64).to_le_bytes())?;
    for z in f.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated grid file: {e}")))?;
    Ok(b)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridFunction> {
    if &take::<8, _>(&mut r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let space = match u32::from_le_bytes(take(&mut r)?) {
        0 => Space::Position,
        1 => Space::Fourier,
        s => return Err(Error::Format(format!("unknown space code {s}"))),
    };
    let naxes = u32::from_le_bytes(take(&mut r)?) as usize;
    if naxes > 64 {
        return Err(Error::Format(format!("implausible axis count {naxes}")));
    }
    let mut axes = Vec::with_capacity(naxes);
    for _ in 0..naxes {
        let code = u32::from_le_bytes(take(&mut r)?);
        let idx = u32::from_le_bytes(take(&mut r)?) as usize;
        let points = u64::from_le_bytes(take(&mut r)?) as usize;
        let min = f64::from_le_bytes(take(&mut r)?);
        let max = f64::from_le_bytes(take(&mut r)?);
        let role = match code {
            0 => AxisRole::A,
            1 => AxisRole::V(idx),
            2 => AxisRole::L,
            c => return Err(Error::Format(format!("unknown axis role {c}"))),
        };
        axes.push(Axis::new(role, min, max, points)?);
    }
    let spec = GridSpec::new(axes)?;
    let count = u64::from_le_bytes(take(&mut r)?) as usize;
    if count != spec.len() {
        return Err(Error::LengthMismatch { expected: spec.len(), found: count });
    }
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let re = f64::from_le_bytes(take(&mut r)?);
        let im = f64::from_le_bytes(take(&mut r)?);
        values.push(Complex64::new(re, im));
    }
    GridFunction::new(spec, space, values)
}
