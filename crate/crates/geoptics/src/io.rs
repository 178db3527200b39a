//! File formats.
//!
//! Binary field container, little-endian by default:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `GOFD`                              |
//! | 1     | endianness tag, `L` or `B`                |
//! | 1     | format version (1)                        |
//! | 2     | reserved, zero                            |
//! | 4     | dimension `n` (u32)                       |
//! | 4     | points per axis `M` (u32)                 |
//! | 8     | half-width `L` (f64)                      |
//! | 16·Mⁿ | values as interleaved `re, im` f64 pairs  |
//!
//! Values are row-major with the last axis fastest, matching
//! [`Field::values`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use geoptics_core::dynamics::StepRecord;
use geoptics_core::wkb::TaylorCascade;
use geoptics_core::{Complex64, Field, Grid};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const MAGIC: [u8; 4] = *b"GOFD";
pub const VERSION: u8 = 1;

pub fn write_field(mut w: impl Write, field: &Field) -> Result<()> {
    let g = field.grid();
    let mut header = Vec::with_capacity(24);
    header.extend_from_slice(&MAGIC);
    header.extend_from_slice(&[b'L', VERSION, 0, 0]);
    header.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    header.extend_from_slice(&(g.points() as u32).to_le_bytes());
    header.extend_from_slice(&g.half_width().to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(16 * field.len());
    for c in field.values() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field(mut r: impl Read) -> Result<Field> {
    let mut header = [0u8; 24];
    r.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(HarnessError::Format("missing GOFD magic".into()));
    }
    let big = match header[4] {
        b'L' => false,
        b'B' => true,
        t => return Err(HarnessError::Format(format!("unknown endianness tag {t:#x}"))),
    };
    if header[5] != VERSION {
        return Err(HarnessError::Format(format!("unsupported version {}", header[5])));
    }
    let u32_at = |i: usize| {
        let b: [u8; 4] = header[i..i + 4].try_into().expect("4 bytes");
        if big {
            u32::from_be_bytes(b)
        } else {
            u32::from_le_bytes(b)
        }
    };
    let f64_of = |b: [u8; 8]| if big { f64::from_be_bytes(b) } else { f64::from_le_bytes(b) };
    let dim = u32_at(8) as usize;
    let points = u32_at(12) as usize;
    let half_width = f64_of(header[16..24].try_into().expect("8 bytes"));
    let grid = Grid::new(dim, points, half_width).map_err(|e| HarnessError::Format(e.to_string()))?;
    let mut payload = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut payload)?;
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64_of(c[..8].try_into().expect("8 bytes")),
                f64_of(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Field::new(grid, values).map_err(|e| HarnessError::Format(e.to_string()))
}

pub fn save_field(path: &Path, field: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<Field> {
    read_field(BufReader::new(File::open(path)?))
}

/// One row per node: coordinates `x0..x{n-1}`, then `re`, `im`.
pub fn write_field_csv(mut w: impl Write, field: &Field) -> Result<()> {
    let g = field.grid();
    let dim = g.dim();
    let axes: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "{},re,im", axes.join(","))?;
    for (flat, c) in field.values().iter().enumerate() {
        let x = g.position(flat);
        for xi in &x[..dim] {
            write!(w, "{xi:.17e},")?;
        }
        writeln!(w, "{:.17e},{:.17e}", c.re, c.im)?;
    }
    Ok(())
}

pub fn save_field_csv(path: &Path, field: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_csv(&mut w, field)?;
    w.flush()?;
    Ok(())
}

/// Line of the JSON-lines run log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    pub max_abs: f64,
}

impl From<&StepRecord> for LogLine {
    fn from(r: &StepRecord) -> Self {
        Self {
            step: r.step,
            time: r.time,
            mass: r.mass,
            max_abs: r.max_abs,
        }
    }
}

pub fn write_run_log(mut w: impl Write, lines: &[LogLine]) -> Result<()> {
    for line in lines {
        serde_json::to_writer(&mut w, line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_run_log(r: impl BufRead) -> Result<Vec<LogLine>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

/// Plain CSV table with a header row; numbers in full precision.
pub fn write_table_csv(mut w: impl Write, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CascadeManifest {
    pub order: usize,
    pub variant: String,
    pub phase_powers: Vec<i32>,
    pub amplitude_powers: Vec<i32>,
    pub phase_files: Vec<String>,
    pub amplitude_files: Vec<String>,
}

/// Writes `cascade.json` plus `phi_j.bin` / `amp_j.bin` into `dir`.
pub fn write_cascade(dir: &Path, cascade: &TaylorCascade) -> Result<CascadeManifest> {
    std::fs::create_dir_all(dir)?;
    let mut phase_files = Vec::new();
    let mut amplitude_files = Vec::new();
    for (j, (phi, amp)) in cascade.phis.iter().zip(&cascade.amps).enumerate() {
        let p = format!("phi_{j}.bin");
        let a = format!("amp_{j}.bin");
        save_field(&dir.join(&p), phi)?;
        save_field(&dir.join(&a), amp)?;
        phase_files.push(p);
        amplitude_files.push(a);
    }
    let manifest = CascadeManifest {
        order: cascade.order,
        variant: format!("{:?}", cascade.variant),
        phase_powers: (0..=cascade.order).map(|j| cascade.phase_power(j)).collect(),
        amplitude_powers: (0..=cascade.order).map(|j| cascade.amplitude_power(j)).collect(),
        phase_files,
        amplitude_files,
    };
    std::fs::write(dir.join("cascade.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
