//! File formats.
//!
//! Cell lists come in a binary form and a line-oriented text twin; the text
//! form is chosen by a `.txt` extension. Binary layout, all little-endian:
//!
//! ```text
//! header : magic "AMRCELL1" | version u32 = 1 | cell_count u64 | field_count u32 = 1
//! record : i i32 | j i32 | k i32 | level i32 | scalar f64      (cell_count times)
//! ```
//!
//! Text lines are `i j k level scalar`; blank lines and `#` comments are
//! ignored.
//!
//! Meshes are written as OBJ (text) or binary little-endian PLY; dual
//! meshes as a plain text listing. Writers go through a temporary file in
//! the destination directory, so a failed write leaves no output behind.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::dual::DualCell;
use crate::error::{AmrError, Result};
use crate::model::{cell_center, AmrDataset, CellCoord, MAX_LEVEL};
use crate::weld::IndexedMesh;

pub const AMR_MAGIC: &[u8; 8] = b"AMRCELL1";
pub const AMR_VERSION: u32 = 1;
const HEADER_LEN: u64 = 8 + 4 + 8 + 4;
const RECORD_LEN: u64 = 4 * 4 + 8;

/// Name written into output headers.
pub const TOOL_NAME: &str = "amrdual";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AmrFileHeader {
    pub version: u32,
    pub cell_count: u64,
    pub field_count: u32,
}

/// Whether `path` selects the text cell-list format.
pub fn is_text_path(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("txt"))
}

/// Reads a cell list, picking the format from the extension.
pub fn read_amr(path: &Path) -> Result<AmrDataset> {
    let file = File::open(path)?;
    if is_text_path(path) {
        read_amr_text(BufReader::new(file))
    } else {
        let len = file.metadata()?.len();
        read_amr_binary(BufReader::new(file), Some(len))
    }
}

fn make_coord(record: usize, i: i32, j: i32, k: i32, level: i64) -> Result<CellCoord> {
    if !(0..=MAX_LEVEL as i64).contains(&level) {
        return Err(AmrError::load(
            record,
            format!("level {level} outside 0..={MAX_LEVEL}"),
        ));
    }
    CellCoord::new(i, j, k, level as u8).map_err(|e| match e {
        AmrError::Contract(msg) => AmrError::load(record, msg),
        other => other,
    })
}

fn check_scalar(record: usize, s: f64) -> Result<f64> {
    if s.is_finite() {
        Ok(s)
    } else {
        Err(AmrError::load(record, format!("scalar {s} is not finite")))
    }
}

/// Reads the binary form. `byte_len`, when known, is checked against the
/// header before any allocation.
pub fn read_amr_binary<R: Read>(mut r: R, byte_len: Option<u64>) -> Result<AmrDataset> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| AmrError::Format("file shorter than the header".into()))?;
    if &magic != AMR_MAGIC {
        return Err(AmrError::Format("bad magic, expected AMRCELL1".into()));
    }
    let header = (|| -> std::io::Result<AmrFileHeader> {
        Ok(AmrFileHeader {
            version: r.read_u32::<LittleEndian>()?,
            cell_count: r.read_u64::<LittleEndian>()?,
            field_count: r.read_u32::<LittleEndian>()?,
        })
    })()
    .map_err(|_| AmrError::Format("file shorter than the header".into()))?;
    if header.version != AMR_VERSION {
        return Err(AmrError::Format(format!(
            "unsupported version {}",
            header.version
        )));
    }
    if header.field_count != 1 {
        return Err(AmrError::Format(format!(
            "field_count {} unsupported, expected 1",
            header.field_count
        )));
    }
    if header.cell_count == 0 {
        return Err(AmrError::EmptyDataset);
    }
    if let Some(len) = byte_len {
        let need = header
            .cell_count
            .checked_mul(RECORD_LEN)
            .and_then(|b| b.checked_add(HEADER_LEN));
        match need {
            Some(need) if need <= len => {}
            _ => {
                let have = len.saturating_sub(HEADER_LEN) / RECORD_LEN;
                return Err(AmrError::load(
                    have as usize,
                    format!("truncated: header promises {} cells", header.cell_count),
                ));
            }
        }
    }
    if header.cell_count > u32::MAX as u64 {
        return Err(AmrError::Overflow(format!(
            "{} cells do not fit 32-bit cell ids",
            header.cell_count
        )));
    }
    let n = header.cell_count as usize;
    let mut cells = Vec::with_capacity(n.min(1 << 24));
    let mut scalars = Vec::with_capacity(n.min(1 << 24));
    for record in 0..n {
        let rec = (|| -> std::io::Result<(i32, i32, i32, i32, f64)> {
            Ok((
                r.read_i32::<LittleEndian>()?,
                r.read_i32::<LittleEndian>()?,
                r.read_i32::<LittleEndian>()?,
                r.read_i32::<LittleEndian>()?,
                r.read_f64::<LittleEndian>()?,
            ))
        })()
        .map_err(|_| AmrError::load(record, "truncated record"))?;
        cells.push(make_coord(record, rec.0, rec.1, rec.2, rec.3 as i64)?);
        scalars.push(check_scalar(record, rec.4)?);
    }
    AmrDataset::new(cells, scalars)
}

/// Reads the text form. Record numbers in errors count data lines from 0.
pub fn read_amr_text<R: BufRead>(r: R) -> Result<AmrDataset> {
    let mut cells = Vec::new();
    let mut scalars = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let record = cells.len();
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(AmrError::load(
                record,
                format!("line {}: expected 'i j k level scalar'", lineno + 1),
            ));
        }
        let int = |s: &str| {
            s.parse::<i32>().map_err(|_| {
                AmrError::load(record, format!("line {}: bad integer '{s}'", lineno + 1))
            })
        };
        let (i, j, k, level) = (
            int(fields[0])?,
            int(fields[1])?,
            int(fields[2])?,
            int(fields[3])?,
        );
        let s: f64 = fields[4].parse().map_err(|_| {
            AmrError::load(
                record,
                format!("line {}: bad scalar '{}'", lineno + 1, fields[4]),
            )
        })?;
        cells.push(make_coord(record, i, j, k, level as i64)?);
        scalars.push(check_scalar(record, s)?);
    }
    AmrDataset::new(cells, scalars)
}

pub fn write_amr_binary<W: Write>(ds: &AmrDataset, mut w: W) -> Result<()> {
    w.write_all(AMR_MAGIC)?;
    w.write_u32::<LittleEndian>(AMR_VERSION)?;
    w.write_u64::<LittleEndian>(ds.len() as u64)?;
    w.write_u32::<LittleEndian>(1)?;
    for (c, &s) in ds.cells().iter().zip(ds.scalars()) {
        w.write_i32::<LittleEndian>(c.i)?;
        w.write_i32::<LittleEndian>(c.j)?;
        w.write_i32::<LittleEndian>(c.k)?;
        w.write_i32::<LittleEndian>(c.level as i32)?;
        w.write_f64::<LittleEndian>(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_amr_text<W: Write>(ds: &AmrDataset, mut w: W) -> Result<()> {
    writeln!(w, "# {TOOL_NAME} cell list: i j k level scalar")?;
    for (c, s) in ds.cells().iter().zip(ds.scalars()) {
        // Debug formatting is the shortest round-trip form, with an
        // exponent for very large or small magnitudes.
        writeln!(w, "{} {} {} {} {:?}", c.i, c.j, c.k, c.level, s)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `path` through a sibling temporary file renamed into place.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| AmrError::Io(e.error))?;
    Ok(())
}

/// Writes a cell list, picking the format from the extension.
pub fn write_amr(ds: &AmrDataset, path: &Path) -> Result<()> {
    let text = is_text_path(path);
    write_atomic(path, |w| {
        if text {
            write_amr_text(ds, w)
        } else {
            write_amr_binary(ds, w)
        }
    })
}

pub fn write_obj_to<W: Write + ?Sized>(mesh: &IndexedMesh, w: &mut W) -> Result<()> {
    writeln!(w, "# {TOOL_NAME} iso-surface")?;
    writeln!(
        w,
        "# vertices {} triangles {}",
        mesh.vertices.len(),
        mesh.triangles.len()
    )?;
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

pub fn write_obj(mesh: &IndexedMesh, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_obj_to(mesh, w))
}

pub fn write_ply_to<W: Write + ?Sized>(mesh: &IndexedMesh, w: &mut W) -> Result<()> {
    write!(
        w,
        "ply\n\
         format binary_little_endian 1.0\n\
         comment {TOOL_NAME} iso-surface\n\
         element vertex {}\n\
         property float x\n\
         property float y\n\
         property float z\n\
         element face {}\n\
         property list uchar uint vertex_indices\n\
         end_header\n",
        mesh.vertices.len(),
        mesh.triangles.len()
    )?;
    for v in &mesh.vertices {
        w.write_f32::<LittleEndian>(v.x as f32)?;
        w.write_f32::<LittleEndian>(v.y as f32)?;
        w.write_f32::<LittleEndian>(v.z as f32)?;
    }
    for t in &mesh.triangles {
        w.write_u8(3)?;
        for &i in t {
            w.write_u32::<LittleEndian>(i)?;
        }
    }
    Ok(())
}

pub fn write_ply(mesh: &IndexedMesh, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_ply_to(mesh, w))
}

/// One line per dual: the eight corner-cell centers in `d` order, then the
/// eight corner scalars.
pub fn write_dual_mesh_to<W: Write + ?Sized>(
    duals: &[DualCell],
    ds: &AmrDataset,
    w: &mut W,
) -> Result<()> {
    writeln!(w, "# {TOOL_NAME} dual mesh")?;
    writeln!(
        w,
        "# per line: x y z of 8 corners (dz,dy,dx order), then 8 scalars"
    )?;
    writeln!(w, "duals {}", duals.len())?;
    let mut line = String::new();
    for dual in duals {
        line.clear();
        for id in dual.corners {
            let p = cell_center(&ds.cells()[id.index()]);
            line.push_str(&format!("{} {} {} ", p.x, p.y, p.z));
        }
        let vals: Vec<String> = dual
            .corners
            .iter()
            .map(|id| format!("{:?}", ds.scalars()[id.index()]))
            .collect();
        line.push_str(&vals.join(" "));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_dual_mesh(duals: &[DualCell], ds: &AmrDataset, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_dual_mesh_to(duals, ds, w))
}
