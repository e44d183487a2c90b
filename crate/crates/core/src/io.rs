//! Persistent formats: binary height fields and JSON-lines loop records.
//!
//! Field layout, all little-endian:
//!
//! | bytes | content                     |
//! |-------|-----------------------------|
//! | 4     | magic `SOSF`                |
//! | 1     | format version              |
//! | 3     | reserved, zero              |
//! | 4     | side length `L` (u32)       |
//! | 4     | height cap `M` (u32)        |
//! | 8     | beta (f64)                  |
//! | 8     | seed (u64)                  |
//! | 2 L^2 | heights (u16), row-major    |

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::HeightField;
use crate::levellines::{macroscopic_cutoff, DualVertex, LevelLoop, LoopEnsemble};

pub const FIELD_MAGIC: &[u8; 4] = b"SOSF";
pub const FIELD_VERSION: u8 = 1;
pub const FIELD_HEADER_LEN: usize = 32;

/// A height field with the run parameters stored next to it.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRecord {
    pub field: HeightField,
    pub beta: f64,
    pub seed: u64,
}

pub fn write_field<W: Write>(mut w: W, field: &HeightField, beta: f64, seed: u64) -> Result<()> {
    let side = field.side();
    let mut buf = Vec::with_capacity(FIELD_HEADER_LEN + 2 * side * side);
    buf.extend_from_slice(FIELD_MAGIC);
    buf.push(FIELD_VERSION);
    buf.extend_from_slice(&[0; 3]);
    buf.extend_from_slice(&(side as u32).to_le_bytes());
    buf.extend_from_slice(&field.cap().to_le_bytes());
    buf.extend_from_slice(&beta.to_le_bytes());
    buf.extend_from_slice(&seed.to_le_bytes());
    let s = field.stride();
    let padded = field.padded();
    for j in 1..=side {
        for &h in &padded[j * s + 1..j * s + 1 + side] {
            buf.extend_from_slice(&h.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<FieldRecord> {
    let mut head = [0u8; FIELD_HEADER_LEN];
    r.read_exact(&mut head)
        .map_err(|e| Error::Format(format!("truncated field header: {e}")))?;
    if &head[0..4] != FIELD_MAGIC {
        return Err(Error::Format("bad magic, not a field file".into()));
    }
    if head[4] != FIELD_VERSION {
        return Err(Error::Format(format!("unsupported field version {}", head[4])));
    }
    let word = |k: usize| u32::from_le_bytes(head[k..k + 4].try_into().unwrap());
    let long = |k: usize| head[k..k + 8].try_into().unwrap();
    let side = word(8) as usize;
    let cap = word(12);
    let beta = f64::from_le_bytes(long(16));
    let seed = u64::from_le_bytes(long(24));
    let mut body = vec![0u8; 2 * side * side];
    r.read_exact(&mut body)
        .map_err(|e| Error::Format(format!("truncated height data: {e}")))?;
    let heights: Vec<u32> =
        body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as u32).collect();
    let field = HeightField::from_rows(side, cap, &heights)?;
    Ok(FieldRecord { field, beta, seed })
}

/// One line of a loop file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub sample: usize,
    pub side: usize,
    pub level: u32,
    pub sign: i8,
    pub length: usize,
    pub area: u64,
    /// Closed dual-vertex cycle `[u, v]`, first vertex repeated.
    pub vertices: Vec<[u32; 2]>,
}

impl LoopRecord {
    pub fn new(sample: usize, side: usize, lp: &LevelLoop) -> Self {
        LoopRecord {
            sample,
            side,
            level: lp.level,
            sign: lp.sign,
            length: lp.length,
            area: lp.area,
            vertices: lp.vertices.iter().map(|v| [v.u, v.v]).collect(),
        }
    }

    pub fn to_loop(&self) -> LevelLoop {
        LevelLoop {
            level: self.level,
            sign: self.sign,
            vertices: self.vertices.iter().map(|&[u, v]| DualVertex { u, v }).collect(),
            length: self.length,
            area: self.area,
        }
    }
}

/// Writes every loop of the ensemble, lowest level first, one JSON object per line.
pub fn write_loops<W: Write>(mut w: W, sample: usize, ensemble: &LoopEnsemble) -> Result<()> {
    for lp in ensemble.iter() {
        serde_json::to_writer(&mut w, &LoopRecord::new(sample, ensemble.side, lp))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_loops<R: BufRead>(r: R) -> Result<Vec<LoopRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("loop record line {}: {e}", n + 1)))?,
        );
    }
    Ok(out)
}

/// Regroups records into one ensemble per sample index, in index order.
///
/// `max_levels[k]` pads sample `k` with empty levels up to its field maximum;
/// samples without any record come back empty.
pub fn ensembles_from_records(
    records: &[LoopRecord],
    side: usize,
    max_levels: &[u32],
) -> Result<Vec<LoopEnsemble>> {
    let count = records
        .iter()
        .map(|r| r.sample + 1)
        .max()
        .unwrap_or(0)
        .max(max_levels.len());
    let empty = LoopEnsemble { side, cutoff: macroscopic_cutoff(side), levels: Vec::new() };
    let mut out = vec![empty; count];
    for rec in records {
        if rec.level == 0 {
            return Err(Error::Format("loop record at level 0".into()));
        }
        if rec.side != side {
            return Err(Error::Format(format!(
                "sample {} has side {}, expected {side}",
                rec.sample, rec.side
            )));
        }
        let e = &mut out[rec.sample];
        let h = rec.level as usize;
        if e.levels.len() < h {
            e.levels.resize(h, Vec::new());
        }
        e.levels[h - 1].push(rec.to_loop());
    }
    for (e, &m) in out.iter_mut().zip(max_levels) {
        if e.levels.len() < m as usize {
            e.levels.resize(m as usize, Vec::new());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levellines::extract_ensemble;

    fn sample_field() -> HeightField {
        HeightField::from_rows(4, 7, &[0, 1, 2, 3, 4, 5, 6, 7, 7, 6, 5, 4, 3, 2, 1, 0]).unwrap()
    }

    #[test]
    fn field_layout() {
        let mut buf = Vec::new();
        write_field(&mut buf, &sample_field(), 1.25, 42).unwrap();
        assert_eq!(buf.len(), 32 + 32);
        assert_eq!(&buf[..8], b"SOSF\x01\0\0\0");
        assert_eq!(&buf[8..16], &[4, 0, 0, 0, 7, 0, 0, 0]);
        assert_eq!(&buf[16..24], &1.25f64.to_le_bytes());
        assert_eq!(&buf[24..32], &42u64.to_le_bytes());
        assert_eq!(&buf[32..36], &[0, 0, 1, 0]);
    }

    #[test]
    fn field_round_trip() {
        let mut buf = Vec::new();
        write_field(&mut buf, &sample_field(), 0.75, u64::MAX).unwrap();
        let rec = read_field(buf.as_slice()).unwrap();
        assert_eq!(rec, FieldRecord { field: sample_field(), beta: 0.75, seed: u64::MAX });
    }

    #[test]
    fn field_rejects_corruption() {
        let mut buf = Vec::new();
        write_field(&mut buf, &sample_field(), 1.0, 1).unwrap();
        assert!(read_field(&buf[..40]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_field(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(read_field(bad.as_slice()).is_err());
        // height above the stored cap
        let mut bad = buf;
        bad[12] = 3;
        assert!(matches!(read_field(bad.as_slice()), Err(Error::HeightOutOfRange { .. })));
    }

    #[test]
    fn loops_round_trip() {
        let fields = [sample_field(), HeightField::new(4, 7, 0).unwrap(), HeightField::new(4, 7, 2).unwrap()];
        let ensembles: Vec<LoopEnsemble> = fields.iter().map(|f| extract_ensemble(f).unwrap()).collect();
        let mut buf = Vec::new();
        for (k, e) in ensembles.iter().enumerate() {
            write_loops(&mut buf, k, e).unwrap();
        }
        let records = read_loops(buf.as_slice()).unwrap();
        assert_eq!(records.len(), ensembles.iter().map(|e| e.iter().count()).sum::<usize>());
        let levels: Vec<u32> = fields.iter().map(|f| f.max_height()).collect();
        assert_eq!(ensembles_from_records(&records, 4, &levels).unwrap(), ensembles);
    }

    #[test]
    fn loop_lines_are_plain_json() {
        let e = extract_ensemble(&HeightField::new(2, 1, 1).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_loops(&mut buf, 3, &e).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"sample\":3,\"side\":2,\"level\":1,\"sign\":1,\"length\":8,\"area\":4,\
             \"vertices\":[[0,1],[0,0],[1,0],[2,0],[2,1],[2,2],[1,2],[0,2],[0,1]]}\n"
        );
        assert!(read_loops("not json\n".as_bytes()).is_err());
    }
}
