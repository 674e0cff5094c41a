//! The `ACE1` binary model format.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic "ACE1" | u32 n_layers | u16 bits | u16 drop_bits | u8 wedge | u64 seed
//! n_layers x [ u8 orientation (0 = north/south, 1 = east/west)
//!            | u32 separation
//!            | u32 lut_len | lut_len x u16 entry
//!            | u32 side    | side*side x u64 count (row-major) ]
//! ```
//!
//! Histograms are stored as raw counts; smoothing is applied at query time.

use crate::error::{AceError, Result};
use crate::histogram::CliqueHistogram;
use crate::model::AceModel;
use crate::network::{make_schedule, Orientation};
use crate::topomap::Lut;

pub const MAGIC: &[u8; 4] = b"ACE1";

pub fn encode(model: &AceModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(model.n_layers() as u32).to_le_bytes());
    out.extend_from_slice(&(model.bits() as u16).to_le_bytes());
    out.extend_from_slice(&(model.drop_bits() as u16).to_le_bytes());
    out.push(model.wedge_applied() as u8);
    out.extend_from_slice(&model.seed().to_le_bytes());
    for ((step, lut), hist) in model
        .schedule()
        .steps()
        .iter()
        .zip(model.luts())
        .zip(model.histograms())
    {
        out.push(match step.orientation {
            Orientation::NorthSouth => 0,
            Orientation::EastWest => 1,
        });
        out.extend_from_slice(&(step.separation as u32).to_le_bytes());
        out.extend_from_slice(&(lut.table().len() as u32).to_le_bytes());
        for &entry in lut.table() {
            out.extend_from_slice(&(entry as u16).to_le_bytes());
        }
        out.extend_from_slice(&(hist.side() as u32).to_le_bytes());
        for &count in hist.counts() {
            out.extend_from_slice(&count.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| AceError::format(self.pos, format!("unexpected end of file reading {n} bytes")))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<AceModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(AceError::format(0, "bad magic, expected ACE1"));
    }
    let n = r.u32()? as usize;
    let schedule = make_schedule(n).map_err(|_| AceError::format(4, format!("layer count {n} out of range")))?;
    let bits_at = r.pos;
    let bits = r.u16()?;
    let drop_bits = r.u16()?;
    if !(1..=8).contains(&bits) || drop_bits >= bits {
        return Err(AceError::format(bits_at, format!("bits {bits} / dropped {drop_bits} out of range")));
    }
    let (bits, drop_bits) = (bits as u8, drop_bits as u8);
    let wedge_at = r.pos;
    let wedge = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(AceError::format(wedge_at, format!("wedge flag {other}"))),
    };
    let seed = r.u64()?;

    let mut luts = Vec::with_capacity(n);
    let mut histograms = Vec::with_capacity(n);
    for step in schedule.steps() {
        let at = r.pos;
        let orientation = match r.u8()? {
            0 => Orientation::NorthSouth,
            1 => Orientation::EastWest,
            other => return Err(AceError::format(at, format!("orientation code {other}"))),
        };
        let separation = r.u32()? as usize;
        if orientation != step.orientation || separation != step.separation {
            return Err(AceError::format(
                at,
                format!("layer {} step does not follow the pairing schedule", step.layer_index),
            ));
        }
        let at = r.pos;
        let lut_len = r.u32()? as usize;
        if lut_len != 1 << (2 * bits) {
            return Err(AceError::format(at, format!("lut length {lut_len} for {bits}-bit codes")));
        }
        let at = r.pos;
        let table = r
            .take(2 * lut_len)?
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .map(|v| u8::try_from(v).map_err(|_| AceError::format(at, format!("lut entry {v}"))))
            .collect::<Result<Vec<u8>>>()?;
        let lut = Lut::from_table(bits, bits, table).map_err(|e| AceError::format(at, e.to_string()))?;
        let at = r.pos;
        let side = r.u32()? as usize;
        if side != 1 << (bits - drop_bits) {
            return Err(AceError::format(at, format!("histogram side {side}")));
        }
        let counts = r
            .take(8 * side * side)?
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let hist = CliqueHistogram::from_counts(side, drop_bits, counts, step.layer_index, step.layer_index == 0)
            .map_err(|e| AceError::format(at, e.to_string()))?;
        luts.push(lut);
        histograms.push(hist);
    }
    if r.pos != bytes.len() {
        return Err(AceError::format(r.pos, "trailing bytes after last layer"));
    }
    AceModel::from_parts(schedule, luts, histograms, bits, drop_bits, wedge, seed)
}
