//! Little-endian helpers shared by the binary file formats.

use crate::error::{malformed, Result};

pub(crate) struct ByteReader<'a> {
    kind: &'static str,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(kind: &'static str, buf: &'a [u8]) -> Self {
        Self { kind, buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let out = &self.buf[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(malformed(
                self.kind,
                format!("truncated at byte {} (wanted {n} more)", self.pos),
            )),
        }
    }

    pub(crate) fn expect_magic(&mut self, magic: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != magic {
            return Err(malformed(
                self.kind,
                format!(
                    "bad magic {got:?}, expected {:?}",
                    std::str::from_utf8(magic).unwrap()
                ),
            ));
        }
        Ok(())
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u32_as_usize(&mut self) -> Result<usize> {
        Ok(self.u32()? as usize)
    }

    pub(crate) fn zeros(&mut self, n: usize) -> Result<()> {
        let at = self.pos;
        if self.take(n)?.iter().any(|&b| b != 0) {
            return Err(malformed(
                self.kind,
                format!("nonzero padding at byte {at}"),
            ));
        }
        Ok(())
    }

    /// Reads `n` f32 values, rejecting NaN and infinities.
    pub(crate) fn f32_vec(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = n
            .checked_mul(4)
            .ok_or_else(|| malformed(self.kind, "element count overflows"))?;
        let at = self.pos;
        let raw = self.take(bytes)?;
        let out: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(malformed(
                self.kind,
                format!("non-finite value at byte {}", at + 4 * i),
            ));
        }
        Ok(out)
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(malformed(
                self.kind,
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

pub(crate) fn put_f32s(out: &mut Vec<u8>, vals: &[f32]) {
    out.reserve(vals.len() * 4);
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn checked_u32(kind: &'static str, v: usize) -> Result<()> {
    if v > u32::MAX as usize {
        return Err(malformed(
            kind,
            format!("dimension {v} does not fit in u32"),
        ));
    }
    Ok(())
}
