//! Byte layouts for dealer requests and responses.
//!
//! A request is the block's tag on the frame plus a fixed prefix
//! (`mode u8 | batch u32 | params [u32; 4]`, 21 bytes) and the block's data. A response
//! is a status byte followed by data (status 0) or a UTF-8 reason (status 1).
//! Integers are little-endian `u64`s; bits travel one per byte.

use crate::error::{Error, Result};

pub const MODE_IDEAL: u8 = 0;
pub const MODE_BEAVER: u8 = 1;

pub const STATUS_OK: u8 = 0;
pub const STATUS_CONTRACT: u8 = 1;

pub const REQ_PREFIX: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub mode: u8,
    pub batch: u32,
    pub params: [u32; 4],
}

impl Request {
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(self.mode);
        out.extend_from_slice(&self.batch.to_le_bytes());
        for p in self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }

    pub fn decode(buf: &[u8]) -> Result<(Request, &[u8])> {
        if buf.len() < REQ_PREFIX {
            return Err(Error::Desync("short dealer request".into()));
        }
        let u = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
        Ok((
            Request {
                mode: buf[0],
                batch: u(1),
                params: [u(5), u(9), u(13), u(17)],
            },
            &buf[REQ_PREFIX..],
        ))
    }
}

pub fn put_u64s(out: &mut Vec<u8>, v: &[u64]) {
    out.reserve(v.len() * 8);
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn put_bits(out: &mut Vec<u8>, v: &[u8]) {
    out.extend_from_slice(v);
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Desync(format!(
                "message too short: wanted {n} more bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u64s(&mut self, n: usize) -> Result<Vec<u64>> {
        let b = self.take(n * 8)?;
        Ok(b.chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub fn bits(&mut self, n: usize) -> Result<Vec<u8>> {
        let b = self.take(n)?;
        if b.iter().any(|&x| x > 1) {
            return Err(Error::Desync("non-bit byte in a bit vector".into()));
        }
        Ok(b.to_vec())
    }

    pub fn rest(&mut self) -> &'a [u8] {
        let s = &self.buf[self.pos..];
        self.pos = self.buf.len();
        s
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Desync(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}
