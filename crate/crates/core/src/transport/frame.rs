//! Wire unit: a 12-byte little-endian header followed by the payload.
//!
//! ```text
//! session_id u32 | tag u8 | seq u32 | len u24 | payload[len]
//! ```

use crate::error::{Error, Result};

pub const HEADER_LEN: usize = 12;
/// Payloads must be strictly shorter than 2^24 bytes.
pub const MAX_PAYLOAD: usize = (1 << 24) - 1;

/// Tag bytes on the wire.
pub mod tags {
    pub const MSB: u8 = 0x01;
    pub const MSB_TO_WRAP: u8 = 0x02;
    pub const MUX: u8 = 0x03;
    pub const AND: u8 = 0x04;
    pub const B2A: u8 = 0x05;
    pub const CROSS_TERM: u8 = 0x06;
    pub const MULT: u8 = 0x07;
    pub const TRUNCATE: u8 = 0x08;
    pub const REC: u8 = 0x09;
    /// Party-to-party masked openings.
    pub const OPEN: u8 = 0x10;
    pub const INPUT: u8 = 0x20;
    pub const REVEAL: u8 = 0x21;
    pub const HELLO: u8 = 0xF0;
    pub const BYE: u8 = 0xFF;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub session_id: u32,
    pub tag: u8,
    pub seq: u32,
    pub payload: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub session_id: u32,
    pub tag: u8,
    pub seq: u32,
    pub len: usize,
}

impl Header {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&self.session_id.to_le_bytes());
        h[4] = self.tag;
        h[5..9].copy_from_slice(&self.seq.to_le_bytes());
        h[9..12].copy_from_slice(&(self.len as u32).to_le_bytes()[..3]);
        h
    }

    pub fn decode(h: &[u8; HEADER_LEN]) -> Header {
        let mut len = [0u8; 4];
        len[..3].copy_from_slice(&h[9..12]);
        Header {
            session_id: u32::from_le_bytes(h[0..4].try_into().unwrap()),
            tag: h[4],
            seq: u32::from_le_bytes(h[5..9].try_into().unwrap()),
            len: u32::from_le_bytes(len) as usize,
        }
    }
}

impl Frame {
    pub fn new(session_id: u32, tag: u8, seq: u32, payload: Vec<u8>) -> Result<Self> {
        check_len(payload.len())?;
        Ok(Frame {
            session_id,
            tag,
            seq,
            payload,
        })
    }

    pub fn header(&self) -> Header {
        Header {
            session_id: self.session_id,
            tag: self.tag,
            seq: self.seq,
            len: self.payload.len(),
        }
    }

    pub fn wire_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        check_len(self.payload.len())?;
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&self.header().encode());
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    /// Parses one frame from the front of `buf`; returns it and the bytes used.
    pub fn decode(buf: &[u8]) -> Result<(Frame, usize)> {
        if buf.len() < HEADER_LEN {
            return Err(Error::Transport("truncated frame header".into()));
        }
        let h = Header::decode(buf[..HEADER_LEN].try_into().unwrap());
        let end = HEADER_LEN + h.len;
        if buf.len() < end {
            return Err(Error::Transport(format!(
                "truncated frame: header announces {} payload bytes, {} present",
                h.len,
                buf.len() - HEADER_LEN
            )));
        }
        Ok((
            Frame {
                session_id: h.session_id,
                tag: h.tag,
                seq: h.seq,
                payload: buf[HEADER_LEN..end].to_vec(),
            },
            end,
        ))
    }
}

fn check_len(n: usize) -> Result<()> {
    if n > MAX_PAYLOAD {
        return Err(Error::Contract(format!(
            "payload of {n} bytes exceeds the 24-bit length field"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_frame_is_header_only() {
        let f = Frame::new(7, tags::MSB, 0, vec![]).unwrap();
        assert_eq!(f.encode().unwrap().len(), 12);
    }

    #[test]
    fn hundred_byte_payload() {
        let f = Frame::new(7, tags::MUX, 3, vec![0xAB; 100]).unwrap();
        assert_eq!(f.encode().unwrap().len(), 112);
    }

    #[test]
    fn header_layout_is_little_endian() {
        let f = Frame::new(0x0403_0201, 0x55, 0x0908_0706, vec![1, 2, 3]).unwrap();
        let b = f.encode().unwrap();
        assert_eq!(&b[..12], &[1, 2, 3, 4, 0x55, 6, 7, 8, 9, 3, 0, 0]);
        let (g, used) = Frame::decode(&b).unwrap();
        assert_eq!(used, 15);
        assert_eq!(g, f);
    }

    #[test]
    fn oversized_and_truncated() {
        assert!(Frame::new(0, 0, 0, vec![0; MAX_PAYLOAD + 1]).is_err());
        assert!(Frame::new(0, 0, 0, vec![0; MAX_PAYLOAD]).is_ok());
        let b = Frame::new(1, 1, 1, vec![9; 10]).unwrap().encode().unwrap();
        assert!(Frame::decode(&b[..5]).is_err());
        assert!(Frame::decode(&b[..20]).is_err());
    }
}
