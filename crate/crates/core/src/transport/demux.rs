//! Several sessions sharing one link, told apart by their session id.

use std::collections::{HashMap, VecDeque};

use super::channel::Link;
use super::frame::{Frame, Header, HEADER_LEN, MAX_PAYLOAD};
use crate::error::{Error, Result};

pub struct SessionMux {
    link: Box<dyn Link>,
    tx_seq: HashMap<u32, u32>,
    rx_last: HashMap<u32, u32>,
    pending: HashMap<u32, VecDeque<Frame>>,
}

impl SessionMux {
    pub fn new(link: Box<dyn Link>) -> Self {
        SessionMux {
            link,
            tx_seq: HashMap::new(),
            rx_last: HashMap::new(),
            pending: HashMap::new(),
        }
    }

    pub fn send(&mut self, session: u32, tag: u8, payload: &[u8]) -> Result<()> {
        if payload.len() > MAX_PAYLOAD {
            return Err(Error::Contract("oversized payload".into()));
        }
        let seq = self.tx_seq.entry(session).or_insert(0);
        let h = Header {
            session_id: session,
            tag,
            seq: *seq,
            len: payload.len(),
        };
        *seq += 1;
        self.link.write_all(&h.encode())?;
        self.link.write_all(payload)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        Ok(self.link.flush()?)
    }

    /// Next frame for `session`, buffering frames of other sessions.
    pub fn recv(&mut self, session: u32) -> Result<Frame> {
        if let Some(f) = self.pending.get_mut(&session).and_then(|q| q.pop_front()) {
            return Ok(f);
        }
        loop {
            let f = self.read_frame()?;
            if f.session_id == session {
                return Ok(f);
            }
            self.pending.entry(f.session_id).or_default().push_back(f);
        }
    }

    fn read_frame(&mut self) -> Result<Frame> {
        let mut h = [0u8; HEADER_LEN];
        self.link.read_exact(&mut h)?;
        let h = Header::decode(&h);
        let mut payload = vec![0u8; h.len];
        self.link.read_exact(&mut payload)?;
        if let Some(&prev) = self.rx_last.get(&h.session_id) {
            if h.seq <= prev {
                return Err(Error::Desync(format!(
                    "session {}: sequence {} after {prev}",
                    h.session_id, h.seq
                )));
            }
        }
        self.rx_last.insert(h.session_id, h.seq);
        Ok(Frame {
            session_id: h.session_id,
            tag: h.tag,
            seq: h.seq,
            payload,
        })
    }
}
