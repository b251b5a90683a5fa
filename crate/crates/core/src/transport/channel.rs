//! Ordered, framed, accounted byte channels between two endpoints.

use std::collections::VecDeque;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::frame::{tags, Frame, Header, HEADER_LEN, MAX_PAYLOAD};
use crate::error::{Error, Result};

pub const PROTOCOL_VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    P1,
    P2,
    Dealer,
}

impl Role {
    fn code(self) -> u8 {
        match self {
            Role::P1 => 1,
            Role::P2 => 2,
            Role::Dealer => 3,
        }
    }

    fn from_code(c: u8) -> Option<Role> {
        match c {
            1 => Some(Role::P1),
            2 => Some(Role::P2),
            3 => Some(Role::Dealer),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransportKind {
    InProcess,
    Tcp,
}

/// Raw byte pipe under a [`Channel`].
pub trait Link: Send {
    fn write_all(&mut self, buf: &[u8]) -> io::Result<()>;
    fn flush(&mut self) -> io::Result<()>;
    fn read_exact(&mut self, buf: &mut [u8]) -> io::Result<()>;
}

/// In-memory duplex link; writes are buffered until `flush`.
pub struct InProcLink {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    out: Vec<u8>,
    inbuf: VecDeque<u8>,
    timeout: Option<Duration>,
}

impl InProcLink {
    pub fn pair() -> (InProcLink, InProcLink) {
        let (ta, rb) = channel();
        let (tb, ra) = channel();
        let mk = |tx, rx| InProcLink {
            tx,
            rx,
            out: Vec::new(),
            inbuf: VecDeque::new(),
            timeout: None,
        };
        (mk(ta, ra), mk(tb, rb))
    }

    pub fn set_timeout(&mut self, t: Option<Duration>) {
        self.timeout = t;
    }
}

impl Link for InProcLink {
    fn write_all(&mut self, buf: &[u8]) -> io::Result<()> {
        self.out.extend_from_slice(buf);
        Ok(())
    }

    fn flush(&mut self) -> io::Result<()> {
        if !self.out.is_empty() {
            let chunk = std::mem::take(&mut self.out);
            self.tx
                .send(chunk)
                .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer hung up"))?;
        }
        Ok(())
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> io::Result<()> {
        while self.inbuf.len() < buf.len() {
            let chunk = match self.timeout {
                None => self.rx.recv().map_err(|_| {
                    io::Error::new(io::ErrorKind::UnexpectedEof, "peer hung up")
                })?,
                Some(t) => self.rx.recv_timeout(t).map_err(|e| {
                    io::Error::new(io::ErrorKind::TimedOut, e.to_string())
                })?,
            };
            self.inbuf.extend(chunk);
        }
        for b in buf.iter_mut() {
            *b = self.inbuf.pop_front().unwrap();
        }
        Ok(())
    }
}

pub struct TcpLink {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpLink {
    pub fn new(stream: TcpStream) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        let r = stream.try_clone()?;
        Ok(TcpLink {
            reader: BufReader::with_capacity(1 << 16, r),
            writer: BufWriter::with_capacity(1 << 16, stream),
        })
    }

    /// Connects, retrying until `timeout` elapses (the peer may still be starting).
    pub fn connect(addr: impl ToSocketAddrs + Clone, timeout: Duration) -> io::Result<Self> {
        let deadline = std::time::Instant::now() + timeout;
        loop {
            match TcpStream::connect(addr.clone()) {
                Ok(s) => return TcpLink::new(s),
                Err(e) if std::time::Instant::now() >= deadline => return Err(e),
                Err(_) => std::thread::sleep(Duration::from_millis(50)),
            }
        }
    }

    pub fn accept(listener: &TcpListener) -> io::Result<Self> {
        let (s, _) = listener.accept()?;
        TcpLink::new(s)
    }

    pub fn set_read_timeout(&mut self, t: Option<Duration>) -> io::Result<()> {
        self.reader.get_ref().set_read_timeout(t)
    }
}

impl Link for TcpLink {
    fn write_all(&mut self, buf: &[u8]) -> io::Result<()> {
        self.writer.write_all(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.writer.flush()
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> io::Result<()> {
        self.reader.read_exact(buf)
    }
}

/// Physical traffic counters; independent of the model-bit ledger.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub bytes_sent: u64,
    pub bytes_recv: u64,
    pub frames_sent: u64,
    pub frames_recv: u64,
    pub messages_sent: u64,
    pub messages_recv: u64,
    /// Number of flights: incremented whenever the direction flips.
    pub rounds: u64,
}

impl ChannelStats {
    pub fn merge(&mut self, o: &ChannelStats) {
        self.bytes_sent += o.bytes_sent;
        self.bytes_recv += o.bytes_recv;
        self.frames_sent += o.frames_sent;
        self.frames_recv += o.frames_recv;
        self.messages_sent += o.messages_sent;
        self.messages_recv += o.messages_recv;
        self.rounds += o.rounds;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Send,
    Recv,
}

/// Session parameters agreed on at connection time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hello {
    pub version: u16,
    pub lambda: u32,
    pub role: Role,
    pub config_hash: [u8; 32],
}

impl Hello {
    pub fn new(role: Role, lambda: u32, config_hash: [u8; 32]) -> Self {
        Hello {
            version: PROTOCOL_VERSION,
            lambda,
            role,
            config_hash,
        }
    }

    fn encode(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(39);
        v.extend_from_slice(&self.version.to_le_bytes());
        v.extend_from_slice(&self.lambda.to_le_bytes());
        v.push(self.role.code());
        v.extend_from_slice(&self.config_hash);
        v
    }

    fn decode(b: &[u8]) -> Result<Hello> {
        if b.len() != 39 {
            return Err(Error::Handshake(format!("hello of {} bytes", b.len())));
        }
        Ok(Hello {
            version: u16::from_le_bytes([b[0], b[1]]),
            lambda: u32::from_le_bytes(b[2..6].try_into().unwrap()),
            role: Role::from_code(b[6])
                .ok_or_else(|| Error::Handshake(format!("unknown role {}", b[6])))?,
            config_hash: b[7..39].try_into().unwrap(),
        })
    }
}

/// One endpoint of a framed connection.
pub struct Channel {
    role: Role,
    peer: Role,
    session: u32,
    kind: TransportKind,
    link: Box<dyn Link>,
    tx_seq: u32,
    rx_seq: Option<u32>,
    stats: ChannelStats,
    last_dir: Option<Direction>,
    capture: Option<Vec<u8>>,
    broken: bool,
}

impl Channel {
    pub fn new(
        role: Role,
        peer: Role,
        session: u32,
        kind: TransportKind,
        link: Box<dyn Link>,
    ) -> Channel {
        Channel {
            role,
            peer,
            session,
            kind,
            link,
            tx_seq: 0,
            rx_seq: None,
            stats: ChannelStats::default(),
            last_dir: None,
            capture: None,
            broken: false,
        }
    }

    /// Two connected in-process endpoints.
    pub fn in_process_pair(session: u32, a: Role, b: Role) -> (Channel, Channel) {
        let (la, lb) = InProcLink::pair();
        (
            Channel::new(a, b, session, TransportKind::InProcess, Box::new(la)),
            Channel::new(b, a, session, TransportKind::InProcess, Box::new(lb)),
        )
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn peer(&self) -> Role {
        self.peer
    }

    pub fn session(&self) -> u32 {
        self.session
    }

    pub fn kind(&self) -> TransportKind {
        self.kind
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    /// Starts recording every byte this endpoint sends.
    pub fn enable_capture(&mut self) {
        self.capture = Some(Vec::new());
    }

    pub fn captured(&self) -> Option<&[u8]> {
        self.capture.as_deref()
    }

    /// Counts a new flight when the direction differs from the last one.
    pub fn round_barrier(&mut self, dir: Direction) {
        if self.last_dir != Some(dir) {
            self.stats.rounds += 1;
            self.last_dir = Some(dir);
        }
    }

    fn io_err(&mut self, e: io::Error) -> Error {
        self.broken = true;
        Error::Transport(format!("{:?} link to {:?}: {e}", self.kind, self.peer))
    }

    pub fn send_frame(&mut self, tag: u8, payload: &[u8]) -> Result<()> {
        if self.broken {
            return Err(Error::Transport("channel closed".into()));
        }
        if payload.len() > MAX_PAYLOAD {
            return Err(Error::Contract(format!(
                "payload of {} bytes exceeds the 24-bit length field",
                payload.len()
            )));
        }
        self.round_barrier(Direction::Send);
        let h = Header {
            session_id: self.session,
            tag,
            seq: self.tx_seq,
            len: payload.len(),
        }
        .encode();
        self.tx_seq = self
            .tx_seq
            .checked_add(1)
            .ok_or_else(|| Error::Transport("sequence number exhausted".into()))?;
        if let Some(c) = self.capture.as_mut() {
            c.extend_from_slice(&h);
            c.extend_from_slice(payload);
        }
        let r = self
            .link
            .write_all(&h)
            .and_then(|_| self.link.write_all(payload));
        r.map_err(|e| self.io_err(e))?;
        self.stats.frames_sent += 1;
        self.stats.bytes_sent += (HEADER_LEN + payload.len()) as u64;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.link.flush().map_err(|e| self.io_err(e))
    }

    pub fn recv_frame(&mut self) -> Result<Frame> {
        if self.broken {
            return Err(Error::Transport("channel closed".into()));
        }
        self.flush()?;
        self.round_barrier(Direction::Recv);
        let mut h = [0u8; HEADER_LEN];
        self.link.read_exact(&mut h).map_err(|e| self.io_err(e))?;
        let h = Header::decode(&h);
        let mut payload = vec![0u8; h.len];
        self.link
            .read_exact(&mut payload)
            .map_err(|e| self.io_err(e))?;
        self.stats.frames_recv += 1;
        self.stats.bytes_recv += (HEADER_LEN + h.len) as u64;
        if h.session_id != self.session {
            return Err(Error::Desync(format!(
                "frame for session {} on session {}",
                h.session_id, self.session
            )));
        }
        if let Some(prev) = self.rx_seq {
            if h.seq <= prev {
                return Err(Error::Desync(format!(
                    "sequence {} after {prev}",
                    h.seq
                )));
            }
        }
        self.rx_seq = Some(h.seq);
        Ok(Frame {
            session_id: h.session_id,
            tag: h.tag,
            seq: h.seq,
            payload,
        })
    }

    /// Sends a message of any size; it is split into maximal frames and
    /// terminated by a short (possibly empty) frame.
    pub fn send_msg(&mut self, tag: u8, payload: &[u8]) -> Result<()> {
        let mut rest = payload;
        loop {
            let n = rest.len().min(MAX_PAYLOAD);
            self.send_frame(tag, &rest[..n])?;
            rest = &rest[n..];
            if n < MAX_PAYLOAD {
                break;
            }
        }
        self.stats.messages_sent += 1;
        self.flush()
    }

    /// Receives one message and checks its tag.
    pub fn recv_msg(&mut self, tag: u8) -> Result<Vec<u8>> {
        let (t, m) = self.recv_any()?;
        if t != tag {
            return Err(Error::Desync(format!(
                "expected tag {tag:#04x} from {:?}, got {t:#04x}",
                self.peer
            )));
        }
        Ok(m)
    }

    /// Receives one message with whatever tag it carries.
    pub fn recv_any(&mut self) -> Result<(u8, Vec<u8>)> {
        let first = self.recv_frame()?;
        let tag = first.tag;
        let mut done = first.payload.len() < MAX_PAYLOAD;
        let mut out = first.payload;
        while !done {
            let f = self.recv_frame()?;
            if f.tag != tag {
                return Err(Error::Desync("tag changed inside a message".into()));
            }
            done = f.payload.len() < MAX_PAYLOAD;
            out.extend_from_slice(&f.payload);
        }
        self.stats.messages_recv += 1;
        Ok((tag, out))
    }

    /// Exchanges [`Hello`]s and rejects any disagreement.
    pub fn handshake(&mut self, local: &Hello) -> Result<Hello> {
        if local.role != self.role {
            return Err(Error::Config("hello role does not match the channel".into()));
        }
        self.send_msg(tags::HELLO, &local.encode())?;
        let theirs = Hello::decode(&self.recv_msg(tags::HELLO)?)?;
        if theirs.version != local.version {
            return Err(Error::Handshake(format!(
                "protocol version {} vs {}",
                local.version, theirs.version
            )));
        }
        if theirs.lambda != local.lambda {
            return Err(Error::Handshake(format!(
                "security parameter {} vs {}",
                local.lambda, theirs.lambda
            )));
        }
        if theirs.role != self.peer {
            return Err(Error::Handshake(format!(
                "expected {:?}, peer announced {:?}",
                self.peer, theirs.role
            )));
        }
        if theirs.config_hash != local.config_hash {
            return Err(Error::Handshake("configuration hash mismatch".into()));
        }
        Ok(theirs)
    }

    /// Announces the end of the session.
    pub fn bye(&mut self) -> Result<()> {
        self.send_msg(tags::BYE, &[])
    }
}

impl std::fmt::Debug for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Channel")
            .field("role", &self.role)
            .field("peer", &self.peer)
            .field("session", &self.session)
            .field("kind", &self.kind)
            .field("stats", &self.stats)
            .finish()
    }
}

/// Builds a TCP channel and runs the handshake.
pub fn open_tcp_session(
    link: TcpLink,
    session: u32,
    hello: &Hello,
    peer: Role,
) -> Result<Channel> {
    let mut ch = Channel::new(hello.role, peer, session, TransportKind::Tcp, Box::new(link));
    ch.handshake(hello)?;
    Ok(ch)
}

/// Builds a connected in-process pair and runs the handshake on both ends.
pub fn open_in_process_session(
    session: u32,
    a: &Hello,
    b: &Hello,
) -> Result<(Channel, Channel)> {
    let (mut ca, mut cb) = Channel::in_process_pair(session, a.role, b.role);
    // in-process links buffer without bound, so both sides can send first
    ca.send_msg(tags::HELLO, &a.encode())?;
    cb.send_msg(tags::HELLO, &b.encode())?;
    let check = |ch: &mut Channel, local: &Hello| -> Result<()> {
        let theirs = Hello::decode(&ch.recv_msg(tags::HELLO)?)?;
        if theirs.version != local.version {
            return Err(Error::Handshake(format!(
                "protocol version {} vs {}",
                local.version, theirs.version
            )));
        }
        if theirs.lambda != local.lambda || theirs.config_hash != local.config_hash {
            return Err(Error::Handshake("parameter mismatch".into()));
        }
        Ok(())
    };
    check(&mut ca, a)?;
    check(&mut cb, b)?;
    Ok((ca, cb))
}
