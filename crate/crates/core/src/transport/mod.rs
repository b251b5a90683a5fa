//! Framed two-party (plus dealer) channels with traffic accounting.

pub mod channel;
pub mod demux;
pub mod frame;

pub use channel::{
    open_in_process_session, open_tcp_session, Channel, ChannelStats, Direction, Hello,
    InProcLink, Link, Role, TcpLink, TransportKind, PROTOCOL_VERSION,
};
pub use demux::SessionMux;
pub use frame::{tags, Frame, HEADER_LEN, MAX_PAYLOAD};
