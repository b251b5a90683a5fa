//! The three roles as separate processes over TCP.
//!
//! Ports, relative to `--port`: the dealer accepts P1 on `port` and P2 on
//! `port + 1`; P2 accepts P1 on `port + 2`. Every link starts with a
//! handshake on protocol version, λ and the configuration hash.

use std::net::TcpListener;
use std::time::{Duration, Instant};

use nlact_core::blocks::wire::{put_u64s, Reader};
use nlact_core::blocks::{decode_inputs, Dealer, Party};
use nlact_core::protocols::{run_protocol, ProtocolParams};
use nlact_core::sharing::{ArithShares, PartyId};
use nlact_core::transport::{open_tcp_session, tags, Channel, Hello, Role, TcpLink};
use nlact_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::report::Row;
use crate::sweep::{make_row, BatchRun, Domain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PartyRole {
    P1,
    P2,
    Dealer,
}

#[derive(Clone, Copy, Debug)]
pub struct PartyOptions {
    pub role: PartyRole,
    /// Agree to open the output shares to the other party.
    pub reveal: bool,
    pub connect_timeout: Duration,
    pub io_timeout: Duration,
}

impl PartyOptions {
    pub fn new(role: PartyRole) -> Self {
        PartyOptions {
            role,
            reveal: false,
            connect_timeout: Duration::from_secs(30),
            io_timeout: Duration::from_secs(300),
        }
    }
}

/// What one process ends with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyOutput {
    pub role: PartyRole,
    /// This party's output shares (empty for the dealer).
    pub shares: Vec<u64>,
    /// Reconstructed outputs, present only when both parties revealed.
    pub outputs: Option<Vec<u64>>,
    pub dealer_requests: Option<u64>,
}

/// Instances are drawn from the seed exactly as in `bench`, so an
/// in-process run with the same configuration is directly comparable.
pub fn inputs(cfg: &RunConfig, p: &ProtocolParams) -> Vec<u64> {
    Domain::of(p).sample(cfg.batch, cfg.seed)
}

fn hello(cfg: &RunConfig, p: &ProtocolParams, role: Role) -> Hello {
    Hello::new(role, cfg.blocks().cost.lambda as u32, cfg.hash_for(p))
}

fn listen(cfg: &RunConfig, offset: u16) -> Result<TcpListener> {
    let port = cfg
        .port
        .checked_add(offset)
        .ok_or_else(|| crate::error::CliError::Config("port out of range".into()))?;
    Ok(TcpListener::bind((cfg.host.as_str(), port)).map_err(transport)?)
}

fn accept(l: &TcpListener, io: Duration) -> Result<TcpLink> {
    let mut link = TcpLink::accept(l).map_err(transport)?;
    link.set_read_timeout(Some(io)).map_err(transport)?;
    Ok(link)
}

fn connect(cfg: &RunConfig, offset: u16, opts: &PartyOptions) -> Result<TcpLink> {
    let addr = (cfg.host.clone(), cfg.port + offset);
    let mut link = TcpLink::connect(addr, opts.connect_timeout).map_err(transport)?;
    link.set_read_timeout(Some(opts.io_timeout)).map_err(transport)?;
    Ok(link)
}

fn transport(e: std::io::Error) -> Error {
    Error::Transport(e.to_string())
}

/// Runs one role to completion. Parties return a row (with precision only
/// when outputs were revealed) and their output.
pub fn run(cfg: &RunConfig, p: &ProtocolParams, opts: &PartyOptions) -> Result<(Option<Row>, PartyOutput)> {
    cfg.validate()?;
    let xs = inputs(cfg, p);
    match opts.role {
        PartyRole::Dealer => Ok((None, run_dealer(cfg, p, opts, &xs)?)),
        PartyRole::P1 | PartyRole::P2 => {
            let (run, out) = run_compute(cfg, p, opts)?;
            let mut row = make_row(cfg, p, &xs, &run, Domain::of(p).len(), false);
            if out.outputs.is_none() {
                row.max_ulp = None;
                row.mean_ulp = None;
                row.argmax_input = None;
                row.histogram.clear();
            }
            Ok((Some(row), out))
        }
    }
}

/// All three roles as threads in this process over loopback TCP, with both
/// parties revealing: the TCP counterpart of an in-process batch.
pub fn loopback(cfg: &RunConfig, p: &ProtocolParams, xs: &[u64]) -> Result<BatchRun> {
    let opts = |role| PartyOptions {
        reveal: true,
        ..PartyOptions::new(role)
    };
    std::thread::scope(|sc| {
        let dealer = sc.spawn(|| run_dealer(cfg, p, &opts(PartyRole::Dealer), xs));
        let p2 = sc.spawn(|| run_compute(cfg, p, &opts(PartyRole::P2)));
        let p1 = run_compute(cfg, p, &opts(PartyRole::P1));
        let p2 = p2.join().expect("P2 thread panicked");
        let dealer = dealer.join().expect("dealer thread panicked");
        let (run, _) = p1?;
        p2?;
        dealer?;
        Ok(run)
    })
}

fn run_dealer(cfg: &RunConfig, p: &ProtocolParams, opts: &PartyOptions, xs: &[u64]) -> Result<PartyOutput> {
    let l1 = listen(cfg, 0)?;
    let l2 = listen(cfg, 1)?;
    let c1 = open_tcp_session(accept(&l1, opts.io_timeout)?, 0, &hello(cfg, p, Role::Dealer), Role::P1)?;
    let c2 = open_tcp_session(accept(&l2, opts.io_timeout)?, 0, &hello(cfg, p, Role::Dealer), Role::P2)?;
    let mut dealer = Dealer::new(c1, c2, cfg.seed);
    dealer.deal_inputs(xs, p.l)?;
    let summary = dealer.serve()?;
    Ok(PartyOutput {
        role: PartyRole::Dealer,
        shares: Vec::new(),
        outputs: None,
        dealer_requests: Some(summary.requests),
    })
}

fn run_compute(cfg: &RunConfig, p: &ProtocolParams, opts: &PartyOptions) -> Result<(BatchRun, PartyOutput)> {
    let start = Instant::now();
    let (id, role) = match opts.role {
        PartyRole::P1 => (PartyId::P1, Role::P1),
        _ => (PartyId::P2, Role::P2),
    };
    let me = hello(cfg, p, role);
    let (dealer, peer): (Channel, Channel) = if id.is_p1() {
        let d = open_tcp_session(connect(cfg, 0, opts)?, 0, &me, Role::Dealer)?;
        let q = open_tcp_session(connect(cfg, 2, opts)?, 0, &me, Role::P2)?;
        (d, q)
    } else {
        let listener = listen(cfg, 2)?;
        let d = open_tcp_session(connect(cfg, 1, opts)?, 0, &me, Role::Dealer)?;
        let q = open_tcp_session(accept(&listener, opts.io_timeout)?, 0, &me, Role::P1)?;
        (d, q)
    };
    let mut dealer = dealer;
    let (ring, raw) = decode_inputs(&dealer.recv_msg(tags::INPUT)?)?;
    let mut party = Party::new(id, dealer, peer, cfg.blocks());
    let x = ArithShares::new(ring, id, raw)?;
    let y = run_protocol(&mut party, &x, p)?;
    let outputs = reveal(&mut party, &y, opts.reveal)?;
    let outcome = party.finish()?;

    let run = BatchRun {
        outputs: outputs.clone().unwrap_or_default(),
        ledger: outcome.ledger,
        peer: outcome.peer,
        dealer_link: outcome.dealer,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((
        run,
        PartyOutput {
            role: opts.role,
            shares: y.raw,
            outputs,
            dealer_requests: None,
        },
    ))
}

/// Each side states whether it agrees to open; shares are exchanged only
/// when both do.
fn reveal(p: &mut Party, y: &ArithShares, mine: bool) -> Result<Option<Vec<u64>>> {
    let ch = p.peer_channel();
    ch.send_msg(tags::REVEAL, &[mine as u8])?;
    let theirs = ch.recv_msg(tags::REVEAL)?;
    if theirs.len() != 1 {
        return Err(Error::Desync("malformed reveal flag".into()).into());
    }
    if !(mine && theirs[0] == 1) {
        return Ok(None);
    }
    let mut msg = Vec::new();
    put_u64s(&mut msg, &y.raw);
    ch.send_msg(tags::REVEAL, &msg)?;
    let other = ch.recv_msg(tags::REVEAL)?;
    let mut r = Reader::new(&other);
    let v = r.u64s(y.len())?;
    r.finish()?;
    let m = y.mask();
    Ok(Some(
        y.raw.iter().zip(&v).map(|(a, b)| a.wrapping_add(*b) & m).collect(),
    ))
}
