//! Runs a dealer and two parties as threads over in-process channels.

use std::thread;

use crate::blocks::{decode_inputs, BlockConfig, Dealer, DealerSummary, Party, PartyOutcome};
use crate::error::{Error, Result};
use crate::sharing::{ArithShares, PartyId};
use crate::transport::{tags, Channel, Role};

#[derive(Clone, Copy, Debug, Default)]
pub struct SessionSpec {
    pub blocks: BlockConfig,
    pub seed: u64,
    pub session_id: u32,
    /// Record every byte P1 sends (to the dealer, then to P2).
    pub capture: bool,
}

#[derive(Debug)]
pub struct SessionRun<T> {
    pub p1: T,
    pub p2: T,
    pub outcome_p1: PartyOutcome,
    pub outcome_p2: PartyOutcome,
    pub dealer: DealerSummary,
    pub transcript: Option<Vec<u8>>,
}

/// Deals `inputs` (ring `ring`) to both parties and runs `f` on each side.
pub fn run_in_process<T, F>(spec: &SessionSpec, ring: u32, inputs: &[u64], f: F) -> Result<SessionRun<T>>
where
    T: Send,
    F: Fn(&mut Party, &ArithShares) -> Result<T> + Sync,
{
    run_inner(spec, ring, Source::Dealt(inputs), f)
}

/// Like [`run_in_process`] with the input split fixed by the caller:
/// P1 starts from `shares1`, P2 from `shares2`.
pub fn run_with_shares<T, F>(
    spec: &SessionSpec,
    ring: u32,
    shares1: &[u64],
    shares2: &[u64],
    f: F,
) -> Result<SessionRun<T>>
where
    T: Send,
    F: Fn(&mut Party, &ArithShares) -> Result<T> + Sync,
{
    if shares1.len() != shares2.len() {
        return Err(Error::Contract("share vectors differ in length".into()));
    }
    run_inner(spec, ring, Source::Given(shares1, shares2), f)
}

#[derive(Clone, Copy)]
enum Source<'a> {
    Dealt(&'a [u64]),
    Given(&'a [u64], &'a [u64]),
}

fn run_inner<T, F>(spec: &SessionSpec, ring: u32, source: Source<'_>, f: F) -> Result<SessionRun<T>>
where
    T: Send,
    F: Fn(&mut Party, &ArithShares) -> Result<T> + Sync,
{
    let sid = spec.session_id;
    let (d1, p1_d) = Channel::in_process_pair(sid, Role::Dealer, Role::P1);
    let (d2, p2_d) = Channel::in_process_pair(sid, Role::Dealer, Role::P2);
    let (mut p1_p, p2_p) = Channel::in_process_pair(sid, Role::P1, Role::P2);
    let mut p1_d = p1_d;
    if spec.capture {
        p1_d.enable_capture();
        p1_p.enable_capture();
    }

    let run_party = |id: PartyId, mut dealer: Channel, peer: Channel| -> Result<(T, PartyOutcome, Option<Vec<u8>>)> {
        let (k, raw) = match source {
            Source::Dealt(_) => decode_inputs(&dealer.recv_msg(tags::INPUT)?)?,
            Source::Given(a, b) => (ring, if id.is_p1() { a.to_vec() } else { b.to_vec() }),
        };
        let mut party = Party::new(id, dealer, peer, spec.blocks);
        let x = ArithShares::new(k, id, raw)?;
        let out = f(&mut party, &x)?;
        let transcript = if spec.capture {
            let mut t = party.dealer_channel().captured().unwrap_or_default().to_vec();
            t.extend_from_slice(party.peer_channel().captured().unwrap_or_default());
            Some(t)
        } else {
            None
        };
        Ok((out, party.finish()?, transcript))
    };

    let (r1, r2, rd) = thread::scope(|sc| {
        let h1 = sc.spawn(|| run_party(PartyId::P1, p1_d, p1_p));
        let h2 = sc.spawn(|| run_party(PartyId::P2, p2_d, p2_p));
        let hd = sc.spawn(|| -> Result<DealerSummary> {
            let mut dealer = Dealer::new(d1, d2, spec.seed);
            if let Source::Dealt(inputs) = source {
                dealer.deal_inputs(inputs, ring)?;
            }
            dealer.serve()
        });
        (join(h1), join(h2), join(hd))
    });

    match (r1, r2, rd) {
        (Ok((p1, o1, t)), Ok((p2, o2, _)), Ok(d)) => Ok(SessionRun {
            p1,
            p2,
            outcome_p1: o1,
            outcome_p2: o2,
            dealer: d,
            transcript: t,
        }),
        (a, b, c) => Err(root_cause(vec![
            a.err(),
            b.err(),
            c.err(),
        ])),
    }
}

fn join<T>(h: thread::ScopedJoinHandle<'_, Result<T>>) -> Result<T> {
    h.join()
        .unwrap_or_else(|_| Err(Error::Transport("session thread panicked".into())))
}

/// When one side fails the others usually see a closed channel; report the
/// error that started it.
fn root_cause(errs: Vec<Option<Error>>) -> Error {
    let errs: Vec<Error> = errs.into_iter().flatten().collect();
    let mut fallback = None;
    for e in errs {
        if !e.is_transport() {
            return e;
        }
        fallback.get_or_insert(e);
    }
    fallback.unwrap_or_else(|| Error::Transport("session failed".into()))
}
